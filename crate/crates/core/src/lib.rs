//! Local motion pattern (LMP) filtering of dense optical flow, and a facial
//! expression recognition pipeline built on it.
//!
//! The pipeline runs frame pairs through dense flow ([`flow`]), keeps only
//! motion that is coherent in magnitude and direction and that spreads into
//! neighbouring regions ([`lmp`]), accumulates it inside 25 landmark-anchored
//! facial regions ([`face`], [`features`]) and classifies the resulting
//! vectors with a kernel SVM ([`classify`]). [`synth`] generates inputs with
//! known ground truth.

pub mod classify;
pub mod cli;
pub mod error;
pub mod face;
pub mod features;
pub mod flow;
pub mod lmp;
pub mod synth;

pub use error::{Error, Result};
