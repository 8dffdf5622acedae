//! Dense optical flow, the `.flo` interchange format, and region sampling.

mod farneback;
mod field;
mod frame;
mod histogram;

pub(crate) use farneback::gaussian_blur;
pub use farneback::{compute_flow, FlowParams};
pub use field::{FlowField, FLO_MAGIC};
pub use frame::{Frame, MIN_FRAME_SIDE};
pub use histogram::{
    direction_bin, direction_deg, sample_region, MotionSample, RegionHistogram, SquareRegion,
};
