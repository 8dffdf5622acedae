//! The local motion pattern (LMP) filter.
//!
//! A region's flow is split into overlapping magnitude layers
//! (`[n, cap]` for `n = 0, step, .., cap`). Per layer the per-bin magnitude
//! mass is normalized and weak directions are dropped. Counting, per bin,
//! the layers that still carry motion from each third of the magnitude
//! range and weighting the three counts gives the directional and magnified
//! histogram ([`Dmh`]). Bins above a threshold form main directions;
//! directions that are too wide or too jagged are rejected, and what is left
//! is the filtered histogram ([`Fdmh`]). A pattern then grows ring by ring
//! from a central region, accepting neighbours whose filtered histogram
//! resembles their parent's (Bhattacharyya coefficient), and sums the
//! accepted histograms.

mod config;
mod layers;
mod propagate;
mod runs;
mod similarity;

pub use config::{LmpConfig, PRESET_NAMES};
pub use layers::{
    build_layers, cumulative_triple, magnitude_band, weighted_dmh, Dmh, Layer, LayerBank,
    LayerTriple, LAYER_EPS,
};
pub use propagate::{
    analyze_region, max_regions, propagate, ring_offsets, AcceptedRegion, LmpDistribution,
    SIMILARITY_EPS,
};
pub use runs::{coherent_runs, filter_dmh, runs_above, Fdmh, Run};
pub use similarity::{bhattacharyya, bhattacharyya_slices};
