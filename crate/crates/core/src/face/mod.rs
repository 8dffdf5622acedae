//! Landmark geometry, the 25-region facial partition, eye alignment and
//! motion heat maps.

mod align;
mod geometry;
mod heatmap;
mod polygon;
mod roi;

pub use align::{align_by_eyes, warp_similarity, AlignedSequence, Similarity};
pub use geometry::{
    canonical_landmarks, derive_points, mean_point, parse_landmarks, FaceGeometry, Point,
    CANONICAL_FRAME, FACE_SIZE_PER_INTER_OCULAR, FOREHEAD_ANCHORS, LANDMARK_COUNT, LEFT_EYE,
    NOSE_BOTTOM, NOSE_TOP, RIGHT_EYE,
};
pub use heatmap::{
    block_mask, build_heat_map, build_heat_maps, sequence_mask, HeatMap, Sequence, HEATMAP_COLS,
    HEATMAP_ROWS,
};
pub use polygon::Polygon;
pub use roi::{build_rois, PointExpr, RoiPartition, RoiSpec, DEFAULT_ROI_SPEC, ROI_COUNT};
