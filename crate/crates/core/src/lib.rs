//! Fuzzy-rule vehicle recognition from image-segment descriptors.
//!
//! An image segment is reduced to a seven-number descriptor (area, mass
//! center, bounding box). Per-class reference segments come from
//! projecting a 3-D face model through a calibrated camera; fuzzifying
//! their parameters into trapezoidal sets yields shape and placement
//! rules. Classification runs in three stages: shape matching of every
//! input segment against every rule, placement consistency of candidate
//! anchors, and per-class membership with maximal-membership
//! defuzzification. A model-guided merging pass repairs oversegmented
//! input first, and a seeded synthetic benchmark measures end-to-end
//! accuracy.

pub mod bench;
pub mod bundled;
pub mod config;
pub mod descriptors;
pub mod fuzzy;
pub mod inference;
pub mod model;
pub mod overlay;
pub mod pipeline;
pub mod preprocess;
pub mod rulebase;

pub use config::Config;
pub use descriptors::{
    read_scene, write_scene, DescriptorRecord, FrameOrientation, SegmentDescriptor,
};
pub use fuzzy::Trapezoid;
pub use inference::{classify, ClassificationResult, InferenceConfig, Winner};
pub use model::{project_model, CameraPose, ClassModel, VehicleClass, VehicleModel3D};
pub use pipeline::classify_scene;
pub use preprocess::{extract_segments, merge_to_model, LabelMask};
pub use rulebase::{induct, RuleBase, WidthConfig};
