//! Shared domain types and file formats.

mod camera;
mod ftc;
mod image;

pub use camera::{CameraPose, IntrinsicsSpec};
pub use ftc::{load_feature_set, save_feature_set, FeatureSet};
pub use image::{image_dimensions, load_image, save_image, ColorSpace, ImageBuffer};
