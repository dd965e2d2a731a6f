//! Region-wise recoloring that stays consistent across views: one parameter
//! draw per region, a composite color transform, soft-mask renormalization and
//! soft blending.

mod blend;
mod params;
mod transform;

pub use blend::{blend_frame, plan_regions, recolor_sequence, renormalize_masks, RegionRecolorJob, DEFAULT_EPS};
pub use params::{sample_params, AugConfig, NormalSpec, Probability, RecolorParams, UniformRange, PERMUTATIONS};
pub use transform::{apply_transform, hsv_to_rgb, pca_offset, rgb_to_hsv};
