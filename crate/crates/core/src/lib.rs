//! Non-neural machinery for feed-forward 3D scene editing: segmenter proposal
//! filtering and frame acceptance, cross-view consistent region recoloring,
//! a reference Gaussian splat rasterizer with scene fusion, the training loss
//! suite, and an editing benchmark harness.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root pick `f64`, with `*32` variants for single precision.

pub mod bench;
pub mod error;
pub mod io;
pub mod losses;
pub mod mask;
pub mod metrics;
pub mod num;
pub mod recolor;
pub mod rng;
pub mod splat;

pub use error::{parse_json, Error, Result};
pub use num::Real;

pub type Image = io::ImageBuffer<f64>;
pub type Image32 = io::ImageBuffer<f32>;
pub type Features = io::FeatureSet<f64>;
pub type Features32 = io::FeatureSet<f32>;
pub type Pose = io::CameraPose<f64>;
pub type Intrinsics = io::IntrinsicsSpec<f64>;
pub type Mask = mask::SoftMask<f64>;
pub type Params = recolor::RecolorParams<f64>;
pub type Gaussian = splat::GaussianPrimitive<f64>;
pub type Scene = splat::GaussianScene<f64>;
pub type Scene32 = splat::GaussianScene<f32>;
pub type Render = splat::RenderConfig<f64>;
