//! Canonical-frame Gaussian scenes: EWA projection, SH shading, a
//! deterministic tiled CPU rasterizer, per-view fusion and PLY interop.

mod fuse;
mod gaussian;
mod ply;
mod project;
mod raster;
mod sh;

pub use fuse::{drop_decision, drop_view, fuse_scenes};
pub use gaussian::{sh_coeff_count, GaussianPrimitive, GaussianScene, MAX_SH_DEGREE};
pub use ply::{encode_ply, load_ply, parse_ply, save_ply};
pub use project::{project_gaussian, RenderConfig, Splat2d};
pub use raster::{prepare_splats, rasterize, ShadedSplat, MIN_ALPHA};
pub use sh::{evaluate_sh, SH_C0};

/// Default SH degree for newly built scenes.
pub const DEFAULT_SH_DEGREE: usize = 1;
