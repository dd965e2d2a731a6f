use nalgebra::{Matrix2, Matrix2x3, Vector2};

use crate::error::{Error, Result};
use crate::io::{CameraPose, IntrinsicsSpec};
use crate::num::Real;
use crate::splat::gaussian::GaussianPrimitive;

/// Rendering conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig<T> {
    pub background: [T; 3],
    /// Upper bound on any single splat's alpha.
    pub alpha_clamp: T,
    /// Compositing stops once transmittance drops below this.
    pub transmittance_floor: T,
    /// Isotropic screen-space low-pass added to every 2D covariance (px²).
    pub dilation: T,
    pub tile_size: usize,
    pub z_near: T,
}

impl<T: Real> Default for RenderConfig<T> {
    fn default() -> Self {
        Self {
            background: [T::zero(); 3],
            alpha_clamp: T::lit(0.99),
            transmittance_floor: T::lit(1e-4),
            dilation: T::lit(0.3),
            tile_size: 16,
            z_near: T::lit(0.01),
        }
    }
}

impl<T: Real> RenderConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_clamp > T::zero() && self.alpha_clamp < T::one()) {
            return Err(Error::Invalid("alpha_clamp must lie in (0, 1)".into()));
        }
        if !(self.transmittance_floor > T::zero()) {
            return Err(Error::Invalid("transmittance_floor must be positive".into()));
        }
        if !(self.dilation >= T::zero()) {
            return Err(Error::Invalid("dilation must be non-negative".into()));
        }
        if self.tile_size == 0 {
            return Err(Error::Invalid("tile_size must be positive".into()));
        }
        if self.background.iter().any(|c| !(*c >= T::zero() && *c <= T::one())) {
            return Err(Error::Invalid("background outside [0, 1]".into()));
        }
        Ok(())
    }
}

/// A Gaussian projected to the image plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splat2d<T: Real> {
    /// Pixel coordinates; pixel `(i, j)` covers `[i, i+1) x [j, j+1)`.
    pub mean: Vector2<T>,
    pub cov2d: Matrix2<T>,
    /// Camera-space z.
    pub depth: T,
}

impl<T: Real> Splat2d<T> {
    /// Inverse covariance, or `None` when the determinant is at most 1e-12.
    pub fn conic(&self) -> Option<Matrix2<T>> {
        let det = self.cov2d.determinant();
        if !(det > T::lit(1e-12)) {
            return None;
        }
        let c = &self.cov2d;
        Some(Matrix2::new(c[(1, 1)], -c[(0, 1)], -c[(1, 0)], c[(0, 0)]) / det)
    }
}

/// EWA projection: `J W Σ Wᵀ Jᵀ + dilation I`. `None` when culled by the near plane.
pub fn project_gaussian<T: Real>(
    g: &GaussianPrimitive<T>,
    pose: &CameraPose<T>,
    k: &IntrinsicsSpec<T>,
    cfg: &RenderConfig<T>,
) -> Option<Splat2d<T>> {
    let t = pose.to_camera(&g.center);
    if t.z <= cfg.z_near {
        return None;
    }
    let inv_z = T::one() / t.z;
    let mean = Vector2::new(k.fx * t.x * inv_z + k.cx, k.fy * t.y * inv_z + k.cy);
    let jac = Matrix2x3::new(
        k.fx * inv_z,
        T::zero(),
        -k.fx * t.x * inv_z * inv_z,
        T::zero(),
        k.fy * inv_z,
        -k.fy * t.y * inv_z * inv_z,
    );
    let w = pose.rotation_matrix();
    let m = jac * w;
    let mut cov2d = m * g.covariance() * m.transpose();
    // exact symmetry keeps downstream eigen bounds honest
    let off = (cov2d[(0, 1)] + cov2d[(1, 0)]) * T::lit(0.5);
    cov2d[(0, 1)] = off;
    cov2d[(1, 0)] = off;
    cov2d[(0, 0)] += cfg.dilation;
    cov2d[(1, 1)] += cfg.dilation;
    Some(Splat2d { mean, cov2d, depth: t.z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn k() -> IntrinsicsSpec<f64> {
        IntrinsicsSpec::new(100.0, 100.0, 64.0, 64.0, 128, 128).unwrap()
    }

    fn gauss(center: Vector3<f64>, sigma: f64) -> GaussianPrimitive<f64> {
        GaussianPrimitive::with_color(center, Vector3::repeat(sigma), 1.0, [1.0, 0.0, 0.0])
    }

    #[test]
    fn on_axis_point_hits_principal_point() {
        let s = project_gaussian(&gauss(Vector3::new(0.0, 0.0, 1.0), 0.1), &CameraPose::identity(), &k(), &RenderConfig::default()).unwrap();
        assert_eq!(s.mean, Vector2::new(64.0, 64.0));
        assert_eq!(s.depth, 1.0);
    }

    #[test]
    fn behind_camera_is_culled() {
        let cfg = RenderConfig::default();
        assert!(project_gaussian(&gauss(Vector3::new(0.0, 0.0, -1.0), 0.1), &CameraPose::identity(), &k(), &cfg).is_none());
        assert!(project_gaussian(&gauss(Vector3::new(0.0, 0.0, 0.01), 0.1), &CameraPose::identity(), &k(), &cfg).is_none());
    }

    #[test]
    fn isotropic_on_axis_covariance() {
        let (sigma, z) = (0.05, 2.0);
        let cfg = RenderConfig::default();
        let s = project_gaussian(&gauss(Vector3::new(0.0, 0.0, z), sigma), &CameraPose::identity(), &k(), &cfg).unwrap();
        let expect = 100.0f64.powi(2) * sigma * sigma / (z * z) + 0.3;
        assert!((s.cov2d[(0, 0)] - expect).abs() < 1e-12);
        assert!((s.cov2d[(1, 1)] - expect).abs() < 1e-12);
        assert!(s.cov2d[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn off_axis_mean_and_translation() {
        let pose = CameraPose::new([1.0, 0.0, 0.0, 0.0], [0.5, 0.0, 1.0]).unwrap();
        let s = project_gaussian(&gauss(Vector3::new(0.5, -1.0, 3.0), 0.1), &pose, &k(), &RenderConfig::default()).unwrap();
        // camera point (1, -1, 4)
        assert!((s.mean.x - (100.0 * 0.25 + 64.0)).abs() < 1e-12);
        assert!((s.mean.y - (-100.0 * 0.25 + 64.0)).abs() < 1e-12);
        assert_eq!(s.depth, 4.0);
    }

    #[test]
    fn singular_covariance_has_no_conic() {
        let s = Splat2d { mean: Vector2::zeros(), cov2d: Matrix2::new(1.0f64, 1.0, 1.0, 1.0), depth: 1.0 };
        assert!(s.conic().is_none());
        let s = Splat2d { mean: Vector2::zeros(), cov2d: Matrix2::new(2.0f64, 0.0, 0.0, 0.5), depth: 1.0 };
        let c = s.conic().unwrap();
        assert!((c[(0, 0)] - 0.5).abs() < 1e-15 && (c[(1, 1)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(RenderConfig::<f64>::default().validate().is_ok());
        assert!(RenderConfig::<f64> { alpha_clamp: 1.0, ..Default::default() }.validate().is_err());
        assert!(RenderConfig::<f64> { transmittance_floor: 0.0, ..Default::default() }.validate().is_err());
        assert!(RenderConfig::<f64> { tile_size: 0, ..Default::default() }.validate().is_err());
    }
}
