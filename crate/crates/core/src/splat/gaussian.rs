use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::num::Real;

/// Number of SH coefficients per channel for degree `l`.
pub const fn sh_coeff_count(l: usize) -> usize {
    (l + 1) * (l + 1)
}

/// Highest SH degree the evaluator supports.
pub const MAX_SH_DEGREE: usize = 3;

/// One anisotropic 3D Gaussian in the canonical frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPrimitive<T: Real> {
    pub center: Vector3<T>,
    pub rotation: UnitQuaternion<T>,
    /// Per-axis standard deviation.
    pub scale: Vector3<T>,
    pub opacity: T,
    /// SH coefficients, coefficient-major, one RGB triple per basis function.
    pub sh: Vec<[T; 3]>,
    pub source_view: u32,
}

impl<T: Real> GaussianPrimitive<T> {
    /// Degree-0 primitive whose view-independent color is `rgb`.
    pub fn with_color(center: Vector3<T>, scale: Vector3<T>, opacity: T, rgb: [T; 3]) -> Self {
        let sh0 = rgb.map(|c| (c - T::lit(0.5)) / T::lit(super::sh::SH_C0));
        Self {
            center,
            rotation: UnitQuaternion::identity(),
            scale,
            opacity,
            sh: vec![sh0],
            source_view: 0,
        }
    }

    /// `q = [w, x, y, z]`, normalized here.
    pub fn set_rotation(&mut self, q: [T; 4]) -> Result<()> {
        let quat = Quaternion::new(q[0], q[1], q[2], q[3]);
        if !(quat.norm() > T::zero()) {
            return Err(Error::Invalid("zero rotation quaternion".into()));
        }
        self.rotation = UnitQuaternion::new_normalize(quat);
        Ok(())
    }

    /// `[w, x, y, z]` of the unit rotation.
    pub fn rotation_wxyz(&self) -> [T; 4] {
        let q = self.rotation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    /// `R diag(s^2) R^T`.
    pub fn covariance(&self) -> Matrix3<T> {
        let r = self.rotation.to_rotation_matrix().into_inner();
        let s2 = Matrix3::from_diagonal(&self.scale.component_mul(&self.scale));
        r * s2 * r.transpose()
    }

    pub fn validate(&self, sh_degree: usize) -> Result<()> {
        if self.center.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gaussian center".into()));
        }
        if self.scale.iter().any(|s| !(*s > T::zero() && s.is_finite())) {
            return Err(Error::Invalid("gaussian scales must be positive".into()));
        }
        if !(self.opacity >= T::zero() && self.opacity <= T::one()) {
            return Err(Error::Invalid(format!("opacity {} outside [0, 1]", self.opacity)));
        }
        if (self.rotation.quaternion().norm() - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::Invalid("rotation not normalized".into()));
        }
        if self.sh.len() != sh_coeff_count(sh_degree) {
            return Err(Error::Invalid(format!(
                "{} SH coefficients per channel, degree {sh_degree} needs {}",
                self.sh.len(),
                sh_coeff_count(sh_degree)
            )));
        }
        if self.sh.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("SH coefficient".into()));
        }
        Ok(())
    }
}

/// Gaussians sharing one SH degree.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianScene<T: Real> {
    pub primitives: Vec<GaussianPrimitive<T>>,
    pub sh_degree: usize,
}

impl<T: Real> GaussianScene<T> {
    pub fn new(primitives: Vec<GaussianPrimitive<T>>, sh_degree: usize) -> Result<Self> {
        let scene = Self { primitives, sh_degree };
        scene.validate()?;
        Ok(scene)
    }

    pub fn empty(sh_degree: usize) -> Self {
        Self { primitives: Vec::new(), sh_degree }
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sh_degree > MAX_SH_DEGREE {
            return Err(Error::Invalid(format!("SH degree {} above {MAX_SH_DEGREE}", self.sh_degree)));
        }
        for (i, g) in self.primitives.iter().enumerate() {
            g.validate(self.sh_degree).map_err(|e| Error::Invalid(format!("primitive {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn centers(&self) -> Vec<Vector3<T>> {
        self.primitives.iter().map(|g| g.center).collect()
    }

    /// Sets every primitive's source view tag.
    pub fn tag_view(mut self, view: u32) -> Self {
        for g in &mut self.primitives {
            g.source_view = view;
        }
        self
    }
}
