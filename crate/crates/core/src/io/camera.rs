use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::num::Real;

/// Pinhole intrinsics in pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicsSpec<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
}

impl<T: Real> IntrinsicsSpec<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T, width: usize, height: usize) -> Result<Self> {
        if !(fx > T::zero() && fy > T::zero()) {
            return Err(Error::Invalid("focal lengths must be positive".into()));
        }
        let (w, h) = (T::lit(width as f64), T::lit(height as f64));
        if !(cx >= T::zero() && cx < w && cy >= T::zero() && cy < h) {
            return Err(Error::Invalid("principal point outside the image".into()));
        }
        Ok(Self { fx, fy, cx, cy, width, height })
    }

    /// Focal length equal to the image width, principal point at the center.
    pub fn centered(width: usize, height: usize) -> Self {
        let f = T::lit(width as f64);
        Self {
            fx: f,
            fy: f,
            cx: T::lit(width as f64 / 2.0),
            cy: T::lit(height as f64 / 2.0),
            width,
            height,
        }
    }
}

/// World-to-camera rigid transform: `x_cam = R * x_world + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose<T: Real> {
    rotation: UnitQuaternion<T>,
    translation: Vector3<T>,
}

impl<T: Real> CameraPose<T> {
    /// `q = [w, x, y, z]` must already be unit length within 1e-6.
    pub fn new(q: [T; 4], translation: [T; 3]) -> Result<Self> {
        let quat = Quaternion::new(q[0], q[1], q[2], q[3]);
        let norm = quat.norm();
        if (norm - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::Invalid(format!("pose quaternion norm {norm} is not 1")));
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("pose translation".into()));
        }
        Ok(Self {
            rotation: UnitQuaternion::new_normalize(quat),
            translation: Vector3::new(translation[0], translation[1], translation[2]),
        })
    }

    pub fn identity() -> Self {
        Self { rotation: UnitQuaternion::identity(), translation: Vector3::zeros() }
    }

    pub fn rotation_matrix(&self) -> Matrix3<T> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    pub fn rotation_wxyz(&self) -> [T; 4] {
        let q = self.rotation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn translation(&self) -> Vector3<T> {
        self.translation
    }

    pub fn to_camera(&self, p: &Vector3<T>) -> Vector3<T> {
        self.rotation * p + self.translation
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<T> {
        -(self.rotation.inverse() * self.translation)
    }
}
