//! Real spherical harmonics up to degree 3, with the usual splatting
//! convention `color = 0.5 + sum_k Y_k(d) c_k`.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::splat::gaussian::{sh_coeff_count, MAX_SH_DEGREE};

pub const SH_C0: f64 = 0.28209479177387814;
const SH_C1: f64 = 0.4886025119029199;
const SH_C2: [f64; 5] = [
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
];
const SH_C3: [f64; 7] = [
    -0.5900435899266435,
    2.890611442640554,
    -0.4570457994644658,
    0.3731763325901154,
    -0.4570457994644658,
    1.445305721320277,
    -0.5900435899266435,
];

/// Evaluates the SH color for a unit viewing direction (unclamped).
pub fn evaluate_sh<T: Real>(coeffs: &[[T; 3]], dir: &Vector3<T>, degree: usize) -> Result<[T; 3]> {
    if degree > MAX_SH_DEGREE || coeffs.len() != sh_coeff_count(degree) {
        return Err(Error::Invalid(format!(
            "{} SH coefficients for degree {degree}",
            coeffs.len()
        )));
    }
    if (dir.norm() - T::one()).abs() > T::lit(1e-6) {
        return Err(Error::Invalid("view direction is not unit length".into()));
    }
    let mut basis = [T::zero(); 16];
    basis[0] = T::lit(SH_C0);
    let (x, y, z) = (dir.x, dir.y, dir.z);
    if degree >= 1 {
        let c1 = T::lit(SH_C1);
        basis[1] = -c1 * y;
        basis[2] = c1 * z;
        basis[3] = -c1 * x;
    }
    if degree >= 2 {
        let c = SH_C2.map(T::lit);
        let (xx, yy, zz) = (x * x, y * y, z * z);
        basis[4] = c[0] * x * y;
        basis[5] = c[1] * y * z;
        basis[6] = c[2] * (T::lit(2.0) * zz - xx - yy);
        basis[7] = c[3] * x * z;
        basis[8] = c[4] * (xx - yy);
    }
    if degree >= 3 {
        let c = SH_C3.map(T::lit);
        let (xx, yy, zz) = (x * x, y * y, z * z);
        let (two, three, four) = (T::lit(2.0), T::lit(3.0), T::lit(4.0));
        basis[9] = c[0] * y * (three * xx - yy);
        basis[10] = c[1] * x * y * z;
        basis[11] = c[2] * y * (four * zz - xx - yy);
        basis[12] = c[3] * z * (two * zz - three * xx - three * yy);
        basis[13] = c[4] * x * (four * zz - xx - yy);
        basis[14] = c[5] * z * (xx - yy);
        basis[15] = c[6] * x * (xx - three * yy);
    }
    let half = T::lit(0.5);
    let mut rgb = [half; 3];
    for (b, c) in basis.iter().zip(coeffs) {
        for ch in 0..3 {
            rgb[ch] += *b * c[ch];
        }
    }
    Ok(rgb)
}
