use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::io::ImageBuffer;
use crate::num::{luma, Real};
use crate::recolor::params::RecolorParams;

/// Applies the composite color transform to a whole frame.
///
/// Stages, in order: brightness, contrast around the mean luma, saturation
/// around per-pixel luma, HSV hue rotation, per-channel gamma, PCA lighting,
/// channel permutation, optional BT.601 grayscale. Each jitter stage clamps
/// to `[0, 1]` as it finishes and the final output is clamped. Stages whose
/// parameter is the identity are skipped. The PCA basis comes from the RGB
/// covariance of `img` as passed in.
pub fn apply_transform<T: Real>(img: &ImageBuffer<T>, p: &RecolorParams<T>) -> ImageBuffer<T> {
    let zero = T::zero();
    let one = T::one();
    let mut px: Vec<[T; 3]> = img.pixels().collect();
    let clamp = |v: T| v.clamp(zero, one);

    if p.brightness_factor != one {
        let b = p.brightness_factor;
        for c in px.iter_mut().flatten() {
            *c = clamp(*c * b);
        }
    }
    if p.contrast_factor != one {
        let mean = mean_luma(&px);
        let k = p.contrast_factor;
        for c in px.iter_mut().flatten() {
            *c = clamp((*c - mean) * k + mean);
        }
    }
    if p.saturation_factor != one {
        let s = p.saturation_factor;
        for rgb in &mut px {
            let y = luma(rgb[0], rgb[1], rgb[2]);
            for c in rgb.iter_mut() {
                *c = clamp(y + (*c - y) * s);
            }
        }
    }
    if p.hue_shift != zero {
        for rgb in &mut px {
            let [h, s, v] = rgb_to_hsv(*rgb);
            let h = (h + p.hue_shift).rem_euclid_one();
            *rgb = hsv_to_rgb([h, s, v]).map(clamp);
        }
    }
    if p.gamma != one {
        let g = p.gamma;
        for c in px.iter_mut().flatten() {
            *c = c.powf(g);
        }
    }
    if p.pca_alphas.iter().any(|a| *a != zero) {
        let offset = pca_offset(img, &p.pca_alphas);
        for rgb in &mut px {
            for (c, o) in rgb.iter_mut().zip(offset.iter()) {
                *c += *o;
            }
        }
    }
    if p.channel_perm != [0, 1, 2] {
        let perm = p.channel_perm;
        for rgb in &mut px {
            let src = *rgb;
            *rgb = [src[perm[0]], src[perm[1]], src[perm[2]]];
        }
    }
    if p.grayscale {
        for rgb in &mut px {
            let y = luma(rgb[0], rgb[1], rgb[2]);
            *rgb = [y; 3];
        }
    }
    let data = px.into_iter().flatten().collect();
    ImageBuffer::from_clamped(img.width(), img.height(), data)
}

trait RemOne {
    fn rem_euclid_one(self) -> Self;
}

impl<T: Real> RemOne for T {
    fn rem_euclid_one(self) -> Self {
        let r = self - self.floor();
        if r >= T::one() {
            T::zero()
        } else {
            r
        }
    }
}

fn mean_luma<T: Real>(px: &[[T; 3]]) -> T {
    if px.is_empty() {
        return T::zero();
    }
    let sum = px.iter().fold(T::zero(), |acc, c| acc + luma(c[0], c[1], c[2]));
    sum / T::lit(px.len() as f64)
}

/// `sum_i alpha_i * lambda_i * e_i` over the eigenpairs of the RGB covariance,
/// ordered by decreasing eigenvalue with each eigenvector's largest-magnitude
/// component made positive.
pub fn pca_offset<T: Real>(img: &ImageBuffer<T>, alphas: &[T; 3]) -> [T; 3] {
    let cov = rgb_covariance(img);
    let eig = SymmetricEigen::new(cov);
    let mut pairs: Vec<(T, Vector3<T>)> = (0..3)
        .map(|i| {
            let mut v: Vector3<T> = eig.eigenvectors.column(i).into_owned();
            let lead = (0..3).fold(0, |b, k| if v[k].abs() > v[b].abs() { k } else { b });
            if v[lead] < T::zero() {
                v = -v;
            }
            (eig.eigenvalues[i].max(T::zero()), v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut off = Vector3::zeros();
    for ((lambda, v), a) in pairs.iter().zip(alphas) {
        off += v * (*a * *lambda);
    }
    [off[0], off[1], off[2]]
}

fn rgb_covariance<T: Real>(img: &ImageBuffer<T>) -> Matrix3<T> {
    let n = img.len_pixels();
    if n < 2 {
        return Matrix3::zeros();
    }
    let mut mean = Vector3::zeros();
    for p in img.pixels() {
        mean += Vector3::new(p[0], p[1], p[2]);
    }
    mean /= T::lit(n as f64);
    let mut cov = Matrix3::zeros();
    for p in img.pixels() {
        let d = Vector3::new(p[0], p[1], p[2]) - mean;
        cov += d * d.transpose();
    }
    cov / T::lit((n - 1) as f64)
}

/// RGB to HSV with all components in `[0, 1]`.
pub fn rgb_to_hsv<T: Real>([r, g, b]: [T; 3]) -> [T; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > T::zero() { delta / max } else { T::zero() };
    if delta <= T::zero() {
        return [T::zero(), s, v];
    }
    let six = T::lit(6.0);
    let h = if max == r {
        ((g - b) / delta) / six
    } else if max == g {
        ((b - r) / delta + T::lit(2.0)) / six
    } else {
        ((r - g) / delta + T::lit(4.0)) / six
    };
    [h.rem_euclid_one(), s, v]
}

pub fn hsv_to_rgb<T: Real>([h, s, v]: [T; 3]) -> [T; 3] {
    let h6 = h.rem_euclid_one() * T::lit(6.0);
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (T::one() - s);
    let q = v * (T::one() - s * f);
    let t = v * (T::one() - s * (T::one() - f));
    match sector.as_f64() as i64 % 6 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}
