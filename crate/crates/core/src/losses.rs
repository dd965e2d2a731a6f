//! Training-objective terms over rendered images, ingested embeddings and
//! Gaussian center sets, plus their weighted total.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::ImageBuffer;
use crate::num::Real;
use crate::rng::{keyed, Domain};

/// Mean squared error over every pixel and channel.
pub fn mse_loss<T: Real>(a: &ImageBuffer<T>, b: &ImageBuffer<T>) -> Result<T> {
    if !a.same_size(b) {
        return Err(Error::SizeMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let sum = a.as_slice().iter().zip(b.as_slice()).fold(T::zero(), |acc, (x, y)| acc + (*x - *y).powi(2));
    Ok(sum / T::lit(a.as_slice().len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingDistance {
    /// `1 - cos(a, b)`, the semantic image term.
    CosineLoss,
    /// Mean squared difference, the perceptual stand-in over stacked features.
    L2,
}

pub(crate) fn check_dims<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::SizeMismatch(format!("embedding dims {} vs {}", a.len(), b.len())));
    }
    Ok(())
}

pub(crate) fn cosine<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    check_dims(a, b)?;
    let dot = a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y);
    let na = a.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
    let nb = b.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
    if na == T::zero() || nb == T::zero() {
        return Err(Error::Invalid("zero-norm embedding".into()));
    }
    Ok(dot / (na * nb))
}

pub fn embedding_distance<T: Real>(a: &[T], b: &[T], kind: EmbeddingDistance) -> Result<T> {
    match kind {
        EmbeddingDistance::CosineLoss => Ok(T::one() - cosine(a, b)?),
        EmbeddingDistance::L2 => {
            check_dims(a, b)?;
            let sum = a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + (*x - *y).powi(2));
            Ok(sum / T::lit(a.len() as f64))
        }
    }
}

/// Huber-style anchoring of predicted centers to reference centers, averaged
/// over all coordinates.
pub fn smooth_l1_centers<T: Real>(pred: &[Vector3<T>], reference: &[Vector3<T>], beta: T) -> Result<T> {
    if pred.len() != reference.len() {
        return Err(Error::SizeMismatch(format!("{} vs {} centers", pred.len(), reference.len())));
    }
    if beta <= T::zero() {
        return Err(Error::Invalid("smooth-L1 beta must be positive".into()));
    }
    if pred.is_empty() {
        return Ok(T::zero());
    }
    let half = T::lit(0.5);
    let sum = pred.iter().zip(reference).flat_map(|(p, r)| (0..3).map(move |i| (p[i] - r[i]).abs())).fold(T::zero(), |s, d| {
        s + if d < beta { half * d * d / beta } else { d - half * beta }
    });
    Ok(sum / T::lit(3.0 * pred.len() as f64))
}

fn directed_mean<T: Real>(from: &[Vector3<T>], to: &[Vector3<T>]) -> T {
    let mins: Vec<T> = from
        .par_iter()
        .map(|p| {
            to.iter().map(|q| (p - q).abs().sum()).reduce(|m, d| if d < m { d } else { m }).unwrap()
        })
        .collect();
    // sequential sum over a fixed order keeps the result schedule-independent
    mins.iter().fold(T::zero(), |s, v| s + *v) / T::lit(from.len() as f64)
}

/// Symmetric Chamfer-L1: the sum of both directed mean nearest-neighbour
/// L1 distances.
pub fn chamfer_l1<T: Real>(a: &[Vector3<T>], b: &[Vector3<T>]) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Invalid("chamfer distance of an empty set".into()));
    }
    Ok(directed_mean(a, b) + directed_mean(b, a))
}

/// Draws `min(sample_size, |set|)` centers without replacement. The draw is
/// keyed by (seed, set size) only, so views of equal size share an index
/// pattern and identical views always yield identical samples.
pub fn sample_centers<T: Real>(centers: &[Vector3<T>], sample_size: usize, seed: u64) -> Vec<Vector3<T>> {
    if sample_size >= centers.len() {
        return centers.to_vec();
    }
    let mut rng = keyed(seed, Domain::GeomSample, centers.len() as u64, 0);
    let mut idx = rand::seq::index::sample(&mut rng, centers.len(), sample_size).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| centers[i]).collect()
}

/// Multi-view geometric consistency: `1/(V(V-1)) * sum_{i<j} chamfer(s_i, s_j)`
/// over seeded subsamples of each view's centers.
pub fn geom_consistency_loss<T: Real>(per_view: &[Vec<Vector3<T>>], sample_size: usize, seed: u64) -> Result<T> {
    let v = per_view.len();
    if v < 2 {
        return Err(Error::Invalid(format!("geometric consistency needs at least 2 views, got {v}")));
    }
    if sample_size == 0 {
        return Err(Error::Invalid("sample size must be positive".into()));
    }
    if let Some(i) = per_view.iter().position(|c| c.is_empty()) {
        return Err(Error::Invalid(format!("view {i} has no centers")));
    }
    let samples: Vec<Vec<Vector3<T>>> = per_view.iter().map(|c| sample_centers(c, sample_size, seed)).collect();
    let mut sum = T::zero();
    for i in 0..v {
        for j in i + 1..v {
            sum += chamfer_l1(&samples[i], &samples[j])?;
        }
    }
    Ok(sum / T::lit((v * (v - 1)) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub w_clip: f64,
    pub w_lpips: f64,
    pub w_mse: f64,
    pub w_center: f64,
    pub w_geom: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { w_clip: 0.5, w_lpips: 0.8, w_mse: 1.0, w_center: 0.01, w_geom: 0.03 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.w_clip, self.w_lpips, self.w_mse, self.w_center, self.w_geom];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Invalid("loss weights must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Loss terms with the image terms already averaged over views.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossTerms {
    pub clip: f64,
    pub lpips: f64,
    pub mse: f64,
    pub center: f64,
    pub geom: f64,
}

fn mean(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Invalid("no views to average".into()));
    }
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

impl LossTerms {
    /// Averages per-view image terms.
    pub fn from_views(clip: &[f64], lpips: &[f64], mse: &[f64], center: f64, geom: f64) -> Result<Self> {
        Ok(Self { clip: mean(clip)?, lpips: mean(lpips)?, mse: mean(mse)?, center, geom })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub clip: f64,
    pub lpips: f64,
    pub mse: f64,
    pub center: f64,
    pub geom: f64,
    pub total: f64,
}

pub fn total_loss(terms: &LossTerms, w: &LossWeights) -> Result<LossReport> {
    w.validate()?;
    let LossTerms { clip, lpips, mse, center, geom } = *terms;
    if [clip, lpips, mse, center, geom].iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("loss term".into()));
    }
    let total = w.w_clip * clip + w.w_lpips * lpips + w.w_mse * mse + w.w_center * center + w.w_geom * geom;
    Ok(LossReport { clip, lpips, mse, center, geom, total })
}
