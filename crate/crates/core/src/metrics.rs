//! Benchmark metrics over ingested embeddings: text-image cosine similarity,
//! Fréchet distance and kernel MMD, plus their scene-conditioned averages.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::FeatureSet;
use crate::losses::cosine;
use crate::num::Real;
use crate::rng::{hash_str, keyed, Domain};

/// Mean cosine similarity between a prompt embedding and each image embedding.
pub fn clip_t2i<T: Real>(prompt: &[T], images: &[&[T]]) -> Result<T> {
    if images.is_empty() {
        return Err(Error::Invalid("no image embeddings".into()));
    }
    let mut sum = T::zero();
    for img in images {
        sum += cosine(prompt, img)?;
    }
    Ok(sum / T::lit(images.len() as f64))
}

fn moments<T: Real>(x: &FeatureSet<T>) -> (DVector<T>, DMatrix<T>) {
    let (n, d) = (x.len(), x.dim());
    let m = DMatrix::from_row_slice(n, d, x.as_flat());
    let mean = m.row_mean().transpose();
    let centered = DMatrix::from_fn(n, d, |i, j| m[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / T::lit((n - 1) as f64);
    (mean, cov)
}

fn psd_sqrt<T: Real>(m: DMatrix<T>) -> DMatrix<T> {
    let eig = m.symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| l.max(T::zero()).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

fn symmetrize<T: Real>(m: DMatrix<T>) -> DMatrix<T> {
    (&m + m.transpose()) * T::lit(0.5)
}

/// `|mu_x - mu_y|^2 + Tr(S_x + S_y - 2 (S_x S_y)^(1/2))` with unbiased
/// covariances; the cross term uses the symmetric form
/// `(S_x^(1/2) S_y S_x^(1/2))^(1/2)`.
pub fn frechet_distance<T: Real>(x: &FeatureSet<T>, y: &FeatureSet<T>) -> Result<T> {
    if x.dim() != y.dim() {
        return Err(Error::SizeMismatch(format!("feature dims {} vs {}", x.dim(), y.dim())));
    }
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::Invalid(format!("Fréchet distance needs >= 2 samples per set, got {} and {}", x.len(), y.len())));
    }
    let (mx, sx) = moments(x);
    let (my, sy) = moments(y);
    let sx_half = psd_sqrt(sx.clone());
    let inner = symmetrize(&sx_half * &sy * &sx_half);
    let cross: T = inner.symmetric_eigenvalues().iter().fold(T::zero(), |s, l| s + l.max(T::zero()).sqrt());
    let d = (mx - my).norm_squared() + sx.trace() + sy.trace() - T::lit(2.0) * cross;
    Ok(d.max(T::zero()))
}

fn poly_kernel<T: Real>(a: &[T], b: &[T]) -> T {
    let dot = a.iter().zip(b).fold(T::zero(), |s, (p, q)| s + *p * *q);
    (dot / T::lit(a.len() as f64) + T::one()).powi(3)
}

/// Unbiased MMD^2 of two equal-size samples under the cubic polynomial kernel.
pub fn mmd2_unbiased<T: Real>(x: &[&[T]], y: &[&[T]]) -> T {
    let m = x.len();
    let within = |s: &[&[T]]| {
        let mut acc = T::zero();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    acc += poly_kernel(s[i], s[j]);
                }
            }
        }
        acc
    };
    let mut cross = T::zero();
    for a in x {
        for b in y {
            cross += poly_kernel(a, b);
        }
    }
    let mf = T::lit(m as f64);
    (within(x) + within(y)) / (mf * (mf - T::one())) - T::lit(2.0) * cross / (mf * mf)
}

fn subset(n: usize, m: usize, seed: u64, subset: usize, side: u64) -> Vec<usize> {
    if m >= n {
        return (0..n).collect();
    }
    let mut rng = keyed(seed, Domain::MmdSubset, subset as u64, side);
    let mut idx = rand::seq::index::sample(&mut rng, n, m).into_vec();
    idx.sort_unstable();
    idx
}

/// Kernel MMD^2 averaged over `n_subsets` seeded subsamples of `subset_size`.
pub fn kernel_mmd<T: Real>(x: &FeatureSet<T>, y: &FeatureSet<T>, subset_size: usize, n_subsets: usize, seed: u64) -> Result<T> {
    if x.dim() != y.dim() {
        return Err(Error::SizeMismatch(format!("feature dims {} vs {}", x.dim(), y.dim())));
    }
    if subset_size < 2 || x.len() < subset_size || y.len() < subset_size {
        return Err(Error::Invalid(format!(
            "kernel MMD needs set sizes >= subset size >= 2 (subset {subset_size}, sets {} and {})",
            x.len(),
            y.len()
        )));
    }
    if n_subsets == 0 {
        return Err(Error::Invalid("n_subsets must be positive".into()));
    }
    let values: Vec<T> = (0..n_subsets)
        .into_par_iter()
        .map(|s| {
            let xs: Vec<&[T]> = subset(x.len(), subset_size, seed, s, 0).into_iter().map(|i| x.vector(i)).collect();
            let ys: Vec<&[T]> = subset(y.len(), subset_size, seed, s, 1).into_iter().map(|i| y.vector(i)).collect();
            mmd2_unbiased(&xs, &ys)
        })
        .collect();
    Ok(values.iter().fold(T::zero(), |a, v| a + *v) / T::lit(n_subsets as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub subset_size: usize,
    pub n_subsets: usize,
    /// Pool all scenes into one pair of sets instead of averaging per scene.
    pub pooled: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { subset_size: 100, n_subsets: 10, pooled: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneMetric {
    pub fid: f64,
    pub kid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConditioned {
    pub c_fid: f64,
    pub c_kid: f64,
    pub per_scene: BTreeMap<String, SceneMetric>,
}

fn fid_kid<T: Real>(x: &FeatureSet<T>, y: &FeatureSet<T>, cfg: &MetricConfig, seed: u64) -> Result<SceneMetric> {
    let m = cfg.subset_size.min(x.len()).min(y.len());
    Ok(SceneMetric {
        fid: frechet_distance(x, y)?.as_f64(),
        kid: kernel_mmd(x, y, m, cfg.n_subsets, seed)?.as_f64(),
    })
}

/// Per-scene FID/KID averaged over scenes (or pooled, per `cfg`). Subset sizes
/// shrink to the smaller set of each scene; each scene's subsampling key is
/// derived from `seed` and the scene id.
pub fn scene_conditioned_metrics<T: Real>(
    per_scene: &BTreeMap<String, (FeatureSet<T>, FeatureSet<T>)>,
    cfg: &MetricConfig,
    seed: u64,
) -> Result<SceneConditioned> {
    if per_scene.is_empty() {
        return Err(Error::Invalid("no scenes to evaluate".into()));
    }
    if cfg.pooled {
        let x = FeatureSet::concat(per_scene.values().map(|(x, _)| x))?;
        let y = FeatureSet::concat(per_scene.values().map(|(_, y)| y))?;
        let m = fid_kid(&x, &y, cfg, seed)?;
        return Ok(SceneConditioned { c_fid: m.fid, c_kid: m.kid, per_scene: BTreeMap::new() });
    }
    let scenes: Vec<(&String, &(FeatureSet<T>, FeatureSet<T>))> = per_scene.iter().collect();
    let results: Vec<SceneMetric> = scenes
        .par_iter()
        .map(|(id, (x, y))| fid_kid(x, y, cfg, hash_str(&format!("{seed}/{id}"))))
        .collect::<Result<_>>()?;
    let n = results.len() as f64;
    Ok(SceneConditioned {
        c_fid: results.iter().map(|r| r.fid).sum::<f64>() / n,
        c_kid: results.iter().map(|r| r.kid).sum::<f64>() / n,
        per_scene: scenes.into_iter().map(|(id, _)| id.clone()).zip(results).collect(),
    })
}
