use rand::Rng;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng::{keyed, Domain};
use crate::splat::gaussian::GaussianScene;

/// Concatenates per-view scenes in the shared canonical frame, keeping every
/// primitive's attributes and source view tag.
pub fn fuse_scenes<T: Real>(scenes: &[GaussianScene<T>]) -> Result<GaussianScene<T>> {
    let Some(first) = scenes.first() else {
        return Ok(GaussianScene::empty(0));
    };
    let degree = first.sh_degree;
    if let Some(s) = scenes.iter().find(|s| s.sh_degree != degree) {
        return Err(Error::Invalid(format!("SH degree mismatch: {} vs {degree}", s.sh_degree)));
    }
    let primitives = scenes.iter().flat_map(|s| s.primitives.iter().cloned()).collect();
    Ok(GaussianScene { primitives, sh_degree: degree })
}

/// Whether the seeded Bernoulli(p) draw for `seed` fires.
pub fn drop_decision(p: f64, seed: u64) -> bool {
    keyed(seed, Domain::DropView, 0, 0).random::<f64>() < p
}

/// With probability `p` (one draw keyed by `seed`), removes every primitive
/// tagged with `view`.
pub fn drop_view<T: Real>(scene: &GaussianScene<T>, view: u32, p: f64, seed: u64) -> Result<GaussianScene<T>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Invalid(format!("drop probability {p} outside [0, 1]")));
    }
    if !drop_decision(p, seed) {
        return Ok(scene.clone());
    }
    let primitives = scene.primitives.iter().filter(|g| g.source_view != view).cloned().collect();
    Ok(GaussianScene { primitives, sh_degree: scene.sh_degree })
}
