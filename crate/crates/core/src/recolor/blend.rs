use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::ImageBuffer;
use crate::mask::{SoftMask, TrackedMaskSet};
use crate::num::Real;
use crate::recolor::params::{sample_params, AugConfig, RecolorParams};
use crate::recolor::transform::apply_transform;

pub const DEFAULT_EPS: f64 = 1e-6;

/// One region's transform and its soft masks keyed by frame index.
#[derive(Debug, Clone)]
pub struct RegionRecolorJob<T> {
    pub region_id: u32,
    pub params: RecolorParams<T>,
    pub masks: BTreeMap<usize, SoftMask<T>>,
}

/// Divides by `sum + eps` wherever the per-pixel sum exceeds one; other
/// pixels pass through unchanged.
pub fn renormalize_masks<T: Real>(masks: &[SoftMask<T>], eps: T) -> Result<Vec<SoftMask<T>>> {
    let refs: Vec<&SoftMask<T>> = masks.iter().collect();
    renormalize_refs(&refs, eps)
}

fn renormalize_refs<T: Real>(masks: &[&SoftMask<T>], eps: T) -> Result<Vec<SoftMask<T>>> {
    let Some(first) = masks.first() else {
        return Ok(Vec::new());
    };
    let (w, h) = (first.width(), first.height());
    if masks.iter().any(|m| m.width() != w || m.height() != h) {
        return Err(Error::SizeMismatch("masks differ in size".into()));
    }
    let mut out: Vec<Vec<T>> = masks.iter().map(|m| m.as_slice().to_vec()).collect();
    for i in 0..w * h {
        let sum = masks.iter().fold(T::zero(), |acc, m| acc + m.as_slice()[i]);
        if sum > T::one() {
            let denom = sum + eps;
            for o in out.iter_mut() {
                o[i] /= denom;
            }
        }
    }
    Ok(out.into_iter().map(|d| SoftMask::from_raw(w, h, d)).collect())
}

/// `sum_r a_r * C_r(I) + (1 - sum_r a_r) * I` with renormalized weights.
fn blend_regions<T: Real>(img: &ImageBuffer<T>, regions: &[(&RecolorParams<T>, &SoftMask<T>)], eps: T) -> Result<ImageBuffer<T>> {
    for (_, m) in regions {
        if m.width() != img.width() || m.height() != img.height() {
            return Err(Error::SizeMismatch(format!(
                "mask {}x{} on a {}x{} frame",
                m.width(),
                m.height(),
                img.width(),
                img.height()
            )));
        }
    }
    // all-zero masks contribute exact zeros, so dropping them is bit-neutral
    let active: Vec<_> = regions.iter().filter(|(_, m)| !m.is_zero()).collect();
    if active.is_empty() {
        return Ok(img.clone());
    }
    let masks: Vec<&SoftMask<T>> = active.iter().map(|(_, m)| *m).collect();
    let weights = renormalize_refs(&masks, eps)?;
    let transformed: Vec<ImageBuffer<T>> = active.iter().map(|(p, _)| apply_transform(img, p)).collect();
    let src = img.as_slice();
    let mut out = Vec::with_capacity(src.len());
    for px in 0..img.len_pixels() {
        let mut total_w = T::zero();
        let mut acc = [T::zero(); 3];
        for (wm, t) in weights.iter().zip(&transformed) {
            let a = wm.as_slice()[px];
            total_w += a;
            for c in 0..3 {
                acc[c] += a * t.as_slice()[px * 3 + c];
            }
        }
        let rest = T::one() - total_w;
        for c in 0..3 {
            out.push(acc[c] + rest * src[px * 3 + c]);
        }
    }
    Ok(ImageBuffer::from_clamped(img.width(), img.height(), out))
}

/// Soft-blends every job's transformed frame into `img` for `frame_index`.
pub fn blend_frame<T: Real>(img: &ImageBuffer<T>, jobs: &[RegionRecolorJob<T>], frame_index: usize, eps: T) -> Result<ImageBuffer<T>> {
    let regions = jobs
        .iter()
        .map(|j| j.masks.get(&frame_index).map(|m| (&j.params, m)).ok_or(Error::MissingMask(frame_index)))
        .collect::<Result<Vec<_>>>()?;
    blend_regions(img, &regions, eps)
}

/// Parameters for every region id, each sampled once from its keyed stream.
pub fn plan_regions<T: Real>(seed: u64, ids: impl IntoIterator<Item = u32>, cfg: &AugConfig) -> Result<BTreeMap<u32, RecolorParams<T>>> {
    ids.into_iter().map(|id| Ok((id, sample_params(seed, id, cfg)?))).collect()
}

/// Recolors a tracked sequence with one parameter draw per region.
///
/// `tracked[i]` holds the masks for `frames[i]`; every entry must be an
/// accepted frame. A region missing from a frame leaves that frame untouched
/// there. Frames are processed in parallel; results do not depend on the
/// schedule.
pub fn recolor_sequence<T: Real>(
    frames: &[ImageBuffer<T>],
    tracked: &[TrackedMaskSet<T>],
    seed: u64,
    cfg: &AugConfig,
    eps: T,
) -> Result<Vec<ImageBuffer<T>>> {
    if frames.len() != tracked.len() {
        return Err(Error::SizeMismatch(format!("{} frames but {} mask sets", frames.len(), tracked.len())));
    }
    if let Some(t) = tracked.iter().find(|t| !t.accepted) {
        return Err(Error::FrameNotAccepted(t.frame_index));
    }
    let ids: BTreeSet<u32> = tracked.iter().flat_map(|t| t.object_ids().iter().copied()).collect();
    let plan = plan_regions::<T>(seed, ids, cfg)?;
    frames
        .par_iter()
        .zip(tracked.par_iter())
        .map(|(img, t)| {
            let regions: Vec<_> = plan.iter().filter_map(|(id, p)| t.mask(*id).map(|m| (p, m))).collect();
            blend_regions(img, &regions, eps)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn noise(w: usize, h: usize, k: u64) -> ImageBuffer<f64> {
        let data = (0..w * h * 3)
            .map(|i| (((i as u64 + 1) * 2654435761 + k * 97) % 1000) as f64 / 999.0)
            .collect();
        ImageBuffer::new(w, h, data).unwrap()
    }

    fn params(seed: u64) -> RecolorParams<f64> {
        sample_params(seed, 0, &AugConfig::default()).unwrap()
    }

    #[test]
    fn overlapping_masks_split() {
        let m = SoftMask::<f64>::filled(1, 1, 0.8);
        let out = renormalize_masks(&[m.clone(), m], 1e-6).unwrap();
        for o in &out {
            assert!((o.as_slice()[0] - 0.8 / (1.6 + 1e-6)).abs() < 1e-15);
        }
    }

    #[test]
    fn faint_single_mask_unchanged() {
        let m = SoftMask::filled(2, 2, 0.6);
        assert_eq!(renormalize_masks(std::slice::from_ref(&m), 1e-6).unwrap(), vec![m]);
    }

    #[test]
    fn disjoint_binary_masks_unchanged() {
        let a = SoftMask::new(2, 1, vec![1.0, 0.0]).unwrap();
        let b = SoftMask::new(2, 1, vec![0.0, 1.0]).unwrap();
        let out = renormalize_masks(&[a.clone(), b.clone()], 1e-6).unwrap();
        assert_eq!(out, vec![a, b]);
    }

    #[test]
    fn size_mismatch_rejected() {
        let a = SoftMask::filled(2, 1, 0.5);
        let b = SoftMask::filled(1, 2, 0.5);
        assert!(renormalize_masks(&[a, b], 1e-6).is_err());
    }

    fn job(id: u32, p: RecolorParams<f64>, frame: usize, m: SoftMask<f64>) -> RegionRecolorJob<f64> {
        RegionRecolorJob { region_id: id, params: p, masks: BTreeMap::from([(frame, m)]) }
    }

    #[test]
    fn full_mask_reduces_to_transform() {
        let img = noise(8, 6, 1);
        let p = params(3);
        let out = blend_frame(&img, &[job(0, p, 0, SoftMask::filled(8, 6, 1.0))], 0, 1e-6).unwrap();
        assert_eq!(out, apply_transform(&img, &p));
    }

    #[test]
    fn empty_mask_is_identity() {
        let img = noise(8, 6, 1);
        let out = blend_frame(&img, &[job(0, params(3), 0, SoftMask::filled(8, 6, 0.0))], 0, 1e-6).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn split_weights_with_identical_params() {
        let img = noise(4, 4, 2);
        let p = params(9);
        let t = apply_transform(&img, &p);
        let jobs = [job(0, p, 0, SoftMask::filled(4, 4, 0.25)), job(1, p, 0, SoftMask::filled(4, 4, 0.75))];
        let out = blend_frame(&img, &jobs, 0, 1e-6).unwrap();
        for (a, b) in out.as_slice().iter().zip(t.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_mask_reports_frame() {
        let img = noise(4, 4, 2);
        let err = blend_frame(&img, &[job(0, params(1), 0, SoftMask::filled(4, 4, 1.0))], 3, 1e-6).unwrap_err();
        assert!(matches!(err, Error::MissingMask(3)));
    }

    fn tracked(frame: usize, masks: &[(u32, SoftMask<f64>)]) -> TrackedMaskSet<f64> {
        TrackedMaskSet::new(frame, masks.iter().cloned().collect()).unwrap()
    }

    #[test]
    fn constant_video_gives_identical_frames() {
        let img = ImageBuffer::filled(5, 5, [0.2, 0.5, 0.7]);
        let frames = vec![img.clone(); 4];
        let t: Vec<_> = (0..4).map(|i| tracked(i, &[(0, SoftMask::filled(5, 5, 1.0))])).collect();
        let out = recolor_sequence(&frames, &t, 7, &AugConfig::default(), 1e-6).unwrap();
        assert!(out.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(out[0], img);
    }

    #[test]
    fn frame_order_does_not_matter() {
        let frames: Vec<_> = (0..5).map(|k| noise(6, 6, k)).collect();
        let masks: Vec<_> = (0..5)
            .map(|k| {
                let a: Vec<f64> = (0..36).map(|i| ((i + k) % 7) as f64 / 6.0).collect();
                let b: Vec<f64> = (0..36).map(|i| ((i * 3 + k) % 5) as f64 / 4.0).collect();
                tracked(k as usize, &[(0, SoftMask::new(6, 6, a).unwrap()), (4, SoftMask::new(6, 6, b).unwrap())])
            })
            .collect();
        let forward = recolor_sequence(&frames, &masks, 21, &AugConfig::default(), 1e-6).unwrap();
        let rev_frames: Vec<_> = frames.iter().rev().cloned().collect();
        let rev_masks: Vec<_> = masks.iter().rev().cloned().collect();
        let mut backward = recolor_sequence(&rev_frames, &rev_masks, 21, &AugConfig::default(), 1e-6).unwrap();
        backward.reverse();
        assert_eq!(forward, backward);
    }

    #[test]
    fn absent_region_leaves_frame_untouched() {
        let frames = vec![noise(4, 4, 0), noise(4, 4, 1)];
        let t = vec![tracked(0, &[(2, SoftMask::filled(4, 4, 1.0))]), tracked(1, &[])];
        let out = recolor_sequence(&frames, &t, 3, &AugConfig::default(), 1e-6).unwrap();
        assert_eq!(out[1], frames[1]);
    }

    #[test]
    fn rejects_skipped_and_misaligned() {
        let frames = vec![noise(4, 4, 0)];
        let mut t = vec![tracked(0, &[(2, SoftMask::filled(4, 4, 1.0))])];
        t[0].accepted = false;
        assert!(matches!(recolor_sequence(&frames, &t, 3, &AugConfig::default(), 1e-6), Err(Error::FrameNotAccepted(0))));
        assert!(recolor_sequence(&frames, &[], 3, &AugConfig::default(), 1e-6).is_err());
    }

    #[test]
    fn identity_config_is_identity() {
        let frames: Vec<_> = (0..3).map(|k| noise(5, 4, k)).collect();
        let t: Vec<_> = (0..3)
            .map(|i| tracked(i, &[(0, SoftMask::filled(5, 4, 0.7)), (1, SoftMask::filled(5, 4, 0.9))]))
            .collect();
        let out = recolor_sequence(&frames, &t, 1, &AugConfig::identity(), 1e-6).unwrap();
        for (o, f) in out.iter().zip(&frames) {
            for (a, b) in o.as_slice().iter().zip(f.as_slice()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    fn arb_mask(w: usize, h: usize) -> impl Strategy<Value = SoftMask<f64>> {
        proptest::collection::vec(0.0f64..=1.0, w * h).prop_map(move |d| SoftMask::new(w, h, d).unwrap())
    }

    proptest! {
        #[test]
        fn renormalize_bounds_and_idempotence(masks in proptest::collection::vec(arb_mask(3, 3), 1..5)) {
            let once = renormalize_masks(&masks, 1e-6).unwrap();
            for i in 0..9 {
                let s: f64 = once.iter().map(|m| m.as_slice()[i]).sum();
                prop_assert!(s <= 1.0 + 1e-6);
                prop_assert!(once.iter().all(|m| (0.0..=1.0).contains(&m.as_slice()[i])));
            }
            prop_assert_eq!(renormalize_masks(&once, 1e-6).unwrap(), once);
        }

        #[test]
        fn blend_is_convex(masks in proptest::collection::vec(arb_mask(3, 3), 1..4), seed in 0u64..50) {
            let img = noise(3, 3, seed);
            let jobs: Vec<_> = masks
                .iter()
                .enumerate()
                .map(|(r, m)| job(r as u32, sample_params(seed, r as u32, &AugConfig::default()).unwrap(), 0, m.clone()))
                .collect();
            let out = blend_frame(&img, &jobs, 0, 1e-6).unwrap();
            let sources: Vec<ImageBuffer<f64>> = jobs.iter().map(|j| apply_transform(&img, &j.params)).chain([img.clone()]).collect();
            for i in 0..27 {
                let lo = sources.iter().map(|s| s.as_slice()[i]).fold(f64::INFINITY, f64::min);
                let hi = sources.iter().map(|s| s.as_slice()[i]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(out.as_slice()[i] >= lo - 1e-12 && out.as_slice()[i] <= hi + 1e-12);
            }
        }
    }
}
