use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::io::FeatureSet;
use crate::mask::grid::{binarize_logits, BinaryMask, SoftMask};
use crate::num::{sigmoid, Real};

/// Per-frame tracked objects: the active id set and a soft mask per id.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedMaskSet<T> {
    pub frame_index: usize,
    object_ids: BTreeSet<u32>,
    masks: BTreeMap<u32, SoftMask<T>>,
    pub accepted: bool,
}

impl<T: Real> TrackedMaskSet<T> {
    /// All masks must share one size.
    pub fn new(frame_index: usize, masks: BTreeMap<u32, SoftMask<T>>) -> Result<Self> {
        let mut sizes = masks.values().map(|m| (m.width(), m.height()));
        if let Some(first) = sizes.next() {
            if sizes.any(|s| s != first) {
                return Err(Error::SizeMismatch(format!("frame {frame_index}: masks differ in size")));
            }
        }
        Ok(Self { frame_index, object_ids: masks.keys().copied().collect(), masks, accepted: true })
    }

    /// Builds from per-object logits (labels are object ids, dim is `width * height`).
    ///
    /// Objects whose binarized mask is empty are not active in this frame.
    /// Soft masks are the sigmoid of the logits.
    pub fn from_logits(frame_index: usize, logits: &FeatureSet<T>, width: usize, height: usize) -> Result<Self> {
        if logits.dim() != width * height && !logits.is_empty() {
            return Err(Error::SizeMismatch(format!(
                "frame {frame_index}: logit dim {} is not {width}x{height}",
                logits.dim()
            )));
        }
        let mut masks = BTreeMap::new();
        for (label, row) in logits.labels().iter().zip(logits.vectors()) {
            let id: u32 = label
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("frame {frame_index}: object label {label:?} is not an id")))?;
            let binary = binarize_logits(row, width, height)?;
            if binary.is_empty() {
                continue;
            }
            let soft = row.iter().map(|&z| sigmoid(z)).collect();
            if masks.insert(id, SoftMask::from_raw(width, height, soft)).is_some() {
                return Err(Error::Invalid(format!("frame {frame_index}: duplicate object id {id}")));
            }
        }
        Self::new(frame_index, masks)
    }

    /// Binary masks from per-object logits, keyed by object id.
    pub fn binary_from_logits(logits: &FeatureSet<T>, width: usize, height: usize) -> Result<BTreeMap<u32, BinaryMask>> {
        logits
            .labels()
            .iter()
            .zip(logits.vectors())
            .map(|(label, row)| {
                let id = label
                    .trim()
                    .parse()
                    .map_err(|_| Error::Invalid(format!("object label {label:?} is not an id")))?;
                Ok((id, binarize_logits(row, width, height)?))
            })
            .collect()
    }

    /// Id set only, for acceptance bookkeeping without pixel data.
    pub fn from_ids(frame_index: usize, ids: impl IntoIterator<Item = u32>) -> Self {
        let object_ids: BTreeSet<u32> = ids.into_iter().collect();
        let masks = object_ids.iter().map(|&id| (id, SoftMask::from_raw(0, 0, Vec::new()))).collect();
        Self { frame_index, object_ids, masks, accepted: true }
    }

    pub fn object_ids(&self) -> &BTreeSet<u32> {
        &self.object_ids
    }

    pub fn masks(&self) -> &BTreeMap<u32, SoftMask<T>> {
        &self.masks
    }

    pub fn mask(&self, id: u32) -> Option<&SoftMask<T>> {
        self.masks.get(&id)
    }
}

/// `|a ∩ b| / max(|a|, |b|)`; two empty sets give 1.
pub fn overlap_ratio(a: &BTreeSet<u32>, b: &BTreeSet<u32>) -> f64 {
    let larger = a.len().max(b.len());
    if larger == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / larger as f64
}

/// Sequential identity-drift scan.
///
/// Frame 0 is always accepted and becomes the reference. Each later frame is
/// accepted iff its overlap ratio with the most recently accepted frame is at
/// least `threshold`. Skipped frames are returned with `accepted == false`.
pub fn accept_frames<T: Real>(frames: Vec<TrackedMaskSet<T>>, threshold: f64) -> Result<Vec<TrackedMaskSet<T>>> {
    if frames.is_empty() {
        return Err(Error::Invalid("no frames to accept".into()));
    }
    if frames[0].object_ids.is_empty() {
        return Err(Error::Invalid("first frame has no tracked objects".into()));
    }
    if frames.windows(2).any(|w| w[0].frame_index >= w[1].frame_index) {
        return Err(Error::Invalid("frames must be ordered by frame index".into()));
    }
    let mut out = Vec::with_capacity(frames.len());
    let mut reference: Option<BTreeSet<u32>> = None;
    for mut frame in frames {
        frame.accepted = match &reference {
            None => true,
            Some(r) => overlap_ratio(&frame.object_ids, r) >= threshold,
        };
        if frame.accepted {
            reference = Some(frame.object_ids.clone());
        }
        out.push(frame);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(ids: &[u32]) -> BTreeSet<u32> {
        ids.iter().copied().collect()
    }

    fn frames(sets: &[&[u32]]) -> Vec<TrackedMaskSet<f64>> {
        sets.iter().enumerate().map(|(i, s)| TrackedMaskSet::from_ids(i, s.iter().copied())).collect()
    }

    fn flags(sets: &[&[u32]]) -> Vec<bool> {
        accept_frames(frames(sets), 0.5).unwrap().iter().map(|f| f.accepted).collect()
    }

    #[test]
    fn overlap_examples() {
        assert!((overlap_ratio(&set(&[1, 2, 3]), &set(&[2, 3, 4])) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(overlap_ratio(&set(&[1, 2]), &set(&[1, 2])), 1.0);
        assert_eq!(overlap_ratio(&set(&[1, 2]), &set(&[3])), 0.0);
        assert_eq!(overlap_ratio(&set(&[]), &set(&[])), 1.0);
        assert_eq!(overlap_ratio(&set(&[1]), &set(&[])), 0.0);
    }

    #[test]
    fn skipped_frame_does_not_become_reference() {
        assert_eq!(flags(&[&[1, 2], &[1, 2], &[3, 4], &[1, 2]]), vec![true, true, false, true]);
    }

    #[test]
    fn identical_ids_all_accepted() {
        assert_eq!(flags(&[&[4, 5], &[4, 5], &[4, 5]]), vec![true; 3]);
    }

    #[test]
    fn half_overlap_is_accepted() {
        assert_eq!(flags(&[&[1, 2], &[2, 3]]), vec![true, true]);
        assert_eq!(flags(&[&[1, 2, 3], &[3, 4, 5]]), vec![true, false]);
    }

    #[test]
    fn empty_after_nonempty_is_skipped() {
        assert_eq!(flags(&[&[1], &[], &[1]]), vec![true, false, true]);
    }

    #[test]
    fn error_paths() {
        assert!(accept_frames::<f64>(Vec::new(), 0.5).is_err());
        assert!(accept_frames(frames(&[&[]]), 0.5).is_err());
        let mut fs = frames(&[&[1], &[1]]);
        fs[1].frame_index = 0;
        assert!(accept_frames(fs, 0.5).is_err());
    }

    #[test]
    fn logits_drive_active_ids() {
        let logits = FeatureSet::new(
            4,
            vec![vec![-1.0f64, 2.0, 0.0, -3.0], vec![-1.0, -2.0, 0.0, -3.0]],
            vec!["3".into(), "8".into()],
        )
        .unwrap();
        let t = TrackedMaskSet::from_logits(0, &logits, 2, 2).unwrap();
        assert_eq!(t.object_ids(), &set(&[3]));
        let m = t.mask(3).unwrap();
        assert!((m.as_slice()[2] - 0.5).abs() < 1e-15);
        let bin = TrackedMaskSet::binary_from_logits(&logits, 2, 2).unwrap();
        assert_eq!(bin[&3].as_slice(), &[false, true, false, false]);
        assert!(bin[&8].is_empty());
    }

    fn arb_set() -> impl Strategy<Value = BTreeSet<u32>> {
        proptest::collection::btree_set(0u32..8, 0..6)
    }

    proptest! {
        #[test]
        fn overlap_symmetric_and_bounded(a in arb_set(), b in arb_set()) {
            let r = overlap_ratio(&a, &b);
            prop_assert_eq!(r, overlap_ratio(&b, &a));
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert_eq!(r == 1.0, a == b);
        }

        #[test]
        fn accepted_subsequence_is_fixed_point(
            first in proptest::collection::btree_set(0u32..6, 1..5),
            rest in proptest::collection::vec(arb_set(), 0..12),
        ) {
            let mut all = vec![TrackedMaskSet::<f64>::from_ids(0, first)];
            all.extend(rest.into_iter().enumerate().map(|(i, s)| TrackedMaskSet::from_ids(i + 1, s)));
            let scanned = accept_frames(all, 0.5).unwrap();
            let mut reference = scanned[0].object_ids().clone();
            for f in &scanned[1..] {
                let r = overlap_ratio(f.object_ids(), &reference);
                prop_assert_eq!(f.accepted, r >= 0.5);
                if f.accepted { reference = f.object_ids().clone(); }
            }
            let kept: Vec<_> = scanned.into_iter().filter(|f| f.accepted).collect();
            let again = accept_frames(kept, 0.5).unwrap();
            prop_assert!(again.iter().all(|f| f.accepted));
        }
    }
}
