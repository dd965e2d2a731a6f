use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{ImageBuffer, IntrinsicsSpec};
use crate::num::Real;

/// Asymmetric supervision pair: a recolored reference view, an untouched
/// auxiliary view, and recolored targets for every accepted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair<T: Real> {
    pub reference: ImageBuffer<T>,
    pub reference_k: IntrinsicsSpec<T>,
    pub auxiliary: ImageBuffer<T>,
    pub auxiliary_k: IntrinsicsSpec<T>,
    pub supervision_views: Vec<ImageBuffer<T>>,
    pub drop_seed: u64,
}

/// Builds a pair from aligned accepted frames: `originals[i]` and its
/// recolored counterpart `recolored[i]`, with intrinsics `k[i]`.
pub fn make_training_pair<T: Real>(
    originals: &[ImageBuffer<T>],
    recolored: &[ImageBuffer<T>],
    k: &[IntrinsicsSpec<T>],
    drop_seed: u64,
) -> Result<TrainingPair<T>> {
    if originals.len() != recolored.len() || originals.len() != k.len() {
        return Err(Error::SizeMismatch(format!(
            "{} originals, {} recolored, {} intrinsics",
            originals.len(),
            recolored.len(),
            k.len()
        )));
    }
    if originals.len() < 2 {
        return Err(Error::Invalid(format!("training pair needs 2 accepted frames, got {}", originals.len())));
    }
    if let Some(i) = (0..originals.len()).find(|&i| !originals[i].same_size(&recolored[i])) {
        return Err(Error::SizeMismatch(format!("frame {i} original and recolored sizes differ")));
    }
    Ok(TrainingPair {
        reference: recolored[0].clone(),
        reference_k: k[0],
        auxiliary: originals[1].clone(),
        auxiliary_k: k[1],
        supervision_views: recolored.to_vec(),
        drop_seed,
    })
}

impl<T: Real> TrainingPair<T> {
    /// SHA-256 over a canonical little-endian encoding of every field.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let image = |h: &mut Sha256, img: &ImageBuffer<T>| {
            h.update((img.width() as u64).to_le_bytes());
            h.update((img.height() as u64).to_le_bytes());
            for v in img.as_slice() {
                h.update(v.as_f64().to_le_bytes());
            }
        };
        let intr = |h: &mut Sha256, k: &IntrinsicsSpec<T>| {
            for v in [k.fx, k.fy, k.cx, k.cy] {
                h.update(v.as_f64().to_le_bytes());
            }
            h.update((k.width as u64).to_le_bytes());
            h.update((k.height as u64).to_le_bytes());
        };
        image(&mut h, &self.reference);
        intr(&mut h, &self.reference_k);
        image(&mut h, &self.auxiliary);
        intr(&mut h, &self.auxiliary_k);
        h.update((self.supervision_views.len() as u64).to_le_bytes());
        for v in &self.supervision_views {
            image(&mut h, v);
        }
        h.update(self.drop_seed.to_le_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(n: usize, base: f64) -> Vec<ImageBuffer<f64>> {
        (0..n).map(|i| ImageBuffer::filled(4, 4, [base + 0.1 * i as f64; 3])).collect()
    }

    #[test]
    fn three_frame_sequence() {
        let orig = frames(3, 0.1);
        let rec = frames(3, 0.5);
        let k = vec![IntrinsicsSpec::centered(4, 4); 3];
        let p = make_training_pair(&orig, &rec, &k, 9).unwrap();
        assert_eq!(p.reference, rec[0]);
        assert_eq!(p.auxiliary, orig[1]);
        assert_eq!(p.supervision_views.len(), 3);
        assert_eq!(p.digest(), make_training_pair(&orig, &rec, &k, 9).unwrap().digest());
        assert_ne!(p.digest(), make_training_pair(&orig, &rec, &k, 10).unwrap().digest());
    }

    #[test]
    fn needs_two_frames() {
        let k = vec![IntrinsicsSpec::centered(4, 4)];
        assert!(make_training_pair(&frames(1, 0.1), &frames(1, 0.1), &k, 0).is_err());
    }
}
