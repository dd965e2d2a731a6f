use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng::{keyed, Domain};

/// The six orderings of `(R, G, B)`, as source-channel indices.
pub const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Parameters of one region's composite color transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecolorParams<T> {
    pub brightness_factor: T,
    pub contrast_factor: T,
    pub saturation_factor: T,
    /// Fraction of the hue circle, in `[-0.5, 0.5]`.
    pub hue_shift: T,
    pub gamma: T,
    pub pca_alphas: [T; 3],
    /// Output channel `i` takes input channel `channel_perm[i]`.
    pub channel_perm: [usize; 3],
    pub grayscale: bool,
}

impl<T: Real> RecolorParams<T> {
    pub fn identity() -> Self {
        Self {
            brightness_factor: T::one(),
            contrast_factor: T::one(),
            saturation_factor: T::one(),
            hue_shift: T::zero(),
            gamma: T::one(),
            pca_alphas: [T::zero(); 3],
            channel_perm: [0, 1, 2],
            grayscale: false,
        }
    }

    /// Signed zeros compare equal, so `-0.0` alphas still count as identity.
    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.brightness_factor, self.contrast_factor, self.saturation_factor, self.gamma];
        if positive.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::Invalid("recolor factors and gamma must be positive".into()));
        }
        if !(self.hue_shift.abs() <= T::lit(0.5)) {
            return Err(Error::Invalid("hue shift outside [-0.5, 0.5]".into()));
        }
        if self.pca_alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("pca alpha".into()));
        }
        if !PERMUTATIONS.contains(&self.channel_perm) {
            return Err(Error::Invalid(format!("{:?} is not a channel permutation", self.channel_perm)));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding (values widened to f64).
    pub fn digest(&self) -> String {
        let wide = RecolorParams::<f64> {
            brightness_factor: self.brightness_factor.as_f64(),
            contrast_factor: self.contrast_factor.as_f64(),
            saturation_factor: self.saturation_factor.as_f64(),
            hue_shift: self.hue_shift.as_f64(),
            gamma: self.gamma.as_f64(),
            pca_alphas: self.pca_alphas.map(|a| a.as_f64()),
            channel_perm: self.channel_perm,
            grayscale: self.grayscale,
        };
        let json = serde_json::to_vec(&wide).expect("params serialize");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalSpec {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probability {
    pub prob: f64,
}

/// Sampling ranges for [`RecolorParams`].
///
/// `gamma` is drawn log-uniformly; `channel_perm.prob` is the chance of
/// drawing a uniformly random permutation (identity otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugConfig {
    pub brightness: UniformRange,
    pub contrast: UniformRange,
    pub saturation: UniformRange,
    pub hue_shift: UniformRange,
    pub gamma: UniformRange,
    pub pca_alpha: NormalSpec,
    pub channel_perm: Probability,
    pub grayscale: Probability,
}

impl Default for AugConfig {
    fn default() -> Self {
        Self {
            brightness: UniformRange { min: 0.6, max: 1.4 },
            contrast: UniformRange { min: 0.6, max: 1.4 },
            saturation: UniformRange { min: 0.6, max: 1.4 },
            hue_shift: UniformRange { min: -0.3, max: 0.3 },
            gamma: UniformRange { min: 0.5, max: 2.0 },
            pca_alpha: NormalSpec { mean: 0.0, std: 0.1 },
            channel_perm: Probability { prob: 1.0 },
            grayscale: Probability { prob: 0.1 },
        }
    }
}

impl AugConfig {
    /// Every range collapsed onto the identity transform.
    pub fn identity() -> Self {
        let one = UniformRange { min: 1.0, max: 1.0 };
        Self {
            brightness: one,
            contrast: one,
            saturation: one,
            hue_shift: UniformRange { min: 0.0, max: 0.0 },
            gamma: one,
            pca_alpha: NormalSpec { mean: 0.0, std: 0.0 },
            channel_perm: Probability { prob: 0.0 },
            grayscale: Probability { prob: 0.0 },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = crate::error::parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("brightness", self.brightness, true),
            ("contrast", self.contrast, true),
            ("saturation", self.saturation, true),
            ("hue_shift", self.hue_shift, false),
            ("gamma", self.gamma, true),
        ];
        for (name, r, positive) in ranges {
            if !(r.min.is_finite() && r.max.is_finite() && r.min <= r.max) {
                return Err(Error::Invalid(format!("{name}: need finite min <= max")));
            }
            if positive && r.min <= 0.0 {
                return Err(Error::Invalid(format!("{name}: range must be positive")));
            }
        }
        if self.hue_shift.min < -0.5 || self.hue_shift.max > 0.5 {
            return Err(Error::Invalid("hue_shift: range must lie in [-0.5, 0.5]".into()));
        }
        if !(self.pca_alpha.mean.is_finite() && self.pca_alpha.std >= 0.0 && self.pca_alpha.std.is_finite()) {
            return Err(Error::Invalid("pca_alpha: need finite mean and std >= 0".into()));
        }
        for (name, p) in [("channel_perm", self.channel_perm), ("grayscale", self.grayscale)] {
            if !(0.0..=1.0).contains(&p.prob) {
                return Err(Error::Invalid(format!("{name}: prob outside [0, 1]")));
            }
        }
        Ok(())
    }
}

mod slot {
    pub const BRIGHTNESS: u64 = 0;
    pub const CONTRAST: u64 = 1;
    pub const SATURATION: u64 = 2;
    pub const HUE: u64 = 3;
    pub const GAMMA: u64 = 4;
    pub const PCA: [u64; 3] = [5, 6, 7];
    pub const PERM: u64 = 8;
    pub const GRAYSCALE: u64 = 9;
}

fn unit(seed: u64, region: u32, slot: u64) -> f64 {
    keyed(seed, Domain::Recolor, region as u64, slot).random::<f64>()
}

fn uniform(seed: u64, region: u32, slot: u64, r: UniformRange) -> f64 {
    r.min + (r.max - r.min) * unit(seed, region, slot)
}

/// Draws a region's parameters from its own keyed stream.
///
/// The result depends only on `(seed, region_id, cfg)`.
pub fn sample_params<T: Real>(seed: u64, region_id: u32, cfg: &AugConfig) -> Result<RecolorParams<T>> {
    cfg.validate()?;
    let gamma = {
        let (lo, hi) = (cfg.gamma.min.ln(), cfg.gamma.max.ln());
        (lo + (hi - lo) * unit(seed, region_id, slot::GAMMA)).exp()
    };
    let pca_alphas = slot::PCA.map(|s| {
        let z: f64 = StandardNormal.sample(&mut keyed(seed, Domain::Recolor, region_id as u64, s));
        T::lit(cfg.pca_alpha.mean + cfg.pca_alpha.std * z)
    });
    let channel_perm = {
        let mut rng = keyed(seed, Domain::Recolor, region_id as u64, slot::PERM);
        if rng.random::<f64>() < cfg.channel_perm.prob {
            PERMUTATIONS[rng.random_range(0..PERMUTATIONS.len())]
        } else {
            PERMUTATIONS[0]
        }
    };
    Ok(RecolorParams {
        brightness_factor: T::lit(uniform(seed, region_id, slot::BRIGHTNESS, cfg.brightness)),
        contrast_factor: T::lit(uniform(seed, region_id, slot::CONTRAST, cfg.contrast)),
        saturation_factor: T::lit(uniform(seed, region_id, slot::SATURATION, cfg.saturation)),
        hue_shift: T::lit(uniform(seed, region_id, slot::HUE, cfg.hue_shift)),
        gamma: T::lit(gamma),
        pca_alphas,
        channel_perm,
        grayscale: unit(seed, region_id, slot::GRAYSCALE) < cfg.grayscale.prob,
    })
}
