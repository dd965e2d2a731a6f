use std::path::Path;

use serde::Deserialize;
use splatkit_core::losses::LossWeights;
use splatkit_core::mask::FilterConfig;
use splatkit_core::metrics::MetricConfig;
use splatkit_core::recolor::AugConfig;
use splatkit_core::splat::RenderConfig;
use splatkit_core::{parse_json, Error, Result};

/// Rendering settings as they appear in the config file.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSection {
    pub alpha_clamp: f64,
    pub transmittance_floor: f64,
    pub dilation: f64,
    pub tile_size: usize,
    pub z_near: f64,
}

impl Default for RenderSection {
    fn default() -> Self {
        let d = RenderConfig::<f64>::default();
        Self {
            alpha_clamp: d.alpha_clamp,
            transmittance_floor: d.transmittance_floor,
            dilation: d.dilation,
            tile_size: d.tile_size,
            z_near: d.z_near,
        }
    }
}

impl RenderSection {
    pub fn to_config(self, background: [f64; 3]) -> RenderConfig<f64> {
        RenderConfig {
            background,
            alpha_clamp: self.alpha_clamp,
            transmittance_floor: self.transmittance_floor,
            dilation: self.dilation,
            tile_size: self.tile_size,
            z_near: self.z_near,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub filter: FilterConfig,
    pub aug: AugConfig,
    pub render: RenderSection,
    pub loss_weights: LossWeights,
    pub metrics: MetricConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = parse_json(&text)?;
        cfg.filter.validate()?;
        cfg.aug.validate()?;
        cfg.loss_weights.validate()?;
        Ok(cfg)
    }
}
