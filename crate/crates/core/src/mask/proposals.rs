use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{parse_json, Error, Result};

/// First-frame object proposal as emitted by an automatic mask generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionProposal {
    #[serde(rename = "id")]
    pub proposal_id: u32,
    pub area: u64,
    pub stability: f64,
    pub predicted_iou: f64,
    /// `[x, y, w, h]` in pixels.
    pub bbox: [f64; 4],
    #[serde(rename = "mask")]
    pub soft_mask_path: String,
    /// Id the proposal carried before persistent ids were reassigned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<u32>,
}

impl RegionProposal {
    pub fn width(&self) -> f64 {
        self.bbox[2]
    }

    pub fn height(&self) -> f64 {
        self.bbox[3]
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.bbox[2] / self.bbox[3]
    }

    /// Smallest distance from the box to any image edge.
    pub fn edge_margin(&self, image_size: (u32, u32)) -> f64 {
        let [x, y, w, h] = self.bbox;
        let (iw, ih) = (image_size.0 as f64, image_size.1 as f64);
        x.min(y).min(iw - (x + w)).min(ih - (y + h))
    }

    /// Checks the structural invariants (positive box inside the image, scores in `[0, 1]`).
    pub fn validate(&self, image_size: (u32, u32)) -> Result<()> {
        let id = self.proposal_id;
        if !(self.width() > 0.0 && self.height() > 0.0) {
            return Err(Error::Invalid(format!("proposal {id}: non-positive bbox size")));
        }
        if self.edge_margin(image_size) < 0.0 {
            return Err(Error::Invalid(format!("proposal {id}: bbox outside the image")));
        }
        for (name, s) in [("stability", self.stability), ("predicted_iou", self.predicted_iou)] {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Invalid(format!("proposal {id}: {name} {s} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Thresholds of the multi-criterion proposal filter. All bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub a_min: u64,
    pub s_min: f64,
    pub q_min: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub m_edge: f64,
    pub n_max: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { a_min: 400, s_min: 0.92, q_min: 0.7, r_min: 0.1, r_max: 10.0, m_edge: 10.0, n_max: 20 }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.r_min && self.r_min < self.r_max) {
            return Err(Error::Invalid("aspect bounds need 0 < r_min < r_max".into()));
        }
        if self.a_min < 1 || self.n_max < 1 {
            return Err(Error::Invalid("a_min and n_max must be at least 1".into()));
        }
        Ok(())
    }

    pub fn passes(&self, p: &RegionProposal, image_size: (u32, u32)) -> bool {
        let r = p.aspect_ratio();
        p.area >= self.a_min
            && p.stability >= self.s_min
            && p.predicted_iou >= self.q_min
            && p.width() > 0.0
            && p.height() > 0.0
            && r >= self.r_min
            && r <= self.r_max
            && p.edge_margin(image_size) >= self.m_edge
    }
}

/// Keeps proposals passing every criterion, largest area first (ties by
/// ascending original id), truncated to `n_max`, with ids reassigned `0..k`.
pub fn filter_proposals(
    proposals: &[RegionProposal],
    image_size: (u32, u32),
    cfg: &FilterConfig,
) -> Vec<RegionProposal> {
    let mut kept: Vec<&RegionProposal> = proposals.iter().filter(|p| cfg.passes(p, image_size)).collect();
    kept.sort_by(|a, b| b.area.cmp(&a.area).then(a.proposal_id.cmp(&b.proposal_id)));
    kept.into_iter()
        .take(cfg.n_max)
        .enumerate()
        .map(|(i, p)| RegionProposal {
            proposal_id: i as u32,
            source_id: Some(p.source_id.unwrap_or(p.proposal_id)),
            ..p.clone()
        })
        .collect()
}

pub fn parse_proposals(text: &str) -> Result<Vec<RegionProposal>> {
    parse_json(text)
}

pub fn load_proposals(path: impl AsRef<Path>) -> Result<Vec<RegionProposal>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_proposals(&text)
}
