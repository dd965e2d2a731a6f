use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::manifest::{EditInstance, EditManifest};
use crate::error::{parse_json, Error, Result};
use crate::io::FeatureSet;
use crate::metrics::{clip_t2i, scene_conditioned_metrics, MetricConfig};

/// Embeddings consumed by an evaluation run.
///
/// Labels: `prompts` by instance id, `rendered` as `<instance_id>/<view>`,
/// `reference` as `<scene_id>/<view>`.
#[derive(Debug, Clone)]
pub struct EvalFeatures {
    pub prompts: FeatureSet<f64>,
    pub rendered: FeatureSet<f64>,
    pub reference: FeatureSet<f64>,
}

/// Per-instance seconds per rendered view.
pub type Timings = BTreeMap<String, f64>;

pub fn parse_timings(text: &str) -> Result<Timings> {
    parse_json(text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub clip_t2i: f64,
    pub c_fid: f64,
    pub c_kid: f64,
    pub mean_time_s: f64,
    pub instances_evaluated: usize,
    pub excluded: Vec<Exclusion>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12} {:>14}", "metric", "value");
        for (k, v) in [("CLIP_t2i", self.clip_t2i), ("C-FID", self.c_fid), ("C-KID", self.c_kid), ("time/view s", self.mean_time_s)] {
            let _ = writeln!(s, "{k:<12} {v:>14.6}");
        }
        let _ = writeln!(s, "{:<12} {:>14}", "evaluated", self.instances_evaluated);
        let _ = writeln!(s, "{:<12} {:>14}", "excluded", self.excluded.len());
        for e in &self.excluded {
            let _ = writeln!(s, "  {}: {}", e.id, e.reason);
        }
        s
    }
}

fn group(set: &FeatureSet<f64>) -> BTreeMap<&str, Vec<(&str, &[f64])>> {
    let mut out: BTreeMap<&str, Vec<(&str, &[f64])>> = BTreeMap::new();
    for (i, label) in set.labels().iter().enumerate() {
        let key = label.split_once('/').map_or(label.as_str(), |(k, _)| k);
        out.entry(key).or_default().push((label.as_str(), set.vector(i)));
    }
    for rows in out.values_mut() {
        rows.sort_by(|a, b| a.0.cmp(b.0));
    }
    out
}

fn stack(dim: usize, rows: &[(&str, &[f64])]) -> Result<FeatureSet<f64>> {
    FeatureSet::new(dim, rows.iter().map(|r| r.1.to_vec()).collect(), rows.iter().map(|r| r.0.to_string()).collect())
}

struct Included<'a> {
    inst: &'a EditInstance,
    clip: f64,
    time: f64,
}

fn check<'a>(
    inst: &'a EditInstance,
    render_dir: &Path,
    prompt: Option<&[f64]>,
    rendered: Option<&Vec<(&str, &[f64])>>,
    timing: Option<f64>,
) -> std::result::Result<Included<'a>, String> {
    let dir = render_dir.join(&inst.id);
    let has_png = std::fs::read_dir(&dir)
        .map(|rd| rd.filter_map(|e| e.ok()).any(|e| e.path().extension().is_some_and(|x| x.eq_ignore_ascii_case("png"))))
        .unwrap_or(false);
    if !has_png {
        return Err("missing rendered views".into());
    }
    let prompt = prompt.ok_or("missing prompt embedding")?;
    let rendered = rendered.ok_or("missing rendered embeddings")?;
    let time = timing.ok_or("missing timing")?;
    if !time.is_finite() || time < 0.0 {
        return Err(format!("invalid timing {time}"));
    }
    let images: Vec<&[f64]> = rendered.iter().map(|r| r.1).collect();
    let clip = clip_t2i(prompt, &images).map_err(|e| e.to_string())?;
    Ok(Included { inst, clip, time })
}

/// Scores a run. Instances lacking any artifact are excluded and listed.
/// For the rest, CLIP_t2i and time are instance means, and C-FID/C-KID
/// compare each instance's rendered embeddings with its scene's reference
/// embeddings before averaging. Results do not depend on instance order.
pub fn evaluate_run(
    m: &EditManifest,
    render_dir: &Path,
    features: &EvalFeatures,
    timings: &Timings,
    cfg: &MetricConfig,
    seed: u64,
) -> Result<BenchmarkReport> {
    let dim = features.prompts.dim();
    if features.rendered.dim() != dim || features.reference.dim() != dim {
        return Err(Error::SizeMismatch("prompt, rendered and reference embeddings differ in dimension".into()));
    }
    let prompts: BTreeMap<&str, &[f64]> = features.prompts.labels().iter().enumerate().map(|(i, l)| (l.as_str(), features.prompts.vector(i))).collect();
    let rendered = group(&features.rendered);
    let reference = group(&features.reference);

    let mut instances: Vec<&EditInstance> = m.instances.iter().collect();
    instances.sort_by(|a, b| a.id.cmp(&b.id));
    let checked: Vec<std::result::Result<Included, Exclusion>> = instances
        .par_iter()
        .map(|inst| {
            check(inst, render_dir, prompts.get(inst.id.as_str()).copied(), rendered.get(inst.id.as_str()), timings.get(&inst.id).copied())
                .map_err(|reason| Exclusion { id: inst.id.clone(), reason })
        })
        .collect();
    let mut included = Vec::new();
    let mut excluded = Vec::new();
    for c in checked {
        match c {
            Ok(i) => included.push(i),
            Err(e) => excluded.push(e),
        }
    }

    // each instance is scored against its own scene's reference views
    let mut sets = BTreeMap::new();
    let mut kept = Vec::new();
    for inc in included {
        let rows = &rendered[inc.inst.id.as_str()];
        match reference.get(inc.inst.scene_id.as_str()) {
            Some(r) if r.len() >= 2 && rows.len() >= 2 => {
                sets.insert(inc.inst.id.clone(), (stack(dim, rows)?, stack(dim, r)?));
                kept.push(inc);
            }
            Some(r) if r.len() >= 2 => excluded.push(Exclusion { id: inc.inst.id.clone(), reason: "fewer than 2 rendered embeddings".into() }),
            _ => excluded.push(Exclusion { id: inc.inst.id.clone(), reason: "fewer than 2 reference embeddings for scene".into() }),
        }
    }
    excluded.sort_by(|a, b| a.id.cmp(&b.id));
    if kept.is_empty() {
        return Err(Error::Manifest(format!("no instance could be evaluated ({} excluded)", excluded.len())));
    }
    let scene = scene_conditioned_metrics(&sets, cfg, seed)?;
    let n = kept.len() as f64;
    Ok(BenchmarkReport {
        clip_t2i: kept.iter().map(|i| i.clip).sum::<f64>() / n,
        c_fid: scene.c_fid,
        c_kid: scene.c_kid,
        mean_time_s: kept.iter().map(|i| i.time).sum::<f64>() / n,
        instances_evaluated: kept.len(),
        excluded,
    })
}
