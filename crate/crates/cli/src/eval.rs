use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde_json::{json, Map, Value};
use splatkit_core::io::{load_feature_set, load_image};
use splatkit_core::losses::{
    embedding_distance, geom_consistency_loss, mse_loss, smooth_l1_centers, total_loss, EmbeddingDistance, LossTerms,
};
use splatkit_core::metrics::{clip_t2i, frechet_distance, kernel_mmd, scene_conditioned_metrics};
use splatkit_core::splat::load_ply;
use splatkit_core::{Error, Features, Image, Result, Scene};

use crate::output::{pretty, sidecar, write};
use crate::Ctx;

#[derive(Args, Debug)]
pub struct LossArgs {
    /// Image pair for the MSE term; repeat per view.
    #[arg(long, num_args = 2, value_names = ["PRED", "TARGET"], action = clap::ArgAction::Append)]
    pub mse: Vec<PathBuf>,
    /// Embedding containers for the semantic term; rows are paired per view.
    #[arg(long, num_args = 2, value_names = ["PRED", "TARGET"])]
    pub clip: Vec<PathBuf>,
    /// Stacked perceptual features; rows are paired per view.
    #[arg(long, num_args = 2, value_names = ["PRED", "TARGET"])]
    pub lpips: Vec<PathBuf>,
    /// Predicted and reference PLYs for center anchoring.
    #[arg(long, num_args = 2, value_names = ["PRED", "REF"])]
    pub center: Vec<PathBuf>,
    /// Per-view PLYs for the geometric consistency term.
    #[arg(long, num_args = 2..)]
    pub geom: Vec<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    pub sample_size: usize,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn paired_rows(paths: &[PathBuf], kind: EmbeddingDistance) -> Result<f64> {
    let a: Features = load_feature_set(&paths[0])?;
    let b: Features = load_feature_set(&paths[1])?;
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::SizeMismatch(format!("{} vs {} embeddings", a.len(), b.len())));
    }
    let sum = (0..a.len()).map(|i| embedding_distance(a.vector(i), b.vector(i), kind)).sum::<Result<f64>>()?;
    Ok(sum / a.len() as f64)
}

fn emit(ctx: &Ctx, command: &str, out: &Option<PathBuf>, value: &Value) -> Result<()> {
    let text = pretty(value);
    match out {
        Some(p) => {
            write(p, &text)?;
            sidecar(p, command, ctx.seed, json!({}))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn loss(ctx: &Ctx, a: LossArgs) -> Result<()> {
    let mut terms = Map::new();
    if !a.mse.is_empty() {
        let mut sum = 0.0;
        for pair in a.mse.chunks(2) {
            let (p, t): (Image, Image) = (load_image(&pair[0])?, load_image(&pair[1])?);
            sum += mse_loss(&p, &t)?;
        }
        terms.insert("mse".into(), json!(sum / (a.mse.len() / 2) as f64));
    }
    if !a.clip.is_empty() {
        terms.insert("clip".into(), json!(paired_rows(&a.clip, EmbeddingDistance::CosineLoss)?));
    }
    if !a.lpips.is_empty() {
        terms.insert("lpips".into(), json!(paired_rows(&a.lpips, EmbeddingDistance::L2)?));
    }
    if !a.center.is_empty() {
        let (p, r): (Scene, Scene) = (load_ply(&a.center[0])?, load_ply(&a.center[1])?);
        terms.insert("center".into(), json!(smooth_l1_centers(&p.centers(), &r.centers(), a.beta)?));
    }
    if !a.geom.is_empty() {
        let views: Vec<_> = a.geom.iter().map(|p| load_ply::<f64>(p).map(|s| s.centers())).collect::<Result<_>>()?;
        terms.insert("geom".into(), json!(geom_consistency_loss(&views, a.sample_size, ctx.seed)?));
    }
    if terms.is_empty() {
        return Err(Error::Invalid("no loss terms requested".into()));
    }
    let get = |k: &str| terms.get(k).and_then(Value::as_f64);
    if let (Some(clip), Some(lpips), Some(mse), Some(center), Some(geom)) = (get("clip"), get("lpips"), get("mse"), get("center"), get("geom")) {
        let report = total_loss(&LossTerms { clip, lpips, mse, center, geom }, &ctx.config.loss_weights)?;
        terms.insert("total".into(), json!(report.total));
    }
    emit(ctx, "loss", &a.out, &Value::Object(terms))
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long)]
    pub rendered: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// Prompt embedding container; its first row is scored against every rendered row.
    #[arg(long)]
    pub prompt: Option<PathBuf>,
    /// Group rows by the label prefix before `/` and average per group.
    #[arg(long)]
    pub by_scene: bool,
    /// With --by-scene, pool all groups instead of averaging.
    #[arg(long)]
    pub pooled: bool,
    #[arg(long)]
    pub subset_size: Option<usize>,
    #[arg(long)]
    pub n_subsets: Option<usize>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn by_prefix(set: &Features) -> Result<BTreeMap<String, Features>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, l) in set.labels().iter().enumerate() {
        let key = l.split_once('/').map_or(l.as_str(), |(k, _)| k);
        groups.entry(key.to_string()).or_default().push(i);
    }
    Ok(groups.into_iter().map(|(k, idx)| (k, set.select(&idx))).collect())
}

pub fn metrics(ctx: &Ctx, a: MetricsArgs) -> Result<()> {
    let mut cfg = ctx.config.metrics;
    cfg.subset_size = a.subset_size.unwrap_or(cfg.subset_size);
    cfg.n_subsets = a.n_subsets.unwrap_or(cfg.n_subsets);
    cfg.pooled = cfg.pooled || a.pooled;
    let x: Features = load_feature_set(&a.rendered)?;
    let y: Features = load_feature_set(&a.reference)?;
    let mut out = Map::new();
    if a.by_scene {
        let (gx, mut gy) = (by_prefix(&x)?, by_prefix(&y)?);
        let mut per = BTreeMap::new();
        for (k, xs) in gx {
            let ys = gy.remove(&k).ok_or_else(|| Error::Invalid(format!("scene {k:?} has no reference features")))?;
            per.insert(k, (xs, ys));
        }
        if let Some(k) = gy.keys().next() {
            return Err(Error::Invalid(format!("scene {k:?} has no rendered features")));
        }
        let r = scene_conditioned_metrics(&per, &cfg, ctx.seed)?;
        out.insert("c_fid".into(), json!(r.c_fid));
        out.insert("c_kid".into(), json!(r.c_kid));
        if !cfg.pooled {
            out.insert("per_scene".into(), serde_json::to_value(&r.per_scene).expect("serializable"));
        }
    } else {
        out.insert("fid".into(), json!(frechet_distance(&x, &y)?));
        let m = cfg.subset_size.min(x.len()).min(y.len());
        out.insert("kid".into(), json!(kernel_mmd(&x, &y, m, cfg.n_subsets, ctx.seed)?));
    }
    if let Some(p) = &a.prompt {
        let prompt: Features = load_feature_set(p)?;
        if prompt.is_empty() {
            return Err(Error::Invalid("empty prompt container".into()));
        }
        let images: Vec<&[f64]> = x.vectors().collect();
        out.insert("clip_t2i".into(), json!(clip_t2i(prompt.vector(0), &images)?));
    }
    emit(ctx, "metrics", &a.out, &Value::Object(out))
}
