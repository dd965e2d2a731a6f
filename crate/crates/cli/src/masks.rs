use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;
use splatkit_core::io::{image_dimensions, load_feature_set, load_image, save_image};
use splatkit_core::mask::{accept_frames, filter_proposals, load_proposals, TrackedMaskSet, DEFAULT_ACCEPT_THRESHOLD};
use splatkit_core::recolor::{plan_regions, recolor_sequence, AugConfig, DEFAULT_EPS};
use splatkit_core::{Error, Image, Result};

use crate::output::{files_with_ext, pngs_in, pretty, provenance, sidecar, stem, write};
use crate::Ctx;

#[derive(Args, Debug)]
pub struct FilterArgs {
    /// Proposals JSON.
    pub proposals: PathBuf,
    #[arg(long)]
    pub width: u32,
    #[arg(long)]
    pub height: u32,
    #[arg(long)]
    pub a_min: Option<u64>,
    #[arg(long)]
    pub s_min: Option<f64>,
    #[arg(long)]
    pub q_min: Option<f64>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub m_edge: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn filter(ctx: &Ctx, a: FilterArgs) -> Result<()> {
    let mut cfg = ctx.config.filter;
    macro_rules! over {
        ($($f:ident),*) => { $(if let Some(v) = a.$f { cfg.$f = v; })* };
    }
    over!(a_min, s_min, q_min, r_min, r_max, m_edge, n_max);
    cfg.validate()?;
    let proposals = load_proposals(&a.proposals)?;
    let size = (a.width, a.height);
    for p in &proposals {
        p.validate(size)?;
    }
    let kept = filter_proposals(&proposals, size, &cfg);
    write(&a.out, pretty(&kept))?;
    sidecar(&a.out, "filter", ctx.seed, json!({ "filter": cfg, "input": proposals.len(), "kept": kept.len() }))?;
    println!("kept {} of {} proposals", kept.len(), proposals.len());
    Ok(())
}

/// Loads `<dir>/<stem>.ftc` logits for each frame stem, in order.
fn tracked_sets(stems: &[String], mask_dir: &Path, width: usize, height: usize) -> Result<Vec<TrackedMaskSet<f64>>> {
    stems
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let path = mask_dir.join(format!("{s}.ftc"));
            if !path.is_file() {
                return Err(Error::MissingMask(i));
            }
            TrackedMaskSet::from_logits(i, &load_feature_set(&path)?, width, height)
        })
        .collect()
}

#[derive(Args, Debug)]
pub struct AcceptArgs {
    /// Directory of per-frame logit containers (`*.ftc`), ordered by name.
    pub logits: PathBuf,
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    #[arg(long, default_value_t = DEFAULT_ACCEPT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn accept(ctx: &Ctx, a: AcceptArgs) -> Result<()> {
    let stems: Vec<String> = files_with_ext(&a.logits, "ftc")?.iter().map(|p| stem(p)).collect();
    let frames = accept_frames(tracked_sets(&stems, &a.logits, a.width, a.height)?, a.threshold)?;
    let rows: Vec<_> = frames
        .iter()
        .zip(&stems)
        .map(|(f, s)| json!({ "frame": s, "index": f.frame_index, "accepted": f.accepted, "object_ids": f.object_ids() }))
        .collect();
    let accepted = frames.iter().filter(|f| f.accepted).count();
    write(&a.out, pretty(&json!({ "threshold": a.threshold, "frames": rows })))?;
    sidecar(&a.out, "accept", ctx.seed, json!({ "threshold": a.threshold }))?;
    println!("accepted {accepted} of {} frames", frames.len());
    Ok(())
}

#[derive(Args, Debug)]
pub struct RecolorArgs {
    /// Directory of frame PNGs, ordered by name.
    #[arg(long)]
    pub frames: PathBuf,
    /// Directory of `<frame stem>.ftc` logit containers.
    #[arg(long)]
    pub masks: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Use identity parameters for every region.
    #[arg(long)]
    pub identity: bool,
    #[arg(long, default_value_t = DEFAULT_ACCEPT_THRESHOLD)]
    pub threshold: f64,
}

pub fn recolor(ctx: &Ctx, a: RecolorArgs) -> Result<()> {
    let frame_paths = pngs_in(&a.frames)?;
    if frame_paths.is_empty() {
        return Err(Error::Invalid(format!("no PNG frames in {}", a.frames.display())));
    }
    let stems: Vec<String> = frame_paths.iter().map(|p| stem(p)).collect();
    let extra: Vec<String> = files_with_ext(&a.masks, "ftc")?.iter().map(|p| stem(p)).filter(|s| !stems.contains(s)).collect();
    if !extra.is_empty() {
        return Err(Error::SizeMismatch(format!("mask files without frames: {}", extra.join(", "))));
    }
    let (width, height) = image_dimensions(&frame_paths[0])?;
    for (i, p) in frame_paths.iter().enumerate() {
        if image_dimensions(p)? != (width, height) {
            return Err(Error::SizeMismatch(format!("frame {i} ({}) differs in size from frame 0", p.display())));
        }
    }
    let frames = accept_frames(tracked_sets(&stems, &a.masks, width, height)?, a.threshold)?;
    let cfg = if a.identity { AugConfig::identity() } else { ctx.config.aug };
    let (accepted, _): (Vec<_>, Vec<_>) = frames.iter().cloned().partition(|f| f.accepted);
    let images: Vec<Image> = accepted.iter().map(|f| load_image(&frame_paths[f.frame_index])).collect::<Result<_>>()?;
    let out = recolor_sequence(&images, &accepted, ctx.seed, &cfg, DEFAULT_EPS)?;

    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    for (f, img) in accepted.iter().zip(&out) {
        save_image(img, a.out.join(format!("{}.png", stems[f.frame_index])))?;
    }
    let ids = accepted.iter().flat_map(|f| f.object_ids().iter().copied());
    let plan = plan_regions::<f64>(ctx.seed, ids, &cfg)?;
    let digests: BTreeMap<String, String> = plan.iter().map(|(id, p)| (id.to_string(), p.digest())).collect();
    let frame_rows: Vec<_> = frames.iter().map(|f| json!({ "frame": stems[f.frame_index], "accepted": f.accepted })).collect();
    let prov = provenance(
        "recolor",
        ctx.seed,
        json!({ "identity": a.identity, "threshold": a.threshold, "aug": cfg, "frames": frame_rows, "region_digests": digests }),
    );
    write(&a.out.join("provenance.json"), pretty(&prov))?;
    println!("recolored {} of {} frames, {} regions", out.len(), frames.len(), digests.len());
    Ok(())
}
