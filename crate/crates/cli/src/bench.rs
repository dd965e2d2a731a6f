use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde_json::json;
use splatkit_core::bench::{
    build_manifest, evaluate_run, parse_prompts, parse_timings, validate_manifest, EditManifest, EvalFeatures, ManifestTargets,
};
use splatkit_core::io::load_feature_set;
use splatkit_core::Result;

use crate::output::{pretty, read_text, sidecar, write};
use crate::Ctx;

#[derive(Subcommand, Debug)]
pub enum BenchCommand {
    /// Build a manifest from scene directories and a prompts file.
    MakeManifest(MakeArgs),
    /// Check a manifest and report violations and category counts.
    Validate(ValidateArgs),
    /// Score a run against a manifest.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug)]
pub struct MakeArgs {
    /// Directory holding one subdirectory of PNG views per scene.
    #[arg(long)]
    pub scenes: PathBuf,
    /// JSON list of {scene_id, prompt, category, seed?, editor_tag?}.
    #[arg(long)]
    pub prompts: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub n_scenes: usize,
    #[arg(long, default_value_t = 5)]
    pub prompts_per_scene: usize,
    /// Output path (default: manifest.json inside the scenes directory).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub manifest: PathBuf,
    /// Directory manifest paths are relative to (default: the manifest's directory).
    #[arg(long)]
    pub root: Option<PathBuf>,
    /// Require exact category balance.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    pub manifest: PathBuf,
    /// Directory with one subdirectory of rendered PNGs per instance id.
    #[arg(long)]
    pub renders: PathBuf,
    /// Prompt embeddings labelled by instance id.
    #[arg(long)]
    pub prompt_features: PathBuf,
    /// Rendered-view embeddings labelled `<instance>/<view>`.
    #[arg(long)]
    pub rendered_features: PathBuf,
    /// Reference-view embeddings labelled `<scene>/<view>`.
    #[arg(long)]
    pub reference_features: PathBuf,
    /// JSON object {instance id: seconds per view}.
    #[arg(long)]
    pub timings: PathBuf,
    #[arg(long)]
    pub subset_size: Option<usize>,
    #[arg(long)]
    pub n_subsets: Option<usize>,
    #[arg(long)]
    pub pooled: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

fn manifest_root(manifest: &Path, root: Option<PathBuf>) -> PathBuf {
    root.unwrap_or_else(|| manifest.parent().map(Path::to_path_buf).unwrap_or_default())
}

pub fn run(ctx: &Ctx, cmd: BenchCommand) -> Result<()> {
    match cmd {
        BenchCommand::MakeManifest(a) => {
            let prompts = parse_prompts(&read_text(&a.prompts)?)?;
            let targets = ManifestTargets { scenes: a.n_scenes, prompts_per_scene: a.prompts_per_scene };
            let m = build_manifest(&a.scenes, &prompts, targets, ctx.seed)?;
            let out = a.out.unwrap_or_else(|| a.scenes.join("manifest.json"));
            write(&out, m.to_json())?;
            sidecar(&out, "bench make-manifest", ctx.seed, json!({ "targets": targets }))?;
            println!("{} instances from {} scenes", m.instances.len(), m.scenes.len());
            Ok(())
        }
        BenchCommand::Validate(a) => {
            let m = EditManifest::load(&a.manifest)?;
            let report = validate_manifest(&m, &manifest_root(&a.manifest, a.root), a.strict);
            let text = pretty(&report);
            match &a.out {
                Some(p) => write(p, &text)?,
                None => print!("{text}"),
            }
            if !report.is_valid() {
                eprintln!("{} violations", report.violations.len());
            }
            Ok(())
        }
        BenchCommand::Evaluate(a) => {
            let m = EditManifest::load(&a.manifest)?;
            let features = EvalFeatures {
                prompts: load_feature_set(&a.prompt_features)?,
                rendered: load_feature_set(&a.rendered_features)?,
                reference: load_feature_set(&a.reference_features)?,
            };
            let timings = parse_timings(&read_text(&a.timings)?)?;
            let mut cfg = ctx.config.metrics;
            cfg.subset_size = a.subset_size.unwrap_or(cfg.subset_size);
            cfg.n_subsets = a.n_subsets.unwrap_or(cfg.n_subsets);
            cfg.pooled = cfg.pooled || a.pooled;
            let report = evaluate_run(&m, &a.renders, &features, &timings, &cfg, ctx.seed)?;
            write(&a.out, report.to_json())?;
            sidecar(&a.out, "bench evaluate", ctx.seed, json!({ "metrics": cfg }))?;
            print!("{}", report.table());
            Ok(())
        }
    }
}
