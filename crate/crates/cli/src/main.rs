//! `splatkit`: batch front end for proposal filtering, recoloring,
//! rendering, losses, metrics and the editing benchmark.

mod bench;
mod config;
mod eval;
mod masks;
mod output;
mod scene;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use splatkit_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "splatkit", version, about = "Deterministic editing-supervision and splat toolkit")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with per-module settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Filter segmenter proposals and assign persistent ids.
    Filter(masks::FilterArgs),
    /// Run identity-drift frame acceptance over per-frame logit containers.
    Accept(masks::AcceptArgs),
    /// Recolor tracked regions across a frame sequence.
    Recolor(masks::RecolorArgs),
    /// Render a PLY scene to PNG.
    Render(scene::RenderArgs),
    /// Concatenate per-view PLY scenes.
    Fuse(scene::FuseArgs),
    /// Seeded Bernoulli removal of one view's Gaussians.
    Drop(scene::DropArgs),
    /// Compute loss terms.
    Loss(eval::LossArgs),
    /// Compute FID/KID/CLIP metrics over feature containers.
    Metrics(eval::MetricsArgs),
    /// Benchmark manifests and evaluation.
    #[command(subcommand)]
    Bench(bench::BenchCommand),
}

pub struct Ctx {
    pub seed: u64,
    pub config: config::RunConfig,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Invalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    let config = match &cli.config {
        Some(p) => config::RunConfig::load(p)?,
        None => config::RunConfig::default(),
    };
    let ctx = Ctx { seed: cli.seed, config };
    match cli.command {
        Command::Filter(a) => masks::filter(&ctx, a),
        Command::Accept(a) => masks::accept(&ctx, a),
        Command::Recolor(a) => masks::recolor(&ctx, a),
        Command::Render(a) => scene::render(&ctx, a),
        Command::Fuse(a) => scene::fuse(&ctx, a),
        Command::Drop(a) => scene::drop(&ctx, a),
        Command::Loss(a) => eval::loss(&ctx, a),
        Command::Metrics(a) => eval::metrics(&ctx, a),
        Command::Bench(c) => bench::run(&ctx, c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", output::error_json(&e));
            ExitCode::FAILURE
        }
    }
}
