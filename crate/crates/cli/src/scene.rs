use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use splatkit_core::io::{save_image, CameraPose, IntrinsicsSpec};
use splatkit_core::splat::{drop_decision, drop_view, fuse_scenes, load_ply, rasterize, save_ply};
use splatkit_core::{Error, Result, Scene};

use crate::output::sidecar;
use crate::Ctx;

fn parse_rgb(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|_| "expected r,g,b".to_string())
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    pub ply: PathBuf,
    /// World-to-camera pose: qw qx qy qz tx ty tz.
    #[arg(long, num_args = 7, allow_negative_numbers = true)]
    pub pose: Option<Vec<f64>>,
    /// fx fy cx cy (default: focal = width, centered principal point).
    #[arg(long, num_args = 4, allow_negative_numbers = true)]
    pub intrinsics: Option<Vec<f64>>,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    /// Background color r,g,b in [0, 1].
    #[arg(long, value_parser = parse_rgb, default_value = "0,0,0")]
    pub bg: [f64; 3],
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn render(ctx: &Ctx, a: RenderArgs) -> Result<()> {
    let scene: Scene = load_ply(&a.ply)?;
    let pose = match &a.pose {
        Some(p) => CameraPose::new([p[0], p[1], p[2], p[3]], [p[4], p[5], p[6]])?,
        None => CameraPose::identity(),
    };
    let k = match &a.intrinsics {
        Some(v) => IntrinsicsSpec::new(v[0], v[1], v[2], v[3], a.width, a.height)?,
        None => IntrinsicsSpec::centered(a.width, a.height),
    };
    let cfg = ctx.config.render.to_config(a.bg);
    cfg.validate()?;
    let img = rasterize(&scene, &pose, &k, &cfg)?;
    save_image(&img, &a.out)?;
    sidecar(
        &a.out,
        "render",
        ctx.seed,
        json!({ "ply": a.ply, "pose": pose.rotation_wxyz().iter().chain(pose.translation().iter()).collect::<Vec<_>>(),
                "intrinsics": [k.fx, k.fy, k.cx, k.cy], "width": a.width, "height": a.height, "background": a.bg }),
    )?;
    println!("rendered {} Gaussians to {}", scene.len(), a.out.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct FuseArgs {
    /// Per-view PLY scenes, in view order.
    #[arg(required = true)]
    pub plys: Vec<PathBuf>,
    /// Keep `source_view` tags from the files instead of tagging by position.
    #[arg(long)]
    pub keep_tags: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn fuse(ctx: &Ctx, a: FuseArgs) -> Result<()> {
    let scenes: Vec<Scene> = a
        .plys
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let s: Scene = load_ply(p)?;
            Ok(if a.keep_tags { s } else { s.tag_view(i as u32) })
        })
        .collect::<Result<_>>()?;
    let fused = fuse_scenes(&scenes)?;
    save_ply(&fused, &a.out)?;
    sidecar(&a.out, "fuse", ctx.seed, json!({ "inputs": a.plys, "keep_tags": a.keep_tags }))?;
    println!("fused {} scenes into {} Gaussians", scenes.len(), fused.len());
    Ok(())
}

#[derive(Args, Debug)]
pub struct DropArgs {
    pub ply: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub view: u32,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn drop(ctx: &Ctx, a: DropArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.p) {
        return Err(Error::Invalid(format!("drop probability {} outside [0, 1]", a.p)));
    }
    let scene: Scene = load_ply(&a.ply)?;
    let out = drop_view(&scene, a.view, a.p, ctx.seed)?;
    let dropped = drop_decision(a.p, ctx.seed);
    save_ply(&out, &a.out)?;
    sidecar(&a.out, "drop", ctx.seed, json!({ "view": a.view, "p": a.p, "dropped": dropped }))?;
    println!("{}", json!({ "dropped": dropped, "remaining": out.len() }));
    Ok(())
}
