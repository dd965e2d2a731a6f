use std::cmp::Ordering;

use nalgebra::Vector2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{CameraPose, ImageBuffer, IntrinsicsSpec};
use crate::num::Real;
use crate::splat::gaussian::GaussianScene;
use crate::splat::project::{project_gaussian, RenderConfig};
use crate::splat::sh::evaluate_sh;

/// Smallest alpha a splat may contribute at a pixel.
pub const MIN_ALPHA: f64 = 1.0 / 255.0;

/// A projected, shaded splat ready for compositing.
#[derive(Debug, Clone, Copy)]
pub struct ShadedSplat<T: Real> {
    pub index: usize,
    pub depth: T,
    pub mean: Vector2<T>,
    /// Upper triangle `(a, b, c)` of the inverse 2D covariance.
    pub conic: [T; 3],
    pub opacity: T,
    /// SH color clamped to `[0, 1]`.
    pub color: [T; 3],
    /// Largest eigenvalue of the 2D covariance.
    pub max_variance: T,
}

impl<T: Real> ShadedSplat<T> {
    /// Alpha this splat contributes at a pixel center, before the contribution floor.
    #[inline]
    pub fn alpha_at(&self, px: T, py: T, alpha_clamp: T) -> T {
        let dx = px - self.mean.x;
        let dy = py - self.mean.y;
        let [a, b, c] = self.conic;
        let power = T::lit(-0.5) * (a * dx * dx + c * dy * dy) - b * dx * dy;
        (self.opacity * power.exp()).min(alpha_clamp)
    }
}

/// Projects and shades every primitive, returning splats in compositing
/// order: ascending camera depth, ties by primitive index. Culled, singular
/// and invisible splats are dropped.
pub fn prepare_splats<T: Real>(
    scene: &GaussianScene<T>,
    pose: &CameraPose<T>,
    k: &IntrinsicsSpec<T>,
    cfg: &RenderConfig<T>,
) -> Result<Vec<ShadedSplat<T>>> {
    let eye = pose.center();
    let min_alpha = T::lit(MIN_ALPHA);
    let shaded: Vec<Option<ShadedSplat<T>>> = scene
        .primitives
        .par_iter()
        .enumerate()
        .map(|(index, g)| {
            if g.opacity < min_alpha {
                return Ok(None);
            }
            let Some(s) = project_gaussian(g, pose, k, cfg) else {
                return Ok(None);
            };
            let Some(conic) = s.conic() else {
                return Ok(None);
            };
            let dir = g.center - eye;
            let norm = dir.norm();
            let dir = if norm > T::zero() { dir / norm } else { nalgebra::Vector3::z() };
            let color = evaluate_sh(&g.sh, &dir, scene.sh_degree)?.map(|c| c.clamp(T::zero(), T::one()));
            let (a, b, c) = (s.cov2d[(0, 0)], s.cov2d[(0, 1)], s.cov2d[(1, 1)]);
            let half = T::lit(0.5);
            let max_variance = (a + c) * half + (((a - c) * half).powi(2) + b * b).sqrt();
            Ok(Some(ShadedSplat {
                index,
                depth: s.depth,
                mean: s.mean,
                conic: [conic[(0, 0)], conic[(0, 1)], conic[(1, 1)]],
                opacity: g.opacity,
                color,
                max_variance,
            }))
        })
        .collect::<Result<_>>()?;
    let mut splats: Vec<ShadedSplat<T>> = shaded.into_iter().flatten().collect();
    splats.sort_by(|a, b| a.depth.partial_cmp(&b.depth).unwrap_or(Ordering::Equal).then(a.index.cmp(&b.index)));
    Ok(splats)
}

/// Inclusive pixel index bounds `[x0, x1] x [y0, y1]` outside which the splat
/// provably stays below the contribution floor, or `None` if it misses the image.
fn pixel_bounds<T: Real>(s: &ShadedSplat<T>, width: usize, height: usize) -> Option<[usize; 4]> {
    // alpha >= 1/255 needs d^T conic d <= 2 ln(255 opacity); that ellipse fits
    // in a disc of radius sqrt(2 ln(255 opacity) * max_variance)
    let q = (T::lit(2.0) * (s.opacity * T::lit(255.0)).ln()).max(T::zero());
    let r = (q * s.max_variance).sqrt().as_f64() + 1.0;
    let (mx, my) = (s.mean.x.as_f64() - 0.5, s.mean.y.as_f64() - 0.5);
    let (w, h) = (width as f64, height as f64);
    let x0 = (mx - r).floor().max(0.0);
    let x1 = (mx + r).ceil().min(w - 1.0);
    let y0 = (my - r).floor().max(0.0);
    let y1 = (my + r).ceil().min(h - 1.0);
    if !(x0 <= x1 && y0 <= y1) {
        return None;
    }
    Some([x0 as usize, x1 as usize, y0 as usize, y1 as usize])
}

/// Front-to-back compositing of the splats covering one pixel.
#[inline]
fn shade_pixel<'a, T: Real>(
    x: usize,
    y: usize,
    list: impl Iterator<Item = &'a ShadedSplat<T>>,
    cfg: &RenderConfig<T>,
) -> [T; 3] {
    let px = T::lit(x as f64 + 0.5);
    let py = T::lit(y as f64 + 0.5);
    let min_alpha = T::lit(MIN_ALPHA);
    let mut transmittance = T::one();
    let mut rgb = [T::zero(); 3];
    for s in list {
        let alpha = s.alpha_at(px, py, cfg.alpha_clamp);
        if alpha < min_alpha {
            continue;
        }
        let w = alpha * transmittance;
        for c in 0..3 {
            rgb[c] += s.color[c] * w;
        }
        transmittance *= T::one() - alpha;
        if transmittance < cfg.transmittance_floor {
            break;
        }
    }
    for c in 0..3 {
        rgb[c] += transmittance * cfg.background[c];
    }
    rgb
}

/// Renders the scene with tile binning.
///
/// Pixels only ever see splats in global depth order and skip exactly those
/// below the contribution floor, so the output does not depend on the tile
/// size or the number of worker threads.
pub fn rasterize<T: Real>(
    scene: &GaussianScene<T>,
    pose: &CameraPose<T>,
    k: &IntrinsicsSpec<T>,
    cfg: &RenderConfig<T>,
) -> Result<ImageBuffer<T>> {
    cfg.validate()?;
    scene.validate()?;
    let (width, height) = (k.width, k.height);
    if width == 0 || height == 0 {
        return Err(Error::Invalid("image size must be positive".into()));
    }
    let splats = prepare_splats(scene, pose, k, cfg)?;
    let ts = cfg.tile_size;
    let tiles_x = width.div_ceil(ts);
    let tiles_y = height.div_ceil(ts);
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); tiles_x * tiles_y];
    for (i, s) in splats.iter().enumerate() {
        let Some([x0, x1, y0, y1]) = pixel_bounds(s, width, height) else {
            continue;
        };
        for ty in y0 / ts..=y1 / ts {
            for tx in x0 / ts..=x1 / ts {
                bins[ty * tiles_x + tx].push(i as u32);
            }
        }
    }
    let tiles: Vec<(usize, Vec<[T; 3]>)> = bins
        .par_iter()
        .enumerate()
        .map(|(t, bin)| {
            let (tx, ty) = (t % tiles_x, t / tiles_x);
            let (xs, ys) = (tx * ts, ty * ts);
            let (xe, ye) = ((xs + ts).min(width), (ys + ts).min(height));
            let mut out = Vec::with_capacity((xe - xs) * (ye - ys));
            for y in ys..ye {
                for x in xs..xe {
                    out.push(shade_pixel(x, y, bin.iter().map(|&i| &splats[i as usize]), cfg));
                }
            }
            (t, out)
        })
        .collect();
    let mut data = vec![T::zero(); width * height * 3];
    for (t, pixels) in tiles {
        let (tx, ty) = (t % tiles_x, t / tiles_x);
        let (xs, ys) = (tx * ts, ty * ts);
        let xe = (xs + ts).min(width);
        let tw = xe - xs;
        for (j, rgb) in pixels.into_iter().enumerate() {
            let (x, y) = (xs + j % tw, ys + j / tw);
            data[(y * width + x) * 3..(y * width + x) * 3 + 3].copy_from_slice(&rgb);
        }
    }
    Ok(ImageBuffer::from_clamped(width, height, data))
}
