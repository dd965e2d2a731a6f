//! Test-only oracles and fixture generators shared by integration targets.
#![allow(dead_code)]

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splatkit_core::io::{CameraPose, ImageBuffer, IntrinsicsSpec};
use splatkit_core::splat::{GaussianPrimitive, GaussianScene, RenderConfig};

pub const C0: f64 = 0.28209479177387814;
pub const C1: f64 = 0.4886025119029199;

fn quat_to_mat([w, x, y, z]: [f64; 4]) -> [[f64; 3]; 3] {
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn transpose(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

struct OracleSplat {
    depth: f64,
    index: usize,
    mx: f64,
    my: f64,
    inv: [f64; 3],
    opacity: f64,
    color: [f64; 3],
}

/// Straight per-pixel compositor: every splat is tested at every pixel, no
/// tiles, no early termination. Supports SH degree 0 and 1.
pub fn brute_force_render(
    scene: &GaussianScene<f64>,
    pose: &CameraPose<f64>,
    k: &IntrinsicsSpec<f64>,
    cfg: &RenderConfig<f64>,
) -> Vec<[f64; 3]> {
    assert!(scene.sh_degree <= 1);
    let w = quat_to_mat(pose.rotation_wxyz());
    let tr = pose.translation();
    // camera center c = -Wᵀ t
    let wt = transpose(&w);
    let eye: [f64; 3] = std::array::from_fn(|i| -(0..3).map(|j| wt[i][j] * tr[j]).sum::<f64>());
    let mut splats = Vec::new();
    for (index, g) in scene.primitives.iter().enumerate() {
        let mu = [g.center.x, g.center.y, g.center.z];
        let t: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| w[i][j] * mu[j]).sum::<f64>() + tr[i]);
        if t[2] <= cfg.z_near {
            continue;
        }
        let r = quat_to_mat(g.rotation_wxyz());
        let mut rs = r;
        for row in rs.iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= g.scale[j] * g.scale[j];
            }
        }
        let sigma = mat_mul(&rs, &transpose(&r));
        let cam = mat_mul(&mat_mul(&w, &sigma), &wt);
        let (fx, fy, z) = (k.fx, k.fy, t[2]);
        let j = [[fx / z, 0.0, -fx * t[0] / (z * z)], [0.0, fy / z, -fy * t[1] / (z * z)]];
        let mut c2 = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                c2[a][b] = (0..3).map(|p| (0..3).map(|q| j[a][p] * cam[p][q] * j[b][q]).sum::<f64>()).sum();
            }
        }
        let (a, b, c) = (c2[0][0] + cfg.dilation, 0.5 * (c2[0][1] + c2[1][0]), c2[1][1] + cfg.dilation);
        let det = a * c - b * b;
        if det <= 1e-12 {
            continue;
        }
        let d = [mu[0] - eye[0], mu[1] - eye[1], mu[2] - eye[2]];
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let d = d.map(|v| v / n);
        let color = std::array::from_fn(|ch| {
            let mut v = 0.5 + C0 * g.sh[0][ch];
            if scene.sh_degree == 1 {
                v += -C1 * d[1] * g.sh[1][ch] + C1 * d[2] * g.sh[2][ch] - C1 * d[0] * g.sh[3][ch];
            }
            v.clamp(0.0, 1.0)
        });
        splats.push(OracleSplat {
            depth: z,
            index,
            mx: fx * t[0] / z + k.cx,
            my: fy * t[1] / z + k.cy,
            inv: [c / det, -b / det, a / det],
            opacity: g.opacity,
            color,
        });
    }
    splats.sort_by(|p, q| p.depth.total_cmp(&q.depth).then(p.index.cmp(&q.index)));
    let mut out = Vec::with_capacity(k.width * k.height);
    for y in 0..k.height {
        for x in 0..k.width {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let mut trans = 1.0;
            let mut acc = [0.0; 3];
            for s in &splats {
                let (dx, dy) = (px - s.mx, py - s.my);
                let q = s.inv[0] * dx * dx + 2.0 * s.inv[1] * dx * dy + s.inv[2] * dy * dy;
                let alpha = (s.opacity * (-0.5 * q).exp()).min(cfg.alpha_clamp);
                if alpha < 1.0 / 255.0 {
                    continue;
                }
                for ch in 0..3 {
                    acc[ch] += s.color[ch] * alpha * trans;
                }
                trans *= 1.0 - alpha;
            }
            out.push(std::array::from_fn(|ch| acc[ch] + trans * cfg.background[ch]));
        }
    }
    out
}

/// Random scene in front of a unit-focal 64x64 camera.
pub fn random_scene(seed: u64, max_n: usize, sh_degree: usize) -> GaussianScene<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_n);
    let prims = (0..n)
        .map(|i| {
            let center = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(2.0..6.0));
            let scale = Vector3::from_fn(|_, _| rng.random_range(0.02..0.3));
            let mut g = GaussianPrimitive::with_color(center, scale, rng.random::<f64>(), [rng.random(), rng.random(), rng.random()]);
            let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
            g.set_rotation(q.map(|v| v / norm)).unwrap();
            for _ in 0..sh_degree * 3 {
                g.sh.push(std::array::from_fn(|_| rng.random_range(-0.5..0.5)));
            }
            g.source_view = (i % 2) as u32;
            g
        })
        .collect();
    GaussianScene::new(prims, sh_degree).unwrap()
}

pub fn random_pose(seed: u64) -> CameraPose<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let axis = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let rot = UnitQuaternion::from_scaled_axis(axis.normalize() * rng.random_range(0.0..0.15));
    let q = rot.quaternion();
    let t = [rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(0.0..0.5)];
    CameraPose::new([q.w, q.i, q.j, q.k], t).unwrap()
}

pub fn camera64() -> IntrinsicsSpec<f64> {
    IntrinsicsSpec::new(64.0, 64.0, 32.0, 32.0, 64, 64).unwrap()
}

pub fn max_abs_diff(img: &ImageBuffer<f64>, oracle: &[[f64; 3]]) -> f64 {
    img.pixels()
        .zip(oracle)
        .flat_map(|(p, o)| (0..3).map(move |c| (p[c] - o[c]).abs()))
        .fold(0.0, f64::max)
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix (row-major, n x n).
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

fn mat(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect()
}

fn mm(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    mat(a.len(), |i, j| (0..a.len()).map(|k| a[i][k] * b[k][j]).sum())
}

fn sqrt_psd(a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let (vals, v) = jacobi_eigen(a);
    mat(n, |i, j| (0..n).map(|k| v[i][k] * vals[k].max(0.0).sqrt() * v[j][k]).sum())
}

fn mean_cov(x: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, d) = (x.len(), x[0].len());
    let mu: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let cov = mat(d, |a, b| x.iter().map(|r| (r[a] - mu[a]) * (r[b] - mu[b])).sum::<f64>() / (n - 1) as f64);
    (mu, cov)
}

/// Fréchet distance computed with the Jacobi solver above.
pub fn oracle_fid(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let (mx, sx) = mean_cov(x);
    let (my, sy) = mean_cov(y);
    let d = mx.len();
    let h = sqrt_psd(sx.clone());
    let inner = mm(&mm(&h, &sy), &h);
    let inner = mat(d, |i, j| 0.5 * (inner[i][j] + inner[j][i]));
    let cross: f64 = jacobi_eigen(inner).0.iter().map(|l| l.max(0.0).sqrt()).sum();
    let mean_term: f64 = mx.iter().zip(&my).map(|(a, b)| (a - b).powi(2)).sum();
    let tr = |m: &Vec<Vec<f64>>| (0..d).map(|i| m[i][i]).sum::<f64>();
    (mean_term + tr(&sx) + tr(&sy) - 2.0 * cross).max(0.0)
}

/// Unbiased MMD^2 with the cubic polynomial kernel by explicit sums.
pub fn oracle_mmd(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let d = x[0].len() as f64;
    let k = |a: &[f64], b: &[f64]| (a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>() / d + 1.0).powi(3);
    let (m, n) = (x.len() as f64, y.len() as f64);
    let mut kxx = 0.0;
    for (i, a) in x.iter().enumerate() {
        for (j, b) in x.iter().enumerate() {
            if i != j {
                kxx += k(a, b);
            }
        }
    }
    let mut kyy = 0.0;
    for (i, a) in y.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            if i != j {
                kyy += k(a, b);
            }
        }
    }
    let mut kxy = 0.0;
    for a in x {
        for b in y {
            kxy += k(a, b);
        }
    }
    kxx / (m * (m - 1.0)) + kyy / (n * (n - 1.0)) - 2.0 * kxy / (m * n)
}

/// Correlated Gaussian samples: `n` vectors of dimension `d`.
pub fn gaussian_rows(seed: u64, n: usize, d: usize, shift: f64) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.3 / (1 + i + j) as f64 }).collect()).collect();
    (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            (0..d).map(|i| (0..d).map(|j| mix[i][j] * z[j]).sum::<f64>() + shift).collect()
        })
        .collect()
}

pub fn feature_set(rows: &[Vec<f64>]) -> splatkit_core::io::FeatureSet<f64> {
    splatkit_core::io::FeatureSet::unlabeled(rows[0].len(), rows.to_vec()).unwrap()
}

/// Random orthogonal matrix via Gram-Schmidt.
pub fn random_orthogonal(seed: u64, d: usize) -> Vec<Vec<f64>> {
    let rows = gaussian_rows(seed, d, d, 0.0);
    let mut q: Vec<Vec<f64>> = Vec::new();
    for mut r in rows {
        for b in &q {
            let dot: f64 = r.iter().zip(b).map(|(a, c)| a * c).sum();
            for (x, y) in r.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let n = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        q.push(r.into_iter().map(|v| v / n).collect());
    }
    q
}

pub fn rotate(rows: &[Vec<f64>], q: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| q.iter().map(|qi| qi.iter().zip(r).map(|(a, b)| a * b).sum()).collect()).collect()
}

/// Symmetric Chamfer-L1 by explicit double loops.
pub fn oracle_chamfer(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let directed = |from: &[[f64; 3]], to: &[[f64; 3]]| {
        let mut total = 0.0;
        for p in from {
            let mut best = f64::INFINITY;
            for q in to {
                let d = (p[0] - q[0]).abs() + (p[1] - q[1]).abs() + (p[2] - q[2]).abs();
                if d < best {
                    best = d;
                }
            }
            total += best;
        }
        total / from.len() as f64
    };
    directed(a, b) + directed(b, a)
}

pub fn random_points(seed: u64, n: usize) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| std::array::from_fn(|_| rng.random_range(-3.0..3.0))).collect()
}

pub mod bench_fixture {
    use std::collections::BTreeMap;
    use std::path::Path;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use splatkit_core::bench::{EditCategory, EditManifest, EvalFeatures, PromptEntry, Timings};
    use splatkit_core::io::{save_image, FeatureSet, ImageBuffer};

    pub const DIM: usize = 8;

    /// Writes `scenes` scene directories with `views` tiny PNGs each under
    /// `root/scenes` and returns the prompt list, categories cycling.
    pub fn write_scenes(root: &Path, scenes: usize, views: usize, per_scene: usize) -> Vec<PromptEntry> {
        for s in 0..scenes {
            let dir = root.join("scenes").join(format!("scene{s:02}"));
            std::fs::create_dir_all(&dir).unwrap();
            for v in 0..views {
                let c = (s * views + v) as f64 / (scenes * views) as f64;
                save_image(&ImageBuffer::<f64>::filled(8, 6, [c, 1.0 - c, 0.5]), dir.join(format!("view{v:02}.png"))).unwrap();
            }
        }
        (0..scenes * per_scene)
            .map(|i| PromptEntry {
                scene_id: format!("scene{:02}", i / per_scene),
                prompt: format!("edit number {i}"),
                category: EditCategory::ALL[i % 4],
                seed: None,
                editor_tag: Some("fixture".into()),
            })
            .collect()
    }

    fn gaussian(rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..DIM).map(|_| StandardNormal.sample(rng)).collect()
    }

    /// Rendered embeddings equal to each scene's reference embeddings, one
    /// rendered PNG per view, and constant timings.
    pub fn write_run(root: &Path, m: &EditManifest, views: usize, time: f64) -> (EvalFeatures, Timings) {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut reference: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
        let (mut ref_rows, mut ref_labels) = (Vec::new(), Vec::new());
        for s in &m.scenes {
            let rows: Vec<Vec<f64>> = (0..views).map(|_| gaussian(&mut rng)).collect();
            for (v, r) in rows.iter().enumerate() {
                ref_rows.push(r.clone());
                ref_labels.push(format!("{}/{v}", s.id));
            }
            reference.insert(s.id.clone(), rows);
        }
        let (mut p_rows, mut p_labels, mut r_rows, mut r_labels) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut timings = Timings::new();
        for inst in &m.instances {
            p_rows.push(gaussian(&mut rng));
            p_labels.push(inst.id.clone());
            let dir = root.join("renders").join(&inst.id);
            std::fs::create_dir_all(&dir).unwrap();
            for (v, r) in reference[&inst.scene_id].iter().enumerate() {
                r_rows.push(r.clone());
                r_labels.push(format!("{}/{v}", inst.id));
                save_image(&ImageBuffer::<f64>::filled(8, 6, [0.2, 0.3, 0.4]), dir.join(format!("view{v:02}.png"))).unwrap();
            }
            timings.insert(inst.id.clone(), time);
        }
        let f = EvalFeatures {
            prompts: FeatureSet::new(DIM, p_rows, p_labels).unwrap(),
            rendered: FeatureSet::new(DIM, r_rows, r_labels).unwrap(),
            reference: FeatureSet::new(DIM, ref_rows, ref_labels).unwrap(),
        };
        (f, timings)
    }
}
