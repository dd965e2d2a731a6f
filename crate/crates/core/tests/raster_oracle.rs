mod common;

use common::*;
use nalgebra::Vector3;
use splatkit_core::splat::{fuse_scenes, rasterize, GaussianPrimitive, GaussianScene, RenderConfig};

#[test]
fn default_early_stop_stays_within_its_floor() {
    // stopping at T < floor drops at most T * |c - background| <= floor
    let k = camera64();
    let cfg = RenderConfig { background: [0.1, 0.2, 0.3], ..Default::default() };
    let mut worst = 0.0f64;
    let mut over = 0;
    for seed in 0..100u64 {
        let scene = random_scene(seed, 200, (seed % 2) as usize);
        let pose = random_pose(seed);
        let img = rasterize(&scene, &pose, &k, &cfg).unwrap();
        let diff = max_abs_diff(&img, &brute_force_render(&scene, &pose, &k, &cfg));
        worst = worst.max(diff);
        if diff > 1e-5 { over += 1; }
    }
    eprintln!("worst oracle deviation {worst:e}, {over} scenes over 1e-5");
    assert!(worst <= cfg.transmittance_floor, "worst deviation {worst:e}");
}

#[test]
fn without_early_stop_matches_oracle_tightly() {
    let k = camera64();
    let cfg = RenderConfig { transmittance_floor: f64::MIN_POSITIVE, ..Default::default() };
    for seed in 0..100u64 {
        let scene = random_scene(seed, 200, (seed % 2) as usize);
        let pose = random_pose(seed);
        let img = rasterize(&scene, &pose, &k, &cfg).unwrap();
        let diff = max_abs_diff(&img, &brute_force_render(&scene, &pose, &k, &cfg));
        assert!(diff < 1e-12, "seed {seed}: {diff:e}");
    }
}

#[test]
fn tile_and_thread_sweeps_are_bit_identical() {
    let k = camera64();
    let scene = random_scene(7, 200, 1);
    let pose = random_pose(7);
    let base = rasterize(&scene, &pose, &k, &RenderConfig::default()).unwrap();
    for tile in [1, 3, 8, 16, 64, 100] {
        for threads in [1, 2, 7] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let cfg = RenderConfig { tile_size: tile, ..Default::default() };
            let img = pool.install(|| rasterize(&scene, &pose, &k, &cfg).unwrap());
            assert_eq!(img.as_slice(), base.as_slice(), "tile {tile} threads {threads}");
        }
    }
}

#[test]
fn zero_opacity_additions_change_nothing() {
    let k = camera64();
    let a = random_scene(3, 150, 0);
    let mut b = random_scene(4, 50, 0);
    for g in &mut b.primitives {
        g.opacity = 0.0;
    }
    let pose = random_pose(3);
    let cfg = RenderConfig::default();
    let fused = fuse_scenes(&[a.clone(), b]).unwrap();
    assert_eq!(rasterize(&fused, &pose, &k, &cfg).unwrap(), rasterize(&a, &pose, &k, &cfg).unwrap());
}

#[test]
fn permuted_scene_renders_identically_when_depths_are_distinct() {
    let k = camera64();
    let scene = random_scene(11, 120, 0);
    let mut reversed = scene.clone();
    reversed.primitives.reverse();
    let pose = random_pose(11);
    let cfg = RenderConfig::default();
    assert_eq!(rasterize(&scene, &pose, &k, &cfg).unwrap(), rasterize(&reversed, &pose, &k, &cfg).unwrap());
}

#[test]
fn equal_depth_ties_follow_primitive_index() {
    let k = camera64();
    let red = GaussianPrimitive::with_color(Vector3::new(0.0, 0.0, 3.0), Vector3::repeat(0.5), 0.9, [1.0, 0.0, 0.0]);
    let blue = GaussianPrimitive::with_color(Vector3::new(0.0, 0.0, 3.0), Vector3::repeat(0.5), 0.9, [0.0, 0.0, 1.0]);
    let cfg = RenderConfig::default();
    let pose = splatkit_core::io::CameraPose::identity();
    let rb = rasterize(&GaussianScene::new(vec![red.clone(), blue.clone()], 0).unwrap(), &pose, &k, &cfg).unwrap();
    let br = rasterize(&GaussianScene::new(vec![blue, red], 0).unwrap(), &pose, &k, &cfg).unwrap();
    assert!(rb.pixel(32, 32)[0] > rb.pixel(32, 32)[2]);
    assert!(br.pixel(32, 32)[2] > br.pixel(32, 32)[0]);
}

#[test]
fn output_within_color_envelope() {
    let k = camera64();
    let cfg = RenderConfig { background: [0.5, 0.5, 0.5], ..Default::default() };
    for seed in 0..10 {
        let img = rasterize(&random_scene(seed, 100, 1), &random_pose(seed), &k, &cfg).unwrap();
        assert!(img.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
