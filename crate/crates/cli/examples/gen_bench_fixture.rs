//! Regenerates `tests/fixtures/bench2`: two scenes of three views, two
//! prompts each, rendered embeddings offset slightly from the references.
//!
//!     cargo run -p splatkit-cli --example gen_bench_fixture

use std::path::Path;

use splatkit_core::bench::{build_manifest, EditCategory, ManifestTargets, PromptEntry};
use splatkit_core::io::{save_feature_set, save_image, FeatureSet, ImageBuffer};

const DIM: usize = 4;
const VIEWS: usize = 3;

fn row(a: f64) -> Vec<f64> {
    (0..DIM).map(|j| (a + 1.7 * j as f64).sin()).collect()
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bench2");
    let _ = std::fs::remove_dir_all(&root);
    let scenes = ["garden", "kitchen"];
    let mut prompts = Vec::new();
    let (mut ref_rows, mut ref_labels) = (Vec::new(), Vec::new());
    for (s, id) in scenes.iter().enumerate() {
        let dir = root.join("scenes").join(id);
        std::fs::create_dir_all(&dir).unwrap();
        for v in 0..VIEWS {
            let c = (s * VIEWS + v) as f64 / 8.0;
            save_image(&ImageBuffer::<f64>::filled(6, 4, [c, 0.5, 1.0 - c]), dir.join(format!("view{v}.png"))).unwrap();
            ref_rows.push(row((s * 10 + v) as f64));
            ref_labels.push(format!("{id}/{v}"));
        }
        for (prompt, cat) in [("add a red vase", EditCategory::Add), ("make it snowy", EditCategory::Global)] {
            prompts.push(PromptEntry { scene_id: id.to_string(), prompt: prompt.to_string(), category: cat, seed: None, editor_tag: None });
        }
    }
    std::fs::write(root.join("prompts.json"), serde_json::to_string_pretty(&prompts).unwrap() + "\n").unwrap();
    let m = build_manifest(&root.join("scenes"), &prompts, ManifestTargets { scenes: 2, prompts_per_scene: 2 }, 0).unwrap();
    std::fs::write(root.join("scenes/manifest.json"), m.to_json()).unwrap();

    let (mut p_rows, mut p_labels, mut r_rows, mut r_labels) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut timings = serde_json::Map::new();
    for (i, inst) in m.instances.iter().enumerate() {
        p_rows.push(row(100.0 + i as f64));
        p_labels.push(inst.id.clone());
        let s = scenes.iter().position(|s| *s == inst.scene_id).unwrap();
        let dir = root.join("renders").join(&inst.id);
        std::fs::create_dir_all(&dir).unwrap();
        for v in 0..VIEWS {
            let base = row((s * 10 + v) as f64);
            r_rows.push(base.iter().enumerate().map(|(j, b)| b + 0.05 * ((i * 5 + v * 3 + j) as f64).cos()).collect());
            r_labels.push(format!("{}/{v}", inst.id));
            save_image(&ImageBuffer::<f64>::filled(6, 4, [0.3, 0.3, 0.3]), dir.join(format!("view{v}.png"))).unwrap();
        }
        timings.insert(inst.id.clone(), serde_json::json!(0.4 + 0.1 * i as f64));
    }
    save_feature_set(&FeatureSet::new(DIM, p_rows, p_labels).unwrap(), root.join("prompts.ftc")).unwrap();
    save_feature_set(&FeatureSet::new(DIM, r_rows, r_labels).unwrap(), root.join("rendered.ftc")).unwrap();
    save_feature_set(&FeatureSet::new(DIM, ref_rows, ref_labels).unwrap(), root.join("reference.ftc")).unwrap();
    std::fs::write(root.join("timings.json"), serde_json::to_string_pretty(&timings).unwrap() + "\n").unwrap();
    println!("wrote {}", root.display());
}
