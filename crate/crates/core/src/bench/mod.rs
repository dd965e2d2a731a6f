//! Editing benchmark: manifest construction and validation, asymmetric
//! training pairs, and the metric-report driver.

mod evaluate;
mod manifest;
mod pair;

pub use evaluate::{evaluate_run, parse_timings, BenchmarkReport, EvalFeatures, Exclusion, Timings};
pub use manifest::{
    build_manifest, parse_prompts, validate_manifest, EditCategory, EditInstance, EditManifest, ManifestTargets,
    PromptEntry, SceneRecord, ValidationReport, Violation, CATEGORY_TOLERANCE, MIN_VIEWS,
};
pub use pair::{make_training_pair, TrainingPair};
