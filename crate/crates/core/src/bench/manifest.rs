use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{parse_json, Error, Result};
use crate::io::image_dimensions;
use crate::rng::hash_str;

/// Minimum views an instance needs for reconstruction.
pub const MIN_VIEWS: usize = 2;
/// Allowed distance of each category count from an even split.
pub const CATEGORY_TOLERANCE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EditCategory {
    Add,
    Remove,
    Modify,
    Global,
}

impl EditCategory {
    pub const ALL: [EditCategory; 4] = [EditCategory::Add, EditCategory::Remove, EditCategory::Modify, EditCategory::Global];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditInstance {
    pub id: String,
    pub scene_id: String,
    pub prompt: String,
    pub category: EditCategory,
    /// Paths relative to the manifest root, in view order.
    pub input_views: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edited_views: Option<Vec<PathBuf>>,
    pub seed: u64,
    #[serde(default)]
    pub editor_tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneRecord {
    pub id: String,
    pub view_count: usize,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestTargets {
    pub scenes: usize,
    pub prompts_per_scene: usize,
}

impl Default for ManifestTargets {
    fn default() -> Self {
        Self { scenes: 20, prompts_per_scene: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditManifest {
    pub targets: ManifestTargets,
    pub scenes: Vec<SceneRecord>,
    pub instances: Vec<EditInstance>,
}

impl EditManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn category_counts(&self) -> BTreeMap<EditCategory, usize> {
        let mut counts: BTreeMap<EditCategory, usize> = EditCategory::ALL.iter().map(|c| (*c, 0)).collect();
        for inst in &self.instances {
            *counts.entry(inst.category).or_default() += 1;
        }
        counts
    }

    pub fn instance(&self, id: &str) -> Option<&EditInstance> {
        self.instances.iter().find(|i| i.id == id)
    }
}

/// One line of the prompts file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptEntry {
    pub scene_id: String,
    pub prompt: String,
    pub category: EditCategory,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub editor_tag: Option<String>,
}

pub fn parse_prompts(text: &str) -> Result<Vec<PromptEntry>> {
    parse_json(text)
}

fn is_png(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

/// Scans `scene_dir/<scene_id>/*.png` and pairs each scene with its prompts.
///
/// Instance ids are `<scene_id>-<k>` in prompt-file order; seeds missing
/// from the prompts file derive from `seed` and the instance id.
pub fn build_manifest(scene_dir: &Path, prompts: &[PromptEntry], targets: ManifestTargets, seed: u64) -> Result<EditManifest> {
    let mut scenes = Vec::new();
    let mut views: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for dir in sorted_entries(scene_dir)?.into_iter().filter(|p| p.is_dir()) {
        let id = dir.file_name().and_then(|n| n.to_str()).ok_or_else(|| Error::Manifest(format!("non-UTF-8 scene dir {}", dir.display())))?.to_string();
        let pngs: Vec<PathBuf> = sorted_entries(&dir)?.into_iter().filter(|p| is_png(p)).collect();
        let (width, height) = match pngs.first() {
            Some(p) => image_dimensions(p)?,
            None => (0, 0),
        };
        scenes.push(SceneRecord { id: id.clone(), view_count: pngs.len(), width, height });
        let rel = pngs.iter().map(|p| PathBuf::from(&id).join(p.file_name().unwrap())).collect();
        views.insert(id, rel);
    }
    if scenes.len() != targets.scenes {
        return Err(Error::Manifest(format!("found {} scenes, expected {}", scenes.len(), targets.scenes)));
    }
    let mut per_scene: BTreeMap<&str, Vec<&PromptEntry>> = scenes.iter().map(|s| (s.id.as_str(), Vec::new())).collect();
    for p in prompts {
        per_scene
            .get_mut(p.scene_id.as_str())
            .ok_or_else(|| Error::Manifest(format!("prompt for unknown scene {:?}", p.scene_id)))?
            .push(p);
    }
    let mut instances = Vec::new();
    for (scene_id, entries) in &per_scene {
        if entries.len() != targets.prompts_per_scene {
            return Err(Error::Manifest(format!(
                "scene {scene_id:?} has {} prompts, expected {}",
                entries.len(),
                targets.prompts_per_scene
            )));
        }
        for (k, p) in entries.iter().enumerate() {
            let id = format!("{scene_id}-{k}");
            instances.push(EditInstance {
                seed: p.seed.unwrap_or_else(|| hash_str(&format!("{seed}/{id}"))),
                id,
                scene_id: scene_id.to_string(),
                prompt: p.prompt.clone(),
                category: p.category,
                input_views: views[*scene_id].clone(),
                edited_views: None,
                editor_tag: p.editor_tag.clone().unwrap_or_default(),
            });
        }
    }
    Ok(EditManifest { targets, scenes, instances })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    /// Instance or scene the violation concerns; empty for manifest-level issues.
    pub subject: String,
    pub kind: String,
    pub detail: String,
}

impl Violation {
    fn new(subject: impl Into<String>, kind: &str, detail: impl Into<String>) -> Self {
        Self { subject: subject.into(), kind: kind.to_string(), detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub category_counts: BTreeMap<EditCategory, usize>,
    pub instances: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_instance(inst: &EditInstance, scenes: &BTreeSet<&str>, root: &Path) -> Vec<Violation> {
    let mut v = Vec::new();
    if !scenes.contains(inst.scene_id.as_str()) {
        v.push(Violation::new(&inst.id, "unknown scene", format!("scene {:?} is not in the manifest", inst.scene_id)));
    }
    if inst.prompt.trim().is_empty() {
        v.push(Violation::new(&inst.id, "empty prompt", "prompt is empty"));
    }
    if inst.input_views.len() < MIN_VIEWS {
        v.push(Violation::new(&inst.id, "min views", format!("{} input views, need at least {MIN_VIEWS}", inst.input_views.len())));
    }
    if let Some(edited) = &inst.edited_views {
        if edited.len() != inst.input_views.len() {
            v.push(Violation::new(&inst.id, "edited views misaligned", format!("{} edited for {} input views", edited.len(), inst.input_views.len())));
        }
    }
    for p in inst.input_views.iter().chain(inst.edited_views.iter().flatten()) {
        if !root.join(p).is_file() {
            v.push(Violation::new(&inst.id, "missing file", p.display().to_string()));
        }
    }
    v
}

/// Checks every manifest invariant against files under `root`. Category
/// balance allows `CATEGORY_TOLERANCE` around an even split unless `strict`.
pub fn validate_manifest(m: &EditManifest, root: &Path, strict: bool) -> ValidationReport {
    let scene_ids: BTreeSet<&str> = m.scenes.iter().map(|s| s.id.as_str()).collect();
    let mut violations: Vec<Violation> = m.instances.par_iter().flat_map_iter(|i| check_instance(i, &scene_ids, root)).collect();

    if m.scenes.len() != m.targets.scenes {
        violations.push(Violation::new("", "scene count", format!("{} scenes, expected {}", m.scenes.len(), m.targets.scenes)));
    }
    if scene_ids.len() != m.scenes.len() {
        violations.push(Violation::new("", "duplicate scene", "scene ids are not unique"));
    }
    let mut seen = BTreeSet::new();
    for inst in &m.instances {
        if !seen.insert(inst.id.as_str()) {
            violations.push(Violation::new(&inst.id, "duplicate instance", "instance id repeats"));
        }
    }
    for s in &m.scenes {
        let n = m.instances.iter().filter(|i| i.scene_id == s.id).count();
        if n != m.targets.prompts_per_scene {
            violations.push(Violation::new(&s.id, "prompts per scene", format!("{n} instances, expected {}", m.targets.prompts_per_scene)));
        }
        if s.view_count < MIN_VIEWS {
            violations.push(Violation::new(&s.id, "min views", format!("{} views, need at least {MIN_VIEWS}", s.view_count)));
        }
    }
    let counts = m.category_counts();
    let expected = m.targets.scenes * m.targets.prompts_per_scene / 4;
    let tolerance = if strict { 0 } else { CATEGORY_TOLERANCE };
    for (cat, n) in &counts {
        if n.abs_diff(expected) > tolerance {
            violations.push(Violation::new("", "category balance", format!("{cat:?} has {n}, expected {expected} ± {tolerance}")));
        }
    }
    ValidationReport { violations, category_counts: counts, instances: m.instances.len() }
}
