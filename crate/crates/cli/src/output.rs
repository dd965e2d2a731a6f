use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use splatkit_core::{Error, Result};

/// Single-line machine-readable rendering of an error.
pub fn error_json(e: &Error) -> String {
    let mut v = json!({ "error": e.kind(), "message": e.to_string() });
    match e {
        Error::Json { offset, line, column, .. } => {
            v["offset"] = json!(offset);
            v["line"] = json!(line);
            v["column"] = json!(column);
        }
        Error::MissingMask(frame) | Error::FrameNotAccepted(frame) => v["frame"] = json!(frame),
        Error::Io { path, .. } | Error::NotFound { path } => v["path"] = json!(path.display().to_string()),
        _ => {}
    }
    v.to_string()
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable output") + "\n"
}

pub fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `<file>.provenance.json` next to a single-file output.
pub fn sidecar(out: &Path, command: &str, seed: u64, extra: Value) -> Result<()> {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".provenance.json");
    write(&out.with_file_name(name), pretty(&provenance(command, seed, extra)))
}

pub fn provenance(command: &str, seed: u64, extra: Value) -> Value {
    let mut v = json!({ "command": command, "seed": seed, "version": env!("CARGO_PKG_VERSION") });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, extra) {
        dst.extend(src);
    }
    v
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// PNG files in `dir`, sorted by name.
pub fn pngs_in(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    files_with_ext(dir, "png")
}

pub fn files_with_ext(dir: &Path, ext: &str) -> Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext)) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
