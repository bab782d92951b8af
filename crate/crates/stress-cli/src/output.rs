//! Output directory handling and the run manifest. Identical runs produce
//! byte-identical files: the tool is seedless and fully deterministic.

use std::path::{Path, PathBuf};

pub fn write_outputs(dir: &Path, files: &[(&str, &str)]) -> Result<Vec<String>, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {}", dir.display(), e))?;
    let mut written = Vec::new();
    for (name, content) in files {
        let path: PathBuf = dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| format!("cannot write {}: {}", path.display(), e))?;
        written.push(name.to_string());
    }
    Ok(written)
}

pub fn write_manifest(
    dir: &Path,
    subcommand: &str,
    model: &str,
    params: &[(&str, String)],
    outputs: &[String],
) -> Result<(), String> {
    let params_json: serde_json::Map<String, serde_json::Value> = params
        .iter()
        .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
        .collect();
    let manifest = serde_json::json!({
        "tool": "stress",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": subcommand,
        "model": model,
        "parameters": params_json,
        "outputs": outputs,
        "deterministic": true,
    });
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {}", path.display(), e))
}
