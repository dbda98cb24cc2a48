use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

use super::Global;

/// Summarizes every run manifest under --out-dir: which command produced
/// which artifacts, under which seed, and whether the artifacts still exist.
pub fn run(global: &Global) -> Result<()> {
    let dir = &global.out_dir;
    let entries = fs::read_dir(dir).map_err(|e| CliError::io("read directory", dir, e))?;
    let mut manifests: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| {
            path.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".manifest.json"))
        })
        .collect();
    manifests.sort();

    if manifests.is_empty() {
        println!("no manifests under {}", dir.display());
        return Ok(());
    }

    println!(
        "{:<40} {:<16} {:>20} {:>10}  outputs",
        "manifest", "command", "seed", "duration"
    );
    for path in &manifests {
        let text = fs::read_to_string(path).map_err(|e| CliError::io("read", path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("cannot parse {}: {e}", path.display())))?;
        let command = value["command"].as_str().unwrap_or("?");
        let seed = value["seed"]
            .as_u64()
            .map_or_else(|| "?".to_string(), |s| s.to_string());
        let duration = value["duration_seconds"]
            .as_f64()
            .map_or_else(|| "?".to_string(), |d| format!("{d:.2}s"));
        let outputs: Vec<&str> = value["outputs"]
            .as_array()
            .map(|a| a.iter().filter_map(|o| o.as_str()).collect())
            .unwrap_or_default();
        let missing: Vec<&str> = outputs
            .iter()
            .copied()
            .filter(|o| !Path::new(o).exists())
            .collect();
        let status = if missing.is_empty() {
            format!("{} present", outputs.len())
        } else {
            format!("missing {}", missing.join(", "))
        };
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("?");
        println!("{name:<40} {command:<16} {seed:>20} {duration:>10}  {status}");
    }
    Ok(())
}
