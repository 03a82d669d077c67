//! Run manifests: one JSON record per command invocation.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;
use std::time::Instant;

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    argv: Vec<String>,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
    wall_time_secs: f64,
}

fn digest(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    let hash = Sha256::digest(&bytes);
    Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
}

/// Write `<first output>.manifest.json` describing the finished run.
pub fn write(
    command: &str,
    config: &serde_json::Value,
    seeds: &[u64],
    inputs: &[&Path],
    outputs: &[&Path],
    started: Instant,
) -> std::io::Result<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        argv: std::env::args().collect(),
        config: config.clone(),
        seeds: seeds.to_vec(),
        inputs: inputs
            .iter()
            .map(|p| {
                Ok(InputDigest { path: p.display().to_string(), sha256: digest(p)? })
            })
            .collect::<std::io::Result<Vec<_>>>()?,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    let primary = outputs.first().expect("at least one output");
    let path = primary.with_extension(format!(
        "{}manifest.json",
        primary
            .extension()
            .map(|e| format!("{}.", e.to_string_lossy()))
            .unwrap_or_default()
    ));
    std::fs::write(path, serde_json::to_string_pretty(&manifest)?)
}
