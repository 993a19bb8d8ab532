//! Output plumbing: run manifests, fixed-precision CSV formatting.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// 17 significant digits; round-trips every f64.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct ManifestInput {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    timestamp_unix: u64,
    inputs: Vec<ManifestInput>,
    config: serde_json::Value,
}

/// Write `<output>.manifest.json` next to the primary output: input hashes,
/// config echo, artifact version. The timestamp is the only
/// non-reproducible field.
pub fn write_manifest(
    primary_output: &Path,
    command: &str,
    inputs: &[&Path],
    config: serde_json::Value,
) -> Result<()> {
    let mut hashed = Vec::new();
    for p in inputs {
        let bytes = std::fs::read(p).with_context(|| format!("reading input {}", p.display()))?;
        let mut h = Sha256::new();
        h.update(&bytes);
        hashed.push(ManifestInput {
            path: p.display().to_string(),
            sha256: hex::encode(h.finalize()),
        });
    }
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        inputs: hashed,
        config,
    };
    let path = manifest_path(primary_output);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing manifest {}", path.display()))?;
    Ok(())
}

pub fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    name.push_str(".manifest.json");
    primary_output.with_file_name(name)
}

pub fn write_trajectory_csv(
    path: &Path,
    traj: &specctrl_core::Trajectory,
) -> Result<()> {
    let mut out = String::from("t,norm_xhat0,norm_e0,norm_xhat1,norm_e1,norm_z,V,total_norm\n");
    for (t, n) in traj.times.iter().zip(traj.norms.iter()) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt(*t),
            fmt(n.xhat0),
            fmt(n.e0),
            fmt(n.xhat1),
            fmt(n.e1),
            fmt(n.z),
            fmt(n.v),
            fmt(n.total()),
        ));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
