//! Deterministic CSV bodies plus a metadata sidecar.
//!
//! Preset result files carry no wall-clock columns: reruns with the same
//! seed must be byte-identical, and timing can never be. Measured times go
//! to a separate `timings.csv`, which is explicitly excluded from the
//! determinism contract.

use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Write rows with RFC-style quoting and a fixed header.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::Config(e.to_string()))?;
    writer.write_record(header).map_err(|e| CliError::Config(e.to_string()))?;
    for row in rows {
        writer.write_record(row).map_err(|e| CliError::Config(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Sidecar with everything needed to reproduce the run: preset name, seed,
/// worker count, desk-scale substitutions, the effective config and its
/// hash.
pub fn write_metadata(
    path: &Path,
    preset: &str,
    seed: u64,
    jobs: usize,
    substitutions: &[String],
    config: &ExperimentConfig,
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&format!("preset = {preset:?}\n"));
    out.push_str(&format!("seed = {seed}\n"));
    out.push_str(&format!("jobs = {jobs}\n"));
    out.push_str(&format!("config_sha256 = {:?}\n", config.sha256()));
    out.push_str("substitutions = [\n");
    for s in substitutions {
        out.push_str(&format!("    {s:?},\n"));
    }
    out.push_str("]\n\n[config]\n");
    for line in config.canonical_toml().lines() {
        out.push_str(&format!("# {line}\n"));
    }
    out.push_str(&format!("inline = {:?}\n", config.canonical_toml()));
    std::fs::write(path, out)?;
    Ok(())
}

/// Shortest round-trip float formatting; deterministic for identical bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
