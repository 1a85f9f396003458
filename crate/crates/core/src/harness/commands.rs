//! File-level entry points behind the command-line tool.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sim::{generate, SimSpec};

use super::compare::{check_same_dataset, compare_runs, write_rows, ComparisonRow};
use super::io::{read_dataset, write_dataset, write_states};
use super::metrics::MetricsReport;
use super::run::{run_dataset, RunConfig};

pub fn load_sim_spec(path: &Path) -> Result<SimSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: SimSpec = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

/// Reads a run config; a relative `dataset` path is taken relative to the file.
pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if cfg.dataset.as_os_str().is_empty() {
        return Err(Error::Config(format!("{}: missing dataset", path.display())));
    }
    if cfg.dataset.is_relative() {
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.dataset = base.join(&cfg.dataset);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn simulate(spec_path: &Path, out: &Path, seed: u64) -> Result<usize> {
    let spec = load_sim_spec(spec_path)?;
    let ds = generate(&spec, seed)?;
    write_dataset(out, &ds)?;
    Ok(ds.scans.len())
}

/// Runs one config and writes `est.csv`, `nees.csv` and `report.json` to `out`.
pub fn run(config_path: &Path, out: &Path) -> Result<MetricsReport> {
    let cfg = load_run_config(config_path)?;
    let ds = read_dataset(&cfg.dataset)?;
    let output = run_dataset(&ds, &cfg)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_states(&out.join("est.csv"), &output.estimates)?;
    let nees_path = out.join("nees.csv");
    let mut w = csv::Writer::from_path(&nees_path).map_err(|e| Error::Config(e.to_string()))?;
    w.write_record(["t", "nees", "rows"]).map_err(|e| Error::Config(e.to_string()))?;
    for e in &output.epochs {
        w.serialize((e.t, e.nees, e.rows)).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(&nees_path, e))?;
    write_report(&out.join("report.json"), &output.report)?;
    Ok(output.report)
}

pub fn write_report(path: &Path, report: &MetricsReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_report(path: &Path) -> Result<MetricsReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Runs every config on their shared dataset and writes the table to `out`.
pub fn compare(config_paths: &[PathBuf], out: &Path) -> Result<Vec<ComparisonRow>> {
    if config_paths.len() < 2 {
        return Err(Error::Config("compare needs at least two configs".into()));
    }
    let configs = config_paths
        .iter()
        .map(|p| {
            let label = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok((label, load_run_config(p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    check_same_dataset(&configs)?;
    let ds = read_dataset(&configs[0].1.dataset)?;
    let rows = compare_runs(&ds, &configs)?;
    write_rows(out, &rows)?;
    Ok(rows)
}
