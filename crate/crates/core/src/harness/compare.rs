use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Dataset;

use super::run::{run_dataset, RunConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub filter: String,
    pub ate_rmse: f64,
    pub end_to_end: f64,
    pub nees_mean: f64,
    pub nees_band_fraction: f64,
}

/// Runs each labelled config on `ds`; rows keep the input order.
pub fn compare_runs(ds: &Dataset, configs: &[(String, RunConfig)]) -> Result<Vec<ComparisonRow>> {
    configs
        .par_iter()
        .map(|(label, cfg)| {
            let r = run_dataset(ds, cfg)?.report;
            Ok(ComparisonRow {
                label: label.clone(),
                filter: r.filter,
                ate_rmse: r.ate_rmse,
                end_to_end: r.end_to_end,
                nees_mean: r.nees_mean,
                nees_band_fraction: r.nees_band_fraction,
            })
        })
        .collect()
}

/// Fails unless every config points at the same dataset directory.
pub fn check_same_dataset(configs: &[(String, RunConfig)]) -> Result<()> {
    let canon = |c: &RunConfig| fs::canonicalize(&c.dataset).map_err(|e| Error::io(&c.dataset, e));
    let Some((_, first)) = configs.first() else {
        return Err(Error::Config("compare needs at least two configs".into()));
    };
    let base = canon(first)?;
    for (_, c) in &configs[1..] {
        let other = canon(c)?;
        if other != base {
            return Err(Error::MismatchedDataset(base.display().to_string(), other.display().to_string()));
        }
    }
    Ok(())
}

/// Writes JSON when `path` ends in `.json`, CSV otherwise.
pub fn write_rows(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = serde_json::to_string_pretty(rows).map_err(|e| Error::Config(e.to_string()))?;
        return fs::write(path, text + "\n").map_err(|e| Error::io(path, e));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(e.to_string()))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
