//! Experiment protocol: configuration, alternating trials, metrics,
//! snapshots and run comparison.

pub mod config;
pub mod experiment;
pub mod metrics;
pub mod snapshot;
pub mod stats;
pub mod trial;

use std::path::Path;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, run_repeat, Repeat, RepeatOutcome};
pub use metrics::{MetricsRow, MetricsTable};
pub use stats::{welch_t_test, Comparison};
pub use trial::{run_trial, stability_probe, TrialMode, TrialResult};

use crate::error::{Error, Result};

/// Per-repeat final-window means of `column` under `dir/repeat-*/metrics.csv`.
pub fn final_means(dir: &Path, column: &str) -> Result<Vec<f64>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path().join("metrics.csv"))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::config(format!("no repeat metrics under {}", dir.display())));
    }
    files
        .iter()
        .map(|f| {
            let values: Vec<f64> = MetricsTable::read(f)?.column(column)?.into_iter().flatten().collect();
            stats::final_window_mean(&values, experiment::FINAL_WINDOW)
                .ok_or_else(|| Error::config(format!("column `{column}` is empty in {}", f.display())))
        })
        .collect()
}

/// Welch t-test between two experiment directories on one column.
pub fn compare_runs(dir_a: &Path, dir_b: &Path, column: &str) -> Result<Comparison> {
    welch_t_test(&final_means(dir_a, column)?, &final_means(dir_b, column)?)
}
