//! Dataset files, filter runs, metrics, the verification suite and the
//! filter comparison used by the command-line tool.

pub mod commands;
pub mod compare;
pub mod io;
pub mod metrics;
pub mod run;
pub mod scenarios;
pub mod verify;

pub use compare::{compare_runs, ComparisonRow};
pub use metrics::{chi2_band, MetricsReport};
pub use run::{run_dataset, FilterKind, RunConfig, RunOutput};
pub use verify::{run_checks, CheckResult, VerifyOptions};
