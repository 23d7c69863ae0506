//! Seeded experiment orchestration: trial configs, sweeps on a worker pool,
//! summaries, CSV/markdown reports, scalability timing and post-hoc
//! validation of JSON-lines records.

mod config;
mod report;
mod scalability;
mod stats;
mod trial;
mod validate;

pub use config::{
    benchmark_experiments, splitmix64, trial_seed, AlgId, InitMode, ShapeSpec, SweepConfig,
    TrialConfig,
};
pub use report::{write_report, ReportFiles};
pub use scalability::{
    run_cell, scalability_sweep, ScalabilityCell, ScalabilityConfig, ScalabilityTable,
};
pub use stats::{summarize, Baseline, Stats, SummaryRow, SweepSummary};
pub use trial::{
    error_kind, parse_records, read_records, run_algorithm, run_single, run_sweep, run_trial,
    run_trials, AlgRecord, SingleRun, SweepOutcome, TrialRecord,
};
pub use validate::{validate_record, validate_records, RecordIssue, ValidationReport};
