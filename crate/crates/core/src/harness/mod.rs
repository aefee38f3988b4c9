//! Disorder-averaged experiments over a grid of system sizes, intercept
//! extrapolation and comparison with the limit theory.

mod config;
mod diagnostics;
mod exec;
mod experiment;
mod fit;
mod oracle;
mod report;
mod target;

pub use config::{ExperimentConfig, TailConfig, DEFAULT_TARGETS, MIN_SAMPLES};
pub use diagnostics::{
    scaling_check, tail_check, ScalingOutcome, ScalingResult, TailReport, TailRow,
    SLOPE_WINDOW, TAIL_BLOWUP_RATIO, TAIL_FLAG_T,
};
pub use exec::map_indexed;
pub use experiment::{
    run_experiment, run_experiment_with, ExperimentReport, RunOptions, TargetReport, Z_PASS,
};
pub use fit::{fit_intercept, fit_line, fit_powers, EstimatePoint, Extrapolation, LineFit, PowerFit};
pub use oracle::{
    variant_oracle, OracleReport, VariantRow, VariantTable, Verdict, KAPPA_PROBE, PHI_PROBE,
    Z_DISCRIMINATE,
};
pub use report::{report_csv, report_json, summary_table, write_reports};
pub use target::Target;
