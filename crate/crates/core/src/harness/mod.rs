//! Experiment orchestration: configs, trials, aggregation, suites and output.

mod config;
mod csv_io;
mod figure;
mod suite;
mod summary;
mod trial;

pub use config::{EtaSetting, ExperimentConfig, LearnerConfig};
pub use csv_io::{
    format_float, parse_aggregate_csv, parse_trial_csv, write_aggregate_csv, write_trial_csv, TrialRow,
    AGGREGATE_HEADER, TRIAL_HEADER,
};
pub use figure::{
    figure_curves, reproduce_figure, run_figure, write_figure, Curve, CurveSpec, Figure, BASELINE_ETA,
    FIGURE_HORIZON, FIGURE_QUBITS,
};
pub use suite::{check_suite, SuiteName, SuiteOptions, SuiteReport};
pub use summary::{ExperimentSummary, Versions, VERSIONS};
pub use trial::{aggregate, run_experiment, run_trial, AggregateRow, ExperimentResult, TrialResult};
