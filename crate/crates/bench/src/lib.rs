//! Benchmark driver for the route planners: sequential-addition experiments
//! over generated suites, aggregate reports, and plan validation that is
//! independent of the planners' own bookkeeping.

pub mod experiment;
pub mod oracle;
pub mod report;
pub mod validate;

pub use experiment::{
    run_experiment, run_experiment_sequential, CellResult, ExperimentOptions, Outcome, RunRecord,
    Variant,
};
pub use report::GroupBy;
pub use validate::{validate_plans, validate_planset, Violation};
