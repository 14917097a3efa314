//! Orchestration: configuration, the equivalence report, the invariant
//! suites and lambda sweeps.

pub mod config;
pub mod report;
pub mod verify;

pub use config::AnalysisConfig;
pub use report::{analyze, sweep, validate_report, validate_report_file, EquivalenceReport, Verdict};
pub use verify::{run_suite, CheckOutcome, Suite, VerifyOptions};
