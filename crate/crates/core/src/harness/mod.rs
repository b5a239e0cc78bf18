//! Verification suites, norm estimates and reports.

pub mod config;
pub mod converge;
pub mod instances;
pub mod norms;
pub mod orthogonality;
pub mod report;
pub mod suite;

pub use config::ExperimentConfig;
pub use converge::convergence_experiment;
pub use norms::estimate_operator_norm;
pub use orthogonality::forest_orthogonality_report;
pub use report::{export, ExportFormat, Report, Row, Section, Status};
pub use suite::run_invariant_suite;
