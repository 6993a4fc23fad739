//! Benchmark harness for the constant-modulus quadratic program solvers:
//! random instance ensembles, multi-trial execution with per-trial seeds,
//! summary statistics, and CSV trace persistence.

pub mod ensemble;
pub mod summary;
pub mod tracefile;
pub mod trials;

pub use ensemble::{gen_instance, Ensemble, EnsembleKind};
pub use summary::TrialSummary;
pub use tracefile::{read_trace_csv, write_trace_csv, TRACE_HEADER};
pub use trials::{run_trials, SolverKind};
