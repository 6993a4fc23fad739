//! Solvers for the constant-modulus complex quadratic program: minimize or
//! maximize `|x^H A x|^q` subject to `|x_n| = 1`, via gradient descent or
//! ascent on the phase vector with closed-form cubic step sizes.
//!
//! Two matrix cases are supported: arbitrary `A` with `q = 2` (case A1) and
//! Hermitian positive semi-definite `A` with `q = 1` (case A2). On top of
//! the generic solvers sit two applications: weighted-ISL multi-waveform
//! design and detection-SNR code optimization through an MVDR reduction.

pub mod detection;
pub mod io;
mod linalg;
pub mod objective;
pub mod problem;
pub mod solver;
pub mod stepsize;
pub mod wisl;

pub use problem::{
    phases_to_vector, CaseTag, Direction, Error, GradientVector, PhaseVector, ProblemInstance,
    Result, UnitModulusVector,
};
pub use solver::{
    fixed_step_baseline, line_search_baseline, monotonicity_guard, pml_baseline, solve_case1,
    solve_case2, squarem_accelerate, GuardDecision, IterationTrace, LineSearchMethod, SolveStatus,
    SolverConfig, TraceRow, TraceStep,
};
pub use stepsize::{StepCoeffs, StepDecision, StepSource};
