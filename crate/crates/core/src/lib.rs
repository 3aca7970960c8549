//! Incomplete solving of hybrid Boolean formulas (OR, XOR, not-all-equal and
//! cardinality constraints) by minimizing their Walsh-Fourier expansions
//! over the reals and sign-rounding the result.
//!
//! Variables use the ±1 encoding: `-1` is True, `+1` is False. A constraint's
//! expansion is 0 on satisfying Boolean points and 1 on violating ones.

pub mod benchgen;
pub mod formulation;
pub mod fourier;
pub mod hnf;
pub mod model;
pub mod optim;
pub mod oracle;
pub mod output;
pub mod solver;
pub mod sweep;

pub use benchgen::{gen_random_card, gen_random_kcnf, gen_random_kxor, BenchSpec, Family};
pub use formulation::{satisfiability_certificate, Formulation, Objective};
pub use fourier::{fourier_eval, fourier_grad, FourierScratch};
pub use hnf::{parse_hnf, serialize_hnf};
pub use model::{sign_round, BooleanAssignment, Comparator, Constraint, ConstraintKind, Formula, Literal};
pub use optim::{OptimizerConfig, OptimizerKind};
pub use output::emit_result;
pub use solver::{solve, SolveConfig, SolveResult, SolveStatus};
