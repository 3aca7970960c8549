//! Restarted continuous search with discrete verification.
//!
//! Each restart draws a point uniformly from `[-1, 1]^n`, minimizes the
//! configured objective and sign-rounds along the way. Rounded points are
//! always re-checked against the formula, so `Sat` is only ever reported for
//! an assignment that really satisfies it. The solver is incomplete: it
//! never reports unsatisfiability.

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::formulation::{Formulation, Objective, ObjectiveError};
use crate::fourier::{fourier_eval, EvalError};
use crate::model::{sign_round, BooleanAssignment, Constraint, ConstraintKind, Formula};
use crate::optim::{run_observed, OptimError, OptimizerConfig, OptimizerKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub formulation: Formulation,
    pub alpha: f64,
    pub optimizer: OptimizerConfig,
    pub restarts: usize,
    pub seed: u64,
    /// Wall-clock budget for the whole solve.
    pub timeout: Option<Duration>,
    /// Round and verify the current iterate every this many iterations.
    pub check_interval: usize,
    /// Run restarts on the rayon pool. Results do not depend on this.
    pub parallel: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            formulation: Formulation::Square,
            alpha: 0.0,
            optimizer: OptimizerConfig::default(),
            restarts: 32,
            seed: 0,
            timeout: Some(Duration::from_secs(300)),
            check_interval: 100,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let invalid = |m: &str| Err(SolveError::InvalidConfig(m.to_string()));
        if self.formulation.needs_box() && self.optimizer.kind != OptimizerKind::Pgd {
            return invalid("the linear formulation requires the box-constrained optimizer (pgd)");
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return invalid("alpha must be finite and non-negative");
        }
        if self.restarts == 0 {
            return invalid("at least one restart is required");
        }
        if self.check_interval == 0 {
            return invalid("check interval must be positive");
        }
        self.optimizer
            .validate()
            .map_err(|e| SolveError::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// The satisfying assignment, or the best one found.
    pub assignment: Option<BooleanAssignment>,
    /// Violated constraints under `assignment`.
    pub violated: usize,
    pub restarts_used: usize,
    pub iters_total: u64,
    /// Best objective value reached in the restart that produced
    /// `assignment`.
    pub final_objective: f64,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        self.status == SolveStatus::Sat
    }
}

/// Starting point of restart `index`: uniform on `[-1, 1]^n`, drawn from
/// stream `index` of a ChaCha8 generator seeded with `seed`.
pub fn initial_point(n: usize, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

#[derive(Debug, Clone)]
struct RestartOutcome {
    index: usize,
    violated: usize,
    assignment: BooleanAssignment,
    iters: u64,
    best_value: f64,
}

struct Search<'a, O> {
    formula: &'a Formula,
    objective: Objective<'a>,
    cfg: &'a SolveConfig,
    deadline: Option<Instant>,
    /// Lowest restart index known to have found a solution.
    first_sat: AtomicUsize,
    observer: &'a O,
}

impl<O: Fn(usize, &[f64]) + Sync> Search<'_, O> {
    fn superseded(&self, index: usize) -> bool {
        self.first_sat.load(Ordering::Relaxed) < index
    }

    fn violations(&self, x: &[f64]) -> (usize, BooleanAssignment) {
        let b = sign_round(x);
        let v = self
            .formula
            .count_violations(&b)
            .expect("rounded point has formula length");
        (v, b)
    }

    fn restart(&self, index: usize) -> Option<RestartOutcome> {
        if self.superseded(index) || self.deadline.is_some_and(|d| Instant::now() >= d) {
            return None;
        }
        let x0 = initial_point(self.formula.num_vars(), self.cfg.seed, index);
        let mut best: Option<(usize, BooleanAssignment)> = None;
        let mut cancelled = false;
        let interval = self.cfg.check_interval;
        let run = run_observed(x0, &self.cfg.optimizer, &self.objective, self.deadline, |s| {
            if s.iter % interval != 0 {
                return ControlFlow::Continue(());
            }
            if self.superseded(index) {
                cancelled = true;
                return ControlFlow::Break(());
            }
            (self.observer)(index, &s.x);
            let (v, b) = self.violations(&s.x);
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, b));
            }
            if v == 0 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        if cancelled {
            return None;
        }
        let state = match run {
            Ok(state) => state,
            Err(OptimError::Diverged { state }) => *state,
            Err(e) => unreachable!("configuration validated before search: {e}"),
        };
        for x in [&state.best_x, &state.x] {
            let (v, b) = self.violations(x);
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, b));
            }
        }
        let (violated, assignment) = best.expect("at least one point was rounded");
        if violated == 0 {
            self.first_sat.fetch_min(index, Ordering::Relaxed);
        }
        Some(RestartOutcome {
            index,
            violated,
            assignment,
            iters: state.iter as u64,
            best_value: state.best_value,
        })
    }
}

pub fn solve(f: &Formula, cfg: &SolveConfig) -> Result<SolveResult, SolveError> {
    solve_observed(f, cfg, &|_, _| {})
}

/// [`solve`] that reports every checked iterate as `(restart, x)`.
///
/// The observer sees the starting point and every `check_interval`-th
/// iterate of each restart, from whichever thread runs that restart.
pub fn solve_observed<O>(f: &Formula, cfg: &SolveConfig, observer: &O) -> Result<SolveResult, SolveError>
where
    O: Fn(usize, &[f64]) + Sync,
{
    cfg.validate()?;
    let objective = Objective::new(f, cfg.formulation, cfg.alpha)?;
    let search = Search {
        formula: f,
        objective,
        cfg,
        deadline: cfg.timeout.map(|t| Instant::now() + t),
        first_sat: AtomicUsize::new(usize::MAX),
        observer,
    };

    let outcomes: Vec<RestartOutcome> = if cfg.parallel {
        (0..cfg.restarts)
            .into_par_iter()
            .filter_map(|i| search.restart(i))
            .collect()
    } else {
        let mut done = Vec::new();
        for i in 0..cfg.restarts {
            match search.restart(i) {
                Some(o) => {
                    let sat = o.violated == 0;
                    done.push(o);
                    if sat {
                        break;
                    }
                }
                None => break,
            }
        }
        done
    };

    // Deterministic reduction: fewest violations, then lowest restart.
    let Some(best) = outcomes.iter().min_by_key(|o| (o.violated, o.index)).cloned() else {
        // Only reachable when the deadline passed before restart 0 began.
        return Ok(SolveResult {
            status: SolveStatus::Unknown,
            assignment: None,
            violated: f.num_constraints(),
            restarts_used: 0,
            iters_total: 0,
            final_objective: f64::INFINITY,
        });
    };
    let sat = best.violated == 0;
    let counted = outcomes.iter().filter(|o| !sat || o.index <= best.index);
    let (restarts_used, iters_total) = counted.fold((0, 0), |(r, i), o| (r + 1, i + o.iters));
    Ok(SolveResult {
        status: if sat { SolveStatus::Sat } else { SolveStatus::Unknown },
        assignment: Some(best.assignment),
        violated: best.violated,
        restarts_used,
        iters_total,
        final_objective: best.best_value,
    })
}

/// Largest `ε` for which `|FE_c(x)| < ε` forces `sign_round(x)` to satisfy
/// `c`; `None` for cardinality constraints, which admit no such `ε`.
pub fn rounding_epsilon(c: &Constraint) -> Option<f64> {
    let k = c.len() as i32;
    match c.kind() {
        ConstraintKind::Or => Some(0.5f64.powi(k)),
        ConstraintKind::Xor => Some(0.5),
        ConstraintKind::Nae => Some(0.5f64.powi(k - 1)),
        ConstraintKind::Card { .. } => None,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoundingCheckError {
    #[error("cardinality constraints are not rounding-friendly for any epsilon")]
    NotRoundingFriendly,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Whether `|FE_c(x)| < ε(c)`, which guarantees that rounding `x`
/// satisfies `c`.
pub fn epsilon_rounding_check(c: &Constraint, x: &[f64]) -> Result<bool, RoundingCheckError> {
    let eps = rounding_epsilon(c).ok_or(RoundingCheckError::NotRoundingFriendly)?;
    Ok(fourier_eval(c, x)?.abs() < eps)
}

/// Upper bound on the violations of `sign_round(l)` given
/// `W = F^sq_{α=0}(l)`, for pure k-CNF, pure XOR and pure k-NAE formulas.
///
/// Every violated constraint has `|FE_c(l)| ≥ ε`, hence contributes at
/// least `ε²` to `W`; the bound is `⌈W/ε²⌉`. Mixed or cardinality formulas
/// get `None`.
pub fn violation_bound(f: &Formula, w: f64) -> Option<u64> {
    if !(w >= 0.0 && w.is_finite()) {
        return None;
    }
    let mut constraints = f.constraints().iter();
    let Some(first) = constraints.next() else {
        return Some(0);
    };
    let k = first.len();
    let homogeneous = |same_len: bool| {
        f.constraints()
            .iter()
            .all(|c| c.kind() == first.kind() && (!same_len || c.len() == k))
    };
    let inv_eps_sq = match first.kind() {
        ConstraintKind::Or if homogeneous(true) => 4f64.powi(k as i32),
        ConstraintKind::Xor if homogeneous(false) => 4.0,
        ConstraintKind::Nae if homogeneous(true) => 4f64.powi(k as i32 - 1),
        _ => return None,
    };
    Some((inv_eps_sq * w).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Comparator;

    fn c(kind: ConstraintKind, lits: &[i64]) -> Constraint {
        Constraint::from_dimacs(kind, lits).unwrap()
    }

    #[test]
    fn single_clause_is_sat() {
        let f = Formula::new(1, vec![c(ConstraintKind::Or, &[1])]).unwrap();
        let r = solve(&f, &SolveConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Sat);
        assert!(r.assignment.unwrap().value(1));
        assert_eq!(r.restarts_used, 1);
    }

    #[test]
    fn contradictory_xors_stay_unknown() {
        let f = Formula::new(1, vec![c(ConstraintKind::Xor, &[1]), c(ConstraintKind::Xor, &[-1])]).unwrap();
        let cfg = SolveConfig {
            restarts: 4,
            optimizer: OptimizerConfig {
                max_iters: 500,
                ..OptimizerConfig::default()
            },
            ..SolveConfig::default()
        };
        let r = solve(&f, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Unknown);
        assert_eq!(r.violated, 1);
        assert_eq!(r.restarts_used, 4);
    }

    #[test]
    fn linear_needs_pgd() {
        let f = Formula::new(1, vec![]).unwrap();
        let cfg = SolveConfig {
            formulation: Formulation::Linear,
            ..SolveConfig::default()
        };
        assert!(matches!(solve(&f, &cfg), Err(SolveError::InvalidConfig(_))));
        let ok = SolveConfig {
            optimizer: OptimizerConfig::new(OptimizerKind::Pgd),
            ..cfg
        };
        assert!(solve(&f, &ok).unwrap().is_sat());
    }

    #[test]
    fn empty_formula_is_sat() {
        let f = Formula::new(0, vec![]).unwrap();
        let r = solve(&f, &SolveConfig::default()).unwrap();
        assert!(r.is_sat());
        assert!(r.assignment.unwrap().is_empty());
    }

    #[test]
    fn bound_examples() {
        let cnf = Formula::new(3, vec![c(ConstraintKind::Or, &[1, -2, 3])]).unwrap();
        assert_eq!(violation_bound(&cnf, 0.01), Some(1));
        assert_eq!(violation_bound(&cnf, 0.0), Some(0));
        let xor = Formula::new(3, vec![c(ConstraintKind::Xor, &[1, 2]), c(ConstraintKind::Xor, &[3])]).unwrap();
        assert_eq!(violation_bound(&xor, 0.6), Some(3));
        let nae = Formula::new(3, vec![c(ConstraintKind::Nae, &[1, 2, 3])]).unwrap();
        assert_eq!(violation_bound(&nae, 0.0), Some(0));
        assert_eq!(violation_bound(&nae, 0.1), Some(2));

        let mixed = Formula::new(3, vec![c(ConstraintKind::Xor, &[1, 2]), c(ConstraintKind::Or, &[3])]).unwrap();
        assert_eq!(violation_bound(&mixed, 0.5), None);
        let ragged = Formula::new(3, vec![c(ConstraintKind::Or, &[1, 2]), c(ConstraintKind::Or, &[3])]).unwrap();
        assert_eq!(violation_bound(&ragged, 0.5), None);
        let card = Formula::new(
            2,
            vec![c(
                ConstraintKind::Card {
                    cmp: Comparator::AtLeast,
                    bound: 1,
                },
                &[1, 2],
            )],
        )
        .unwrap();
        assert_eq!(violation_bound(&card, 0.0), None);
    }

    #[test]
    fn epsilon_check_examples() {
        let xor = c(ConstraintKind::Xor, &[1, 2]);
        assert!(epsilon_rounding_check(&xor, &[-0.9, 0.9]).unwrap());
        assert!(xor.is_satisfied(&sign_round(&[-0.9, 0.9])).unwrap());

        let or = c(ConstraintKind::Or, &[1, 2]);
        assert!(!epsilon_rounding_check(&or, &[1.0, 1.0]).unwrap());

        let nae = c(ConstraintKind::Nae, &[1, 2]);
        assert!(epsilon_rounding_check(&nae, &[-1.0, 1.0]).unwrap());

        let card = c(
            ConstraintKind::Card {
                cmp: Comparator::AtLeast,
                bound: 1,
            },
            &[1, 2],
        );
        assert_eq!(
            epsilon_rounding_check(&card, &[0.0, 0.0]).unwrap_err(),
            RoundingCheckError::NotRoundingFriendly
        );
    }

    #[test]
    fn initial_points_are_reproducible_and_in_box() {
        let a = initial_point(50, 9, 3);
        assert_eq!(a, initial_point(50, 9, 3));
        assert_ne!(a, initial_point(50, 9, 4));
        assert!(a.iter().all(|v| v.abs() <= 1.0));
    }
}
