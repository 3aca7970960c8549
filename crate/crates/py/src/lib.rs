//! Python bindings, imported as `hybrid_sat`.

use std::time::Duration;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hybrid_sat::formulation::Objective;
use hybrid_sat::model::{self, Comparator, ConstraintKind};
use hybrid_sat::{benchgen, fourier, hnf, oracle, output, solver};
use hybrid_sat::{Formulation, OptimizerConfig, OptimizerKind, SolveConfig, SolveStatus};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A single OR, XOR, NAE or cardinality constraint over DIMACS literals.
#[pyclass(frozen, from_py_object, module = "hybrid_sat")]
#[derive(Clone)]
struct Constraint(model::Constraint);

impl Constraint {
    fn build(kind: ConstraintKind, literals: Vec<i64>) -> PyResult<Self> {
        model::Constraint::from_dimacs(kind, &literals)
            .map(Constraint)
            .map_err(value_err)
    }
}

#[pymethods]
impl Constraint {
    #[staticmethod]
    fn or_(literals: Vec<i64>) -> PyResult<Self> {
        Self::build(ConstraintKind::Or, literals)
    }

    #[staticmethod]
    fn xor(literals: Vec<i64>) -> PyResult<Self> {
        Self::build(ConstraintKind::Xor, literals)
    }

    #[staticmethod]
    fn nae(literals: Vec<i64>) -> PyResult<Self> {
        Self::build(ConstraintKind::Nae, literals)
    }

    /// `op` is one of ">=", "<=", "=".
    #[staticmethod]
    fn card(op: &str, bound: usize, literals: Vec<i64>) -> PyResult<Self> {
        let cmp = match op {
            ">=" => Comparator::AtLeast,
            "<=" => Comparator::AtMost,
            "=" => Comparator::Exactly,
            _ => return Err(PyValueError::new_err(format!("unknown comparator {op:?}"))),
        };
        Self::build(ConstraintKind::Card { cmp, bound }, literals)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn literals(&self) -> Vec<i64> {
        self.0.literals().iter().map(|l| l.to_dimacs()).collect()
    }

    /// Fourier expansion at `x` (indexed by variable, ±1 encoding with
    /// -1 = True).
    fn fourier_eval(&self, x: Vec<f64>) -> PyResult<f64> {
        fourier::fourier_eval(&self.0, &x).map_err(value_err)
    }

    /// `(value, gradient)`; the gradient is indexed like `x`.
    fn fourier_grad(&self, x: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        let e = fourier::fourier_grad(&self.0, &x).map_err(value_err)?;
        Ok((e.value, e.gradient))
    }

    fn is_satisfied(&self, truth: Vec<bool>) -> PyResult<bool> {
        self.0
            .is_satisfied(&model::BooleanAssignment::from_truth(truth))
            .map_err(value_err)
    }

    /// Nonzero Fourier coefficients by enumeration, as `(subset_mask, coefficient)`
    /// pairs; bit i of the mask is literal position i.
    fn fourier_coefficients(&self) -> PyResult<Vec<(usize, f64)>> {
        let c = oracle::brute_force_coefficients(&self.0).map_err(value_err)?;
        Ok(c.support(oracle::ZERO_TOLERANCE))
    }

    fn has_isolated_violations(&self) -> PyResult<bool> {
        oracle::has_isolated_violations(&self.0).map_err(value_err)
    }

    /// A real point with zero expansion whose rounding violates the
    /// constraint, if the randomized search finds one.
    #[pyo3(signature = (trials = 10_000, seed = 0))]
    fn falsify_rounding_friendly(&self, trials: usize, seed: u64) -> PyResult<Option<Vec<f64>>> {
        oracle::falsify_rounding_friendly(&self.0, trials, seed).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("Constraint.{}({:?})", self.kind(), self.literals())
    }
}

#[pyclass(frozen, module = "hybrid_sat")]
struct Formula(model::Formula);

#[pymethods]
impl Formula {
    #[new]
    fn new(num_vars: usize, constraints: Vec<Constraint>) -> PyResult<Self> {
        let cs = constraints.into_iter().map(|c| c.0).collect();
        model::Formula::new(num_vars, cs).map(Formula).map_err(value_err)
    }

    #[staticmethod]
    fn from_hnf(text: &str) -> PyResult<Self> {
        hnf::parse_hnf(text).map(Formula).map_err(value_err)
    }

    fn to_hnf(&self) -> String {
        hnf::serialize_hnf(&self.0)
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.0.num_vars()
    }

    #[getter]
    fn num_constraints(&self) -> usize {
        self.0.num_constraints()
    }

    #[getter]
    fn constraints(&self) -> Vec<Constraint> {
        self.0.constraints().iter().cloned().map(Constraint).collect()
    }

    fn count_violations(&self, truth: Vec<bool>) -> PyResult<usize> {
        self.0
            .count_violations(&model::BooleanAssignment::from_truth(truth))
            .map_err(value_err)
    }

    /// `(value, gradient)` of the chosen objective at `x`.
    #[pyo3(signature = (x, formulation = "square", alpha = 0.0))]
    fn objective(&self, x: Vec<f64>, formulation: &str, alpha: f64) -> PyResult<(f64, Vec<f64>)> {
        let form: Formulation = formulation.parse().map_err(PyValueError::new_err)?;
        let obj = Objective::new(&self.0, form, alpha).map_err(value_err)?;
        let e = obj.gradient(&x).map_err(value_err)?;
        Ok((e.value, e.gradient))
    }

    /// `(fewest violations, truth values)` by exhaustive search.
    fn brute_force_optimum(&self) -> PyResult<(usize, Vec<bool>)> {
        let (v, b) = oracle::brute_force_optimum(&self.0).map_err(value_err)?;
        Ok((v, b.truth().to_vec()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Formula(num_vars={}, num_constraints={})",
            self.0.num_vars(),
            self.0.num_constraints()
        )
    }
}

#[pyclass(frozen, get_all, module = "hybrid_sat")]
struct SolveResult {
    /// "SAT" or "UNKNOWN".
    status: &'static str,
    assignment: Option<Vec<bool>>,
    violated: usize,
    restarts_used: usize,
    iters_total: u64,
    final_objective: f64,
    /// Result text in the command-line output format.
    text: String,
}

#[pymethods]
impl SolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(status={:?}, violated={}, restarts_used={})",
            self.status, self.violated, self.restarts_used
        )
    }
}

#[pyfunction]
#[pyo3(signature = (
    formula, formulation = "square", alpha = 0.0, optimizer = None, step_size = None,
    max_iters = None, restarts = 32, seed = 0, timeout = 300.0, tolerance = None
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    formula: &Formula,
    formulation: &str,
    alpha: f64,
    optimizer: Option<&str>,
    step_size: Option<f64>,
    max_iters: Option<usize>,
    restarts: usize,
    seed: u64,
    timeout: f64,
    tolerance: Option<f64>,
) -> PyResult<SolveResult> {
    let form: Formulation = formulation.parse().map_err(PyValueError::new_err)?;
    let kind = match optimizer {
        Some(o) => o.parse().map_err(PyValueError::new_err)?,
        None if form.needs_box() => OptimizerKind::Pgd,
        None => OptimizerKind::Gd,
    };
    let mut opt = OptimizerConfig::new(kind);
    if let Some(s) = step_size {
        opt.step_size = s;
    }
    if let Some(m) = max_iters {
        opt.max_iters = m;
    }
    if let Some(t) = tolerance {
        opt.value_tol = t;
    }
    let timeout = Duration::try_from_secs_f64(timeout).map_err(value_err)?;
    let cfg = SolveConfig {
        formulation: form,
        alpha,
        optimizer: opt,
        restarts,
        seed,
        timeout: Some(timeout),
        ..SolveConfig::default()
    };
    let r = py.detach(|| solver::solve(&formula.0, &cfg)).map_err(value_err)?;
    Ok(SolveResult {
        status: match r.status {
            SolveStatus::Sat => "SAT",
            SolveStatus::Unknown => "UNKNOWN",
        },
        assignment: r.assignment.as_ref().map(|b| b.truth().to_vec()),
        violated: r.violated,
        restarts_used: r.restarts_used,
        iters_total: r.iters_total,
        final_objective: r.final_objective,
        text: output::emit_result(&r).0,
    })
}

/// Truth values from signs: negative is True, zero and positive are False.
#[pyfunction]
fn sign_round(x: Vec<f64>) -> Vec<bool> {
    model::sign_round(&x).truth().to_vec()
}

#[pyfunction]
fn gen_random_kcnf(n: usize, m: usize, k: usize, seed: u64) -> PyResult<Formula> {
    benchgen::gen_random_kcnf(n, m, k, seed).map(Formula).map_err(value_err)
}

#[pyfunction]
fn gen_random_kxor(n: usize, m: usize, k: usize, seed: u64) -> PyResult<Formula> {
    benchgen::gen_random_kxor(n, m, k, seed).map(Formula).map_err(value_err)
}

#[pyfunction]
fn gen_random_card(n: usize, r_p: f64, r_v: f64, seed: u64) -> PyResult<Formula> {
    benchgen::gen_random_card(n, r_p, r_v, seed)
        .map(Formula)
        .map_err(value_err)
}

/// Upper bound on violations after rounding, from the unpenalized square
/// objective value `w`. `None` unless the formula is pure k-CNF, XOR or
/// k-NAE.
#[pyfunction]
fn violation_bound(formula: &Formula, w: f64) -> Option<u64> {
    solver::violation_bound(&formula.0, w)
}

#[pymodule]
#[pyo3(name = "hybrid_sat")]
fn hybrid_sat_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Constraint>()?;
    m.add_class::<Formula>()?;
    m.add_class::<SolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(sign_round, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random_kcnf, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random_kxor, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random_card, m)?)?;
    m.add_function(wrap_pyfunction!(violation_bound, m)?)?;
    Ok(())
}
