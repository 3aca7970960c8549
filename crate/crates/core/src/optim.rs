//! First-order minimizers over an [`Objective`]: plain gradient descent,
//! gradient descent projected onto `[-1, 1]^n`, and Adam.
//!
//! All three share one state type and one stopping contract so the solver
//! can swap them freely.

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulation::{Objective, ObjectiveError};
use crate::fourier::FourierScratch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Gd,
    Pgd,
    Adam,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Gd => "gd",
            OptimizerKind::Pgd => "pgd",
            OptimizerKind::Adam => "adam",
        }
    }

    pub fn is_box_constrained(self) -> bool {
        self == OptimizerKind::Pgd
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gd" => Ok(OptimizerKind::Gd),
            "pgd" => Ok(OptimizerKind::Pgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(format!("unknown optimizer `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop once `‖∇F‖_∞` drops to this; 0 disables the test.
    pub grad_tol: f64,
    /// Stop once the objective value drops to this.
    pub value_tol: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Gd,
            step_size: 1e-3,
            max_iters: 10_000,
            grad_tol: 0.0,
            value_tol: 1e-8,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind) -> Self {
        OptimizerConfig {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |what: &'static str| Err(OptimError::InvalidConfig(what));
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return bad("step size must be positive");
        }
        if !(self.grad_tol >= 0.0 && self.value_tol >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if self.adam_eps.is_nan() || self.adam_eps <= 0.0 {
            return bad("Adam epsilon must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ValueTolerance,
    GradientTolerance,
    MaxIterations,
    Deadline,
    /// The observer passed to [`run_observed`] asked to stop.
    Observer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub x: Vec<f64>,
    pub iter: usize,
    /// Objective value and gradient at `x`.
    pub value: f64,
    pub gradient: Vec<f64>,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub best_value: f64,
    pub best_x: Vec<f64>,
    pub stop: Option<StopReason>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("starting point: {0}")]
    BadStart(ObjectiveError),
    #[error("projected gradient descent must start inside [-1, 1]^n")]
    StartOutsideBox,
    #[error("iterate diverged at iteration {}", .state.iter)]
    Diverged {
        /// State at the last finite iterate, including best-seen.
        state: Box<OptimizerState>,
    },
}

/// Euclidean projection onto `[-1, 1]^n`.
pub fn box_project(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.clamp(-1.0, 1.0)).collect()
}

fn box_project_in_place(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
}

impl OptimizerState {
    /// Evaluates the objective at `x0`.
    pub fn new(x0: Vec<f64>, cfg: &OptimizerConfig, obj: &Objective<'_>) -> Result<Self, OptimError> {
        cfg.validate()?;
        if cfg.kind.is_box_constrained() && x0.iter().any(|v| v.abs() > 1.0) {
            return Err(OptimError::StartOutsideBox);
        }
        let n = x0.len();
        let mut gradient = vec![0.0; n];
        let value = obj
            .value_and_gradient(&x0, &mut gradient, &mut FourierScratch::new())
            .map_err(OptimError::BadStart)?;
        let moments = if cfg.kind == OptimizerKind::Adam { n } else { 0 };
        Ok(OptimizerState {
            best_x: x0.clone(),
            x: x0,
            iter: 0,
            value,
            gradient,
            first_moment: vec![0.0; moments],
            second_moment: vec![0.0; moments],
            best_value: value,
            stop: None,
        })
    }

    pub fn gradient_inf_norm(&self) -> f64 {
        self.gradient.iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// Scratch kept across steps so that iterations do not allocate.
#[derive(Debug, Default)]
pub struct StepBuffers {
    candidate: Vec<f64>,
    gradient: Vec<f64>,
    fourier: FourierScratch,
}

/// One iteration. On divergence the state is left at the last finite
/// iterate and the error carries a copy of it.
pub fn step(
    state: &mut OptimizerState,
    cfg: &OptimizerConfig,
    obj: &Objective<'_>,
    buffers: &mut StepBuffers,
) -> Result<(), OptimError> {
    let n = state.x.len();
    let eta = cfg.step_size;
    buffers.candidate.clear();
    buffers.candidate.extend_from_slice(&state.x);
    let x = &mut buffers.candidate;
    match cfg.kind {
        OptimizerKind::Gd | OptimizerKind::Pgd => {
            for (xi, g) in x.iter_mut().zip(&state.gradient) {
                *xi -= eta * g;
            }
            if cfg.kind == OptimizerKind::Pgd {
                box_project_in_place(x);
            }
        }
        OptimizerKind::Adam => {
            let t = (state.iter + 1) as i32;
            let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
            let c1 = 1.0 - b1.powi(t);
            let c2 = 1.0 - b2.powi(t);
            let moments = state.first_moment.iter_mut().zip(state.second_moment.iter_mut());
            for ((xi, &g), (m, v)) in x.iter_mut().zip(&state.gradient).zip(moments) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *xi -= eta * (*m / c1) / ((*v / c2).sqrt() + cfg.adam_eps);
            }
        }
    }

    buffers.gradient.resize(n, 0.0);
    let evaluated = if x.iter().all(|v| v.is_finite()) {
        obj.value_and_gradient(x, &mut buffers.gradient, &mut buffers.fourier)
            .ok()
            .filter(|_| buffers.gradient.iter().all(|g| g.is_finite()))
    } else {
        None
    };
    let Some(value) = evaluated else {
        return Err(OptimError::Diverged {
            state: Box::new(state.clone()),
        });
    };

    std::mem::swap(&mut state.x, &mut buffers.candidate);
    std::mem::swap(&mut state.gradient, &mut buffers.gradient);
    state.value = value;
    state.iter += 1;
    if value < state.best_value {
        state.best_value = value;
        state.best_x.copy_from_slice(&state.x);
    }
    Ok(())
}

fn stop_reason(state: &OptimizerState, cfg: &OptimizerConfig, deadline: Option<Instant>) -> Option<StopReason> {
    if state.value <= cfg.value_tol {
        Some(StopReason::ValueTolerance)
    } else if cfg.grad_tol > 0.0 && state.gradient_inf_norm() <= cfg.grad_tol {
        Some(StopReason::GradientTolerance)
    } else if state.iter >= cfg.max_iters {
        Some(StopReason::MaxIterations)
    } else if deadline.is_some_and(|d| Instant::now() >= d) {
        Some(StopReason::Deadline)
    } else {
        None
    }
}

/// Iterates from `x0` until a stopping rule fires.
pub fn run(
    x0: Vec<f64>,
    cfg: &OptimizerConfig,
    obj: &Objective<'_>,
    deadline: Option<Instant>,
) -> Result<OptimizerState, OptimError> {
    run_observed(x0, cfg, obj, deadline, |_| ControlFlow::Continue(()))
}

/// [`run`] with an observer called on the starting point and after every
/// step; returning `Break` stops the run with [`StopReason::Observer`].
pub fn run_observed<F>(
    x0: Vec<f64>,
    cfg: &OptimizerConfig,
    obj: &Objective<'_>,
    deadline: Option<Instant>,
    mut observer: F,
) -> Result<OptimizerState, OptimError>
where
    F: FnMut(&OptimizerState) -> ControlFlow<()>,
{
    let mut state = OptimizerState::new(x0, cfg, obj)?;
    let mut buffers = StepBuffers::default();
    loop {
        if observer(&state).is_break() {
            state.stop = Some(StopReason::Observer);
            return Ok(state);
        }
        if let Some(reason) = stop_reason(&state, cfg, deadline) {
            state.stop = Some(reason);
            return Ok(state);
        }
        step(&mut state, cfg, obj, &mut buffers)?;
    }
}
