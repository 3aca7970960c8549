//! Closed-form Walsh-Fourier expansions `FE_c` of the supported constraint
//! types, evaluated at arbitrary real points together with their gradients.
//!
//! `FE_c` is the unique multilinear polynomial that is `0` on satisfying and
//! `1` on violating Boolean points. A negated literal is handled by
//! substituting `-x` for its variable, so every routine below works on the
//! literal values `y_i = ±x_i`.
//!
//! | kind | `FE_c(y)` |
//! |------|-----------|
//! | OR   | `∏ (1 + y_i)/2` |
//! | XOR  | `(1 + ∏ y_i)/2` |
//! | NAE  | `∏ (1 + y_i)/2 + ∏ (1 - y_i)/2` |
//! | CARD | `Σ_t D[t]·viol(t)`, `D` the distribution of the number of true literals under `p_i = (1 - y_i)/2` |
//!
//! The CARD distribution is a signed Poisson-binomial convolution: outside
//! the box the `p_i` leave `[0, 1]`, but the recurrence is a polynomial
//! identity and stays exact there.

use thiserror::Error;

use crate::model::{Constraint, ConstraintKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("non-finite value {value} for variable {var}")]
    NonFinite { var: u32, value: f64 },
    #[error("point has {got} coordinates but variable {needed} is referenced")]
    TooShort { needed: usize, got: usize },
    #[error("variable {0} does not occur in the constraint")]
    VariableNotInConstraint(u32),
}

/// Value of `FE_c` and its full gradient with respect to `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintEvaluation {
    pub value: f64,
    /// `∂FE_c/∂x_i`; exactly zero for variables outside `c`.
    pub gradient: Vec<f64>,
}

/// Reusable buffers for repeated evaluations. Evaluation itself is pure.
#[derive(Debug, Default, Clone)]
pub struct FourierScratch {
    y: Vec<f64>,
    dy: Vec<f64>,
    aux: Vec<f64>,
    viol: Vec<f64>,
    dist: Vec<f64>,
    table: Vec<f64>,
}

impl FourierScratch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Literal values of `c` at `x`; assumes bounds were checked.
    fn load(&mut self, c: &Constraint, x: &[f64]) {
        self.y.clear();
        self.y.extend(c.literals().iter().map(|l| l.sign() * x[l.index()]));
    }

    fn load_checked(&mut self, c: &Constraint, x: &[f64]) -> Result<(), EvalError> {
        let needed = c.max_var() as usize;
        if needed > x.len() {
            return Err(EvalError::TooShort { needed, got: x.len() });
        }
        for l in c.literals() {
            let value = x[l.index()];
            if !value.is_finite() {
                return Err(EvalError::NonFinite { var: l.var(), value });
            }
        }
        self.load(c, x);
        Ok(())
    }

    fn load_violations(&mut self, c: &Constraint) {
        let k = c.len();
        self.viol.clear();
        self.viol
            .extend((0..=k).map(|t| if c.satisfied_by_count(t) { 0.0 } else { 1.0 }));
    }

    /// `FE_c(x)` without validating `x`.
    pub(crate) fn value_unchecked(&mut self, c: &Constraint, x: &[f64]) -> f64 {
        self.load(c, x);
        self.value_of_loaded(c)
    }

    /// `FE_c(x)` plus `∂FE_c/∂x` for each literal of `c`, in literal order,
    /// without validating `x`.
    pub(crate) fn grad_unchecked(&mut self, c: &Constraint, x: &[f64]) -> (f64, &[f64]) {
        self.load(c, x);
        let value = self.grad_of_loaded(c);
        for (d, l) in self.dy.iter_mut().zip(c.literals()) {
            *d *= l.sign();
        }
        (value, &self.dy)
    }

    pub fn value(&mut self, c: &Constraint, x: &[f64]) -> Result<f64, EvalError> {
        self.load_checked(c, x)?;
        Ok(self.value_of_loaded(c))
    }

    fn value_of_loaded(&mut self, c: &Constraint) -> f64 {
        let y = &self.y;
        match c.kind() {
            ConstraintKind::Or => y.iter().map(|v| 0.5 * (1.0 + v)).product(),
            ConstraintKind::Xor => 0.5 * (1.0 + y.iter().product::<f64>()),
            ConstraintKind::Nae => {
                let all_false: f64 = y.iter().map(|v| 0.5 * (1.0 + v)).product();
                let all_true: f64 = y.iter().map(|v| 0.5 * (1.0 - v)).product();
                all_false + all_true
            }
            ConstraintKind::Card { .. } => {
                self.load_violations(c);
                card_value(&self.y, &self.viol, &mut self.dist)
            }
        }
    }

    /// Fills `self.dy` with `∂FE/∂y_i` and returns the value.
    fn grad_of_loaded(&mut self, c: &Constraint) -> f64 {
        let k = self.y.len();
        self.dy.clear();
        self.dy.resize(k, 0.0);
        match c.kind() {
            ConstraintKind::Or => {
                self.aux.clear();
                self.aux.extend(self.y.iter().map(|v| 0.5 * (1.0 + v)));
                let value = leave_one_out_products(&self.aux, &mut self.dy);
                self.dy.iter_mut().for_each(|d| *d *= 0.5);
                value
            }
            ConstraintKind::Xor => {
                let prod = leave_one_out_products(&self.y, &mut self.dy);
                self.dy.iter_mut().for_each(|d| *d *= 0.5);
                0.5 * (1.0 + prod)
            }
            ConstraintKind::Nae => {
                // dy <- ∏_{j≠i} (1 + y_j)/2, table <- ∏_{j≠i} (1 - y_j)/2
                self.aux.clear();
                self.aux.extend(self.y.iter().map(|v| 0.5 * (1.0 + v)));
                let all_false = leave_one_out_products(&self.aux, &mut self.dy);
                self.aux.clear();
                self.aux.extend(self.y.iter().map(|v| 0.5 * (1.0 - v)));
                self.table.clear();
                self.table.resize(k, 0.0);
                let all_true = leave_one_out_products(&self.aux, &mut self.table);
                for (d, t) in self.dy.iter_mut().zip(&self.table) {
                    *d = 0.5 * (*d - t);
                }
                all_false + all_true
            }
            ConstraintKind::Card { .. } => {
                self.load_violations(c);
                card_value_and_grad(&self.y, &self.viol, &mut self.dist, &mut self.table, &mut self.dy)
            }
        }
    }

    pub fn grad(&mut self, c: &Constraint, x: &[f64]) -> Result<ConstraintEvaluation, EvalError> {
        self.load_checked(c, x)?;
        let value = self.grad_of_loaded(c);
        let mut gradient = vec![0.0; x.len()];
        for (l, d) in c.literals().iter().zip(&self.dy) {
            gradient[l.index()] = l.sign() * d;
        }
        Ok(ConstraintEvaluation { value, gradient })
    }
}

/// Writes `∏_{j≠i} f_j` into `out[i]` using prefix and suffix products (no
/// division, so zero factors are fine) and returns the full product.
fn leave_one_out_products(factors: &[f64], out: &mut [f64]) -> f64 {
    let mut prefix = 1.0;
    for (o, f) in out.iter_mut().zip(factors) {
        *o = prefix;
        prefix *= f;
    }
    let mut suffix = 1.0;
    for (o, f) in out.iter_mut().zip(factors).rev() {
        *o *= suffix;
        suffix *= f;
    }
    prefix
}

/// `Σ_t D[t]·viol[t]` with `D` the (signed) distribution of true literals.
fn card_value(y: &[f64], viol: &[f64], dist: &mut Vec<f64>) -> f64 {
    dist.clear();
    dist.push(1.0);
    for &v in y {
        let p = 0.5 * (1.0 - v);
        let q = 1.0 - p;
        dist.push(0.0);
        for t in (1..dist.len()).rev() {
            dist[t] = dist[t] * q + dist[t - 1] * p;
        }
        dist[0] *= q;
    }
    dist.iter().zip(viol).map(|(d, v)| d * v).sum()
}

/// CARD value and `∂FE/∂y_i` in O(k²).
///
/// A backward table `V_i[a]` holds the expected violation given `a` true
/// literals among the first `i` and the remaining literals random. Then
/// `∂FE/∂p_i = Σ_a P_i[a]·(V_{i+1}[a+1] - V_{i+1}[a])`, where `P_i` is the
/// forward distribution over the first `i` literals. This is the
/// leave-one-out identity `∂FE/∂y_i = (FE(y_i←1) - FE(y_i←-1))/2` with the
/// shared prefix and suffix work factored out.
fn card_value_and_grad(y: &[f64], viol: &[f64], dist: &mut Vec<f64>, table: &mut Vec<f64>, dy: &mut [f64]) -> f64 {
    let k = y.len();
    let offset = |i: usize| i * (i + 1) / 2;
    table.clear();
    table.resize(offset(k + 1), 0.0);
    table[offset(k)..offset(k + 1)].copy_from_slice(&viol[..=k]);
    for i in (1..k).rev() {
        let p = 0.5 * (1.0 - y[i]);
        let q = 1.0 - p;
        let (lower, upper) = table.split_at_mut(offset(i + 1));
        let next = &upper[..i + 2];
        for (a, slot) in lower[offset(i)..].iter_mut().enumerate() {
            *slot = q * next[a] + p * next[a + 1];
        }
    }

    dist.clear();
    dist.push(1.0);
    for (i, &v) in y.iter().enumerate() {
        let next = &table[offset(i + 1)..offset(i + 2)];
        let dp: f64 = dist.iter().enumerate().map(|(a, d)| d * (next[a + 1] - next[a])).sum();
        dy[i] = -0.5 * dp;

        let p = 0.5 * (1.0 - v);
        let q = 1.0 - p;
        dist.push(0.0);
        for t in (1..dist.len()).rev() {
            dist[t] = dist[t] * q + dist[t - 1] * p;
        }
        dist[0] *= q;
    }
    dist.iter().zip(viol).map(|(d, v)| d * v).sum()
}

/// `FE_c(x)`.
pub fn fourier_eval(c: &Constraint, x: &[f64]) -> Result<f64, EvalError> {
    FourierScratch::new().value(c, x)
}

/// `FE_c(x)` and its gradient over all `x.len()` coordinates.
pub fn fourier_grad(c: &Constraint, x: &[f64]) -> Result<ConstraintEvaluation, EvalError> {
    FourierScratch::new().grad(c, x)
}

/// Restrictions `(FE_c(x with x_var = 1), FE_c(x with x_var = -1))`.
///
/// By multilinearity their mean is `FE_c` at `x_var = 0` and half their
/// difference is `∂FE_c/∂x_var`.
pub fn multilinear_split(c: &Constraint, x: &[f64], var: u32) -> Result<(f64, f64), EvalError> {
    if !c.contains_var(var) {
        return Err(EvalError::VariableNotInConstraint(var));
    }
    let mut scratch = FourierScratch::new();
    scratch.load_checked(c, x)?;
    let mut point = x.to_vec();
    point[var as usize - 1] = 1.0;
    let high = scratch.value_unchecked(c, &point);
    point[var as usize - 1] = -1.0;
    let low = scratch.value_unchecked(c, &point);
    Ok((high, low))
}
