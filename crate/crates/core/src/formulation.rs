//! Whole-formula objectives built from the per-constraint expansions.
//!
//! * `Linear`: `Σ FE_c(x) + α·P(x)`, meaningful only on the box `[-1, 1]^n`
//! * `Square`: `Σ FE_c(x)² + α·P(x)`
//! * `Abs`:    `Σ |FE_c(x)| + α·P(x)`
//!
//! with the box penalty `P(x) = Σ_i (x_i² - 1)²`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fourier::FourierScratch;
use crate::model::{sign_round, BooleanAssignment, Formula};

/// Default threshold below which an objective value counts as zero.
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Linear,
    Square,
    Abs,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Linear => "linear",
            Formulation::Square => "square",
            Formulation::Abs => "abs",
        }
    }

    /// Whether the objective is only sound inside the box.
    pub fn needs_box(self) -> bool {
        self == Formulation::Linear
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Formulation::Linear),
            "square" | "sq" => Ok(Formulation::Square),
            "abs" => Ok(Formulation::Abs),
            other => Err(format!("unknown formulation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("point has {got} coordinates, formula has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate {value} at variable {var}")]
    NonFiniteInput { var: usize, value: f64 },
    #[error("constraint {index} evaluated to a non-finite value")]
    NonFiniteConstraint { index: usize },
    #[error("penalty term overflowed")]
    NonFinitePenalty,
    #[error("penalty coefficient must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEvaluation {
    pub value: f64,
    /// Empty for value-only evaluations.
    pub gradient: Vec<f64>,
    /// `FE_c(x)` for every constraint, in formula order.
    pub per_constraint: Vec<f64>,
}

/// A formulation with penalty coefficient `alpha` over a borrowed formula.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    formula: &'a Formula,
    formulation: Formulation,
    alpha: f64,
}

impl<'a> Objective<'a> {
    pub fn new(formula: &'a Formula, formulation: Formulation, alpha: f64) -> Result<Self, ObjectiveError> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(ObjectiveError::InvalidAlpha(alpha));
        }
        Ok(Objective {
            formula,
            formulation,
            alpha,
        })
    }

    pub fn formula(&self) -> &'a Formula {
        self.formula
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn num_vars(&self) -> usize {
        self.formula.num_vars()
    }

    fn check_point(&self, x: &[f64]) -> Result<(), ObjectiveError> {
        if x.len() != self.formula.num_vars() {
            return Err(ObjectiveError::LengthMismatch {
                expected: self.formula.num_vars(),
                got: x.len(),
            });
        }
        if let Some((i, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(ObjectiveError::NonFiniteInput { var: i + 1, value });
        }
        Ok(())
    }

    fn apply(&self, fe: f64) -> f64 {
        match self.formulation {
            Formulation::Linear => fe,
            Formulation::Square => fe * fe,
            Formulation::Abs => fe.abs(),
        }
    }

    /// `d op(FE)/d FE`; the kink of `|·|` gets subgradient 0.
    fn outer_derivative(&self, fe: f64) -> f64 {
        match self.formulation {
            Formulation::Linear => 1.0,
            Formulation::Square => 2.0 * fe,
            Formulation::Abs => {
                if fe > 0.0 {
                    1.0
                } else if fe < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn penalty(&self, x: &[f64]) -> f64 {
        if self.alpha == 0.0 {
            return 0.0;
        }
        self.alpha * x.iter().map(|v| (v * v - 1.0).powi(2)).sum::<f64>()
    }

    fn finish(&self, constraint_sum: f64, x: &[f64]) -> Result<f64, ObjectiveError> {
        let value = constraint_sum + self.penalty(x);
        if !value.is_finite() {
            return Err(ObjectiveError::NonFinitePenalty);
        }
        Ok(value)
    }

    pub fn value(&self, x: &[f64]) -> Result<ObjectiveEvaluation, ObjectiveError> {
        self.check_point(x)?;
        let mut scratch = FourierScratch::new();
        let mut per_constraint = Vec::with_capacity(self.formula.num_constraints());
        let mut sum = 0.0;
        for (index, c) in self.formula.constraints().iter().enumerate() {
            let fe = scratch.value_unchecked(c, x);
            if !fe.is_finite() {
                return Err(ObjectiveError::NonFiniteConstraint { index });
            }
            per_constraint.push(fe);
            sum += self.apply(fe);
        }
        Ok(ObjectiveEvaluation {
            value: self.finish(sum, x)?,
            gradient: Vec::new(),
            per_constraint,
        })
    }

    pub fn gradient(&self, x: &[f64]) -> Result<ObjectiveEvaluation, ObjectiveError> {
        let mut gradient = vec![0.0; x.len()];
        let mut per_constraint = Vec::with_capacity(self.formula.num_constraints());
        let value = self.eval_into(x, &mut gradient, &mut FourierScratch::new(), Some(&mut per_constraint))?;
        Ok(ObjectiveEvaluation {
            value,
            gradient,
            per_constraint,
        })
    }

    /// Value and gradient without allocating; the optimizers' hot path.
    pub fn value_and_gradient(
        &self,
        x: &[f64],
        gradient: &mut [f64],
        scratch: &mut FourierScratch,
    ) -> Result<f64, ObjectiveError> {
        self.eval_into(x, gradient, scratch, None)
    }

    fn eval_into(
        &self,
        x: &[f64],
        gradient: &mut [f64],
        scratch: &mut FourierScratch,
        mut per_constraint: Option<&mut Vec<f64>>,
    ) -> Result<f64, ObjectiveError> {
        self.check_point(x)?;
        debug_assert_eq!(gradient.len(), x.len());
        gradient.iter_mut().for_each(|g| *g = 0.0);
        let mut sum = 0.0;
        for (index, c) in self.formula.constraints().iter().enumerate() {
            let (fe, local) = scratch.grad_unchecked(c, x);
            if !fe.is_finite() {
                return Err(ObjectiveError::NonFiniteConstraint { index });
            }
            if let Some(values) = per_constraint.as_deref_mut() {
                values.push(fe);
            }
            sum += self.apply(fe);
            let scale = self.outer_derivative(fe);
            if scale != 0.0 {
                for (l, d) in c.literals().iter().zip(local) {
                    gradient[l.index()] += scale * d;
                }
            }
        }
        if self.alpha != 0.0 {
            for (g, &v) in gradient.iter_mut().zip(x) {
                *g += 4.0 * self.alpha * v * (v * v - 1.0);
            }
        }
        self.finish(sum, x)
    }
}

/// Sign-rounds `x` when the objective is within `tol` of zero, but only
/// returns the assignment if it satisfies the formula when checked
/// discretely.
pub fn satisfiability_certificate(obj: &Objective<'_>, x: &[f64], tol: f64) -> Option<BooleanAssignment> {
    let eval = obj.value(x).ok()?;
    if eval.value > tol {
        return None;
    }
    let b = sign_round(x);
    match obj.formula().count_violations(&b) {
        Ok(0) => Some(b),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Comparator, Constraint, ConstraintKind};
    use approx::assert_abs_diff_eq;

    fn formula(n: usize, cs: &[(ConstraintKind, &[i64])]) -> Formula {
        Formula::new(
            n,
            cs.iter()
                .map(|(k, l)| Constraint::from_dimacs(*k, l).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn value_examples() {
        let f = formula(2, &[(ConstraintKind::Or, &[1, 2])]);
        let sq = Objective::new(&f, Formulation::Square, 0.0).unwrap();
        assert_abs_diff_eq!(sq.value(&[1.0, 1.0]).unwrap().value, 1.0);

        let g = formula(3, &[(ConstraintKind::Xor, &[1, 2, 3])]);
        let abs = Objective::new(&g, Formulation::Abs, 0.0).unwrap();
        assert_abs_diff_eq!(abs.value(&[-1.0, 1.0, 1.0]).unwrap().value, 0.0);
    }

    #[test]
    fn penalty_at_origin_adds_n() {
        let f = formula(3, &[(ConstraintKind::Nae, &[1, 2, 3])]);
        for form in [Formulation::Linear, Formulation::Square, Formulation::Abs] {
            let plain = Objective::new(&f, form, 0.0).unwrap().value(&[0.0; 3]).unwrap();
            let pen = Objective::new(&f, form, 1.0).unwrap().value(&[0.0; 3]).unwrap();
            assert_abs_diff_eq!(pen.value - plain.value, 3.0);
        }
    }

    #[test]
    fn gradient_examples() {
        let empty = Formula::new(2, vec![]).unwrap();
        let pen = Objective::new(&empty, Formulation::Square, 1.0).unwrap();
        assert_eq!(pen.gradient(&[0.0, 0.0]).unwrap().gradient, vec![0.0, 0.0]);
        assert_abs_diff_eq!(pen.gradient(&[2.0, 0.0]).unwrap().gradient[0], 24.0);

        let f = formula(2, &[(ConstraintKind::Or, &[1, 2])]);
        let sq = Objective::new(&f, Formulation::Square, 0.0).unwrap();
        let ev = sq.gradient(&[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(ev.gradient[0], 1.0);
        assert_eq!(ev.per_constraint, vec![1.0]);
    }

    #[test]
    fn abs_kink_gets_zero_subgradient() {
        let f = formula(2, &[(ConstraintKind::Xor, &[1, 2])]);
        let abs = Objective::new(&f, Formulation::Abs, 0.0).unwrap();
        // FE = (1 + x1 x2)/2 = 0 at (1, -1)
        assert_eq!(abs.gradient(&[1.0, -1.0]).unwrap().gradient, vec![0.0, 0.0]);
    }

    #[test]
    fn errors() {
        let f = formula(2, &[(ConstraintKind::Or, &[1, 2])]);
        assert!(Objective::new(&f, Formulation::Square, -0.1).is_err());
        assert!(Objective::new(&f, Formulation::Square, f64::NAN).is_err());
        let sq = Objective::new(&f, Formulation::Square, 0.0).unwrap();
        assert_eq!(
            sq.value(&[0.0]).unwrap_err(),
            ObjectiveError::LengthMismatch { expected: 2, got: 1 }
        );
        assert!(matches!(
            sq.gradient(&[0.0, f64::NAN]),
            Err(ObjectiveError::NonFiniteInput { var: 2, .. })
        ));
        assert_eq!(
            sq.value(&[1e200, 1e200]).unwrap_err(),
            ObjectiveError::NonFiniteConstraint { index: 0 }
        );
    }

    #[test]
    fn certificate_examples() {
        let f = formula(2, &[(ConstraintKind::Or, &[1, 2])]);
        let sq = Objective::new(&f, Formulation::Square, 0.0).unwrap();
        let b = satisfiability_certificate(&sq, &[-1.0, 1.0], DEFAULT_ZERO_TOLERANCE).unwrap();
        assert_eq!(b.to_signs(), vec![-1.0, 1.0]);
        assert!(satisfiability_certificate(&sq, &[0.0, 0.0], DEFAULT_ZERO_TOLERANCE).is_none());

        let and = formula(
            2,
            &[(
                ConstraintKind::Card {
                    cmp: Comparator::AtLeast,
                    bound: 2,
                },
                &[1, 2],
            )],
        );
        let sq = Objective::new(&and, Formulation::Square, 0.0).unwrap();
        assert!(sq.value(&[3.0, 3.0]).unwrap().value <= DEFAULT_ZERO_TOLERANCE);
        assert!(satisfiability_certificate(&sq, &[3.0, 3.0], DEFAULT_ZERO_TOLERANCE).is_none());
    }
}
