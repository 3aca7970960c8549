//! Discrete side of the solver: literals, typed constraints, formulas and
//! Boolean assignments.
//!
//! Variables use the ±1 encoding throughout the crate: `-1` is True and `+1`
//! is False. Variable indices are 1-based, as in DIMACS.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("variable index 0 is not a valid literal")]
    ZeroVariable,
    #[error("literal {0} does not fit a 32-bit variable index")]
    LiteralTooLarge(i64),
    #[error("constraint has no literals")]
    EmptyConstraint,
    #[error("variable {0} occurs more than once in a constraint")]
    DuplicateVariable(u32),
    #[error("NAE constraint needs at least 2 literals, got {0}")]
    NaeTooShort(usize),
    #[error("cardinality bound {bound} exceeds constraint length {len}")]
    BoundOutOfRange { bound: usize, len: usize },
    #[error("variable {var} out of range for a formula over {num_vars} variables")]
    VariableOutOfRange { var: u32, num_vars: usize },
    #[error("assignment has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// A possibly negated occurrence of a 1-based variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Result<Self, ModelError> {
        if var == 0 {
            return Err(ModelError::ZeroVariable);
        }
        Ok(Literal { var, negated })
    }

    pub fn positive(var: u32) -> Result<Self, ModelError> {
        Self::new(var, false)
    }

    pub fn negative(var: u32) -> Result<Self, ModelError> {
        Self::new(var, true)
    }

    /// Builds a literal from a signed DIMACS integer (`-3` is `¬x3`).
    pub fn from_dimacs(lit: i64) -> Result<Self, ModelError> {
        let var = u32::try_from(lit.unsigned_abs()).map_err(|_| ModelError::LiteralTooLarge(lit))?;
        Self::new(var, lit < 0)
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    pub fn var(self) -> u32 {
        self.var
    }

    /// 0-based position of the variable in an assignment vector.
    pub fn index(self) -> usize {
        self.var as usize - 1
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// Multiplier mapping the variable's real value to the literal's value.
    pub fn sign(self) -> f64 {
        if self.negated {
            -1.0
        } else {
            1.0
        }
    }

    pub fn is_true(self, b: &BooleanAssignment) -> bool {
        b.value(self.var) != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    AtLeast,
    AtMost,
    Exactly,
}

impl Comparator {
    pub fn holds(self, count: usize, bound: usize) -> bool {
        match self {
            Comparator::AtLeast => count >= bound,
            Comparator::AtMost => count <= bound,
            Comparator::Exactly => count == bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::AtLeast => ">=",
            Comparator::AtMost => "<=",
            Comparator::Exactly => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Or,
    Xor,
    Nae,
    Card { cmp: Comparator, bound: usize },
}

impl ConstraintKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Or => "OR",
            ConstraintKind::Xor => "XOR",
            ConstraintKind::Nae => "NAE",
            ConstraintKind::Card { .. } => "CARD",
        }
    }
}

/// A typed constraint over distinct variables. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    kind: ConstraintKind,
    literals: Vec<Literal>,
}

impl Constraint {
    pub fn new(kind: ConstraintKind, literals: Vec<Literal>) -> Result<Self, ModelError> {
        if literals.is_empty() {
            return Err(ModelError::EmptyConstraint);
        }
        let mut vars: Vec<u32> = literals.iter().map(|l| l.var).collect();
        vars.sort_unstable();
        if let Some(w) = vars.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::DuplicateVariable(w[0]));
        }
        match kind {
            ConstraintKind::Nae if literals.len() < 2 => return Err(ModelError::NaeTooShort(literals.len())),
            ConstraintKind::Card { bound, .. } if bound > literals.len() => {
                return Err(ModelError::BoundOutOfRange {
                    bound,
                    len: literals.len(),
                })
            }
            _ => {}
        }
        Ok(Constraint { kind, literals })
    }

    pub fn or(literals: Vec<Literal>) -> Result<Self, ModelError> {
        Self::new(ConstraintKind::Or, literals)
    }

    pub fn xor(literals: Vec<Literal>) -> Result<Self, ModelError> {
        Self::new(ConstraintKind::Xor, literals)
    }

    pub fn nae(literals: Vec<Literal>) -> Result<Self, ModelError> {
        Self::new(ConstraintKind::Nae, literals)
    }

    pub fn card(cmp: Comparator, bound: usize, literals: Vec<Literal>) -> Result<Self, ModelError> {
        Self::new(ConstraintKind::Card { cmp, bound }, literals)
    }

    /// Convenience constructor from signed DIMACS integers.
    pub fn from_dimacs(kind: ConstraintKind, lits: &[i64]) -> Result<Self, ModelError> {
        let literals = lits
            .iter()
            .map(|&l| Literal::from_dimacs(l))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(kind, literals)
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn max_var(&self) -> u32 {
        self.literals.iter().map(|l| l.var).max().unwrap_or(0)
    }

    pub fn contains_var(&self, var: u32) -> bool {
        self.literals.iter().any(|l| l.var == var)
    }

    /// Whether `t` true literals out of `len()` satisfy the constraint.
    pub fn satisfied_by_count(&self, t: usize) -> bool {
        let k = self.literals.len();
        match self.kind {
            ConstraintKind::Or => t >= 1,
            ConstraintKind::Xor => t % 2 == 1,
            ConstraintKind::Nae => t != 0 && t != k,
            ConstraintKind::Card { cmp, bound } => cmp.holds(t, bound),
        }
    }

    pub fn true_count(&self, b: &BooleanAssignment) -> Result<usize, ModelError> {
        let max = self.max_var() as usize;
        if max > b.len() {
            return Err(ModelError::LengthMismatch {
                expected: max,
                got: b.len(),
            });
        }
        Ok(self.literals.iter().filter(|l| l.is_true(b)).count())
    }

    pub fn is_satisfied(&self, b: &BooleanAssignment) -> Result<bool, ModelError> {
        Ok(self.satisfied_by_count(self.true_count(b)?))
    }
}

/// A conjunction of constraints over `num_vars` variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula {
    num_vars: usize,
    constraints: Vec<Constraint>,
}

impl Formula {
    pub fn new(num_vars: usize, constraints: Vec<Constraint>) -> Result<Self, ModelError> {
        for c in &constraints {
            let var = c.max_var();
            if var as usize > num_vars {
                return Err(ModelError::VariableOutOfRange { var, num_vars });
            }
        }
        Ok(Formula { num_vars, constraints })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn check_len(&self, len: usize) -> Result<(), ModelError> {
        if len != self.num_vars {
            return Err(ModelError::LengthMismatch {
                expected: self.num_vars,
                got: len,
            });
        }
        Ok(())
    }

    pub fn count_violations(&self, b: &BooleanAssignment) -> Result<usize, ModelError> {
        self.check_len(b.len())?;
        let mut violated = 0;
        for c in &self.constraints {
            if !c.is_satisfied(b)? {
                violated += 1;
            }
        }
        Ok(violated)
    }

    pub fn is_satisfied_by(&self, b: &BooleanAssignment) -> Result<bool, ModelError> {
        Ok(self.count_violations(b)? == 0)
    }
}

/// A point of `{-1, +1}^n`; stored as truth values (`true` ⇔ `-1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanAssignment {
    truth: Vec<bool>,
}

impl BooleanAssignment {
    pub fn from_truth(truth: Vec<bool>) -> Self {
        BooleanAssignment { truth }
    }

    /// Builds an assignment from ±1 values; any other entry is rejected.
    pub fn from_signs(signs: &[f64]) -> Option<Self> {
        signs
            .iter()
            .map(|&s| {
                if s == -1.0 {
                    Some(true)
                } else if s == 1.0 {
                    Some(false)
                } else {
                    None
                }
            })
            .collect::<Option<Vec<_>>>()
            .map(Self::from_truth)
    }

    /// Assignment whose bit `i` of `mask` sets variable `i + 1` to True.
    pub fn from_mask(num_vars: usize, mask: u64) -> Self {
        Self::from_truth((0..num_vars).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    /// Truth value of a 1-based variable.
    pub fn value(&self, var: u32) -> bool {
        self.truth[var as usize - 1]
    }

    pub fn truth(&self) -> &[bool] {
        &self.truth
    }

    /// The ±1 encoding, `-1.0` for True.
    pub fn to_signs(&self) -> Vec<f64> {
        self.truth.iter().map(|&t| if t { -1.0 } else { 1.0 }).collect()
    }

    /// Signed DIMACS literals, positive for True.
    pub fn to_dimacs(&self) -> Vec<i64> {
        self.truth
            .iter()
            .enumerate()
            .map(|(i, &t)| if t { i as i64 + 1 } else { -(i as i64 + 1) })
            .collect()
    }
}

/// Componentwise sign: negative entries become True (`-1`), everything else
/// (including `0.0`) becomes False (`+1`).
pub fn sign_round(x: &[f64]) -> BooleanAssignment {
    BooleanAssignment::from_truth(x.iter().map(|&v| v < 0.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(ls: &[i64]) -> Vec<Literal> {
        ls.iter().map(|&l| Literal::from_dimacs(l).unwrap()).collect()
    }

    fn signs(s: &[f64]) -> BooleanAssignment {
        BooleanAssignment::from_signs(s).unwrap()
    }

    #[test]
    fn or_all_false_is_violated() {
        let c = Constraint::or(lits(&[1, 2])).unwrap();
        assert!(!c.is_satisfied(&signs(&[1.0, 1.0])).unwrap());
        assert!(c.is_satisfied(&signs(&[-1.0, 1.0])).unwrap());
    }

    #[test]
    fn xor_parity() {
        let c = Constraint::xor(lits(&[1, 2, 3])).unwrap();
        assert!(c.is_satisfied(&signs(&[-1.0, 1.0, 1.0])).unwrap());
        assert!(!c.is_satisfied(&signs(&[-1.0, -1.0, 1.0])).unwrap());
        // single literal: satisfied iff the literal is true
        let single = Constraint::xor(lits(&[-1])).unwrap();
        assert!(single.is_satisfied(&signs(&[1.0])).unwrap());
        assert!(!single.is_satisfied(&signs(&[-1.0])).unwrap());
    }

    #[test]
    fn nae_and_card() {
        let nae = Constraint::nae(lits(&[1, 2, 3])).unwrap();
        assert!(!nae.is_satisfied(&signs(&[-1.0, -1.0, -1.0])).unwrap());
        assert!(!nae.is_satisfied(&signs(&[1.0, 1.0, 1.0])).unwrap());
        assert!(nae.is_satisfied(&signs(&[-1.0, -1.0, 1.0])).unwrap());

        let card = Constraint::card(Comparator::AtLeast, 2, lits(&[1, 2, 3])).unwrap();
        assert!(card.is_satisfied(&signs(&[-1.0, -1.0, 1.0])).unwrap());
        assert!(!card.is_satisfied(&signs(&[-1.0, 1.0, 1.0])).unwrap());
        let eq = Constraint::card(Comparator::Exactly, 1, lits(&[1, -2])).unwrap();
        assert!(eq.is_satisfied(&signs(&[1.0, 1.0])).unwrap());
        assert!(!eq.is_satisfied(&signs(&[-1.0, 1.0])).unwrap());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Constraint::or(lits(&[1, -1])).unwrap_err(),
            ModelError::DuplicateVariable(1)
        );
        assert_eq!(Constraint::or(vec![]).unwrap_err(), ModelError::EmptyConstraint);
        assert_eq!(Constraint::nae(lits(&[1])).unwrap_err(), ModelError::NaeTooShort(1));
        assert_eq!(
            Constraint::card(Comparator::AtMost, 3, lits(&[1, 2])).unwrap_err(),
            ModelError::BoundOutOfRange { bound: 3, len: 2 }
        );
        assert_eq!(Literal::from_dimacs(0).unwrap_err(), ModelError::ZeroVariable);
        let c = Constraint::or(lits(&[1, 4])).unwrap();
        assert_eq!(
            Formula::new(3, vec![c]).unwrap_err(),
            ModelError::VariableOutOfRange { var: 4, num_vars: 3 }
        );
    }

    #[test]
    fn count_violations_examples() {
        let f = Formula::new(
            1,
            vec![
                Constraint::or(lits(&[1])).unwrap(),
                Constraint::xor(lits(&[1])).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(f.count_violations(&signs(&[1.0])).unwrap(), 2);
        assert_eq!(f.count_violations(&signs(&[-1.0])).unwrap(), 0);

        let empty = Formula::new(4, vec![]).unwrap();
        assert_eq!(empty.count_violations(&signs(&[1.0; 4])).unwrap(), 0);

        let g = Formula::new(2, vec![Constraint::or(lits(&[1, 2])).unwrap()]).unwrap();
        assert_eq!(g.count_violations(&signs(&[-1.0, 1.0])).unwrap(), 0);
        assert_eq!(
            g.count_violations(&signs(&[-1.0])).unwrap_err(),
            ModelError::LengthMismatch { expected: 2, got: 1 }
        );
    }

    #[test]
    fn is_satisfied_rejects_short_assignment() {
        let c = Constraint::or(lits(&[1, 3])).unwrap();
        assert!(c.is_satisfied(&signs(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn sign_round_examples() {
        assert_eq!(sign_round(&[-0.3, 0.0, 2.5]).to_signs(), vec![-1.0, 1.0, 1.0]);
        assert_eq!(sign_round(&[-1.0; 4]).to_signs(), vec![-1.0; 4]);
        assert_eq!(sign_round(&[1e-12, -1e-12]).to_signs(), vec![1.0, -1.0]);
        // -0.0 is not < 0
        assert_eq!(sign_round(&[-0.0]).to_signs(), vec![1.0]);
    }

    #[test]
    fn sign_round_is_idempotent_on_boolean_points() {
        for mask in 0..16u64 {
            let b = BooleanAssignment::from_mask(4, mask);
            assert_eq!(sign_round(&b.to_signs()), b);
        }
    }

    #[test]
    fn dimacs_roundtrip() {
        let b = signs(&[-1.0, 1.0]);
        assert_eq!(b.to_dimacs(), vec![1, -2]);
        assert_eq!(Literal::from_dimacs(-7).unwrap().to_dimacs(), -7);
    }
}
