//! Exhaustive ground truth for small instances.
//!
//! Nothing here calls into the closed forms of [`crate::fourier`]: Fourier
//! coefficients come straight from the truth table, so the two routes can be
//! checked against each other.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{BooleanAssignment, Constraint, Formula};

pub const MAX_CONSTRAINT_ARITY: usize = 16;
pub const MAX_FORMULA_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("arity {got} exceeds the oracle limit of {limit}")]
    Capacity { got: usize, limit: usize },
    #[error("violation mask {mask} out of range for arity {arity}")]
    MaskOutOfRange { mask: u32, arity: usize },
}

fn check_arity(k: usize, limit: usize) -> Result<(), OracleError> {
    if k > limit {
        return Err(OracleError::Capacity { got: k, limit });
    }
    Ok(())
}

/// A Boolean function of `arity` local variables, stored as its violation
/// set. Bit `i` of an assignment mask set means local variable `i` is True
/// (value `-1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    arity: usize,
    violated: Vec<bool>,
}

impl TruthTable {
    /// Table over the constraint's variables, in literal order.
    pub fn from_constraint(c: &Constraint) -> Result<Self, OracleError> {
        let k = c.len();
        check_arity(k, MAX_CONSTRAINT_ARITY)?;
        let violated = (0..1u32 << k)
            .map(|mask| {
                let true_lits = c
                    .literals()
                    .iter()
                    .enumerate()
                    .filter(|(i, l)| (mask >> i & 1 == 1) != l.is_negated())
                    .count();
                !c.satisfied_by_count(true_lits)
            })
            .collect();
        Ok(TruthTable { arity: k, violated })
    }

    pub fn from_violations(arity: usize, masks: &[u32]) -> Result<Self, OracleError> {
        check_arity(arity, MAX_CONSTRAINT_ARITY)?;
        let mut violated = vec![false; 1 << arity];
        for &mask in masks {
            *violated
                .get_mut(mask as usize)
                .ok_or(OracleError::MaskOutOfRange { mask, arity })? = true;
        }
        Ok(TruthTable { arity, violated })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_violated(&self, mask: u32) -> bool {
        self.violated[mask as usize]
    }

    pub fn violations(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.violated.len() as u32).filter(|&m| self.violated[m as usize])
    }

    /// No two violating assignments at Hamming distance one.
    pub fn has_isolated_violations(&self) -> bool {
        self.violations()
            .all(|m| (0..self.arity).all(|i| !self.is_violated(m ^ (1 << i))))
    }

    /// Expansion coefficients of the 0/1 violation indicator.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.violated.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect();
        walsh_hadamard(&mut c);
        let scale = 1.0 / c.len() as f64;
        c.iter_mut().for_each(|v| *v *= scale);
        c
    }
}

/// In-place unnormalised Walsh-Hadamard transform:
/// `out[S] = Σ_mask in[mask]·(-1)^{|S ∧ mask|}`.
///
/// With bit set ⇔ value `-1`, `(-1)^{|S ∧ mask|}` is exactly the character
/// `∏_{i∈S} x_i`, so dividing by `2^k` gives the Fourier coefficients.
fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

/// Dense Fourier coefficients over `vars`: entry `S` (a bitmask over
/// positions in `vars`) multiplies `∏_{i∈S} x_{vars[i]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    vars: Vec<u32>,
    coeffs: Vec<f64>,
}

impl FourierCoefficients {
    /// `coeffs.len()` must be `2^vars.len()`.
    pub fn new(vars: Vec<u32>, coeffs: Vec<f64>) -> Option<Self> {
        (coeffs.len() == 1usize << vars.len()).then_some(FourierCoefficients { vars, coeffs })
    }

    /// Builds from sparse `(subset of positions, coefficient)` pairs.
    pub fn from_terms(vars: Vec<u32>, terms: &[(&[usize], f64)]) -> Option<Self> {
        let mut coeffs = vec![0.0; 1 << vars.len()];
        for (subset, value) in terms {
            let mut mask = 0usize;
            for &i in subset.iter() {
                if i >= vars.len() {
                    return None;
                }
                mask |= 1 << i;
            }
            coeffs[mask] += value;
        }
        Some(FourierCoefficients { vars, coeffs })
    }

    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of the monomial over the given positions.
    pub fn get(&self, subset: &[usize]) -> f64 {
        let mask: usize = subset.iter().map(|&i| 1 << i).sum();
        self.coeffs[mask]
    }

    /// Nonzero `(mask, coefficient)` pairs.
    pub fn support(&self, tol: f64) -> Vec<(usize, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(m, &c)| (m, c))
            .collect()
    }
}

pub fn brute_force_coefficients(c: &Constraint) -> Result<FourierCoefficients, OracleError> {
    let table = TruthTable::from_constraint(c)?;
    let vars = c.literals().iter().map(|l| l.var()).collect();
    Ok(FourierCoefficients {
        vars,
        coeffs: table.coefficients(),
    })
}

/// `Σ_S ĉ(S)·∏_{i∈S} x_{vars[i]}`, with `x` indexed by 1-based variable.
pub fn eval_via_coefficients(coeffs: &FourierCoefficients, x: &[f64]) -> f64 {
    let local: Vec<f64> = coeffs.vars.iter().map(|&v| x[v as usize - 1]).collect();
    eval_local(&coeffs.coeffs, &local)
}

/// Polynomial evaluation over local coordinates in `O(2^k)`: the monomial
/// for `S` is the monomial for `S` minus its lowest bit, times that bit's
/// coordinate.
fn eval_local(coeffs: &[f64], local: &[f64]) -> f64 {
    let mut monomial = vec![1.0; coeffs.len()];
    let mut total = coeffs[0];
    for s in 1..coeffs.len() {
        let low = s.trailing_zeros() as usize;
        monomial[s] = monomial[s & (s - 1)] * local[low];
        total += coeffs[s] * monomial[s];
    }
    total
}

pub fn has_isolated_violations(c: &Constraint) -> Result<bool, OracleError> {
    Ok(TruthTable::from_constraint(c)?.has_isolated_violations())
}

/// Largest `|FE|` accepted as a zero by the falsifier.
pub const ZERO_TOLERANCE: f64 = 1e-9;

/// Searches for a real point where the table's expansion vanishes but
/// sign-rounding lands on a violating assignment.
///
/// A returned point (local coordinates) proves the function is not
/// rounding-friendly; `None` proves nothing.
pub fn falsify_table(table: &TruthTable, trials: usize, seed: u64) -> Option<Vec<f64>> {
    let k = table.arity;
    if k == 0 || table.violations().next().is_none() {
        return None;
    }
    let coeffs = table.coefficients();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let is_witness = |l: &[f64]| eval_local(&coeffs, l).abs() <= ZERO_TOLERANCE && table.is_violated(round_mask(l));

    // Constructive search: walk from a pair of adjacent violations towards a
    // restriction that is identically violated, then push the last fixed
    // variable past the cube so the remaining free variables can cancel it.
    let orders = 8;
    let adjacent_pairs = table
        .violations()
        .flat_map(|b1| (0..k).map(move |j| (b1, j)))
        .filter(|&(b1, j)| table.is_violated(b1 ^ (1 << j)))
        .take(64)
        .collect::<Vec<_>>();
    for (b1, j) in adjacent_pairs {
        for attempt in 0..orders {
            let mut others: Vec<usize> = (0..k).filter(|&i| i != j).collect();
            if attempt > 0 {
                shuffle(&mut others, &mut rng);
            }
            if let Some(w) = construct_from_prefix(table, &coeffs, b1, &others, &mut rng) {
                if is_witness(&w) {
                    return Some(w);
                }
            }
        }
    }

    // Random search with an exact 1-D root solve on one coordinate.
    let mut l = vec![0.0; k];
    for trial in 0..trials {
        l.iter_mut().for_each(|v| *v = rng.gen_range(-3.0..3.0));
        let i = trial % k;
        if solve_coordinate(&coeffs, &mut l, i, 0.0) && is_witness(&l) {
            return Some(l);
        }
    }
    None
}

/// Sets local coordinate `i` so that the expansion equals `target`, using
/// `F = x_i·G + H`. Returns false when `G` vanishes at the current point.
fn solve_coordinate(coeffs: &[f64], l: &mut [f64], i: usize, target: f64) -> bool {
    l[i] = 1.0;
    let high = eval_local(coeffs, l);
    l[i] = -1.0;
    let low = eval_local(coeffs, l);
    let slope = 0.5 * (high - low);
    let offset = 0.5 * (high + low);
    if slope.abs() < 1e-9 {
        return false;
    }
    l[i] = (target - offset) / slope;
    l[i].is_finite()
}

fn construct_from_prefix(
    table: &TruthTable,
    coeffs: &[f64],
    b1: u32,
    order: &[usize],
    rng: &mut ChaCha8Rng,
) -> Option<Vec<f64>> {
    let k = table.arity;
    let bit = |i: usize| b1 >> i & 1 == 1;
    // Shortest prefix of `order` whose restriction to b1's values is
    // identically violated. The full prefix always qualifies, since both
    // completions of the excluded variable violate.
    for t in 1..=order.len() {
        let prefix = &order[..t];
        let fixed_vars: u32 = prefix.iter().map(|&u| 1u32 << u).sum();
        let fixed_values = b1 & fixed_vars;
        let free: Vec<usize> = (0..k).filter(|&u| fixed_vars >> u & 1 == 0).collect();
        let all_violated = (0..1u32 << free.len()).all(|sub| {
            let mask = free
                .iter()
                .enumerate()
                .filter(|(pos, _)| sub >> pos & 1 == 1)
                .fold(fixed_values, |m, (_, &u)| m | 1 << u);
            table.is_violated(mask)
        });
        if !all_violated {
            continue;
        }
        let (&pivot, rest) = prefix.split_last()?;
        let mut l = vec![0.0; k];
        for &u in rest {
            l[u] = if bit(u) { -1.0 } else { 1.0 };
        }
        // The pivot keeps its Boolean sign at magnitude 2; the free
        // variables then have to bring the expansion to zero.
        l[pivot] = if bit(pivot) { -2.0 } else { 2.0 };
        for _ in 0..16 {
            for &u in &free {
                l[u] = rng.gen_range(-3.0..3.0);
            }
            let i = free[rng.gen_range(0..free.len())];
            if solve_coordinate(coeffs, &mut l, i, 0.0) {
                return Some(l);
            }
        }
        return None;
    }
    None
}

fn shuffle(v: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
}

fn round_mask(l: &[f64]) -> u32 {
    l.iter()
        .enumerate()
        .filter(|(_, &v)| v < 0.0)
        .map(|(i, _)| 1u32 << i)
        .sum()
}

/// [`falsify_table`] for a constraint; the witness is mapped back to a
/// point over variables `1..=max_var`, with absent variables at 0.
pub fn falsify_rounding_friendly(c: &Constraint, trials: usize, seed: u64) -> Result<Option<Vec<f64>>, OracleError> {
    let table = TruthTable::from_constraint(c)?;
    Ok(falsify_table(&table, trials, seed).map(|local| {
        let mut x = vec![0.0; c.max_var() as usize];
        for (l, v) in c.literals().iter().zip(local) {
            x[l.index()] = v;
        }
        x
    }))
}

/// Minimum number of violated constraints over all `2^n` assignments, with
/// the first minimising assignment in mask order.
pub fn brute_force_optimum(f: &Formula) -> Result<(usize, BooleanAssignment), OracleError> {
    let n = f.num_vars();
    check_arity(n, MAX_FORMULA_VARS)?;
    let mut best = (usize::MAX, 0u64);
    for mask in 0..1u64 << n {
        let violated = violations_at_mask(f, mask, best.0);
        if violated < best.0 {
            best = (violated, mask);
            if violated == 0 {
                break;
            }
        }
    }
    Ok((best.0, BooleanAssignment::from_mask(n, best.1)))
}

/// Violated-constraint count at `mask`, giving up once it reaches `cap`.
fn violations_at_mask(f: &Formula, mask: u64, cap: usize) -> usize {
    let mut violated = 0;
    for c in f.constraints() {
        let t = c
            .literals()
            .iter()
            .filter(|l| (mask >> l.index() & 1 == 1) != l.is_negated())
            .count();
        if !c.satisfied_by_count(t) {
            violated += 1;
            if violated >= cap {
                break;
            }
        }
    }
    violated
}
