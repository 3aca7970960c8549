#![allow(dead_code)]

use hybrid_sat::model::{Comparator, Constraint, ConstraintKind, Formula, Literal};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Or,
    Xor,
    Nae,
    Card,
}

pub const KINDS: [Kind; 4] = [Kind::Or, Kind::Xor, Kind::Nae, Kind::Card];

pub fn random_kind(kind: Kind, k: usize, rng: &mut impl Rng) -> ConstraintKind {
    match kind {
        Kind::Or => ConstraintKind::Or,
        Kind::Xor => ConstraintKind::Xor,
        Kind::Nae => ConstraintKind::Nae,
        Kind::Card => ConstraintKind::Card {
            cmp: [Comparator::AtLeast, Comparator::AtMost, Comparator::Exactly][rng.gen_range(0..3)],
            bound: rng.gen_range(0..=k),
        },
    }
}

/// `k` distinct variables out of `1..=n`, random signs.
pub fn random_constraint(kind: Kind, k: usize, n: usize, rng: &mut impl Rng) -> Constraint {
    let ck = random_kind(kind, k, rng);
    let lits = sample(rng, n, k)
        .into_iter()
        .map(|i| Literal::new(i as u32 + 1, rng.gen_bool(0.5)).unwrap())
        .collect();
    Constraint::new(ck, lits).unwrap()
}

/// Mixed-type formula; NAE only gets widths of at least 2 and needs `n >= 2`.
pub fn random_hybrid(n: usize, m: usize, max_k: usize, rng: &mut impl Rng) -> Formula {
    let cs = (0..m)
        .map(|_| {
            let kind = match KINDS[rng.gen_range(0..4)] {
                Kind::Nae if n < 2 => Kind::Or,
                k => k,
            };
            let lo = if kind == Kind::Nae { 2 } else { 1 };
            let k = rng.gen_range(lo..=max_k.min(n));
            random_constraint(kind, k, n, rng)
        })
        .collect();
    Formula::new(n, cs).unwrap()
}

pub fn uniform_point(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}
