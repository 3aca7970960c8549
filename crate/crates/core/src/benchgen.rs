//! Seeded random instance families: uniform k-CNF, uniform k-XOR and
//! random cardinality formulas.
//!
//! Every formula is drawn from its own ChaCha8 stream, so a corpus is a pure
//! function of `(spec, seed)` and identical across platforms.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Comparator, Constraint, ConstraintKind, Formula, Literal, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("constraint width {k} exceeds the number of variables {n}")]
    WidthTooLarge { k: usize, n: usize },
    #[error("constraint width must be positive")]
    ZeroWidth,
    #[error("ratio {name} = {value} must lie in (0, 1]")]
    RatioOutOfRange { name: &'static str, value: f64 },
    #[error("ratio {name} = {value} must be finite and non-negative")]
    BadRatio { name: &'static str, value: f64 },
    #[error("{what} rounds down to zero for n = {n}")]
    Degenerate { what: &'static str, n: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `⌊v⌋`, tolerant of products like `0.7 * 10 = 6.999…`.
pub(crate) fn floor_count(v: f64) -> usize {
    (v + 1e-9).floor() as usize
}

fn random_width_k(
    kind: ConstraintKind,
    n: usize,
    m: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Formula, GenError> {
    if k == 0 {
        return Err(GenError::ZeroWidth);
    }
    if k > n {
        return Err(GenError::WidthTooLarge { k, n });
    }
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let lits = sample(rng, n, k)
            .into_iter()
            .map(|i| Literal::new(i as u32 + 1, rng.gen_bool(0.5)))
            .collect::<Result<Vec<_>, _>>()?;
        constraints.push(Constraint::new(kind, lits)?);
    }
    Ok(Formula::new(n, constraints)?)
}

/// `m` clauses, each over `k` distinct variables with independent fair
/// negations. Clauses may repeat.
pub fn gen_random_kcnf(n: usize, m: usize, k: usize, seed: u64) -> Result<Formula, GenError> {
    random_width_k(ConstraintKind::Or, n, m, k, &mut stream_rng(seed, 0))
}

/// As [`gen_random_kcnf`] with XOR constraints.
pub fn gen_random_kxor(n: usize, m: usize, k: usize, seed: u64) -> Result<Formula, GenError> {
    random_width_k(ConstraintKind::Xor, n, m, k, &mut stream_rng(seed, 0))
}

fn check_ratio(name: &'static str, value: f64) -> Result<(), GenError> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(GenError::RatioOutOfRange { name, value })
    }
}

fn random_card(n: usize, r_p: f64, r_v: f64, rng: &mut ChaCha8Rng) -> Result<Formula, GenError> {
    check_ratio("r_p", r_p)?;
    check_ratio("r_v", r_v)?;
    let m = floor_count(r_p * n as f64);
    let width = floor_count(r_v * n as f64);
    if width == 0 {
        return Err(GenError::Degenerate {
            what: "constraint width r_v*n",
            n,
        });
    }
    if m == 0 {
        return Err(GenError::Degenerate {
            what: "constraint count r_p*n",
            n,
        });
    }
    let bound = floor_count(r_v * n as f64 / 2.0);
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let cmp = if rng.gen_bool(0.5) {
            Comparator::AtLeast
        } else {
            Comparator::AtMost
        };
        let lits = sample(rng, n, width)
            .into_iter()
            .map(|i| Literal::positive(i as u32 + 1))
            .collect::<Result<Vec<_>, _>>()?;
        constraints.push(Constraint::card(cmp, bound, lits)?);
    }
    Ok(Formula::new(n, constraints)?)
}

/// `⌊r_p·n⌋` constraints over `⌊r_v·n⌋` distinct positive literals each,
/// comparator uniform over `>=`/`<=`, bound `⌊r_v·n/2⌋`.
pub fn gen_random_card(n: usize, r_p: f64, r_v: f64, seed: u64) -> Result<Formula, GenError> {
    random_card(n, r_p, r_v, &mut stream_rng(seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Family {
    Cnf3,
    Xor2,
    Card,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Cnf3 => "CNF3",
            Family::Xor2 => "XOR2",
            Family::Card => "CARD",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "CNF3" => Ok(Family::Cnf3),
            "XOR2" => Ok(Family::Xor2),
            "CARD" => Ok(Family::Card),
            _ => Err(format!("unknown family `{s}` (expected CNF3, XOR2 or CARD)")),
        }
    }
}

/// Parameters of one family instance: `ratio` is `m/n` for CNF3 and XOR2;
/// `r_p`, `r_v` are used by CARD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSpec {
    pub family: Family,
    pub n: usize,
    pub ratio: f64,
    pub r_p: f64,
    pub r_v: f64,
    pub count: usize,
    pub seed: u64,
}

impl BenchSpec {
    pub fn clause_count(&self) -> usize {
        floor_count(self.ratio * self.n as f64)
    }

    /// Instance `index` of the corpus, drawn from stream `index`.
    pub fn instance(&self, index: usize) -> Result<Formula, GenError> {
        let mut rng = stream_rng(self.seed, index as u64);
        match self.family {
            Family::Cnf3 | Family::Xor2 => {
                if !(self.ratio.is_finite() && self.ratio >= 0.0) {
                    return Err(GenError::BadRatio {
                        name: "ratio",
                        value: self.ratio,
                    });
                }
                let (kind, k) = if self.family == Family::Cnf3 {
                    (ConstraintKind::Or, 3)
                } else {
                    (ConstraintKind::Xor, 2)
                };
                random_width_k(kind, self.n, self.clause_count(), k, &mut rng)
            }
            Family::Card => random_card(self.n, self.r_p, self.r_v, &mut rng),
        }
    }

    pub fn generate(&self) -> Result<Vec<Formula>, GenError> {
        (0..self.count).map(|i| self.instance(i)).collect()
    }
}
