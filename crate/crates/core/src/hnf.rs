//! HNF, a line-oriented text format for hybrid formulas extending DIMACS CNF.
//!
//! ```text
//! c comment
//! p hnf <vars> <constraints>
//! 1 -2 3 0            OR
//! x 1 -2 3 0          XOR
//! n 1 2 3 0           NAE
//! d >= 2 1 2 3 0      CARD, op one of >= <= =
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Comparator, Constraint, ConstraintKind, Formula, Literal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based; 0 when the problem is the document as a whole.
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

fn parse_count(tok: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    tok.parse()
        .or_else(|_| err(line, format!("malformed header: {what} `{tok}` is not a count")))
}

fn parse_header(tokens: &[&str], line: usize) -> Result<(usize, usize), ParseError> {
    match tokens {
        ["p", "hnf", n, m] => Ok((
            parse_count(n, line, "variable count")?,
            parse_count(m, line, "constraint count")?,
        )),
        _ => err(line, "malformed header, expected `p hnf <vars> <constraints>`"),
    }
}

fn parse_comparator(tok: &str, line: usize) -> Result<Comparator, ParseError> {
    match tok {
        ">=" => Ok(Comparator::AtLeast),
        "<=" => Ok(Comparator::AtMost),
        "=" => Ok(Comparator::Exactly),
        _ => err(line, format!("unknown comparator `{tok}`")),
    }
}

fn parse_constraint(tokens: &[&str], n: usize, line: usize) -> Result<Constraint, ParseError> {
    let (kind, rest) = match tokens[0] {
        "x" => (ConstraintKind::Xor, &tokens[1..]),
        "n" => (ConstraintKind::Nae, &tokens[1..]),
        "d" => {
            let [_, op, bound, rest @ ..] = tokens else {
                return err(line, "cardinality line needs `d <op> <bound> <literals> 0`");
            };
            let cmp = parse_comparator(op, line)?;
            let bound = bound
                .parse()
                .or_else(|_| err(line, format!("bound `{bound}` is not a count")))?;
            (ConstraintKind::Card { cmp, bound }, rest)
        }
        _ => (ConstraintKind::Or, tokens),
    };
    let Some((&"0", lits)) = rest.split_last() else {
        return err(line, "missing terminating 0");
    };
    let mut literals = Vec::with_capacity(lits.len());
    for tok in lits {
        let v: i64 = tok
            .parse()
            .or_else(|_| err(line, format!("`{tok}` is not a literal")))?;
        if v == 0 {
            return err(line, "0 before the end of the line");
        }
        if v.unsigned_abs() > n as u64 {
            return err(line, format!("literal {v} out of range for {n} variables"));
        }
        literals.push(Literal::from_dimacs(v).or_else(|e| err(line, e.to_string()))?);
    }
    Constraint::new(kind, literals).or_else(|e| err(line, e.to_string()))
}

pub fn parse_hnf(text: &str) -> Result<Formula, ParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut constraints = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        match tokens.first() {
            None | Some(&"c") => continue,
            Some(&"p") => {
                if header.is_some() {
                    return err(line, "duplicate header");
                }
                let (n, m) = parse_header(&tokens, line)?;
                header = Some((n, m, line));
            }
            Some(_) => {
                let Some((n, _, _)) = header else {
                    return err(line, "constraint before the `p hnf` header");
                };
                constraints.push(parse_constraint(&tokens, n, line)?);
            }
        }
    }
    let Some((n, m, header_line)) = header else {
        return err(0, "missing `p hnf` header");
    };
    if constraints.len() != m {
        return err(
            header_line,
            format!("header declares {m} constraints but {} were found", constraints.len()),
        );
    }
    Formula::new(n, constraints).or_else(|e| err(0, e.to_string()))
}

pub fn serialize_hnf(f: &Formula) -> String {
    let mut out = format!("p hnf {} {}\n", f.num_vars(), f.num_constraints());
    for c in f.constraints() {
        match c.kind() {
            ConstraintKind::Or => {}
            ConstraintKind::Xor => out.push_str("x "),
            ConstraintKind::Nae => out.push_str("n "),
            ConstraintKind::Card { cmp, bound } => {
                let _ = write!(out, "d {} {} ", cmp.symbol(), bound);
            }
        }
        for l in c.literals() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}
