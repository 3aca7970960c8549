//! Solver-competition style result text.
//!
//! ```text
//! s SATISFIABLE          s UNKNOWN
//! v 1 -2 0               o 3
//! ```
//!
//! A positive literal `j` on the v-line means variable `j` is True.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::BooleanAssignment;
use crate::solver::{SolveResult, SolveStatus};

pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNKNOWN: i32 = 0;

/// Result text (newline-terminated) and the process exit code.
pub fn emit_result(r: &SolveResult) -> (String, i32) {
    match (&r.status, &r.assignment) {
        (SolveStatus::Sat, Some(b)) => {
            let mut out = String::from("s SATISFIABLE\nv");
            for lit in b.to_dimacs() {
                let _ = write!(out, " {lit}");
            }
            out.push_str(" 0\n");
            (out, EXIT_SAT)
        }
        _ => (format!("s UNKNOWN\no {}\n", r.violated), EXIT_UNKNOWN),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct OutputParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutput {
    pub status: SolveStatus,
    /// Literals from all v-lines, terminator removed.
    pub literals: Vec<i64>,
    pub violated: Option<usize>,
}

impl SolverOutput {
    /// Assignment over `n` variables; variables missing from the v-lines are
    /// False.
    pub fn assignment(&self, n: usize) -> Result<BooleanAssignment, OutputParseError> {
        let fail = |message: String| OutputParseError { line: 0, message };
        let mut truth = vec![None; n];
        for &lit in &self.literals {
            let var = lit.unsigned_abs() as usize;
            if var == 0 || var > n {
                return Err(fail(format!("literal {lit} out of range for {n} variables")));
            }
            if truth[var - 1].replace(lit > 0).is_some() {
                return Err(fail(format!("variable {var} assigned twice")));
            }
        }
        Ok(BooleanAssignment::from_truth(
            truth.into_iter().map(|t| t.unwrap_or(false)).collect(),
        ))
    }
}

/// Reads back text produced by [`emit_result`].
pub fn parse_solver_output(text: &str) -> Result<SolverOutput, OutputParseError> {
    let fail = |line: usize, message: String| Err(OutputParseError { line, message });
    let mut status = None;
    let mut literals = Vec::new();
    let mut violated = None;
    let mut terminated = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut tokens = raw.split_whitespace();
        match tokens.next() {
            None | Some("c") => {}
            Some("s") => {
                status = Some(match tokens.collect::<Vec<_>>().as_slice() {
                    ["SATISFIABLE"] => SolveStatus::Sat,
                    ["UNKNOWN"] => SolveStatus::Unknown,
                    other => return fail(line, format!("unknown status {other:?}")),
                });
            }
            Some("v") => {
                for tok in tokens {
                    if terminated {
                        return fail(line, "literal after terminating 0".into());
                    }
                    match tok.parse::<i64>() {
                        Ok(0) => terminated = true,
                        Ok(l) => literals.push(l),
                        Err(_) => return fail(line, format!("`{tok}` is not a literal")),
                    }
                }
            }
            Some("o") => match tokens.next().map(str::parse) {
                Some(Ok(v)) => violated = Some(v),
                _ => return fail(line, "malformed o-line".into()),
            },
            Some(t) => return fail(line, format!("unexpected line type `{t}`")),
        }
    }
    let Some(status) = status else {
        return fail(0, "missing s-line".into());
    };
    if status == SolveStatus::Sat && !terminated {
        return fail(0, "v-lines lack the terminating 0".into());
    }
    Ok(SolverOutput {
        status,
        literals,
        violated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(status: SolveStatus, truth: Option<Vec<bool>>, violated: usize) -> SolveResult {
        SolveResult {
            status,
            assignment: truth.map(BooleanAssignment::from_truth),
            violated,
            restarts_used: 1,
            iters_total: 0,
            final_objective: 0.0,
        }
    }

    #[test]
    fn sat_line() {
        let r = result(SolveStatus::Sat, Some(vec![true, false]), 0);
        assert_eq!(emit_result(&r), ("s SATISFIABLE\nv 1 -2 0\n".to_string(), 10));
    }

    #[test]
    fn unknown_line() {
        let r = result(SolveStatus::Unknown, Some(vec![true]), 3);
        assert_eq!(emit_result(&r), ("s UNKNOWN\no 3\n".to_string(), 0));
    }

    #[test]
    fn empty_assignment() {
        let r = result(SolveStatus::Sat, Some(vec![]), 0);
        assert_eq!(emit_result(&r).0, "s SATISFIABLE\nv 0\n");
    }

    #[test]
    fn read_back() {
        let r = result(SolveStatus::Sat, Some(vec![true, false, true]), 0);
        let parsed = parse_solver_output(&emit_result(&r).0).unwrap();
        assert_eq!(parsed.status, SolveStatus::Sat);
        assert_eq!(parsed.assignment(3).unwrap(), r.assignment.unwrap());
        assert!(parsed.assignment(2).is_err());

        let parsed = parse_solver_output("s UNKNOWN\no 7\n").unwrap();
        assert_eq!(parsed.violated, Some(7));
        assert!(parse_solver_output("s SATISFIABLE\nv 1 2\n").is_err());
        assert!(parse_solver_output("v 1 0\n").is_err());
    }
}
