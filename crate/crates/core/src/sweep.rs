//! Experiment sweeps: a benchmark grid crossed with solver configurations,
//! written as one CSV row per run plus a solved-fraction summary.
//!
//! ```toml
//! [benchmark]
//! family = "CNF3"        # CNF3, XOR2 or CARD
//! n = 100
//! ratios = [1.5, 2.0]    # m/n, CNF3 and XOR2
//! # r_p = [0.5]          # CARD
//! # r_v = [0.2]
//! instances = 30
//! seed = 1
//!
//! [[solvers]]
//! formulation = "square"
//! optimizer = "gd"
//! alphas = [0.0, 0.4, 0.8]
//!
//! [run]
//! seeds = [0]
//! restarts = 8
//! max_iters = 10000
//! timeout = 60.0
//! ```
//!
//! Rows come out in grid order (point, instance, solver, alpha, seed)
//! whatever the thread count. Wall times are only recorded when
//! `record_wall_time = true`, since they make the output irreproducible.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::benchgen::{BenchSpec, Family};
use crate::formulation::Formulation;
use crate::optim::{OptimizerConfig, OptimizerKind};
use crate::solver::{solve, SolveConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep spec: {0}")]
    Spec(String),
    #[error("sweep csv: {0}")]
    Csv(String),
}

fn spec_err<T>(m: impl Into<String>) -> Result<T, SweepError> {
    Err(SweepError::Spec(m.into()))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkGrid {
    pub family: Family,
    pub n: usize,
    #[serde(default)]
    pub ratios: Vec<f64>,
    #[serde(default)]
    pub r_p: Vec<f64>,
    #[serde(default)]
    pub r_v: Vec<f64>,
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverGrid {
    pub formulation: Formulation,
    pub optimizer: OptimizerKind,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    /// Overrides `run.step_size` for this solver.
    pub step_size: Option<f64>,
}

fn default_alphas() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub seeds: Vec<u64>,
    pub restarts: usize,
    pub max_iters: usize,
    pub step_size: Option<f64>,
    /// Seconds per solve.
    pub timeout: Option<f64>,
    pub check_interval: usize,
    pub record_wall_time: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            seeds: vec![0],
            restarts: 8,
            max_iters: 10_000,
            step_size: None,
            timeout: None,
            check_interval: 100,
            record_wall_time: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub benchmark: BenchmarkGrid,
    pub solvers: Vec<SolverGrid>,
    #[serde(default)]
    pub run: RunSettings,
}

/// One benchmark parameter setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub ratio: Option<f64>,
    pub r_p: Option<f64>,
    pub r_v: Option<f64>,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self, SweepError> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| SweepError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn grid_points(&self) -> Vec<GridPoint> {
        let b = &self.benchmark;
        match b.family {
            Family::Cnf3 | Family::Xor2 => b
                .ratios
                .iter()
                .map(|&r| GridPoint {
                    ratio: Some(r),
                    r_p: None,
                    r_v: None,
                })
                .collect(),
            Family::Card => b
                .r_p
                .iter()
                .flat_map(|&p| {
                    b.r_v.iter().map(move |&v| GridPoint {
                        ratio: None,
                        r_p: Some(p),
                        r_v: Some(v),
                    })
                })
                .collect(),
        }
    }

    fn bench_spec(&self, p: &GridPoint) -> BenchSpec {
        BenchSpec {
            family: self.benchmark.family,
            n: self.benchmark.n,
            ratio: p.ratio.unwrap_or(0.0),
            r_p: p.r_p.unwrap_or(0.0),
            r_v: p.r_v.unwrap_or(0.0),
            count: self.benchmark.instances,
            seed: self.benchmark.seed,
        }
    }

    pub fn solve_config(&self, solver: &SolverGrid, alpha: f64, seed: u64) -> SolveConfig {
        let mut optimizer = OptimizerConfig::new(solver.optimizer);
        optimizer.max_iters = self.run.max_iters;
        if let Some(s) = solver.step_size.or(self.run.step_size) {
            optimizer.step_size = s;
        }
        SolveConfig {
            formulation: solver.formulation,
            alpha,
            optimizer,
            restarts: self.run.restarts,
            seed,
            timeout: self.run.timeout.map(Duration::from_secs_f64),
            check_interval: self.run.check_interval,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let b = &self.benchmark;
        let (used, unused) = match b.family {
            Family::Cnf3 | Family::Xor2 => ((b.ratios.len(), "ratios"), b.r_p.len() + b.r_v.len()),
            Family::Card => ((b.r_p.len().min(b.r_v.len()), "r_p and r_v"), b.ratios.len()),
        };
        if used.0 == 0 {
            return spec_err(format!("family {} needs a non-empty `{}`", b.family, used.1));
        }
        if unused != 0 {
            return spec_err(format!("parameters given that family {} does not use", b.family));
        }
        if b.instances == 0 {
            return spec_err("`instances` must be positive");
        }
        if self.solvers.is_empty() || self.run.seeds.is_empty() {
            return spec_err("need at least one solver and one seed");
        }
        if let Some(t) = self.run.timeout {
            if !(t.is_finite() && t > 0.0) {
                return spec_err("`timeout` must be a positive number of seconds");
            }
        }
        for s in &self.solvers {
            if s.alphas.is_empty() {
                return spec_err("every solver needs at least one alpha");
            }
            for &a in &s.alphas {
                self.solve_config(s, a, 0)
                    .validate()
                    .map_err(|e| SweepError::Spec(e.to_string()))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub family: Family,
    pub n: usize,
    pub point: GridPoint,
    pub instance: usize,
    pub formulation: Formulation,
    pub alpha: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub solved: bool,
    pub violated: Option<usize>,
    pub iters: u64,
    pub wall_ms: Option<u64>,
    pub note: String,
}

pub const ROW_HEADER: [&str; 15] = [
    "family",
    "n",
    "ratio",
    "r_p",
    "r_v",
    "instance",
    "formulation",
    "alpha",
    "optimizer",
    "seed",
    "solved",
    "violated",
    "iters",
    "wall_ms",
    "note",
];

pub const SUMMARY_HEADER: [&str; 11] = [
    "family",
    "n",
    "ratio",
    "r_p",
    "r_v",
    "formulation",
    "alpha",
    "optimizer",
    "runs",
    "solved",
    "solved_fraction",
];

/// `printf("%.6g")`: six significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-4, 1e6)`.
pub fn format_g6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("`e` in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..6).contains(&exp) {
        trim(&format!("{x:.*}", (5 - exp) as usize))
    } else {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn opt_g6(x: Option<f64>) -> String {
    x.map(format_g6).unwrap_or_default()
}

fn opt_to_string<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.family.to_string(),
            self.n.to_string(),
            opt_g6(self.point.ratio),
            opt_g6(self.point.r_p),
            opt_g6(self.point.r_v),
            self.instance.to_string(),
            self.formulation.to_string(),
            format_g6(self.alpha),
            self.optimizer.name().to_string(),
            self.seed.to_string(),
            u8::from(self.solved).to_string(),
            opt_to_string(self.violated),
            self.iters.to_string(),
            opt_to_string(self.wall_ms),
            self.note.clone(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self, String> {
        if r.len() != ROW_HEADER.len() {
            return Err(format!("expected {} fields, got {}", ROW_HEADER.len(), r.len()));
        }
        fn num<T: std::str::FromStr>(s: &str, name: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad {name} `{s}`"))
        }
        fn opt<T: std::str::FromStr>(s: &str, name: &str) -> Result<Option<T>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s, name).map(Some)
            }
        }
        Ok(SweepRow {
            family: r[0].parse()?,
            n: num(&r[1], "n")?,
            point: GridPoint {
                ratio: opt(&r[2], "ratio")?,
                r_p: opt(&r[3], "r_p")?,
                r_v: opt(&r[4], "r_v")?,
            },
            instance: num(&r[5], "instance")?,
            formulation: r[6].parse()?,
            alpha: num(&r[7], "alpha")?,
            optimizer: r[8].parse()?,
            seed: num(&r[9], "seed")?,
            solved: match &r[10] {
                "1" => true,
                "0" => false,
                s => return Err(format!("bad solved flag `{s}`")),
            },
            violated: opt(&r[11], "violated")?,
            iters: num(&r[12], "iters")?,
            wall_ms: opt(&r[13], "wall_ms")?,
            note: r[14].to_string(),
        })
    }
}

struct Cell<'a> {
    point: GridPoint,
    instance: usize,
    solver: &'a SolverGrid,
    alpha: f64,
    seed: u64,
}

/// Runs every cell of the grid on the current rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()?;
    let points = spec.grid_points();
    let corpora: Vec<Vec<Result<_, String>>> = points
        .iter()
        .map(|p| {
            let bench = spec.bench_spec(p);
            (0..bench.count)
                .into_par_iter()
                .map(|i| bench.instance(i).map_err(|e| e.to_string()))
                .collect()
        })
        .collect();

    let mut cells = Vec::new();
    for (pi, &point) in points.iter().enumerate() {
        for instance in 0..spec.benchmark.instances {
            for solver in &spec.solvers {
                for &alpha in &solver.alphas {
                    for &seed in &spec.run.seeds {
                        cells.push((
                            pi,
                            Cell {
                                point,
                                instance,
                                solver,
                                alpha,
                                seed,
                            },
                        ));
                    }
                }
            }
        }
    }

    let rows = cells
        .par_iter()
        .map(|(pi, cell)| {
            let mut row = SweepRow {
                family: spec.benchmark.family,
                n: spec.benchmark.n,
                point: cell.point,
                instance: cell.instance,
                formulation: cell.solver.formulation,
                alpha: cell.alpha,
                optimizer: cell.solver.optimizer,
                seed: cell.seed,
                solved: false,
                violated: None,
                iters: 0,
                wall_ms: None,
                note: String::new(),
            };
            let formula = match &corpora[*pi][cell.instance] {
                Ok(f) => f,
                Err(e) => {
                    row.note = format!("generation failed: {e}");
                    return row;
                }
            };
            let cfg = spec.solve_config(cell.solver, cell.alpha, cell.seed);
            let start = Instant::now();
            match solve(formula, &cfg) {
                Ok(r) => {
                    row.solved = r.is_sat();
                    row.violated = Some(r.violated);
                    row.iters = r.iters_total;
                }
                Err(e) => row.note = format!("solve failed: {e}"),
            }
            if spec.run.record_wall_time {
                row.wall_ms = Some(start.elapsed().as_millis() as u64);
            }
            row
        })
        .collect();
    Ok(rows)
}

fn write_csv<I: IntoIterator<Item = Vec<String>>>(header: &[&str], records: I) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for r in records {
        w.write_record(&r).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    write_csv(&ROW_HEADER, rows.iter().map(SweepRow::record))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<SweepRow>, SweepError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| SweepError::Csv(e.to_string()))?;
    if header.iter().ne(ROW_HEADER) {
        return Err(SweepError::Csv("unexpected header".into()));
    }
    rdr.records()
        .enumerate()
        .map(|(i, r)| {
            let r = r.map_err(|e| SweepError::Csv(e.to_string()))?;
            SweepRow::from_record(&r).map_err(|e| SweepError::Csv(format!("row {}: {e}", i + 1)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// Shared coordinates, taken from the first run of the group.
    pub key: SweepRow,
    pub runs: usize,
    pub solved: usize,
}

impl SummaryRow {
    pub fn solved_fraction(&self) -> f64 {
        self.solved as f64 / self.runs as f64
    }

    fn record(&self) -> Vec<String> {
        let k = self.key.record();
        let mut r: Vec<String> = k[..5].iter().chain(&k[6..9]).cloned().collect();
        r.push(self.runs.to_string());
        r.push(self.solved.to_string());
        r.push(format_g6(self.solved_fraction()));
        r
    }
}

/// Solved fraction per (grid point, formulation, alpha, optimizer), over
/// instances and seeds, in order of first appearance.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<(Vec<String>, SummaryRow)> = Vec::new();
    for row in rows {
        let rec = row.record();
        let key: Vec<String> = rec[..5].iter().chain(&rec[6..9]).cloned().collect();
        let idx = match groups.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                groups.push((
                    key,
                    SummaryRow {
                        key: row.clone(),
                        runs: 0,
                        solved: 0,
                    },
                ));
                groups.len() - 1
            }
        };
        let g = &mut groups[idx].1;
        g.runs += 1;
        g.solved += usize::from(row.solved);
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

pub fn summary_to_csv(summary: &[SummaryRow]) -> String {
    write_csv(&SUMMARY_HEADER, summary.iter().map(SummaryRow::record))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g6_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.4, "0.4"),
            (2.5, "2.5"),
            (1.0 / 3.0, "0.333333"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (999999.5, "1e+06"),
            (-0.1, "-0.1"),
            (0.1 + 0.2, "0.3"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g6(x), want, "{x}");
        }
    }

    const SMALL: &str = r#"
[benchmark]
family = "CNF3"
n = 12
ratios = [1.0]
instances = 2
seed = 3

[[solvers]]
formulation = "square"
optimizer = "gd"
alphas = [0.0, 0.4]

[run]
restarts = 2
max_iters = 500
step_size = 0.05
"#;

    #[test]
    fn rows_in_grid_order_and_round_trip() {
        let spec = SweepSpec::from_toml(SMALL).unwrap();
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        let coords: Vec<(usize, f64)> = rows.iter().map(|r| (r.instance, r.alpha)).collect();
        assert_eq!(coords, [(0, 0.0), (0, 0.4), (1, 0.0), (1, 0.4)]);
        let csv = rows_to_csv(&rows);
        assert_eq!(rows_from_csv(&csv).unwrap(), rows);

        let summary = summarize(&rows);
        assert_eq!(summary.len(), 2);
        assert!(summary.iter().all(|s| s.runs == 2));
        assert!(summary_to_csv(&summary)
            .starts_with("family,n,ratio,r_p,r_v,formulation,alpha,optimizer,runs,solved,solved_fraction\n"));
    }

    #[test]
    fn invalid_specs() {
        let linear_gd = SMALL.replace("\"square\"", "\"linear\"");
        assert!(SweepSpec::from_toml(&linear_gd).is_err());
        let no_ratio = SMALL.replace("ratios = [1.0]", "ratios = []");
        assert!(SweepSpec::from_toml(&no_ratio).is_err());
        let card_with_ratio = SMALL.replace("CNF3", "CARD");
        assert!(SweepSpec::from_toml(&card_with_ratio).is_err());
        assert!(SweepSpec::from_toml("[benchmark]\n").is_err());
    }

    #[test]
    fn generation_failure_becomes_row() {
        let spec = SweepSpec::from_toml(&SMALL.replace("n = 12", "n = 2")).unwrap();
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows
            .iter()
            .all(|r| !r.solved && r.note.starts_with("generation failed")));
    }
}
