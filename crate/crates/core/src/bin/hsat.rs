use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use hybrid_sat::benchgen::{BenchSpec, Family};
use hybrid_sat::output::{emit_result, parse_solver_output};
use hybrid_sat::sweep::{rows_from_csv, rows_to_csv, run_sweep, summarize, summary_to_csv, SweepSpec};
use hybrid_sat::{parse_hnf, serialize_hnf, solve, Formulation, OptimizerConfig, OptimizerKind, SolveConfig};

#[derive(Parser)]
#[command(
    name = "hsat",
    version,
    about = "Hybrid SAT solving by continuous Fourier minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an HNF file. Exit code 10 on SAT, 0 on UNKNOWN.
    Solve(SolveArgs),
    /// Generate random benchmark instances in HNF.
    Gen(GenArgs),
    /// Run an experiment sweep described by a TOML file.
    Sweep(SweepArgs),
    /// Aggregate a sweep's per-run CSV into solved fractions.
    Summarize {
        rows: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, default_value = "square")]
    formulation: Formulation,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Defaults to pgd for the linear formulation and gd otherwise.
    #[arg(long)]
    optimizer: Option<OptimizerKind>,
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds.
    #[arg(long, default_value_t = 300.0)]
    timeout: f64,
    /// Stop a restart once the objective falls to this value.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Re-read the printed result and verify it against the formula.
    #[arg(long)]
    self_check: bool,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Constraints per variable, for CNF3 and XOR2.
    #[arg(long, default_value_t = 0.0)]
    ratio: f64,
    #[arg(long, default_value_t = 0.0)]
    r_p: f64,
    #[arg(long, default_value_t = 0.0)]
    r_v: f64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for `<family>-<index>.hnf` files; a single instance goes
    /// to stdout when omitted.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    spec: PathBuf,
    /// Per-run CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solved-fraction CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn set_threads(threads: Option<usize>) -> Result<(), String> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<ExitCode, String> {
    set_threads(a.threads)?;
    let path = a.file.display().to_string();
    let formula = parse_hnf(&read(&a.file)?).map_err(|e| format!("{path}: {e}"))?;
    let kind = a.optimizer.unwrap_or(if a.formulation.needs_box() {
        OptimizerKind::Pgd
    } else {
        OptimizerKind::Gd
    });
    let mut optimizer = OptimizerConfig::new(kind);
    if let Some(s) = a.step_size {
        optimizer.step_size = s;
    }
    if let Some(m) = a.max_iters {
        optimizer.max_iters = m;
    }
    if let Some(t) = a.tolerance {
        optimizer.value_tol = t;
    }
    if !(a.timeout.is_finite() && a.timeout > 0.0) {
        return Err("--timeout must be a positive number of seconds".into());
    }
    let cfg = SolveConfig {
        formulation: a.formulation,
        alpha: a.alpha,
        optimizer,
        restarts: a.restarts,
        seed: a.seed,
        timeout: Some(Duration::from_secs_f64(a.timeout)),
        ..SolveConfig::default()
    };
    let result = solve(&formula, &cfg).map_err(|e| e.to_string())?;
    let (text, code) = emit_result(&result);
    if a.self_check {
        let parsed = parse_solver_output(&text).map_err(|e| format!("self-check: {e}"))?;
        if let Ok(b) = parsed.assignment(formula.num_vars()) {
            let v = formula.count_violations(&b).map_err(|e| e.to_string())?;
            if result.is_sat() && v != 0 {
                return Err(format!("self-check: printed assignment violates {v} constraints"));
            }
        } else if result.is_sat() {
            return Err("self-check: printed assignment does not parse".into());
        }
    }
    print!("{text}");
    Ok(ExitCode::from(code as u8))
}

fn cmd_gen(a: GenArgs) -> Result<ExitCode, String> {
    let spec = BenchSpec {
        family: a.family,
        n: a.n,
        ratio: a.ratio,
        r_p: a.r_p,
        r_v: a.r_v,
        count: a.count,
        seed: a.seed,
    };
    match a.out_dir {
        None if a.count == 1 => print!("{}", serialize_hnf(&spec.instance(0).map_err(|e| e.to_string())?)),
        None => return Err("--out-dir is required when --count is not 1".into()),
        Some(dir) => {
            fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            for i in 0..a.count {
                let f = spec.instance(i).map_err(|e| e.to_string())?;
                let p = dir.join(format!("{}-{i:04}.hnf", a.family.name().to_lowercase()));
                fs::write(&p, serialize_hnf(&f)).map_err(|e| format!("{}: {e}", p.display()))?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode, String> {
    set_threads(a.threads)?;
    let spec = SweepSpec::from_toml(&read(&a.spec)?).map_err(|e| e.to_string())?;
    let rows = run_sweep(&spec).map_err(|e| e.to_string())?;
    write_or_print(a.out.as_deref(), &rows_to_csv(&rows))?;
    if let Some(p) = a.summary {
        write_or_print(Some(&p), &summary_to_csv(&summarize(&rows)))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Solve(a) => cmd_solve(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Summarize { rows, out } => read(&rows)
            .and_then(|t| rows_from_csv(&t).map_err(|e| e.to_string()))
            .and_then(|rows| write_or_print(out.as_deref(), &summary_to_csv(&summarize(&rows))))
            .map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("hsat: {e}");
        ExitCode::from(1)
    })
}
