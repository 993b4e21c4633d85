//! `abel-tau`: solve, sweep and oracle-check Abel-Volterra systems from the
//! command line.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use abel_tau::config::ProblemConfig;
use abel_tau::series::series_coeffs;
use abel_tau::tau::{sup_error, TauSolver, DEFAULT_GRID};
use abel_tau::{examples, Error, Problem};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use report::{Row, SolveSummary};

/// Thread count for `sweep`; unset means one thread per core.
const THREADS_ENV: &str = "ABEL_TAU_THREADS";

/// Sample points of the oracle window.
const ORACLE_POINTS: usize = 201;

#[derive(Parser)]
#[command(name = "abel-tau", version, about = "Fractional spectral Tau solver for Abel-Volterra systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Problem definition in TOML.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in example 1-4.
    #[arg(long)]
    example: Option<usize>,
}

impl Source {
    fn load(&self) -> Result<Problem, Error> {
        match (&self.config, self.example) {
            (Some(path), _) => ProblemConfig::load(path)?.to_problem(),
            (None, Some(k)) => examples::example(k),
            (None, None) => Err(Error::Config("either --config or --example is required".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve at one degree and print a summary.
    Solve {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n: usize,
        /// Print a JSON summary including the solution coefficients.
        #[arg(long)]
        dump: bool,
    },
    /// Solve at several degrees sharing one canonical table.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Ascending, comma separated degrees.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        /// Write the CSV here and print an aligned table to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report zero seconds so that output is reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Compare the Tau solution with the power series near the origin.
    Oracle {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Allowed discrepancy; defaults to max(10 * sup error, 1e-8).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print a built-in example as a TOML config.
    Config {
        #[arg(long)]
        example: usize,
    },
}

enum Failure {
    Lib(Error),
    Io(String),
    Mismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(
                Error::Config(_)
                | Error::InvalidProblem(_)
                | Error::Domain(_)
                | Error::IncompatibleExponent { .. }
                | Error::Unsupported(_),
            )
            | Failure::Io(_) => 2,
            Failure::Lib(_) => 3,
            Failure::Mismatch => 4,
        }
    }
}

fn errors_of(problem: &Problem, y: &abel_tau::FracPolyVec) -> Option<Vec<f64>> {
    problem.exact()?;
    Some(sup_error(y, |t| problem.exact_at(t).unwrap(), DEFAULT_GRID))
}

fn cmd_solve(source: &Source, n: usize, dump: bool) -> Result<(), Failure> {
    let problem = source.load()?;
    let mut solver = TauSolver::new(problem.clone())?;
    let start = Instant::now();
    let sol = solver.solve(n)?;
    let seconds = start.elapsed().as_secs_f64();
    let errors = errors_of(&problem, &sol.y);
    let summary = SolveSummary {
        problem: &problem,
        heights: solver.heights(),
        sol: &sol,
        errors: errors.as_deref(),
        seconds,
    };
    if dump {
        println!("{}", summary.json());
    } else {
        print!("{}", summary.text());
    }
    Ok(())
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let k: usize = v
            .parse()
            .map_err(|_| Failure::Lib(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))))?;
        builder = builder.num_threads(k);
    }
    builder.build().map_err(|e| Failure::Io(e.to_string()))
}

fn cmd_sweep(source: &Source, n_list: &[usize], out: Option<&PathBuf>, no_timing: bool) -> Result<(), Failure> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("--n-list must be strictly ascending".into()).into());
    }
    let problem = source.load()?;
    let mut solver = TauSolver::new(problem.clone())?;
    solver.prepare(*n_list.last().expect("clap requires at least one degree"))?;
    let solver = &solver;
    let rows = thread_pool()?.install(|| {
        n_list
            .par_iter()
            .map(|&n| {
                let start = Instant::now();
                let sol = solver.solve_prepared(n)?;
                let seconds = if no_timing { 0.0 } else { start.elapsed().as_secs_f64() };
                Ok(Row {
                    degree: n,
                    errors: errors_of(&problem, &sol.y),
                    tau_norms: sol.tau_norms,
                    residual: sol.residual_norm,
                    seconds,
                })
            })
            .collect::<Result<Vec<Row>, Error>>()
    })?;
    let csv = report::csv(problem.n(), &rows);
    match out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
            print!("{}", report::table(problem.n(), &rows));
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_oracle(source: &Source, n: usize, m: usize, tol: Option<f64>) -> Result<(), Failure> {
    let problem = source.load()?;
    let series = series_coeffs(&problem, m)?;
    let sol = TauSolver::new(problem.clone())?.solve(n)?;
    let w = series.window();
    let mut disc = 0.0f64;
    for k in 0..ORACLE_POINTS {
        let t = w * k as f64 / (ORACLE_POINTS - 1) as f64;
        let a = series.eval(t)?;
        let b = sol.eval(t)?;
        disc = a.iter().zip(&b).fold(disc, |d, (u, v)| d.max((u - v).abs()));
    }
    let err = errors_of(&problem, &sol.y).map(|e| e.into_iter().fold(0.0, f64::max));
    let tol = tol.unwrap_or_else(|| (10.0 * err.unwrap_or(0.0)).max(1e-8));
    let pass = disc <= tol;
    println!("window       [0, {}]", report::sci(w));
    println!("radius       {}", report::list(&series.radius));
    println!("discrepancy  {}", report::sci(disc));
    println!("tolerance    {}", report::sci(tol));
    println!("{}", if pass { "PASS" } else { "FAIL" });
    if pass {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { source, n, dump } => cmd_solve(&source, n, dump),
        Command::Sweep {
            source,
            n_list,
            out,
            no_timing,
        } => cmd_sweep(&source, &n_list, out.as_ref(), no_timing),
        Command::Oracle { source, n, m, tol } => cmd_oracle(&source, n, m, tol),
        Command::Config { example } => {
            print!("{}", examples::config(example)?.to_toml()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(m) => eprintln!("error: {m}"),
                Failure::Mismatch => eprintln!("error: oracle discrepancy exceeds tolerance"),
            }
            ExitCode::from(f.code())
        }
    }
}
