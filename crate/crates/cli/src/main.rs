//! `grasslen`: bounds tables, secant dimensions and length estimates for
//! multivectors from the command line.
//!
//! Exit codes: 0 success (numerical flags are reported in the output),
//! 1 numerical failure, 2 usage or input error, 3 size cap exceeded.

mod ranges;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grasslen::bounds::{self, bounds_table};
use grasslen::decomp::{self, is_decomposable, schmidt_length, support_rank, RANK_TOL};
use grasslen::fit::{als_fit, estimate_length, FitOptions, FitReport};
use grasslen::rng::DEFAULT_SEED;
use grasslen::secant::{self, defect_scan_cells, secant_dim, SecantOptions};
use grasslen::{hodge_dual, io as mvio, Error, Multivector};
use serde_json::{json, Value};

/// Largest Plücker pair count `check` will enumerate.
const CHECK_PAIR_CAP: usize = 200_000_000;

#[derive(Debug, Clone)]
struct List(Vec<usize>);

fn list(text: &str) -> Result<List, String> {
    ranges::parse_list(text).map(List)
}

#[derive(Parser, Debug)]
#[command(name = "grasslen", version, about = "Length of antisymmetric multivectors: bounds, secant dimensions, fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Base seed for all random draws
    #[arg(long, env = "GRASSLEN_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output path (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lower bounds and known exact values of the maximal length N(m, n), as CSV
    Bounds {
        /// Ambient dimensions, e.g. 4..14 or 6,8
        #[arg(long, value_parser = list, default_value = "4..14")]
        m: List,
        /// Grades
        #[arg(long, value_parser = list, default_value = "1..7")]
        n: List,
        /// Accepted for uniformity; the bounds are exact integers
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        /// Emit per-n plot series instead of the table
        #[arg(long)]
        plot: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Dimension of the variety of sums of l points of G(n, m), as CSV
    Secant {
        #[arg(long, value_parser = list)]
        m: List,
        #[arg(long, value_parser = list)]
        n: List,
        /// Numbers of points
        #[arg(long, value_parser = list, default_value = "1", conflicts_with = "l_max")]
        l: List,
        /// Scan l = 1..=L
        #[arg(long)]
        l_max: Option<usize>,
        /// Relative singular-value cut of the numeric rank
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Random draws per cell; the maximum rank is reported
        #[arg(long, default_value_t = 3)]
        trials: usize,
        /// Confirm each rank exactly modulo a random 62-bit prime
        #[arg(long)]
        certify: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Numerical length by alternating least squares (JSON record)
    Fit {
        /// Multivector document, or - for standard input
        input: PathBuf,
        /// Largest number of terms tried
        #[arg(long, default_value_t = 4, conflicts_with = "l")]
        l_max: usize,
        /// Fit exactly this many terms instead of searching
        #[arg(long)]
        l: Option<usize>,
        /// Relative residual accepted as an exact fit
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        max_sweeps: usize,
        /// Relative per-sweep improvement below which a restart stops
        #[arg(long, default_value_t = 1e-10)]
        stall_tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Plücker decomposability test (JSON record)
    Check {
        input: PathBuf,
        /// Threshold on the Plücker residual relative to ‖psi‖⁴
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Exact length of a 2-vector by Schmidt decomposition (JSON record)
    Schmidt {
        input: PathBuf,
        /// Relative singular-value cut of the skew-matrix rank
        #[arg(long, default_value_t = RANK_TOL)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Particle-hole dual, written as a multivector document
    Dual {
        input: PathBuf,
        /// Accepted for uniformity; the dual is exact
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Support rank: dimension of the smallest F with psi in ∧ⁿF (JSON record)
    Rank {
        input: PathBuf,
        #[arg(long, default_value_t = RANK_TOL)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Cap(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TooLarge(_) => Failure::Cap(e.to_string()),
            Error::Numerical(_) | Error::OddSkewRank(_) | Error::DependentFactors => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_input(path: &Path) -> Result<Multivector, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("reading stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))?
    };
    Ok(mvio::parse(&text)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("writing {}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Usage(format!("writing stdout: {e}"))),
    }
}

fn emit_json(out: &Option<PathBuf>, value: &Value) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).expect("json");
    text.push('\n');
    emit(out, &text)
}

fn check_tol(tol: f64, allow_zero: bool) -> CmdResult {
    if tol.is_finite() && (tol > 0.0 || (allow_zero && tol == 0.0)) && tol < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--tol must lie in {} 1), got {tol}", if allow_zero { "[0," } else { "(0," })))
    }
}

fn cmd_bounds(m: &[usize], n: &[usize], tol: f64, plot: bool, common: &Common) -> CmdResult {
    check_tol(tol, true)?;
    let table = bounds_table(m, n)?;
    let text = if plot { bounds::to_plot_data(&table) } else { bounds::to_csv(&table) };
    emit(&common.out, &text)?;
    eprintln!("bounds: {} rows (m in {:?}, n in {:?})", table.len(), m, n);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_secant(
    m: &[usize],
    n: &[usize],
    l: &[usize],
    l_max: Option<usize>,
    tol: f64,
    trials: usize,
    certify: bool,
    common: &Common,
) -> CmdResult {
    check_tol(tol, false)?;
    let opts = SecantOptions { trials, tol, certify, seed: common.seed, ..SecantOptions::default() };
    let ls: Vec<usize> = match l_max {
        Some(0) => return Err(Failure::Usage("--l-max must be at least 1".into())),
        Some(k) => (1..=k).collect(),
        None => l.to_vec(),
    };
    let reports = if m.len() == 1 && n.len() == 1 && ls.len() == 1 {
        vec![secant_dim(m[0], n[0], ls[0], &opts)?]
    } else {
        let mut cells = Vec::new();
        for &mm in m {
            for &nn in n.iter().filter(|&&nn| nn <= mm) {
                for &ll in &ls {
                    cells.push((mm, nn, ll));
                }
            }
        }
        if cells.is_empty() {
            return Err(Failure::Usage("no cells with n <= m in the requested grid".into()));
        }
        let outcome = defect_scan_cells(cells, &opts)?;
        for note in &outcome.skipped {
            eprintln!("{note}");
        }
        if outcome.reports.is_empty() {
            return Err(Failure::Cap("every cell exceeds the size caps".into()));
        }
        outcome.reports
    };
    emit(&common.out, &secant::to_csv(&reports))?;
    for r in &reports {
        let flag = if r.ambiguous { " [ambiguous rank]" } else { "" };
        eprintln!(
            "m={} n={} l={}: projective dim {} (expected {}, defect {}){flag}",
            r.m, r.n, r.l, r.projective_dim, r.expected_dim, r.defect
        );
    }
    Ok(())
}

fn fit_summary(r: &FitReport) -> Value {
    json!({
        "l": r.l,
        "best_residual": r.best_residual,
        "sweeps_used": r.sweeps_used,
        "restart_index": r.restart_index,
        "restarts_run": r.restarts_run,
        "discarded_restarts": r.discarded_restarts,
        "max_factor_norm": r.max_factor_norm,
        "diverging": r.diverging,
        "cancellation": r.cancellation,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    input: &Path,
    l_max: usize,
    l: Option<usize>,
    tol: f64,
    restarts: usize,
    max_sweeps: usize,
    stall_tol: f64,
    common: &Common,
) -> CmdResult {
    let psi = read_input(input)?;
    let opts = FitOptions { restarts, max_sweeps, residual_tol: tol, stall_tol, seed: common.seed, ..FitOptions::default() };
    let (record, terms) = match l {
        Some(l) => {
            let r = als_fit(&psi, l, &opts)?;
            eprintln!("fit with {l} terms: relative residual {:.3e}{}", r.best_residual, flag_text(r.diverging));
            let record = json!({
                "command": "fit",
                "m": psi.m(),
                "n": psi.n(),
                "residual_tol": tol,
                "seed": common.seed,
                "exact_fit": r.best_residual <= tol,
                "diverging": r.diverging,
                "reports": [fit_summary(&r)],
            });
            (record, r.terms)
        }
        None => {
            let est = estimate_length(&psi, l_max, &opts)?;
            match est.length {
                Some(k) => eprintln!("numerical length at tolerance {tol:e}: {k}{}", flag_text(est.any_diverging())),
                None => eprintln!("numerical length at tolerance {tol:e}: exceeds {l_max}{}", flag_text(est.any_diverging())),
            }
            let record = json!({
                "command": "fit",
                "m": psi.m(),
                "n": psi.n(),
                "l_max": l_max,
                "residual_tol": tol,
                "seed": common.seed,
                "length": est.length,
                "exceeds_l_max": est.exceeds_l_max(),
                "diverging": est.any_diverging(),
                "reports": est.reports.iter().map(fit_summary).collect::<Vec<_>>(),
            });
            let terms = est.reports.last().map(|r| r.terms.clone()).unwrap_or_default();
            (record, terms)
        }
    };
    // The JSON record goes to stdout; --out receives the fitted terms.
    emit_json(&None, &record)?;
    if let Some(path) = &common.out {
        fs::write(path, mvio::serialize_terms(psi.m(), psi.n(), &terms))
            .map_err(|e| Failure::Usage(format!("writing {}: {e}", path.display())))?;
    }
    Ok(())
}

fn flag_text(diverging: bool) -> &'static str {
    if diverging {
        " [diverging factor norms]"
    } else {
        ""
    }
}

fn cmd_check(input: &Path, tol: f64, common: &Common) -> CmdResult {
    check_tol(tol, false)?;
    let psi = read_input(input)?;
    let pairs = decomp::plucker_pair_count(psi.m(), psi.n());
    if pairs > CHECK_PAIR_CAP {
        return Err(Failure::Cap(format!("{pairs} Plücker pairs exceed {CHECK_PAIR_CAP}")));
    }
    let r = is_decomposable(&psi, tol)?;
    eprintln!(
        "{}decomposable (relative Plücker residual {:.3e}, support rank {}){}",
        if r.decomposable { "" } else { "not " },
        r.relative_residual,
        r.support_rank,
        if r.rank_agrees { "" } else { " [rank test disagrees]" }
    );
    emit_json(
        &common.out,
        &json!({
            "command": "check",
            "m": psi.m(),
            "n": psi.n(),
            "tol": tol,
            "decomposable": r.decomposable,
            "plucker_residual": r.plucker_residual,
            "relative_residual": r.relative_residual,
            "support_rank": r.support_rank,
            "rank_agrees": r.rank_agrees,
        }),
    )
}

fn cmd_schmidt(input: &Path, tol: f64, common: &Common) -> CmdResult {
    check_tol(tol, false)?;
    let psi = read_input(input)?;
    if psi.is_zero() {
        return Err(Error::ZeroMultivector.into());
    }
    let s = schmidt_length(&psi, tol)?;
    eprintln!(
        "length {} (reconstruction residual {:.3e}){}",
        s.length,
        s.residual,
        if s.ambiguous { " [ambiguous rank]" } else { "" }
    );
    let mut record = json!({
        "command": "schmidt",
        "m": psi.m(),
        "n": psi.n(),
        "tol": tol,
        "length": s.length,
        "singular_values": s.singular_values,
        "residual": s.residual,
        "ambiguous": s.ambiguous,
    });
    record["terms"] = serde_json::from_str(&mvio::serialize_terms(psi.m(), 2, &s.terms)).expect("json");
    emit_json(&common.out, &record)
}

fn cmd_dual(input: &Path, tol: f64, common: &Common) -> CmdResult {
    check_tol(tol, true)?;
    let psi = read_input(input)?;
    let d = hodge_dual(&psi);
    eprintln!("dual: grade {} -> grade {} in dimension {}", psi.n(), d.n(), d.m());
    emit(&common.out, &mvio::serialize(&d))
}

fn cmd_rank(input: &Path, tol: f64, common: &Common) -> CmdResult {
    check_tol(tol, false)?;
    let psi = read_input(input)?;
    let r = support_rank(&psi, tol)?;
    eprintln!("support rank {}{}", r.rank, if r.ambiguous { " [ambiguous rank]" } else { "" });
    emit_json(
        &common.out,
        &json!({
            "command": "rank",
            "m": psi.m(),
            "n": psi.n(),
            "tol": tol,
            "rank": r.rank,
            "ambiguous": r.ambiguous,
        }),
    )
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Bounds { m, n, tol, plot, common } => cmd_bounds(&m.0, &n.0, tol, plot, &common),
        Command::Secant { m, n, l, l_max, tol, trials, certify, common } => {
            cmd_secant(&m.0, &n.0, &l.0, l_max, tol, trials, certify, &common)
        }
        Command::Fit { input, l_max, l, tol, restarts, max_sweeps, stall_tol, common } => {
            cmd_fit(&input, l_max, l, tol, restarts, max_sweeps, stall_tol, &common)
        }
        Command::Check { input, tol, common } => cmd_check(&input, tol, &common),
        Command::Schmidt { input, tol, common } => cmd_schmidt(&input, tol, &common),
        Command::Dual { input, tol, common } => cmd_dual(&input, tol, &common),
        Command::Rank { input, tol, common } => cmd_rank(&input, tol, &common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
