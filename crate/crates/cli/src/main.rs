//! `lqcc`: entanglement concentration simulator.
//!
//! Exit codes: 0 success, 1 internal numerical failure, 2 input error,
//! 3 domain error (rank deficiency, annihilation), 4 verification failure.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use lqcc_core::io::{self, MatrixJson, OperationJson, ReportJson, StateFile, StateJson};
use lqcc_core::theorem::{self, Decision, FilterCheck};
use lqcc_core::verify::{self, Level};
use lqcc_core::{concentrate, lqcc, states, superdense, DensityMatrix, Error, Execution, Party, PureBipartiteState};

use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "lqcc",
    version,
    about = "Entanglement concentration under local operations and classical communication"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Normalization tolerance for input states.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Monte Carlo trial count (accepts `10000` or `1e4`).
    #[arg(long, global = true, default_value = "10000", value_parser = parse_count)]
    trials: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Schmidt spectrum, rank, entropy and marginals of a pure state.
    Schmidt { state: PathBuf },
    /// Optimal concentration filter, its success probability and a Monte Carlo estimate.
    Concentrate { state: PathBuf },
    /// Whether one local filter concentrates both states.
    Shared {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value = "alice")]
        side: Party,
        /// Marginal distance below which the states count as sharing a marginal.
        #[arg(long, default_value_t = theorem::MARGINAL_TOL)]
        marginal_tol: f64,
        /// Also run a randomized search with this many trials for a common concentrator.
        #[arg(long, value_parser = parse_count)]
        falsify: Option<usize>,
    },
    /// Probabilistic superdense coding with `√(1−λ₂)|00⟩ + √λ₂|11⟩`.
    Superdense {
        #[arg(long)]
        lambda2: f64,
    },
    /// Randomized search for a single-pair local purification of a mixed state.
    Purify {
        /// Density-matrix file.
        #[arg(conflicts_with = "werner", required_unless_present = "werner")]
        state: Option<PathBuf>,
        /// Use the two-qubit Werner state with this singlet weight.
        #[arg(long)]
        werner: Option<f64>,
        /// Search trials; defaults to `--trials`.
        #[arg(long, value_parser = parse_count)]
        budget: Option<usize>,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        #[arg(long)]
        full: bool,
    },
}

fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if x.fract() != 0.0 || x < 0.0 || x > usize::MAX as f64 {
        return Err(format!("`{s}` is not a whole number"));
    }
    Ok(x as usize)
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn with_path(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) => 2,
            _ if e.is_domain_error() => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<Report, Failure>;

/// A command's report and the exit code it implies.
struct Report {
    value: Value,
    code: u8,
}

impl Report {
    fn ok(value: impl Serialize) -> CmdResult {
        Ok(Report { value: to_value(value)?, code: 0 })
    }
}

fn to_value(v: impl Serialize) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure { code: 1, message: e.to_string() })
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_pure(path: &Path, tol: f64) -> Result<PureBipartiteState, Failure> {
    io::parse_pure_state(&read(path)?, tol).map_err(|e| Failure::from(e).with_path(path))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SchmidtReport {
    dim_a: usize,
    dim_b: usize,
    lambda: Vec<f64>,
    rank: usize,
    entropy: f64,
    marginal_a: MatrixJson,
    marginal_b: MatrixJson,
}

fn cmd_schmidt(g: &Global, path: &Path) -> CmdResult {
    let s = load_pure(path, g.tol)?;
    let form = states::schmidt_decompose(&s)?;
    Report::ok(SchmidtReport {
        dim_a: s.dim_a(),
        dim_b: s.dim_b(),
        rank: form.rank(),
        entropy: form.entropy(),
        lambda: form.coeffs,
        marginal_a: MatrixJson::from_matrix(states::marginal(&s, Party::Alice).matrix()),
        marginal_b: MatrixJson::from_matrix(states::marginal(&s, Party::Bob).matrix()),
    })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ConcentrateReport {
    gamma_max: f64,
    filter: OperationJson,
    analytic_probability: f64,
    monte_carlo_frequency: f64,
    trials: usize,
    seed: u64,
    output_state: StateJson,
    maximality_deviation: f64,
    maximal: bool,
}

fn cmd_concentrate(g: &Global, path: &Path) -> CmdResult {
    let s = load_pure(path, g.tol)?;
    let gamma_max = concentrate::gamma_max(&s)?;
    let form = states::schmidt_decompose(&s)?;
    if form.rank() < s.dim_a() {
        return Err(Error::RankDeficient { rank: form.rank(), dim: s.dim_a() }.into());
    }
    let result = concentrate::concentrate(&s)?;
    let dilation = lqcc::dilate(&result.filter, lqcc::DEFAULT_PROBE_DIM)?;
    let deviation = states::maximal_entanglement_deviation(&result.output_state).unwrap_or(f64::INFINITY);
    Report::ok(ConcentrateReport {
        gamma_max,
        filter: OperationJson::from_operation(&result.filter),
        analytic_probability: dilation.success_probability(&s)?,
        monte_carlo_frequency: lqcc::success_frequency(&dilation, &s, g.trials, g.seed, Execution::default())?,
        trials: g.trials,
        seed: g.seed,
        output_state: StateJson::from_state(&result.output_state),
        maximality_deviation: deviation,
        maximal: deviation <= theorem::MAXIMALITY_TOL,
    })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SharedReport {
    verdict: &'static str,
    side: Party,
    marginal_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    filter: Option<OperationJson>,
    /// The shared filter on each state, or the first state's filter on the second.
    checks: Vec<FilterCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    falsifier: Option<ReportJson>,
}

fn cmd_shared(
    g: &Global,
    first: &Path,
    second: &Path,
    side: Party,
    marginal_tol: f64,
    falsify: Option<usize>,
) -> CmdResult {
    if marginal_tol.is_nan() || marginal_tol <= 0.0 {
        return Err(Failure::input("--marginal-tol must be positive"));
    }
    let s1 = load_pure(first, g.tol)?;
    let s2 = load_pure(second, g.tol)?;
    let verdict = theorem::shared_concentrator(&s1, &s2, side, marginal_tol)?;
    let falsifier = match falsify {
        Some(0) => return Err(Failure::input("--falsify needs at least one trial")),
        Some(n) => Some(ReportJson::from(&theorem::proposition_falsifier(&s1, &s2, n, g.seed)?)),
        None => None,
    };
    let (verdict_name, filter, checks) = match verdict.decision {
        Decision::Concentratable { filter, checks } => {
            ("Concentratable", Some(OperationJson::from_operation(&filter)), checks.to_vec())
        }
        Decision::Impossible { cross_check } => ("Impossible", None, vec![cross_check]),
    };
    Report::ok(SharedReport {
        verdict: verdict_name,
        side,
        marginal_distance: verdict.marginal_distance,
        filter,
        checks,
        falsifier,
    })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SuperdenseReport {
    lambda2: f64,
    expected_rate: f64,
    seed: u64,
    #[serde(flatten)]
    batch: superdense::BatchResult,
}

fn cmd_superdense(g: &Global, lambda2: f64) -> CmdResult {
    let s = superdense::state_with_lambda2(lambda2)?;
    Report::ok(SuperdenseReport {
        lambda2,
        expected_rate: superdense::success_probability(&s)?,
        seed: g.seed,
        batch: superdense::run_batch(&s, g.trials, g.seed)?,
    })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PurifyReport {
    input: String,
    threshold: f64,
    below_threshold: bool,
    #[serde(flatten)]
    report: ReportJson,
}

fn cmd_purify(g: &Global, state: Option<&Path>, werner: Option<f64>, budget: Option<usize>) -> CmdResult {
    let budget = budget.unwrap_or(g.trials);
    if budget == 0 {
        return Err(Failure::input("--budget must be at least 1"));
    }
    let (input, rho) = match (state, werner) {
        (_, Some(p)) => (format!("werner({p})"), DensityMatrix::werner(p)?),
        (Some(path), None) => {
            let rho = match io::parse_state_file(&read(path)?, g.tol).map_err(|e| Failure::from(e).with_path(path))? {
                StateFile::Mixed { dim_a, dim_b, rho } if dim_a == dim_b => rho,
                StateFile::Mixed { .. } => return Err(Failure::input("purification needs equal local dimensions")),
                StateFile::Pure(s) => DensityMatrix::from_pure(&s),
            };
            (path.display().to_string(), rho)
        }
        (None, None) => return Err(Failure::input("give a density file or --werner")),
    };
    let report = theorem::purification_falsifier(&rho, budget, g.seed)?;
    let threshold = 1.0 - theorem::PURIFICATION_MARGIN;
    Report::ok(PurifyReport {
        input,
        threshold,
        below_threshold: report.best_score < threshold,
        report: ReportJson::from(&report),
    })
}

fn cmd_verify(full: bool) -> CmdResult {
    let level = if full { Level::Full } else { Level::Quick };
    let rows =
        verify::run_suite(level).map_err(|e| Failure { code: 4, message: format!("verification aborted: {e}") })?;
    let passed = rows.iter().all(|r| r.passed);
    let value = serde_json::json!({
        "level": if full { "full" } else { "quick" },
        "passed": passed,
        "checks": rows,
    });
    Ok(Report { value, code: if passed { 0 } else { 4 } })
}

fn verify_table(value: &Value) -> String {
    let rows = value["checks"].as_array().map(Vec::as_slice).unwrap_or_default();
    let name_width = rows.iter().filter_map(|r| r["name"].as_str()).map(str::len).max().unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        let status = if r["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
        out += &format!(
            "{status}  {:<22}  {:<name_width$}  {:.3e} <= {:e}\n",
            r["tag"].as_str().unwrap_or(""),
            r["name"].as_str().unwrap_or(""),
            r["worst"].as_f64().unwrap_or(f64::NAN),
            r["threshold"].as_f64().unwrap_or(f64::NAN),
        );
    }
    out
}

fn run(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    if g.tol.is_nan() || g.tol <= 0.0 {
        return Err(Failure::input("--tol must be positive"));
    }
    if g.trials == 0 {
        return Err(Failure::input("--trials must be at least 1"));
    }
    match &cli.command {
        Command::Schmidt { state } => cmd_schmidt(g, state),
        Command::Concentrate { state } => cmd_concentrate(g, state),
        Command::Shared { first, second, side, marginal_tol, falsify } => {
            cmd_shared(g, first, second, *side, *marginal_tol, *falsify)
        }
        Command::Superdense { lambda2 } => cmd_superdense(g, *lambda2),
        Command::Purify { state, werner, budget } => cmd_purify(g, state.as_deref(), *werner, *budget),
        Command::Verify { full, .. } => cmd_verify(*full),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let text = match (&cli.command, cli.global.format) {
        (Command::Verify { .. }, Format::Pretty) => Ok(verify_table(&report.value)),
        (_, format) => output::render(&report.value, format),
    };
    let written = text.and_then(|t| match &cli.global.out {
        Some(path) => std::fs::write(path, t),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(t.as_bytes())
        }
    });
    if let Err(e) = written {
        eprintln!("error: writing report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(report.code)
}
