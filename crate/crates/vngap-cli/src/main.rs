//! `vngap`: search for, certify, and verify violations of the generalized
//! von Neumann inequality for linear matrix pencils of commuting
//! contraction triples.
//!
//! Exit codes are a stable contract:
//!   0  success (for `search`/`certify`: a violation is certified)
//!   1  property-suite failure
//!   2  configuration or input error
//!   3  best effort found / re-verified no violation
//!   4  numerical non-convergence
//!
//! Human-readable summaries go to stdout; JSON artifacts go to files only.
//! Output is plain text (`NO_COLOR` is honored trivially).

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use vngap_core::gap::{
    self, GapCertificate, SearchParams, DEFAULT_BUDGET, DEFAULT_RESTARTS, ESCALATION_SCHEDULE,
};
use vngap_core::linalg::ComplexMatrix;
use vngap_core::norms::{self, DEFAULT_FINE_GRID, DEFAULT_GRID};
use vngap_core::norms::TorusSupResult;
use vngap_core::schema::{BPairJson, PolynomialJson, TupleJson, SUITE_SCHEMA, SUP_RESULT_SCHEMA};
use vngap_core::tuples::pauli_pair;
use vngap_core::verify::{self, SuiteReport, REMARK1_TOL, SUITE_TOL};
use vngap_core::Error as CoreError;

use config::{check_bound, pick, pick_opt, FileConfig};

const EXIT_SUITE_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NO_VIOLATION: u8 = 3;
const EXIT_NONCONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "vngap",
    about = "Search for and certify violations of the generalized von Neumann inequality",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search coefficient triples for a certified violation
    Search(SearchArgs),
    /// Independently re-verify a stored certificate
    Certify(CertifyArgs),
    /// Check the inequality for a polynomial and tuple read from files
    Verify(VerifyArgs),
    /// Run the known-good property suites (scalar affine, one and two variables)
    Suite(SuiteArgs),
    /// Compute an operator norm or certified torus/polydisk supremum
    Norm(NormArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat TOML config file; flags override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = available parallelism)
    #[arg(long)]
    workers: Option<usize>,
    /// Output file for the JSON artifact
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Coefficient size n >= 2; omitted: escalate over 2, 3, 4
    #[arg(long)]
    n: Option<usize>,
    /// Independent seeded restarts
    #[arg(long)]
    restarts: Option<usize>,
    /// Total objective-evaluation budget across restarts
    #[arg(long)]
    budget: Option<u64>,
    /// Master seed; every random draw derives from it
    #[arg(long)]
    seed: Option<u64>,
    /// Torus grid per dimension for the search objective
    #[arg(long)]
    grid: Option<usize>,
    /// Torus grid per dimension for certification
    #[arg(long)]
    fine_grid: Option<usize>,
    /// Unitary pair: "pauli" or a path to a {b1, b2} JSON file
    #[arg(long)]
    b_pair: Option<String>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Certificate JSON to re-verify
    #[arg(long)]
    cert: Option<PathBuf>,
    /// Grid for the fresh certification (may be finer than the stored one)
    #[arg(long)]
    fine_grid: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Polynomial JSON file
    #[arg(long)]
    polynomial: Option<PathBuf>,
    /// Contraction-tuple JSON file
    #[arg(long)]
    tuple: Option<PathBuf>,
    /// Acceptance tolerance on the ratio
    #[arg(long)]
    tol: Option<f64>,
    /// Torus grid per dimension
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct SuiteArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which suite: all, remark1, n1, ando
    #[arg(long)]
    suite: Option<String>,
    /// Trials per suite
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override applied to every suite
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct NormArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which norm: op-norm, torus-sup, polydisk-sup
    #[arg(long)]
    op: Option<String>,
    /// Input JSON: a matrix for op-norm, a polynomial otherwise
    #[arg(long)]
    input: Option<PathBuf>,
    /// Torus grid per dimension
    #[arg(long)]
    grid: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::NonConvergence { .. } => EXIT_NONCONVERGENCE,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Search(args) => cmd_search(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Suite(args) => cmd_suite(args),
        Command::Norm(args) => cmd_norm(args),
    }
}

fn load_config(common: &CommonArgs) -> Result<FileConfig, CliError> {
    match &common.config {
        Some(path) => FileConfig::load(path).map_err(CliError::input),
        None => Ok(FileConfig::default()),
    }
}

fn init_workers(flag: Option<usize>, file: Option<usize>) -> Result<(), CliError> {
    let workers = pick(flag, file, 0);
    check_bound("workers", workers as u64).map_err(CliError::input)?;
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::input(format!("worker pool: {e}")))?;
    }
    Ok(())
}

fn load_b_pair(source: &str) -> Result<(ComplexMatrix, ComplexMatrix), CliError> {
    if source == "pauli" {
        return Ok(pauli_pair());
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| CliError::input(format!("cannot read b-pair {source}: {e}")))?;
    let pair: BPairJson = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("invalid b-pair {source}: {e}")))?;
    Ok((pair.b1, pair.b2))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("invalid {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::input(format!("serialization: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_search(args: SearchArgs) -> Result<u8, CliError> {
    let file = load_config(&args.common)?;
    init_workers(args.common.workers, file.workers)?;

    let n = pick_opt(args.n, file.n);
    if let Some(n) = n {
        check_bound("n", n as u64).map_err(CliError::input)?;
    }
    let params = SearchParams {
        restarts: pick(args.restarts, file.restarts, DEFAULT_RESTARTS),
        seed: pick(args.seed, file.seed, 0),
        budget: pick(args.budget, file.budget, DEFAULT_BUDGET),
        search_grid: pick(args.grid, file.grid, DEFAULT_GRID),
        fine_grid: pick(args.fine_grid, file.fine_grid, DEFAULT_FINE_GRID),
    };
    check_bound("restarts", params.restarts as u64).map_err(CliError::input)?;
    check_bound("budget", params.budget).map_err(CliError::input)?;
    check_bound("grid", params.search_grid as u64).map_err(CliError::input)?;
    check_bound("fine_grid", params.fine_grid as u64).map_err(CliError::input)?;

    let b_source = pick(args.b_pair, file.b_pair, "pauli".to_string());
    let (b1, b2) = load_b_pair(&b_source)?;
    let out = pick(args.common.out, file.out, PathBuf::from("vn-gap-cert.json"));

    let cert = match n {
        Some(n) => gap::search(n, &b1, &b2, &params)?,
        None => gap::search_escalating(&ESCALATION_SCHEDULE, &b1, &b2, &params)?,
    };
    write_json(&out, &cert)?;

    println!("seed = {}", cert.seed);
    println!("n = {}", cert.n);
    println!("lhs_lower = {:.12}", cert.lhs_lower);
    println!("rhs_certified_upper = {:.12}", cert.rhs_result.certified_upper);
    println!("ratio_lower = {:.12}", cert.ratio_lower);
    println!("violation = {}", cert.violation);
    println!("wall_time_ms = {}", cert.search_meta.wall_time_ms);
    println!("certificate = {}", out.display());

    Ok(if cert.violation { 0 } else { EXIT_NO_VIOLATION })
}

fn cmd_certify(args: CertifyArgs) -> Result<u8, CliError> {
    let file = load_config(&args.common)?;
    init_workers(args.common.workers, file.workers)?;
    let cert_path = pick_opt(args.cert, file.cert)
        .ok_or_else(|| CliError::input("certify needs --cert"))?;
    let fine_grid = pick(args.fine_grid, file.fine_grid, DEFAULT_FINE_GRID);
    check_bound("fine_grid", fine_grid as u64).map_err(CliError::input)?;

    let cert: GapCertificate = read_json(&cert_path)?;
    let verdict = gap::certify(&cert, fine_grid)?;
    if let Some(out) = pick_opt(args.common.out, file.out) {
        write_json(&out, &verdict)?;
    }

    println!("lhs_lower = {:.12}", verdict.lhs_lower);
    println!("rhs_certified_upper = {:.12}", verdict.rhs.certified_upper);
    println!("ratio_lower = {:.12}", verdict.ratio_lower);
    println!(
        "verdict = {}",
        if verdict.violation { "VIOLATION" } else { "NO_VIOLATION" }
    );
    Ok(if verdict.violation { 0 } else { EXIT_NO_VIOLATION })
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, CliError> {
    let file = load_config(&args.common)?;
    init_workers(args.common.workers, file.workers)?;
    let poly_path = pick_opt(args.polynomial, file.polynomial)
        .ok_or_else(|| CliError::input("verify needs --polynomial"))?;
    let tuple_path = pick_opt(args.tuple, file.tuple)
        .ok_or_else(|| CliError::input("verify needs --tuple"))?;
    let tol = pick(args.tol, file.tol, SUITE_TOL);
    let grid = pick(args.grid, file.grid, DEFAULT_GRID);
    check_bound("grid", grid as u64).map_err(CliError::input)?;

    let poly: PolynomialJson = read_json(&poly_path)?;
    let tuple: TupleJson = read_json(&tuple_path)?;
    let report = verify::check_inequality(&poly.to_polynomial()?, &tuple.to_tuple()?, tol, grid)?;
    if let Some(out) = pick_opt(args.common.out, file.out) {
        write_json(&out, &report)?;
    }

    println!("lhs = {:.12}", report.lhs);
    println!("rhs_certified_upper = {:.12}", report.rhs);
    println!("ratio = {:.12}", report.ratio);
    println!("holds = {}", report.holds);
    println!("inputs_digest = {}", report.inputs_digest);
    Ok(0)
}

#[derive(Serialize)]
struct SuiteBundle {
    schema: String,
    seed: u64,
    trials: usize,
    suites: Vec<SuiteReport>,
}

fn cmd_suite(args: SuiteArgs) -> Result<u8, CliError> {
    let file = load_config(&args.common)?;
    init_workers(args.common.workers, file.workers)?;
    let which = pick(args.suite, file.suite, "all".to_string());
    let trials = pick(args.trials, file.trials, 100);
    check_bound("trials", trials as u64).map_err(CliError::input)?;
    let seed = pick(args.seed, file.seed, 0);
    let tol_override = pick_opt(args.tol, file.tol);

    let mut reports = Vec::new();
    let run_remark1 = which == "all" || which == "remark1";
    let run_n1 = which == "all" || which == "n1";
    let run_ando = which == "all" || which == "ando";
    if !(run_remark1 || run_n1 || run_ando) {
        return Err(CliError::input(format!(
            "unknown suite {which:?}; expected all, remark1, n1 or ando"
        )));
    }
    if run_remark1 {
        reports.push(verify::remark1_suite(trials, seed, tol_override.unwrap_or(REMARK1_TOL))?);
    }
    if run_n1 {
        reports.push(verify::n1_suite(trials, seed, tol_override.unwrap_or(SUITE_TOL))?);
    }
    if run_ando {
        reports.push(verify::ando_suite(trials, seed, tol_override.unwrap_or(SUITE_TOL))?);
    }

    println!("seed = {seed}");
    let mut all_passed = true;
    for report in &reports {
        println!(
            "{}: trials = {}, max_ratio = {:.12}, passed = {}",
            report.suite, report.trials, report.max_ratio, report.passed
        );
        all_passed &= report.passed;
    }
    if let Some(out) = pick_opt(args.common.out, file.out) {
        write_json(
            &out,
            &SuiteBundle {
                schema: SUITE_SCHEMA.to_string(),
                seed,
                trials,
                suites: reports,
            },
        )?;
    }
    Ok(if all_passed { 0 } else { EXIT_SUITE_FAILURE })
}

fn cmd_norm(args: NormArgs) -> Result<u8, CliError> {
    let file = load_config(&args.common)?;
    init_workers(args.common.workers, file.workers)?;
    let op = pick(args.op, file.op, "op-norm".to_string());
    let input = pick_opt(args.input, file.input)
        .ok_or_else(|| CliError::input("norm needs --input"))?;
    let grid = pick(args.grid, file.grid, DEFAULT_GRID);
    check_bound("grid", grid as u64).map_err(CliError::input)?;

    match op.as_str() {
        "op-norm" => {
            let m: ComplexMatrix = read_json(&input)?;
            let value = m.op_norm()?;
            println!("op_norm = {value:.12}");
            Ok(0)
        }
        "torus-sup" | "polydisk-sup" => {
            let poly: PolynomialJson = read_json(&input)?;
            let p = poly.to_polynomial()?;
            let result = if op == "torus-sup" {
                norms::torus_sup(&p, grid, true)?
            } else {
                norms::polydisk_sup(&p, grid)?
            };
            if let Some(out) = pick_opt(args.common.out, file.out) {
                #[derive(Serialize)]
                struct SupResultFile<'a> {
                    schema: &'a str,
                    result: &'a TorusSupResult,
                }
                write_json(
                    &out,
                    &SupResultFile {
                        schema: SUP_RESULT_SCHEMA,
                        result: &result,
                    },
                )?;
            }
            println!("best_value = {:.12}", result.best_value);
            println!("certified_upper = {:.12}", result.certified_upper);
            println!("grid_points_per_dim = {}", result.grid_points_per_dim);
            println!("grid_step = {:.12}", result.grid_step);
            println!("lipschitz_bound = {:.12}", result.lipschitz_bound);
            let angles: Vec<String> =
                result.best_point.angles.iter().map(|a| format!("{a:.12}")).collect();
            println!("best_point = [{}]", angles.join(", "));
            Ok(0)
        }
        other => Err(CliError::input(format!(
            "unknown op {other:?}; expected op-norm, torus-sup or polydisk-sup"
        ))),
    }
}
