use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde_json::json;

use affscale::diagnostics::{decrease_bound_check, fd_check, membership_equiv_check, q_scaling_check, CheckReport};
use affscale::driver::alpha_reduction_run;
use affscale::io::generate::DEFAULT_RADIUS;
use affscale::io::{
    export_trace, gen_central_path_sdp, gen_hp_instance, parse_hp_json, parse_sdp_start, parse_sdpa, write_hp_json,
    write_sdp_start, write_sdpa, TraceFile, TraceFormat,
};
use affscale::{
    in_swath, run, schedule_constants, smat, solve_qcp, svec, BarrierOracle, ConicProgram, DetBarrier, Error,
    HpFamily, HpInstance, RunStatus, SdpInstance, SolverConfig, StepMode,
};

#[derive(Parser)]
#[command(name = "affscale", version, about = "Affine-scaling interior-point solver for SDP and hyperbolic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an SDPA (.dat-s) or hyperbolic JSON instance.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Stopping tolerance on the gap relative to the initial gap.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, value_enum, default_value_t = StepArg::Qtilde)]
        step: StepArg,
        /// Write the iteration trace to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Start point for SDPA input; defaults to `<file>.start.json`.
        #[arg(long)]
        start: Option<PathBuf>,
    },
    /// Generate an instance whose start point lies on the central path.
    Generate {
        #[arg(value_enum)]
        kind: KindArg,
        /// Matrix order (sdp, determinant) or vector dimension (other families).
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "product")]
        family: String,
        /// Degree of the elementary symmetric family.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the shrinking-alpha schedule with fixed half-alpha steps.
    ReduceAlpha {
        file: PathBuf,
        #[arg(long)]
        alpha0: f64,
        #[arg(long)]
        target: f64,
        #[arg(long)]
        start: Option<PathBuf>,
    },
    /// Run diagnostic checks; exits 0 iff every check passes.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CheckArg::All)]
        checks: CheckArg,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long)]
        start: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StepArg {
    Qtilde,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Sdp,
    Hp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckArg {
    All,
    Fd,
    Qscale,
    Equiv,
    Bound,
}

enum Loaded {
    Sdp { instance: SdpInstance, start: DMatrix<f64> },
    Hp(HpInstance),
}

impl Loaded {
    fn oracle(&self) -> Box<dyn BarrierOracle> {
        match self {
            Loaded::Sdp { instance, .. } => Box::new(DetBarrier::new(instance.order()).expect("order is at least one")),
            Loaded::Hp(instance) => Box::new(instance.oracle()),
        }
    }

    fn program(&self) -> ConicProgram {
        match self {
            Loaded::Sdp { instance, .. } => instance.to_program(),
            Loaded::Hp(instance) => instance.program.clone(),
        }
    }

    fn start(&self) -> DVector<f64> {
        match self {
            Loaded::Sdp { start, .. } => svec(start),
            Loaded::Hp(instance) => instance.e0.clone(),
        }
    }

    fn backend(&self) -> &'static str {
        match self {
            Loaded::Sdp { .. } => "sdp",
            Loaded::Hp(instance) => instance.family.name(),
        }
    }
}

const EXIT_MAX_ITERS: u8 = 1;
const EXIT_NOT_IN_SWATH: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_INPUT: u8 = 4;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NotInSwath => EXIT_NOT_IN_SWATH,
        Error::Parse { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::InvariantViolation(_)
        | Error::DimensionMismatch { .. }
        | Error::DomainError(_)
        | Error::RetryExhausted => EXIT_INPUT,
        _ => EXIT_NUMERICAL,
    }
}

fn start_sidecar(file: &Path) -> PathBuf {
    let mut name = file.as_os_str().to_owned();
    name.push(".start.json");
    PathBuf::from(name)
}

fn load(file: &Path, start: Option<&Path>) -> affscale::Result<Loaded> {
    let text = fs::read_to_string(file)?;
    if file.extension().is_some_and(|ext| ext == "json") {
        return Ok(Loaded::Hp(parse_hp_json(&text)?));
    }
    let instance = parse_sdpa(&text)?;
    let start_path = start.map(Path::to_path_buf).unwrap_or_else(|| start_sidecar(file));
    let start_text = fs::read_to_string(&start_path).map_err(|_| Error::Parse {
        line: 0,
        msg: format!("no start point: pass --start or provide {}", start_path.display()),
    })?;
    let start = parse_sdp_start(&start_text)?;
    if start.nrows() != instance.order() {
        return Err(Error::DimensionMismatch { expected: instance.order(), found: start.nrows() });
    }
    Ok(Loaded::Sdp { instance, start })
}

fn status_code(status: RunStatus) -> u8 {
    match status {
        RunStatus::Converged => 0,
        RunStatus::MaxIters => EXIT_MAX_ITERS,
        RunStatus::NotInSwath => EXIT_NOT_IN_SWATH,
        RunStatus::NumericalFailure => EXIT_NUMERICAL,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    file: &Path,
    alpha: f64,
    tol: f64,
    max_iters: usize,
    step: StepArg,
    trace: Option<&Path>,
    format: Option<FormatArg>,
    start: Option<&Path>,
) -> affscale::Result<u8> {
    let loaded = load(file, start)?;
    let config = SolverConfig {
        alpha,
        gap_tol: tol,
        max_iters,
        step_mode: match step {
            StepArg::Qtilde => StepMode::QTildeMinimizer,
            StepArg::Fixed => StepMode::FixedHalfAlpha,
        },
        ..SolverConfig::default()
    };
    let oracle = loaded.oracle();
    let program = loaded.program();
    let result = run(oracle.as_ref(), &program, &loaded.start(), &config)?;
    let v = &result.violations;
    println!("status: {:?}", result.status);
    println!("iterations: {}", result.iterations());
    println!("initial_gap: {:e}", result.initial_gap());
    println!("final_gap: {:e}", result.final_gap);
    println!("primal_objective: {:.16e}", program.c.dot(&result.final_e));
    println!(
        "violations: primal={} dual={} ratio={} swath={} carry_over={}",
        v.primal_monotonicity, v.dual_monotonicity, v.ratio_bound, v.swath, v.dual_carry_over
    );
    if let Some(msg) = &result.message {
        println!("message: {msg}");
    }
    if let Some(path) = trace {
        let format = match format {
            Some(FormatArg::Json) => TraceFormat::Json,
            Some(FormatArg::Csv) => TraceFormat::Csv,
            None if path.extension().is_some_and(|ext| ext == "json") => TraceFormat::Json,
            None => TraceFormat::Csv,
        };
        let id = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let trace_file =
            TraceFile::new(&id, loaded.backend(), oracle.degree(), program.num_constraints(), &config, &result);
        fs::write(path, export_trace(&trace_file, format)?)?;
    }
    Ok(status_code(result.status))
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    kind: KindArg,
    n: usize,
    m: usize,
    family: &str,
    k: Option<usize>,
    mu: f64,
    seed: u64,
    out: &Path,
) -> affscale::Result<u8> {
    match kind {
        KindArg::Sdp => {
            let (instance, start) = gen_central_path_sdp(n, m, mu, seed)?;
            let metadata = json!({ "generator": "central_path_sdp", "n": n, "m": m, "mu": mu, "seed": seed });
            fs::write(out, write_sdpa(&instance)?)?;
            let sidecar = start_sidecar(out);
            fs::write(&sidecar, write_sdp_start(&start, Some(metadata))?)?;
            println!("wrote {} and {}", out.display(), sidecar.display());
        }
        KindArg::Hp => {
            let family = HpFamily::from_name(family, n, k)?;
            let instance = gen_hp_instance(family, m, mu, seed, DEFAULT_RADIUS)?;
            let metadata = json!({ "generator": "central_path_hp", "m": m, "mu": mu, "seed": seed, "radius": DEFAULT_RADIUS });
            fs::write(out, write_hp_json(&instance, Some(metadata))?)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(0)
}

fn cmd_reduce_alpha(file: &Path, alpha0: f64, target: f64, start: Option<&Path>) -> affscale::Result<u8> {
    let loaded = load(file, start)?;
    let oracle = loaded.oracle();
    let program = loaded.program();
    let outcome = alpha_reduction_run(oracle.as_ref(), &program, &loaded.start(), alpha0, target)?;
    let swath = in_swath(oracle.as_ref(), &program, &outcome.e, target)?;
    println!("iterations: {}", outcome.iterations);
    println!("bound: {}", outcome.bound);
    println!("final_alpha: {:.16e}", outcome.final_alpha);
    println!("in_swath_at_target: {swath}");
    Ok(if outcome.iterations <= outcome.bound && swath { 0 } else { EXIT_NUMERICAL })
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect()
}

fn print_report(report: &CheckReport) {
    println!(
        "{:<20} {} samples={} failures={} max_abs={:e} max_rel={:e} tol={:e}",
        report.name,
        if report.pass { "PASS" } else { "FAIL" },
        report.samples,
        report.failures,
        report.max_abs_err,
        report.max_rel_err,
        report.tolerance
    );
}

fn cmd_validate(file: &Path, checks: CheckArg, alpha: f64, start: Option<&Path>) -> affscale::Result<u8> {
    let loaded = load(file, start)?;
    let wants = |c: CheckArg| checks == CheckArg::All || checks == c;
    let mut reports = Vec::new();
    if wants(CheckArg::Fd) {
        reports.push(fd_check(loaded.oracle().as_ref(), &loaded.start(), 1e-5)?);
    }
    match &loaded {
        Loaded::Sdp { instance, start } => {
            if wants(CheckArg::Qscale) {
                reports.push(q_scaling_check(instance, start, alpha, 11)?);
            }
            if wants(CheckArg::Equiv) {
                let beta = schedule_constants(alpha, instance.order())?.beta;
                let grid = linspace(-0.5, 3.0, 71);
                reports.push(membership_equiv_check(instance, start, alpha, beta, &grid)?);
            }
            if wants(CheckArg::Bound) {
                let oracle = DetBarrier::new(instance.order())?;
                let sol = solve_qcp(&oracle, &instance.to_program(), &svec(start), alpha)?;
                let grid = linspace(0.0, alpha / sol.x_norm_e, 20);
                reports.push(decrease_bound_check(start, &smat(&sol.x_e), alpha, &grid)?);
            }
        }
        Loaded::Hp(_) => {
            if checks != CheckArg::All && checks != CheckArg::Fd {
                println!("check not available for hyperbolic instances");
                return Ok(EXIT_INPUT);
            }
        }
    }
    reports.iter().for_each(print_report);
    Ok(if reports.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn dispatch(cli: Cli) -> affscale::Result<u8> {
    match cli.command {
        Command::Solve { file, alpha, tol, max_iters, step, trace, format, start } => {
            cmd_solve(&file, alpha, tol, max_iters, step, trace.as_deref(), format, start.as_deref())
        }
        Command::Generate { kind, n, m, family, k, mu, seed, out } => {
            cmd_generate(kind, n, m, &family, k, mu, seed, &out)
        }
        Command::ReduceAlpha { file, alpha0, target, start } => {
            cmd_reduce_alpha(&file, alpha0, target, start.as_deref())
        }
        Command::Validate { file, checks, alpha, start } => cmd_validate(&file, checks, alpha, start.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
