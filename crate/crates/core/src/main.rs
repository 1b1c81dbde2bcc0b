use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;

use wcsp_bound::solver::{SolverConfig, SolverMode, Termination};
use wcsp_bound::{io as wio, oracle, solver};

const EXIT_PARSE: u8 = 3;
const EXIT_VERIFY_SCALE: u8 = 4;
const EXIT_PARTIAL: u8 = 5;

/// Computes an upper bound on the optimal value of a maximization WCSP by
/// iterative super-reparametrization.
#[derive(Parser, Debug)]
#[command(name = "wcsp-bound", version, arg_required_else_help = true)]
struct Args {
    /// Instance file: native format or benchmark cost-function-network format
    input: PathBuf,

    /// Consistency level driving the improvement
    #[arg(long, value_parser = parse_mode, default_value = "vsac-sr")]
    mode: SolverMode,

    /// Initial activity threshold ("auto" derives it from the instance)
    #[arg(long, default_value = "auto")]
    theta_init: String,

    #[arg(long, default_value_t = 10.0)]
    theta_factor: f64,

    #[arg(long, default_value_t = 1e-6)]
    theta_min: f64,

    #[arg(long, default_value_t = 20)]
    stall_window: usize,

    #[arg(long, default_value_t = 1e-15)]
    stall_eps: f64,

    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,

    /// Wall-clock limit in seconds; a partial bound is still printed
    #[arg(long)]
    time_limit_s: Option<f64>,

    /// Write per-iteration records (k, bound, theta, alpha, cert_nnz, elapsed)
    #[arg(long)]
    log_csv: Option<PathBuf>,

    /// Cross-check the result against the exhaustive oracle (desk scale only)
    #[arg(long)]
    verify: bool,
}

fn parse_mode(s: &str) -> Result<SolverMode, String> {
    match s {
        "vac" => Ok(SolverMode::Vac),
        "vsac-sr" => Ok(SolverMode::VsacSr),
        "vcc-sr" => Ok(SolverMode::VccSr),
        other => Err(format!("unknown mode '{other}' (expected vac, vsac-sr or vcc-sr)")),
    }
}

/// Formats with 12 significant digits, plain decimal notation.
fn format_bound(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        return "-inf".into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).clamp(0, 17) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn write_csv(path: &PathBuf, report: &solver::SolverReport) -> anyhow::Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "k,bound,theta,alpha,cert_nnz,elapsed_s")?;
    for rec in &report.iterations {
        writeln!(
            file,
            "{},{},{},{},{},{}",
            rec.iteration,
            rec.bound,
            rec.theta,
            rec.step_size,
            rec.certificate_nnz,
            rec.elapsed.as_secs_f64()
        )?;
    }
    Ok(())
}

fn run(args: Args) -> anyhow::Result<u8> {
    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.input.display());
            return Ok(EXIT_PARSE);
        }
    };
    let (structure, weights) = match wio::parse_any(&text) {
        Ok(parsed) => parsed,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_PARSE);
        }
    };

    let mut cfg = SolverConfig::new(args.mode);
    cfg.theta_init = match args.theta_init.as_str() {
        "auto" => None,
        s => Some(s.parse::<f64>().map_err(|_| anyhow::anyhow!("bad --theta-init '{s}'"))?),
    };
    cfg.theta_factor = args.theta_factor;
    cfg.theta_min = args.theta_min;
    cfg.stall_window = args.stall_window;
    cfg.stall_epsilon = args.stall_eps;
    cfg.max_iterations = args.max_iters;
    cfg.time_limit = args.time_limit_s.map(Duration::from_secs_f64);

    let report = solver::solve(&structure, &weights, &cfg)?;

    if let Some(path) = &args.log_csv {
        write_csv(path, &report)?;
    }

    println!("{}", format_bound(report.final_bound));

    if args.verify {
        match verify(&structure, &weights, &report, args.mode) {
            Ok(()) => eprintln!("verify: ok"),
            Err(wcsp_bound::Error::ScaleExceeded { assignments, cap }) => {
                eprintln!("verify: refused, {assignments} assignments exceed the oracle cap {cap}");
                return Ok(EXIT_VERIFY_SCALE);
            }
            Err(e) => anyhow::bail!("verification failed: {e}"),
        }
    }

    Ok(match report.termination {
        Termination::IterationLimit | Termination::TimeLimit => EXIT_PARTIAL,
        _ => 0,
    })
}

fn verify(
    structure: &wcsp_bound::WcspStructure,
    g: &wcsp_bound::WeightVector,
    report: &solver::SolverReport,
    mode: SolverMode,
) -> wcsp_bound::Result<()> {
    if report.termination == Termination::Infeasible {
        let (opt, _) = oracle::brute_force_optimum(structure, g)?;
        if opt != f64::NEG_INFINITY {
            return Err(wcsp_bound::Error::Invalid(format!(
                "solver reported infeasible but the optimum is {opt}"
            )));
        }
        return Ok(());
    }
    let (opt, _) = oracle::brute_force_optimum(structure, g)?;
    if report.final_bound < opt - 1e-9 {
        return Err(wcsp_bound::Error::Invalid(format!(
            "bound {} undercuts the optimum {opt}",
            report.final_bound
        )));
    }
    if !oracle::is_superreparametrization(structure, &report.final_weights, g)? {
        return Err(wcsp_bound::Error::Invalid(
            "final weights are not a super-reparametrization of the input".into(),
        ));
    }
    if mode == SolverMode::Vac && !oracle::is_reparametrization(structure, &report.final_weights, g)? {
        return Err(wcsp_bound::Error::Invalid(
            "VAC output is not a reparametrization of the input".into(),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
