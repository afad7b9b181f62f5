use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use compass_cli::fit::{fit_file, write_fit, FitKind, FitOptions};
use compass_cli::run::{run_echo, run_sweep, RunOutcome};
use compass_cli::validate::{run_validation, ValidateOptions};
use compass_cli::{CliError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "compass", version, about = "Central-qubit decoherence in a compass-chain environment")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Run config (TOML); defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "COMPASS_THREADS", value_name = "K")]
    threads: Option<usize>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long, global = true)]
    gnuplot_script: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// |F_14(t)| for one parameter point.
    Echo,
    /// Echo and correlation measures over one or two [[sweep]] axes.
    Sweep,
    /// Power-law or Gaussian fit over a sweep CSV or a points CSV.
    Fit {
        #[arg(long, value_name = "CSV")]
        input: PathBuf,
        /// power-law or gaussian.
        #[arg(long)]
        kind: FitKind,
        /// Abscissa range `lo,hi` (Δ for power-law, T_r for gaussian).
        #[arg(long, value_name = "LO,HI", value_parser = parse_window)]
        window: Option<(f64, f64)>,
        /// J_o used for Δ = |J_e - J_o| when the CSV has no j_odd column.
        #[arg(long = "j-o", default_value_t = 1.0)]
        j_odd: f64,
        /// Moving-average width applied before locating T_r.
        #[arg(long, default_value_t = 1)]
        smoothing: usize,
    },
    /// Engine against the dense oracle at N <= 8.
    Validate {
        #[arg(long, hide = true)]
        corrupt_propagator_sign: bool,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad number `{lo}`"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad number `{hi}`"))?;
    if lo > hi {
        return Err(format!("empty window {lo},{hi}"));
    }
    Ok((lo, hi))
}

fn load_config(global: &Global) -> Result<RunConfig, CliError> {
    match &global.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn report(outcome: &RunOutcome) {
    for w in &outcome.warnings {
        eprintln!("note: {w}");
    }
    for f in &outcome.files {
        println!("{}", outcome.path(f).display());
    }
    println!("{}", outcome.manifest.display());
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let global = &cli.global;
    match cli.command {
        Command::Echo => {
            let config = load_config(global)?;
            report(&run_echo(&config, global.out.as_deref(), global.gnuplot_script)?);
        }
        Command::Sweep => {
            let config = load_config(global)?;
            report(&run_sweep(&config, global.out.as_deref(), global.gnuplot_script)?);
        }
        Command::Fit {
            input,
            kind,
            window,
            j_odd,
            smoothing,
        } => {
            let options = FitOptions {
                kind,
                window,
                j_odd,
                smoothing,
            };
            let fit = fit_file(&input, &options)?;
            if fit.skipped > 0 {
                eprintln!("note: {} grid points with zero EoF at T_r skipped", fit.skipped);
            }
            println!("{}", serde_json::to_string_pretty(&fit)?);
            if let Some(dir) = &global.out {
                eprintln!("wrote {}", write_fit(&fit, dir, &input, &options)?.display());
            }
        }
        Command::Validate {
            corrupt_propagator_sign,
        } => {
            let result = run_validation(&ValidateOptions {
                corrupt_propagator_sign,
            });
            println!("{result}");
            if !result.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.global.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| run(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
