use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdelab_cli::{load, run_experiment, write_artifact, CliError, ConfigError, ExperimentKind, Overrides};

#[derive(Parser)]
#[command(name = "sdelab", version, about = "Run discretization experiments and write CSV tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Negative steps of schemes that may leave the domain.
    Negstats(Common),
    /// Error along a single Brownian path.
    Pathwise(Common),
    /// Strong error curves and fitted orders.
    Converge(Common),
    /// Monte Carlo estimates over a range of step sizes.
    Explode(Common),
    /// Multilevel estimates, costs and rmsq errors.
    Mlmc(Common),
    /// Reference prices.
    Price(Common),
    /// Parameter diagnostics.
    Validate(Common),
    /// Print the built-in config of an experiment.
    Defaults { experiment: String },
}

#[derive(Args)]
struct Common {
    /// Config file; built-in defaults are used without one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overrides `out` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. Only affects wall time.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(kind: ExperimentKind, args: Common) -> Result<PathBuf, CliError> {
    let text = match &args.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(ConfigError::single(None, format!("{}: {e}", path.display())))
        })?),
        None => None,
    };
    let overrides = Overrides {
        seed: args.seed,
        out: args.out,
    };
    let plan = load(kind, text.as_deref(), &overrides)?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config(ConfigError::single(None, "--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let artifact = run_experiment(&plan)?;
    write_artifact(&plan, &artifact)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Negstats(a) => (ExperimentKind::Negstats, a),
        Command::Pathwise(a) => (ExperimentKind::Pathwise, a),
        Command::Converge(a) => (ExperimentKind::Converge, a),
        Command::Explode(a) => (ExperimentKind::Explode, a),
        Command::Mlmc(a) => (ExperimentKind::Mlmc, a),
        Command::Price(a) => (ExperimentKind::Price, a),
        Command::Validate(a) => (ExperimentKind::Validate, a),
        Command::Defaults { experiment } => {
            return match experiment.parse::<ExperimentKind>() {
                Ok(k) => {
                    print!("{}", sdelab_cli::default_config_text(k).trim_start());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            };
        }
    };
    match execute(kind, args) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            for line in e.to_string().lines() {
                eprintln!("error: {line}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
