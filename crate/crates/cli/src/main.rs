use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use isl_limits_cli::config::{self, parse_tier, LoadOptions};
use isl_limits_cli::error::{CliError, CliResult};
use isl_limits_cli::experiments::{print_summary, run_experiment, Experiment, RunContext};

/// Capacity and ranging bounds for hardware-limited THz inter-satellite links.
#[derive(Debug, Parser)]
#[command(name = "isl-limits", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML config merged over the tier preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root; each experiment writes to a subdirectory.
    #[arg(long, global = true, env = "ISL_LIMITS_OUT", default_value = "results")]
    out: PathBuf,
    /// Base seed for the Monte Carlo streams (default 20240601)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// baseline, low_cost, ideal or custom.
    #[arg(long, global = true)]
    tier: Option<String>,
    /// Evaluate sweep points concurrently. Output is identical either way.
    #[arg(long, global = true)]
    parallel: bool,
    /// Override one config value, e.g. `--set link.snr0_db=5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gain factors, distortion budget and saturation capacity.
    LinkBudget,
    /// Exact and Jensen capacity over input SNR.
    CapacitySweep,
    /// Ranging RMSE over input SNR.
    SensingSweep,
    /// Phase variances, rate and RMSE over pilot overhead.
    AlphaSweep,
    /// Rate against ranging RMSE and its non-dominated frontier.
    Pareto,
    /// RMSE and critical SNR against array size.
    MimoScaling,
    /// RMSE with impairments switched on one at a time.
    Ablation,
    /// Numerical and Monte Carlo cross-checks; exits 1 if any fails.
    Validate,
    /// Every experiment in turn.
    All,
    /// Run an experiment by name.
    Run { name: String },
    /// Print the resolved configuration as TOML.
    Config,
}

fn selected(cmd: &Command) -> CliResult<Vec<Experiment>> {
    Ok(match cmd {
        Command::LinkBudget => vec![Experiment::LinkBudget],
        Command::CapacitySweep => vec![Experiment::CapacitySweep],
        Command::SensingSweep => vec![Experiment::SensingSweep],
        Command::AlphaSweep => vec![Experiment::AlphaSweep],
        Command::Pareto => vec![Experiment::Pareto],
        Command::MimoScaling => vec![Experiment::MimoScaling],
        Command::Ablation => vec![Experiment::Ablation],
        Command::Validate => vec![Experiment::Validate],
        Command::All => Experiment::ALL.to_vec(),
        Command::Run { name } if name == "all" => Experiment::ALL.to_vec(),
        Command::Run { name } => vec![Experiment::parse(name)?],
        Command::Config => Vec::new(),
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let experiments = selected(&cli.command)?;
    let g = &cli.global;
    let tier = g.tier.as_deref().map(parse_tier).transpose()?;
    let cfg = config::load(&LoadOptions { path: g.config.as_deref(), tier, seed: g.seed, sets: &g.sets })?;
    if matches!(cli.command, Command::Config) {
        let text = format!("{}# config_hash = \"{}\"\n", cfg.to_toml(), cfg.hash());
        // A closed pipe (`| head`) is not an error here.
        let _ = std::io::stdout().lock().write_all(text.as_bytes());
        return Ok(());
    }
    let cx = RunContext { config: cfg, out_dir: g.out.clone(), parallel: g.parallel };
    let mut failed = 0;
    for e in experiments {
        log::info!("running {}", e.name());
        let o = run_experiment(e, &cx)?;
        print_summary(&o);
        failed += o.failed;
    }
    if failed > 0 {
        return Err(CliError::ValidationFailed { failed });
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
