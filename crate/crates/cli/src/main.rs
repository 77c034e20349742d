//! `evident`: evidence between model spaces with bootstrap intervals.
//!
//! Exit status is 0 on success, 2 for malformed input or configuration and 3
//! when the statistics fail (too many rejected resamples, degenerate samples).

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{AnalyzeConfig, LpConfig, ProfileConfig, RatioSweepConfig, RunConfig, SecurityConfig, SimulateConfig};
use error::{CliError, CliResult};
use output::{write_text, Report};

#[derive(Parser, Debug)]
#[command(name = "evident", version, about = "Evidence between model spaces with global and local bootstrap intervals")]
struct Cli {
    /// Cap on worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct OutputArgs {
    /// JSON report path; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// CSV table path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evidence for a reference against an alternative covariate set in a CSV file.
    Analyze {
        #[command(flatten)]
        cfg: AnalyzeConfig,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Coverage of global and local intervals for topology cases.
    Simulate {
        #[command(flatten)]
        cfg: SimulateConfig,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Local to global interval length ratios across sample sizes.
    RatioSweep {
        #[command(flatten)]
        cfg: RatioSweepConfig,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Security category proportions for the regression presets.
    Security {
        #[command(flatten)]
        cfg: SecurityConfig,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Lincoln-Petersen abundance with bootstrap intervals.
    Lp {
        #[command(flatten)]
        cfg: LpConfig,
        #[command(flatten)]
        out: OutputArgs,
        /// CSV path for the smoothed sampling densities.
        #[arg(long)]
        grid_csv: Option<PathBuf>,
    },
    /// Plain and simulation-adjusted profile log-likelihoods.
    Profile {
        #[command(flatten)]
        cfg: ProfileConfig,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Rerun the configuration embedded in an earlier JSON report.
    Replay {
        /// Report to replay.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        grid_csv: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let report: serde_json::Value = serde_json::from_str(&text)?;
    let cfg = report.get("config").cloned().unwrap_or(report);
    Ok(serde_json::from_value(cfg)?)
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let (cfg, out, grid_csv) = match cli.command {
        Command::Analyze { cfg, out } => (RunConfig::Analyze(cfg), out, None),
        Command::Simulate { cfg, out } => (RunConfig::Simulate(cfg), out, None),
        Command::RatioSweep { cfg, out } => (RunConfig::RatioSweep(cfg), out, None),
        Command::Security { cfg, out } => (RunConfig::Security(cfg), out, None),
        Command::Lp { cfg, out, grid_csv } => (RunConfig::Lp(cfg), out, grid_csv),
        Command::Profile { cfg, out } => (RunConfig::Profile(cfg), out, None),
        Command::Replay { config, out, grid_csv } => (load_config(&config)?, out, grid_csv),
    };
    let outcome = commands::run(&cfg)?;
    let report: &Report = &outcome.report;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    write_text(out.output.as_deref(), &report.to_json()?)?;
    if let Some(p) = &out.csv {
        outcome.table.write(p)?;
    }
    if let (Some(p), Some(g)) = (&grid_csv, &outcome.grid) {
        g.write(p)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
