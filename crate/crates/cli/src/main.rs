use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spinbeat_cli::config::{parse_axis, OUTPUT_ENV};
use spinbeat_cli::{
    analyze_file, compare_orders, generate_bath, parse_analysis_config, parse_config, run_pipeline,
    simulate, sweep_hf_axis, AnalysisConfig, CliError, RunConfig, RunManifest,
};

#[derive(Parser)]
#[command(
    name = "spinbeat",
    version,
    about = "Nuclear spin-bath correlations and their time-frequency structure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a bath realization and write it.
    GenerateBath {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Bath plus CCE correlation series (raw and normalized).
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Time-frequency analysis of an exported correlation series.
    Analyze {
        /// Correlation series written by `simulate` or `run`.
        #[arg(short, long)]
        input: PathBuf,
        /// Analysis keys only; defaults apply when omitted.
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
    /// Every stage, every product.
    Run {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Correlation curves for several CCE orders and their deviations.
    CompareOrders {
        #[arg(short, long)]
        config: PathBuf,
        /// Comma-separated ascending orders; overrides `orders` in the config.
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
    },
    /// The full pipeline per hyperfine axis on one fixed realization.
    SweepAxis {
        #[arg(short, long)]
        config: PathBuf,
        /// `;`-separated axes, e.g. "[111];54.7,45"; overrides `axes`.
        #[arg(long)]
        axes: Option<String>,
    },
}

fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    Ok(parse_config(&read_config(path)?)?)
}

fn execute(cmd: Command) -> Result<RunManifest, CliError> {
    match cmd {
        Command::GenerateBath { config } => generate_bath(&load_config(&config)?),
        Command::Simulate { config } => simulate(&load_config(&config)?),
        Command::Run { config } => run_pipeline(&load_config(&config)?),
        Command::Analyze { input, config } => {
            let (analysis, output, echo) = match config {
                Some(path) => parse_analysis_config(&read_config(&path)?)?,
                None => (
                    AnalysisConfig::default(),
                    PathBuf::from("spinbeat-out"),
                    Default::default(),
                ),
            };
            let output = match std::env::var_os(OUTPUT_ENV) {
                Some(dir) if !dir.is_empty() => PathBuf::from(dir),
                _ => output,
            };
            analyze_file(&analysis, echo, &output, &input)
        }
        Command::CompareOrders { config, orders } => {
            let cfg = load_config(&config)?;
            let orders = orders.unwrap_or_else(|| cfg.orders.clone());
            let (report, manifest) = compare_orders(&cfg, &orders)?;
            for r in &report.rows {
                let first = r
                    .first_exceed
                    .map_or_else(|| "-".to_string(), |t| format!("{t:.3}"));
                println!(
                    "order {}: max |dC| = {:.3e}, rms = {:.3e}, first > 0.05 at t = {first}",
                    r.order, r.max_abs, r.rms
                );
            }
            Ok(manifest)
        }
        Command::SweepAxis { config, axes } => {
            let cfg = load_config(&config)?;
            let axes = match axes {
                Some(list) => list
                    .split(';')
                    .map(|s| parse_axis(s).map_err(|e| CliError::Usage(format!("--axes: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?,
                None => cfg.axes.clone(),
            };
            sweep_hf_axis(&cfg, &axes)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(manifest) => {
            eprintln!(
                "{}: {} products written",
                manifest.command,
                manifest.products.len()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
