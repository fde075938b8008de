use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cesaro::bounds::TailBoundParams;
use cesaro::cli::{
    self, BoundTableExp, Experiment, OutputSettings, Overrides, RunConfig, RunError,
    SCHEMA_VERSION,
};

/// Monte Carlo laboratory for rates of convergence of Cesàro means.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV, JSON and manifest files.
    Run {
        config: PathBuf,
        /// Worker threads (overrides the config).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (overrides the config).
        #[arg(long, env = "CESARO_OUT_DIR")]
        out_dir: Option<PathBuf>,
        /// Seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
    /// Tabulate the Cesàro tail bound over an (n, y) grid.
    BoundTable {
        #[arg(long)]
        c0: f64,
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        c2: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        delta: f64,
        /// Comma-separated sample sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Comma-separated deviation multipliers (each >= 1).
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        #[arg(long, default_value = "bound_table")]
        name: String,
        #[arg(long, env = "CESARO_OUT_DIR")]
        out_dir: Option<PathBuf>,
    },
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(e.exit_code() as u8)
}

fn run_config(cfg: RunConfig) -> ExitCode {
    match cli::run(&cfg) {
        Ok(outcome) => {
            println!("{}", outcome.summary());
            for f in &outcome.result.flags {
                eprintln!("flag n={} {}: {}", f.n, f.statistic, f.message);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match args.command {
        Command::Run {
            config,
            workers,
            out_dir,
            seed,
        } => {
            let overrides = Overrides {
                seed,
                workers,
                out_dir,
            };
            let cfg = match cli::load_config(&config)
                .and_then(|c| cli::apply_overrides(c, &overrides).map_err(RunError::Config))
            {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            run_config(cfg)
        }
        Command::Validate { config } => match cli::load_config(&config) {
            Ok(cfg) => {
                println!("ok {}: {}", cfg.experiment.kind(), config.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::BoundTable {
            c0,
            c1,
            c2,
            beta,
            gamma,
            delta,
            n,
            y,
            name,
            out_dir,
        } => {
            let cfg = RunConfig {
                schema_version: SCHEMA_VERSION,
                seed: 0,
                monte_carlo: None,
                output: OutputSettings {
                    dir: out_dir.map(|d| d.to_string_lossy().into_owned()),
                    name,
                },
                experiment: Experiment::BoundTable(BoundTableExp {
                    params: TailBoundParams {
                        c0,
                        c1,
                        c2,
                        beta,
                        gamma,
                        delta,
                    },
                    n_grid: n,
                    y_grid: y,
                }),
            };
            if let Err(e) = cfg.validate() {
                return fail(RunError::Config(e));
            }
            run_config(cfg)
        }
    }
}
