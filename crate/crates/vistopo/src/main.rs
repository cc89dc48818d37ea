use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vistopo::config::{default_config_text, Config};
use vistopo::pipeline::{cmd_run_all, RunOptions, StageStatus};
use vistopo::stages::{self, Layout};
use vistopo::{oracle, Error, Result};

#[derive(Parser)]
#[command(name = "vistopo", version, about = "Correlation-network topology features and hybrid classification")]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set seed=3`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the planted-precision synthetic dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Build both-positive networks from time-series CSVs.
    Network {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        emit_intermediates: bool,
    },
    /// Persistence diagrams of one network JSON or a directory of them.
    Persistence {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        keep_diagonal: bool,
        #[arg(long)]
        reproducible: bool,
    },
    /// K-means descriptors of a directory of diagram JSONs.
    Features {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated classification of every class pair.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        reproducible: bool,
    },
    /// All stages with content-hash caching.
    RunAll {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        reproducible: bool,
    },
    /// Randomized persistence and partial-correlation equivalence checks.
    OracleCheck {
        #[arg(long, default_value_t = 100)]
        graphs: usize,
        #[arg(long, default_value_t = 50)]
        datasets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the annotated default configuration.
    DefaultConfig,
}

fn load_config(cli: &Cli, extra: &[String]) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply_overrides(&cli.overrides)?;
    cfg.apply_overrides(extra)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth { out } => {
            let s = load_config(cli, &[])?.settings()?;
            let files = stages::cmd_synth(&s, &Layout::new(out).data_dir())?;
            println!("wrote {} files", files.len());
        }
        Command::Network {
            input,
            out,
            emit_intermediates,
        } => {
            let extra: Vec<String> = emit_intermediates
                .then(|| "network.emit_intermediates=true".to_string())
                .into_iter()
                .collect();
            let s = load_config(cli, &extra)?.settings()?;
            let res = stages::cmd_network(&s, input, &Layout::new(out))?;
            println!("wrote {} files", res.files.len());
        }
        Command::Persistence {
            input,
            out,
            keep_diagonal,
            reproducible,
        } => {
            let extra: Vec<String> = keep_diagonal
                .then(|| "diagram.keep_diagonal=true".to_string())
                .into_iter()
                .collect();
            let s = load_config(cli, &extra)?.settings()?;
            let res = stages::cmd_persistence(&s, input, &Layout::new(out), *reproducible)?;
            println!("wrote {} files", res.files.len());
        }
        Command::Features { input, out } => {
            let s = load_config(cli, &[])?.settings()?;
            let (rows, _) = stages::cmd_features(&s, input, &Layout::new(out).features_file())?;
            println!("wrote {} feature rows", rows.len());
        }
        Command::Train {
            input,
            out,
            reproducible,
        } => {
            let s = load_config(cli, &[])?.settings()?;
            let report = stages::cmd_train(&s, input, &Layout::new(out), *reproducible)?;
            for t in &report.tasks {
                for c in &t.cells {
                    println!(
                        "{:<12} {:<8} {:<5} {:<8} accuracy {:.3} ± {:.3}",
                        t.task, c.features, c.kernel, c.protocol, c.accuracy.mean, c.accuracy.std
                    );
                }
            }
        }
        Command::RunAll {
            out,
            force,
            reproducible,
        } => {
            let cfg = load_config(cli, &[])?;
            let summary = cmd_run_all(
                &cfg,
                out,
                RunOptions {
                    force: *force,
                    reproducible: *reproducible,
                },
            )?;
            for (stage, status) in summary.stages {
                let s = match status {
                    StageStatus::Ran => "ran",
                    StageStatus::Cached => "cached",
                };
                println!("{stage:<12} {s}");
            }
        }
        Command::OracleCheck { graphs, datasets, seed } => {
            let p = oracle::persistence_suite(*graphs, *seed);
            let q = oracle::partial_suite(*datasets, *seed);
            for (name, r) in [("persistence", &p), ("partial-correlation", &q)] {
                println!("{name}: {} passed, {} failed", r.passed, r.failed());
                for f in &r.failures {
                    println!("  {f}");
                }
            }
            if !(p.ok() && q.ok()) {
                return Err(Error::Core {
                    context: "oracle-check".into(),
                    source: vistopo_core::Error::Invariant("equivalence suite failed".into()),
                });
            }
        }
        Command::DefaultConfig => print!("{}", default_config_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
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
