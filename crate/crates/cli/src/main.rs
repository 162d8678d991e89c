use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use beergame_core::exec::Execution;
use beergame_core::experiment::{
    read_tables, run_batch_with, run_single, write_outputs, ExperimentConfig, SEED_ENV,
};
use beergame_core::record::to_csv_string;
use beergame_core::table::{render, TableFormat};
use beergame_core::GameConfig;
use beergame_server::Registry;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "beergame",
    version,
    about = "Beer Game simulator and session host"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one all-agent game and print its week records as CSV.
    Simulate {
        /// Game config (TOML). Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// RNG seed; overrides BEERGAME_SEED and the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a grouped experiment and write its tables.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run replications one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Re-render the tables of a finished experiment.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "text")]
        format: TableFormat,
    },
    /// Host live sessions over HTTP and WebSocket.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Config used for sessions created without one.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory for session event logs; sessions found here are restored.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(raw) => {
            Ok(Some(raw.trim().parse().with_context(|| {
                format!("{SEED_ENV}=`{raw}` is not a u64 seed")
            })?))
        }
        Err(_) => Ok(None),
    }
}

fn load_game(path: Option<&Path>) -> Result<GameConfig> {
    match path {
        None => Ok(GameConfig::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            GameConfig::from_toml_str(&text).with_context(|| format!("loading {}", p.display()))
        }
    }
}

fn simulate(config: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let mut game = load_game(config.as_deref())?;
    if let Some(s) = seed.or(env_seed()?) {
        game.rng_seed = s;
    }
    let outcome = run_single(&game)?;
    print!("{}", to_csv_string(&outcome.records));
    eprintln!(
        "seed {}: chain total cost {}, average order STD {:.2}",
        game.rng_seed, outcome.summary.chain_total_cost, outcome.summary.avg_order_std
    );
    Ok(())
}

fn experiment(config: PathBuf, out: Option<PathBuf>, sequential: bool) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(&config)?;
    cfg.apply_seed_env()?;
    let dir = out
        .or_else(|| cfg.output.dir.clone())
        .context("no output directory: pass --out or set [output] dir")?;
    let execution = if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let outcome = run_batch_with(&cfg, execution)?;
    let written = write_outputs(&outcome, &dir)?;
    print!("{}", render(&outcome.labeled_tables(), TableFormat::Text));
    for (b, cmp) in outcome.groups.iter().skip(1).zip(&outcome.comparisons) {
        let a = &outcome.groups[0];
        match cmp.percent_difference {
            Some(p) => println!(
                "{} vs {}: total cost {:.0} vs {:.0} ({p:+.1}%), avg order STD {:.2} vs {:.2}",
                a.label,
                b.label,
                cmp.a_total_cost,
                cmp.b_total_cost,
                cmp.a_avg_order_std,
                cmp.b_avg_order_std
            ),
            None => println!(
                "{} vs {}: group {} has zero cost",
                a.label, b.label, a.label
            ),
        }
    }
    eprintln!("{} week advances; wrote", outcome.week_advances);
    for path in written {
        eprintln!("  {}", path.display());
    }
    Ok(())
}

fn report(input: PathBuf, format: TableFormat) -> Result<()> {
    let tables = read_tables(&input)?;
    if tables.is_empty() {
        bail!("{} holds no tables", input.display());
    }
    print!("{}", render(&tables, format));
    Ok(())
}

fn serve(port: u16, config: Option<PathBuf>, host: String, log_dir: Option<PathBuf>) -> Result<()> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .init();
    let default_config = load_game(config.as_deref())?;
    let registry = match log_dir {
        Some(dir) => {
            let (registry, skipped) = Registry::restore(default_config, dir.clone())
                .with_context(|| format!("restoring sessions from {}", dir.display()))?;
            eprintln!(
                "restored {} session(s) from {}",
                registry.len(),
                dir.display()
            );
            for s in skipped {
                eprintln!("skipped {s}");
            }
            registry
        }
        None => Registry::new(default_config, None),
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host.as_str(), port))
            .await
            .with_context(|| format!("binding {host}:{port}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        beergame_server::serve(listener, Arc::new(registry)).await?;
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, seed } => simulate(config, seed),
        Command::Experiment {
            config,
            out,
            sequential,
        } => experiment(config, out, sequential),
        Command::Report { input, format } => report(input, format),
        Command::Serve {
            port,
            config,
            host,
            log_dir,
        } => serve(port, config, host, log_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
