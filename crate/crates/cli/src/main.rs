use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod error;
mod records;
mod render;
mod report;
mod run;

use render::Layer;

#[derive(Parser)]
#[command(name = "banditnav", version, about = "Frontier-bandit exploration episodes: run, render, report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (seed × strategy) episode and write results, maps and metrics.
    Run {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Seeds as `a..b` (half-open), `a..=b`, a single seed or a comma list.
        #[arg(long)]
        seeds: Option<String>,
        /// Comma-separated subset of ifbe1, ifbe2, closest, random.
        #[arg(long)]
        strategies: Option<String>,
        /// Maximum concurrent episodes.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Render a map layer from a `.gsmap` snapshot or an episode record.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        layer: Layer,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute metrics from a results directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            seeds,
            strategies,
            jobs,
        } => run::manifest(&config, &out, seeds.as_deref(), strategies.as_deref(), jobs).and_then(|m| run::cmd_run(&m)),
        Command::Render { input, layer, out } => render::cmd_render(&input, layer, &out),
        Command::Report { input } => report::cmd_report(&input).map(|table| print!("{table}")),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("banditnav: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
