use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qergo::report::report;
use qergo::run::{run, DEFAULT_OUTPUT_ROOT, OUTPUT_ROOT_ENV};
use qergo::ExperimentConfig;

#[derive(Parser)]
#[command(name = "qergo", version, about = "Quantum-ergodicity experiments on graphs and trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config.
    Run {
        config: PathBuf,
        /// Output root; the run goes to <root>/<output>.
        #[arg(long, env = OUTPUT_ROOT_ENV, default_value = DEFAULT_OUTPUT_ROOT)]
        root: PathBuf,
        /// One-shot override, e.g. `--set sweep.seeds=[1,2]`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Worker threads for the sweep (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Aggregate a run directory, or a directory of runs, into <dir>/report.
    Report { dir: PathBuf },
    /// Parse and validate a config without running it.
    Validate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> qergo::Result<()> {
    match cli.command {
        Command::Run { config, root, overrides, threads } => {
            let cfg = ExperimentConfig::from_file(&config, &overrides)?;
            if let Some(t) = threads {
                // Fails only if a pool already exists, which cannot happen here.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            let out = run(&cfg, &root)?;
            println!("{} -> {}", cfg.experiment, out.dir.display());
            for t in &out.manifest.tables {
                println!("  {} ({} rows)", t.file, t.rows);
            }
        }
        Command::Report { dir } => {
            let out = report(&dir)?;
            println!("aggregated {} run(s) into {}", out.runs.len(), out.dir.display());
        }
        Command::Validate { config, overrides } => {
            let cfg = ExperimentConfig::from_file(&config, &overrides)?;
            cfg.validate()?;
            println!("{}: ok ({}, hash {})", config.display(), cfg.experiment, cfg.short_hash());
        }
    }
    Ok(())
}
