use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsense::runner::{configure_threads_from_env, list_experiments, run_experiment, validate_config, ExperimentConfig};
use qsense::Error;

/// Batch runner for the qsense experiment registry.
#[derive(Parser)]
#[command(name = "qsense", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the registry and parameter schemas as JSON.
    List,
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, Error> {
    validate_config(&std::fs::read_to_string(path)?)
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) | Error::Parse(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::List => {
            println!("{}", serde_json::to_string_pretty(&list_experiments()).expect("listing serializes"));
            Ok(())
        }
        Command::Validate { config } => load(&config).map(|c| println!("ok: {} ({} trials, seed {})", c.experiment, c.trials, c.seed)),
        Command::Run { config, seed, out } => load(&config).and_then(|mut c| {
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(o) = out {
                c.output_dir = o;
            }
            let r = run_experiment(&c)?;
            println!("{} finished in {:.2} s -> {}", c.experiment, r.wall_clock_s, r.output_dir.display());
            for f in &r.files {
                println!("  {f}");
            }
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
