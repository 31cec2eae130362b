use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use phinlab_cli::{aggregate_exit, run_batch, run_file, Options, Report, COMMANDS};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Checks and computations on filtered (phi, N)-modules.
#[derive(Parser, Debug)]
#[command(name = "phinlab", version)]
struct Cli {
    /// A command name, or `batch` to run a manifest.
    command: String,
    /// Instance file (or manifest for `batch`).
    path: PathBuf,
    /// Absolute p-adic precision, overriding the instance.
    #[arg(long)]
    precision: Option<u32>,
    /// Seed for randomized steps, overriding the instance.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for `batch`.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Include wall-clock timing in reports.
    #[arg(long)]
    timing: bool,
}

fn emit(reports: &[Report], format: Format) {
    for r in reports {
        match format {
            Format::Json => println!("{}", r.to_json()),
            Format::Text => println!("{}", r.to_text()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options {
        precision: cli.precision,
        seed: cli.seed,
        timing: cli.timing,
    };
    let reports = if cli.command == "batch" {
        match run_batch(&cli.path, cli.jobs, &opts) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("phinlab: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        }
    } else {
        if !COMMANDS.contains(&cli.command.as_str()) {
            eprintln!(
                "phinlab: unknown command {:?}; expected batch or one of {}",
                cli.command,
                COMMANDS.join(", ")
            );
            return ExitCode::from(2);
        }
        let label = cli.path.display().to_string();
        vec![run_file(Some(&cli.command), &cli.path, &label, &opts)]
    };
    for r in &reports {
        if let Some(e) = &r.error {
            eprintln!("phinlab: {}: {}", r.instance, e.message);
        }
    }
    emit(&reports, cli.format);
    ExitCode::from(aggregate_exit(&reports) as u8)
}
