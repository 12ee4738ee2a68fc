use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use wavebell_cli::{CliError, Mode, OutputFormat, RunConfig};

/// Linear-optics interference statistics from a TOML run configuration.
#[derive(Parser)]
#[command(name = "wavebell", version, about)]
struct Args {
    /// Path to the run configuration (TOML).
    #[arg(long)]
    config: PathBuf,

    /// Override the configured output path.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Override the configured output format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Override the sampling seed (sample mode only).
    #[arg(long)]
    seed: Option<u64>,

    /// Suppress the summary line.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(summary) => {
            if !args.quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wavebell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<String, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(path) = &args.output {
        config.output.path = path.clone();
    }
    if let Some(format) = args.format {
        config.output.format = match format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    if let Some(seed) = args.seed {
        if config.mode != Mode::Sample {
            return Err(CliError::Config(
                "--seed only applies to sample mode".into(),
            ));
        }
        match &mut config.sample {
            Some(spec) => spec.seed = seed,
            None => {
                return Err(CliError::Config(
                    "--seed given but the config has no [sample] section".into(),
                ))
            }
        }
    }
    let outcome = wavebell_cli::run(&config)?;
    Ok(format!(
        "{} -> {}",
        outcome.summary,
        outcome.output_path.display()
    ))
}
