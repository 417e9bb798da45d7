use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use illusion_lab::harness::{
    render_results, run_experiment, ExperimentConfig, ExperimentKind, OutputFormat,
};
use illusion_lab::Error;

/// Run one experiment from a TOML config and write a tidy results CSV.
#[derive(Parser)]
#[command(name = "illusion-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conditional variance and per-predictor reduction for equicorrelated predictors.
    VarianceCurves(RunArgs),
    /// Flat-maximum lower bounds against Monte Carlo weight draws.
    FlatMax(RunArgs),
    /// Cost of naive versus corrected thresholds under design-label noise.
    LabelNoise(RunArgs),
    /// Test error against model complexity over random half/half splits.
    DiminishingReturns(RunArgs),
    /// Fixed classifiers scored batch by batch on a drifting stream.
    DriftReplay(RunArgs),
    /// Proportion of the default-to-best error gap a simple method captures.
    Proportion(RunArgs),
    /// Classifier rankings under several performance metrics.
    RankDisagreement(RunArgs),
    /// Parse and check a config without running it.
    ValidateConfig(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Results file; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print nothing but errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    quiet: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Ingestion { .. } | Error::UnsupportedClasses { .. } => 3,
        _ => 1,
    }
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if cfg.kind != kind {
        return Err(Error::Config(format!(
            "{} describes a {} experiment, not {kind}",
            args.config.display(),
            cfg.kind
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
        cfg.validate()?;
    }
    let table = run_experiment(&cfg)?;
    let bytes = render_results(&table, OutputFormat::Csv)?;
    let dest = args
        .out
        .or_else(|| cfg.output.as_ref().map(|p| cfg.resolve(p)));
    match &dest {
        Some(path) => std::fs::write(path, &bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    if !args.quiet {
        let to = dest.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
        eprintln!(
            "{kind}: {} records, seed {}, written to {to}",
            table.records.len(),
            cfg.seed
        );
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), Error> {
    let cfg = ExperimentConfig::from_file(&args.config)?;
    if !args.quiet {
        println!(
            "{}: valid {} config (sha256 {})",
            args.config.display(),
            cfg.kind,
            cfg.content_hash()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::VarianceCurves(a) => run(ExperimentKind::VarianceCurves, a),
        Command::FlatMax(a) => run(ExperimentKind::FlatMax, a),
        Command::LabelNoise(a) => run(ExperimentKind::LabelNoise, a),
        Command::DiminishingReturns(a) => run(ExperimentKind::DiminishingReturns, a),
        Command::DriftReplay(a) => run(ExperimentKind::DriftReplay, a),
        Command::Proportion(a) => run(ExperimentKind::Proportion, a),
        Command::RankDisagreement(a) => run(ExperimentKind::RankDisagreement, a),
        Command::ValidateConfig(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("illusion-lab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
