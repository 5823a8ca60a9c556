use std::path::PathBuf;
use std::process::ExitCode;

use bvpkit::pipeline::{self, Context, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bvpkit",
    version,
    about = "BVP windowing, GAF encoding, stationarity, ANOVA and CNN sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Omit timestamps from generated plots.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Cut sessions into windows and write window archives.
    Segment,
    /// Encode windows as Gramian angular field images.
    Encode,
    /// ADF and KPSS per condition.
    Stationarity,
    /// Variance tests and one-way ANOVA on questionnaire scores.
    Anova,
    /// Train one model per window spec and variant.
    TrainSweep,
    /// Run every step on the synthetic corpus.
    Demo,
}

fn run(cli: &Cli) -> bvpkit::Result<pipeline::Outcome> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    let ctx = Context::new(config, &cli.out, cli.deterministic);
    let mut outcome = match cli.command {
        Command::Segment => pipeline::cmd_segment(&ctx),
        Command::Encode => pipeline::cmd_encode(&ctx),
        Command::Stationarity => pipeline::cmd_stationarity(&ctx),
        Command::Anova => pipeline::cmd_anova(&ctx),
        Command::TrainSweep => pipeline::cmd_train_sweep(&ctx),
        Command::Demo => pipeline::cmd_demo(&ctx),
    }?;
    outcome.write_error_manifest(&cli.out)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for line in &outcome.messages {
                println!("{line}");
            }
            if outcome.row_errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                for e in &outcome.row_errors {
                    eprintln!("error: {} {}: {}", e.command, e.item, e.message);
                }
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
