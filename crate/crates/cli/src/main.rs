//! Command-line pipeline driver.
//!
//! Exit codes: 0 on success, 1 when a stage fails, 2 when configuration
//! or command-line validation fails before any stage runs.

mod config;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{PipelineConfig, ValidationError};
use stages::{CleanKind, MetricsTask, StageContext};

#[derive(Parser)]
#[command(
    name = "corpusprep",
    version,
    about = "Corpus preparation and denoising-objective data synthesis"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Root seed for stochastic stages; overrides the config file.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for parallel stages; 0 or absent picks one per core.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Suppress progress reporting on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean journal articles and theses.
    CleanScientific {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Clean books.
    CleanBook {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Clean creative writings.
    CleanCreative {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Clean parliamentary transcripts.
    CleanParlamint {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Clean web text or any other source.
    CleanGeneric {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train an n-gram language model and write it in ARPA form.
    TrainLm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Attach language model scores to documents.
    ScoreDocs {
        #[arg(long)]
        input: PathBuf,
        /// ARPA model; falls back to `lm` in the config file.
        #[arg(long)]
        lm: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Drop documents scoring below a percentile of their file.
    FilterDocs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Percentile cutoff in (0, 100).
        #[arg(long)]
        pct: f64,
    },
    /// Split one source's documents into train and validation files.
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        train_output: PathBuf,
        #[arg(long)]
        validation_output: PathBuf,
    },
    /// Encode documents into token id records.
    Tokenize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Draw a weighted document mixture from the configured inputs.
    MakeMixture {
        /// Number of records to draw.
        #[arg(long)]
        count: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Synthesize denoising examples from token records.
    Denoise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score prediction/reference pairs and print a metrics report.
    Metrics {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        task: MetricsTask,
        /// Also write the JSON report to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print corpus statistics as JSON.
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the full pipeline into the output directory.
    Prepare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            if error.downcast_ref::<ValidationError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if cli.workers.is_some() {
        config.workers = cli.workers;
    }
    config.validate()?;
    let workers = config.workers.unwrap_or(0);
    let ctx = StageContext { config, quiet: cli.quiet };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    pool.install(|| dispatch(&ctx, cli.command))
}

fn dispatch(ctx: &StageContext, command: Command) -> anyhow::Result<()> {
    match command {
        Command::CleanScientific { input, output } => {
            finish(ctx, stages::run_clean(ctx, CleanKind::Scientific, &input, &output)?)
        }
        Command::CleanBook { input, output } => {
            finish(ctx, stages::run_clean(ctx, CleanKind::Book, &input, &output)?)
        }
        Command::CleanCreative { input, output } => {
            finish(ctx, stages::run_clean(ctx, CleanKind::Creative, &input, &output)?)
        }
        Command::CleanParlamint { input, output } => {
            finish(ctx, stages::run_clean(ctx, CleanKind::Parlamint, &input, &output)?)
        }
        Command::CleanGeneric { input, output } => {
            finish(ctx, stages::run_clean(ctx, CleanKind::Generic, &input, &output)?)
        }
        Command::TrainLm { input, output } => {
            finish(ctx, stages::run_train_lm(ctx, &input, &output)?)
        }
        Command::ScoreDocs { input, lm, output } => {
            let lm = lm.or_else(|| ctx.config.lm.clone()).ok_or_else(|| {
                ValidationError(
                    "a language model is required (pass --lm or set `lm` in the config)"
                        .to_string(),
                )
            })?;
            finish(ctx, stages::run_score(ctx, &input, &lm, &output)?)
        }
        Command::FilterDocs { input, output, pct } => {
            if !(pct > 0.0 && pct < 100.0) {
                return Err(ValidationError(format!(
                    "--pct must lie strictly between 0 and 100, got {pct}"
                ))
                .into());
            }
            finish(ctx, stages::run_filter(ctx, &input, &output, pct)?)
        }
        Command::Split { input, train_output, validation_output } => {
            finish(ctx, stages::run_split(ctx, &input, &train_output, &validation_output)?)
        }
        Command::Tokenize { input, output } => {
            finish(ctx, stages::run_tokenize(ctx, &input, &output)?)
        }
        Command::MakeMixture { count, output } => {
            finish(ctx, stages::run_mixture_docs(ctx, count, &output)?)
        }
        Command::Denoise { input, output } => {
            finish(ctx, stages::run_denoise(ctx, &input, &output)?)
        }
        Command::Metrics { input, task, output } => {
            stages::run_metrics(ctx, &input, task, output.as_deref())
        }
        Command::Stats { input } => stages::run_stats(&input),
        Command::Prepare => stages::run_prepare(ctx),
    }
}

/// Record a finished standalone stage in the manifest and report it.
fn finish(ctx: &StageContext, record: manifest::StageRecord) -> anyhow::Result<()> {
    manifest::append(&ctx.config.out_dir(), &record)?;
    stages::report_stage(&record, ctx.quiet);
    Ok(())
}
