//! `clickbait`: ingest, explore, train, cross-validate and apply clickbait
//! headline classifiers.
//!
//! Exit status: 0 success, 2 configuration error, 3 data error, 4 runtime
//! error.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::ModelKind;
use config::{Needs, Overrides, RunConfig};
use error::CliError;
use output::RunOutput;

#[derive(Debug, Parser)]
#[command(name = "clickbait", version, about = "Indonesian clickbait headline classification")]
struct Cli {
    /// TOML run configuration. Flags below override its values.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Base seed: sampling s, shuffling s+1, initialization s+2.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cross-validation folds.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Token sequence length including [CLS] and [SEP].
    #[arg(long, global = true)]
    max_len: Option<usize>,
    /// Training epochs for the head.
    #[arg(long, global = true)]
    epochs: Option<usize>,
    /// ONNX encoder path or `hash:<width>:<seed>`.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Embedding cache directory.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Where artifacts and the manifest go.
    #[arg(long, short, global = true)]
    output_dir: Option<PathBuf>,
    /// Training dataset.
    #[arg(long, global = true)]
    train: Option<PathBuf>,
    /// Holdout dataset.
    #[arg(long, global = true)]
    holdout: Option<PathBuf>,
    /// WordPiece vocabulary.
    #[arg(long, global = true)]
    vocab: Option<PathBuf>,
    /// Training data schema: `clickid-json` or `simple-csv`.
    #[arg(long, global = true)]
    schema: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load, filter by rater agreement and balance the training data.
    Ingest,
    /// Word frequency tables per class.
    Eda,
    /// Fit a model on the whole working set.
    Train {
        #[arg(long, value_enum, default_value_t = ModelKind::Head)]
        model: ModelKind,
    },
    /// Stratified k-fold cross-validation.
    Crossval {
        #[arg(long, value_enum, default_value_t = ModelKind::Head)]
        model: ModelKind,
    },
    /// Score headlines with a model written by `train`.
    Predict {
        /// Output directory of a `train` run.
        #[arg(long)]
        model_dir: PathBuf,
        /// Headlines: one per line, or a CSV with a `title` column.
        #[arg(long)]
        input: PathBuf,
    },
    /// Cross-validate the head and the TF-IDF baseline on shared folds.
    Compare,
    /// Fit on the working set and score the holdout.
    EvaluateHoldout {
        #[arg(long, value_enum, default_value_t = ModelKind::Head)]
        model: ModelKind,
    },
    /// Write a synthetic corpus and matching vocabulary.
    Synth {
        #[arg(long, default_value_t = 1000)]
        size: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Eda => "eda",
            Command::Train { .. } => "train",
            Command::Crossval { .. } => "crossval",
            Command::Predict { .. } => "predict",
            Command::Compare => "compare",
            Command::EvaluateHoldout { .. } => "evaluate-holdout",
            Command::Synth { .. } => "synth",
        }
    }

    fn needs(&self) -> Needs {
        match self {
            Command::Predict { .. } | Command::Synth { .. } => Needs::default(),
            Command::EvaluateHoldout { .. } => Needs { train: true, holdout: true },
            _ => Needs { train: true, holdout: false },
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply(&Overrides {
        seed: cli.seed,
        k: cli.k,
        max_len: cli.max_len,
        epochs: cli.epochs,
        backend: cli.backend,
        cache_dir: cli.cache_dir,
        output_dir: cli.output_dir,
        train: cli.train,
        holdout: cli.holdout,
        vocab: cli.vocab,
        schema: cli.schema,
    });
    cfg.validate(cli.command.needs())?;

    let mut out = RunOutput::create(&cfg.output_dir)?;
    let finished = match &cli.command {
        Command::Ingest => commands::ingest(&cfg, &mut out),
        Command::Eda => commands::eda(&cfg, &mut out),
        Command::Train { model } => commands::train(&cfg, &mut out, *model),
        Command::Crossval { model } => commands::crossval(&cfg, &mut out, *model),
        Command::Predict { model_dir, input } => commands::predict(&cfg, &mut out, model_dir, input),
        Command::Compare => commands::compare(&cfg, &mut out),
        Command::EvaluateHoldout { model } => commands::evaluate_holdout_cmd(&cfg, &mut out, *model),
        Command::Synth { size } => commands::synth(&cfg, &mut out, *size),
    };
    match finished {
        Ok(f) => {
            let manifest = out.finish(cli.command.name(), f.config, f.seeds, f.results)?;
            log::info!("{} artifacts in {} ({:.2}s)", manifest.artifacts.len(), cfg.output_dir.display(), manifest.wall_seconds);
            Ok(())
        }
        Err(e) => {
            out.abort();
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("clickbait: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
