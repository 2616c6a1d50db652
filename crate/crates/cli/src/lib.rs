//! `sarcasm` command-line driver: corpus statistics, training, evaluation and prediction.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime error.

pub mod commands;
pub mod config;

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use sarcasm_core::{InputMode, Normalization, Source, TableAveraging};

use crate::commands::CorpusArg;
use crate::config::{ExperimentConfig, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }

    pub(crate) fn context(self, what: impl Display) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{what}: {m}")),
            CliError::Runtime(m) => CliError::Runtime(format!("{what}: {m}")),
        }
    }
}

impl From<sarcasm_core::Error> for CliError {
    fn from(e: sarcasm_core::Error) -> Self {
        use sarcasm_core::Error as E;
        match e {
            E::Io { .. } => CliError::Data(e.to_string()),
            E::Invalid(_) | E::UnknownEncoder(_) | E::BudgetTooSmall { .. } => {
                CliError::Config(e.to_string())
            }
            e if e.is_data_error() => CliError::Data(e.to_string()),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

fn parse_with<T>(s: &str) -> Result<T, String>
where
    T: FromStr,
    T::Err: Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "sarcasm",
    version,
    about = "Context-aware sarcasm classification"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// TOML experiment configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// response_only, context_response or context_response_separated.
    #[arg(long, global = true, value_parser = parse_with::<InputMode>)]
    pub mode: Option<InputMode>,
    /// tiny-test or roberta-large.
    #[arg(long, global = true)]
    pub encoder: Option<String>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub max_seq_len_response: Option<usize>,
    #[arg(long, global = true)]
    pub max_seq_len_context: Option<usize>,
    #[arg(long, global = true)]
    pub context_turns: Option<usize>,
    #[arg(long, global = true)]
    pub lr: Option<f64>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
    /// Write decoded model inputs for the first N records.
    #[arg(long, global = true, value_name = "N")]
    pub dump_inputs: Option<usize>,
    /// Corpus file (JSONL). Repeatable.
    #[arg(long, global = true)]
    pub corpus: Vec<PathBuf>,
    /// twitter or reddit.
    #[arg(long, global = true, value_parser = parse_with::<Source>)]
    pub source: Option<Source>,
    /// none or tweet.
    #[arg(long, global = true, value_parser = parse_with::<Normalization>)]
    pub normalization: Option<Normalization>,
    /// Directory holding pretrained model.safetensors.
    #[arg(long, global = true)]
    pub weights_dir: Option<PathBuf>,
    /// tokenizer.json matching the pretrained weights.
    #[arg(long, global = true)]
    pub tokenizer: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Record counts, average context depth and label balance.
    Stats {
        /// Corpora as [SOURCE[/SPLIT]=]PATH; defaults to the configured corpora.
        corpora: Vec<String>,
        /// Print one JSON object per corpus instead of the table.
        #[arg(long)]
        jsonl: bool,
    },
    /// Split the corpus, fine-tune and write a checkpoint.
    Train,
    /// Score checkpoints (and optionally a prediction file) against a labeled corpus.
    Evaluate {
        #[arg(long = "checkpoint", value_name = "DIR")]
        checkpoints: Vec<PathBuf>,
        /// Prediction file of id,LABEL lines to score as well.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Show sarcastic-class metrics instead of macro averages.
        #[arg(long)]
        positive_class: bool,
    },
    /// Label every record of a corpus.
    Predict {
        #[arg(long, value_name = "DIR")]
        checkpoint: PathBuf,
        /// Output file; defaults to predictions.csv in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            source: self.source,
            corpora: self.corpus.clone(),
            mode: self.mode,
            encoder_id: self.encoder.clone(),
            output_dir: self.output_dir.clone(),
            normalization: self.normalization,
            context_turns: self.context_turns,
            dump_inputs: self.dump_inputs,
            weights_dir: self.weights_dir.clone(),
            tokenizer_path: self.tokenizer.clone(),
            seed: self.seed,
            learning_rate: self.lr,
            epochs: self.epochs,
            batch_size: self.batch_size,
            max_seq_len_response: self.max_seq_len_response,
            max_seq_len_context: self.max_seq_len_context,
        }
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(self.overrides());
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = cli.global.resolve()?;
    match &cli.command {
        Command::Stats { corpora, jsonl } => {
            let operands = if corpora.is_empty() {
                cfg.corpora
                    .iter()
                    .map(|p| CorpusArg {
                        source: cfg.source,
                        split: sarcasm_core::SplitTag::Unsplit,
                        path: p.clone(),
                    })
                    .collect()
            } else {
                corpora
                    .iter()
                    .map(|a| CorpusArg::parse(a, cfg.source))
                    .collect::<Result<Vec<_>, _>>()?
            };
            commands::stats(&cfg, &operands, *jsonl, out)
        }
        Command::Train => commands::train(&cfg, out).map(|_| ()),
        Command::Evaluate {
            checkpoints,
            predictions,
            positive_class,
        } => {
            let avg = if *positive_class {
                TableAveraging::PositiveClass
            } else {
                TableAveraging::Macro
            };
            commands::evaluate(&cfg, checkpoints, predictions.as_deref(), avg, out).map(|_| ())
        }
        Command::Predict {
            checkpoint,
            out: dest,
        } => commands::predict_file(&cfg, checkpoint, dest.as_deref(), out).map(|_| ()),
    }
}
