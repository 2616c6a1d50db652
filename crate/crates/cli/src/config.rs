//! Experiment configuration: a TOML file whose values command-line flags override.
//!
//! ```toml
//! source = "twitter"                      # twitter | reddit
//! corpora = ["data/twitter_train.jsonl"]  # train, evaluate and predict read the first entry
//! mode = "context_response_separated"     # response_only | context_response | context_response_separated
//! encoder_id = "tiny-test"                # tiny-test | roberta-large
//! output_dir = "runs/twitter"
//! normalization = "none"                  # none | tweet
//! context_turns = 2
//! dump_inputs = 0
//! # weights_dir = "models/roberta-large"  # directory holding model.safetensors
//! # tokenizer_path = "models/roberta-large/tokenizer.json"
//!
//! [hyperparams]
//! learning_rate = 1e-5
//! epochs = 3
//! max_seq_len_response = 50
//! max_seq_len_context = 256
//! split_ratio = 0.9
//! seed = 42
//! batch_size = 16
//! ```
//!
//! Every key is optional. Relative paths are resolved against the working directory.

use std::fs;
use std::path::{Path, PathBuf};

use sarcasm_core::encoder::{SafetensorsDir, SeededInit, ROBERTA_LARGE, TINY_TEST};
use sarcasm_core::input_builder::DEFAULT_CONTEXT_TURNS;
use sarcasm_core::{
    EncoderSpec, Hyperparams, InputMode, Normalization, Source, TokenizerSpec, WeightProvider,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: Source,
    pub corpora: Vec<PathBuf>,
    pub mode: InputMode,
    pub encoder_id: String,
    pub output_dir: PathBuf,
    pub normalization: Normalization,
    pub context_turns: usize,
    pub dump_inputs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tokenizer_path: Option<PathBuf>,
    pub hyperparams: Hyperparams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: Source::Twitter,
            corpora: Vec::new(),
            mode: InputMode::ContextResponseSeparated,
            encoder_id: TINY_TEST.to_string(),
            output_dir: PathBuf::from("runs"),
            normalization: Normalization::None,
            context_turns: DEFAULT_CONTEXT_TURNS,
            dump_inputs: 0,
            weights_dir: None,
            tokenizer_path: None,
            hyperparams: Hyperparams::default(),
        }
    }
}

/// Values given on the command line. `None` leaves the file (or default) value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub source: Option<Source>,
    pub corpora: Vec<PathBuf>,
    pub mode: Option<InputMode>,
    pub encoder_id: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub normalization: Option<Normalization>,
    pub context_turns: Option<usize>,
    pub dump_inputs: Option<usize>,
    pub weights_dir: Option<PathBuf>,
    pub tokenizer_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub max_seq_len_response: Option<usize>,
    pub max_seq_len_context: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: Overrides) {
        set(&mut self.source, o.source);
        if !o.corpora.is_empty() {
            self.corpora = o.corpora;
        }
        set(&mut self.mode, o.mode);
        set(&mut self.encoder_id, o.encoder_id);
        set(&mut self.output_dir, o.output_dir);
        set(&mut self.normalization, o.normalization);
        set(&mut self.context_turns, o.context_turns);
        set(&mut self.dump_inputs, o.dump_inputs);
        if o.weights_dir.is_some() {
            self.weights_dir = o.weights_dir;
        }
        if o.tokenizer_path.is_some() {
            self.tokenizer_path = o.tokenizer_path;
        }
        let hp = &mut self.hyperparams;
        set(&mut hp.seed, o.seed);
        set(&mut hp.learning_rate, o.learning_rate);
        set(&mut hp.epochs, o.epochs);
        set(&mut hp.batch_size, o.batch_size);
        set(&mut hp.max_seq_len_response, o.max_seq_len_response);
        set(&mut hp.max_seq_len_context, o.max_seq_len_context);
    }

    /// Checks everything that can be checked without reading data.
    pub fn validate(&self) -> Result<(), CliError> {
        self.hyperparams
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.encoder_spec()?;
        let paths = self
            .corpora
            .iter()
            .chain(&self.weights_dir)
            .chain(&self.tokenizer_path);
        for p in paths {
            if !p.exists() {
                return Err(CliError::Config(format!("{} does not exist", p.display())));
            }
        }
        if self.encoder_id == ROBERTA_LARGE
            && (self.weights_dir.is_none() || self.tokenizer_path.is_none())
        {
            return Err(CliError::Config(format!(
                "{ROBERTA_LARGE} needs weights_dir and tokenizer_path"
            )));
        }
        Ok(())
    }

    pub fn encoder_spec(&self) -> Result<EncoderSpec, CliError> {
        EncoderSpec::by_id(&self.encoder_id).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn tokenizer_spec(&self) -> TokenizerSpec {
        match &self.tokenizer_path {
            Some(path) => TokenizerSpec::HuggingFace { path: path.clone() },
            None => TokenizerSpec::Word,
        }
    }

    pub fn weight_provider(&self) -> Box<dyn WeightProvider> {
        match &self.weights_dir {
            Some(dir) => Box::new(SafetensorsDir { dir: dir.clone() }),
            None => Box::new(SeededInit {
                seed: self.hyperparams.seed,
            }),
        }
    }

    pub fn primary_corpus(&self) -> Result<&Path, CliError> {
        self.corpora
            .first()
            .map(PathBuf::as_path)
            .ok_or_else(|| CliError::Config("no corpus given (use --corpus or corpora)".into()))
    }
}
