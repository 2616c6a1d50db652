//! Context-aware sarcasm classification.
//!
//! The pipeline reads conversation threads ([`corpus`]), turns each thread into an encoder input
//! in one of three modes ([`input_builder`]), fine-tunes a bidirectional encoder with a two-class
//! head ([`encoder`]) and scores predictions ([`metrics`]).

pub mod corpus;
pub mod encoder;
pub mod error;
pub mod input_builder;
pub mod metrics;
pub mod rng;
pub mod synth;
pub mod tokenizer;

pub use corpus::{
    compute_stats, decode_label, encode_label, load_corpus, mismatch_ratio, save_corpus,
    train_val_split, Corpus, CorpusStats, DialogueRecord, Label, Normalization, Source, SplitTag,
    StatsTable,
};
pub use encoder::{
    fine_tune, predict, Checkpoint, EncoderSpec, Hyperparams, Prediction, TrainedModel,
    WeightProvider,
};
pub use error::{Error, Result};
pub use input_builder::{
    build_dataset, build_input, select_context, truncate_to_budget, EncodedExample, EncodedInput,
    InputMode, InputSettings,
};
pub use metrics::{
    confusion, relative_improvement, report_from_confusion, results_table, ConfusionMatrix,
    MetricsReport, ResultsTable, RunResult, TableAveraging,
};
pub use tokenizer::{SpecialTokens, Tokenizer, TokenizerSpec, WordTokenizer};
