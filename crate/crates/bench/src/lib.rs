//! Shared fixtures for the criterion benchmarks.

use sarcasm_core::synth::separable_corpus;
use sarcasm_core::{
    build_dataset, Corpus, EncodedExample, Hyperparams, InputMode, Source, WordTokenizer,
};

pub fn corpus(n: usize) -> Corpus {
    separable_corpus(Source::Twitter, n, 42)
}

pub fn dataset(n: usize, mode: InputMode) -> Vec<EncodedExample> {
    build_dataset(
        &corpus(n),
        mode,
        &WordTokenizer::new(),
        &Hyperparams::default(),
        2,
    )
    .expect("synthetic records encode")
}
