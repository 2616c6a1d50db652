//! Writes a labeled synthetic corpus: `synthetic_corpus <out.jsonl> [records] [seed] [twitter|reddit]`.

use std::env;
use std::process::ExitCode;

use sarcasm_core::synth::separable_corpus;
use sarcasm_core::{save_corpus, Source};

fn main() -> ExitCode {
    let args: Vec<String> = env::args().skip(1).collect();
    let Some(out) = args.first() else {
        eprintln!("usage: synthetic_corpus <out.jsonl> [records] [seed] [twitter|reddit]");
        return ExitCode::from(2);
    };
    let n = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    let seed = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(42);
    let source: Source = match args.get(3).map(|s| s.parse()).transpose() {
        Ok(s) => s.unwrap_or(Source::Twitter),
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match save_corpus(&separable_corpus(source, n, seed), out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}
