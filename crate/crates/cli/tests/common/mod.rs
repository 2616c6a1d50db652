#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sarcasm_core::synth::separable_corpus;
use sarcasm_core::{save_corpus, Corpus, Source};

pub fn sarcasm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sarcasm"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn write_corpus(dir: &Path, name: &str, corpus: &Corpus) -> PathBuf {
    let path = dir.join(name);
    save_corpus(corpus, &path).expect("corpus written");
    path
}

pub fn synthetic(dir: &Path, name: &str, source: Source, n: usize, seed: u64) -> PathBuf {
    write_corpus(dir, name, &separable_corpus(source, n, seed))
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}
