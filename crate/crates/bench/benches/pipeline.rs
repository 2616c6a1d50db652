use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sarcasm_bench::{corpus, dataset};
use sarcasm_core::encoder::{pooled_features, SeededInit};
use sarcasm_core::metrics::score;
use sarcasm_core::{
    build_dataset, build_input, EncoderSpec, Hyperparams, InputMode, Tokenizer, WeightProvider,
    WordTokenizer,
};

fn tokenize(c: &mut Criterion) {
    let tok = WordTokenizer::new();
    let text = "oh great , another monday meeting about the meeting we had on friday ... totally fantastic";
    c.bench_function("tokenize/sentence", |b| {
        b.iter(|| tok.encode(black_box(text)))
    });
}

fn inputs(c: &mut Criterion) {
    let tok = WordTokenizer::new();
    let records = corpus(200);
    let hp = Hyperparams::default();
    let mut group = c.benchmark_group("build_input");
    for mode in InputMode::ALL {
        let budget = hp.budget_for(mode);
        group.bench_with_input(BenchmarkId::from_parameter(mode), &mode, |b, &mode| {
            b.iter(|| {
                for r in records.records() {
                    black_box(build_input(r, mode, &tok, budget, 2).unwrap());
                }
            })
        });
    }
    group.finish();
    c.bench_function("build_dataset/200", |b| {
        b.iter(|| {
            build_dataset(&records, InputMode::ContextResponseSeparated, &tok, &hp, 2).unwrap()
        })
    });
}

fn metrics(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let preds: Vec<u8> = (0..10_000).map(|_| rng.random_range(0..2)).collect();
    let gold: Vec<u8> = (0..10_000).map(|_| rng.random_range(0..2)).collect();
    c.bench_function("metrics/score_10k", |b| {
        b.iter(|| score(black_box(&preds), black_box(&gold)).unwrap())
    });
}

fn forward(c: &mut Criterion) {
    let spec = EncoderSpec::tiny_test();
    let weights = SeededInit { seed: 1 }.load(&spec).unwrap();
    let data = dataset(16, InputMode::ContextResponseSeparated);
    c.bench_function("encoder/tiny_forward_16", |b| {
        b.iter(|| pooled_features(&spec, &weights, black_box(&data)).unwrap())
    });
}

criterion_group!(benches, tokenize, inputs, metrics, forward);
criterion_main!(benches);
