mod common;

use std::fs;

use common::{s, sarcasm, stderr, stdout, synthetic, write_corpus};
use sarcasm_cli::commands::{INPUT_DUMP, METRICS, VALIDATION_METRICS};
use sarcasm_core::synth::separable_corpus;
use sarcasm_core::{Corpus, DialogueRecord, Label, Source, SplitTag};

fn with_depths(source: Source, depths: &[usize]) -> Corpus {
    let records = depths
        .iter()
        .enumerate()
        .map(|(i, &d)| DialogueRecord {
            id: format!("c{i}"),
            source,
            context: (0..d).map(|t| format!("turn {t}")).collect(),
            response: "oh great".into(),
            label: Some(if i % 2 == 0 {
                Label::Sarcasm
            } else {
                Label::NotSarcasm
            }),
        })
        .collect();
    Corpus::new(source, SplitTag::Unsplit, records).unwrap()
}

#[test]
fn stats_reports_average_depth() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_corpus(
        dir.path(),
        "c.jsonl",
        &with_depths(Source::Twitter, &[2, 3, 4]),
    );
    let out = sarcasm(&["stats", &format!("twitter/train={}", s(&path))]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("3 records, avg contexts 3.000"), "{text}");
    assert!(text.contains("SARCASM 2, NOT_SARCASM 1"), "{text}");
}

#[test]
fn stats_reports_mismatch_between_two_corpora() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_corpus(
        dir.path(),
        "a.jsonl",
        &with_depths(Source::Twitter, &[2, 2, 2, 2]),
    );
    let b = write_corpus(
        dir.path(),
        "b.jsonl",
        &with_depths(Source::Reddit, &[3, 4, 3, 4, 3, 4, 3, 4]),
    );
    let out = sarcasm(&[
        "stats",
        &format!("twitter/train={}", s(&a)),
        &format!("reddit/train={}", s(&b)),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("mismatch ratio: 1.750 (reddit train has more context)"));
}

#[test]
fn stats_on_empty_file_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    fs::write(&path, "").unwrap();
    let out = sarcasm(&["stats", s(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("0 records"));
}

#[test]
fn exit_codes_separate_config_data_and_runtime() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"response\": \"ok\", \"context\": []}\nnot json\n").unwrap();
    assert_eq!(sarcasm(&["stats", s(&bad)]).status.code(), Some(3));

    let missing = dir.path().join("nope.jsonl");
    assert_eq!(
        sarcasm(&["train", "--corpus", s(&missing)]).status.code(),
        Some(2)
    );
    assert_eq!(
        sarcasm(&["train", "--mode", "separated"]).status.code(),
        Some(2)
    );

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "mode = \"context\"\n").unwrap();
    assert_eq!(
        sarcasm(&["train", "--config", s(&cfg)]).status.code(),
        Some(2)
    );

    let broken = dir.path().join("ckpt");
    fs::create_dir(&broken).unwrap();
    fs::write(
        broken.join("manifest.json"),
        "{\"format\": \"other\", \"version\": 1, \"encoder_id\": \"tiny-test\"}",
    )
    .unwrap();
    let corpus = synthetic(dir.path(), "c.jsonl", Source::Twitter, 4, 1);
    let out = sarcasm(&[
        "predict",
        "--checkpoint",
        s(&broken),
        "--corpus",
        s(&corpus),
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn train_writes_checkpoint_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), "train.jsonl", Source::Twitter, 32, 3);
    let runs = dir.path().join("runs");
    let out = sarcasm(&[
        "train",
        "--corpus",
        s(&corpus),
        "--output-dir",
        s(&runs),
        "--mode",
        "context_response_separated",
        "--epochs",
        "2",
        "--lr",
        "0.001",
        "--dump-inputs",
        "10",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).matches("epoch ").count(), 2);
    let ckpt = runs.join("twitter_context_response_separated");
    for f in [
        "manifest.json",
        "head.json",
        "history.json",
        "encoder.safetensors",
        VALIDATION_METRICS,
    ] {
        assert!(ckpt.join(f).exists(), "{f}");
    }
    let history: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(ckpt.join("history.json")).unwrap()).unwrap();
    assert_eq!(history.len(), 2);

    let records = separable_corpus(Source::Twitter, 32, 3);
    let dump = fs::read_to_string(ckpt.join(INPUT_DUMP)).unwrap();
    let lines: Vec<&str> = dump.lines().collect();
    assert_eq!(lines.len(), 10);
    for (line, r) in lines.iter().zip(records.records()) {
        let expected = usize::from(!r.context.is_empty());
        assert_eq!(line.matches("<sep>").count(), expected, "{line}");
        assert!(line.starts_with(&format!("{}\t<s> ", r.id)));
        assert!(line.ends_with(" </s>"));
    }
}

#[test]
fn predict_then_score_matches_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), "train.jsonl", Source::Reddit, 24, 5);
    let runs = dir.path().join("runs");
    let common = [
        "--corpus",
        s(&corpus),
        "--source",
        "reddit",
        "--output-dir",
        s(&runs),
        "--mode",
        "response_only",
    ];
    let train = sarcasm(&[&["train", "--epochs", "1", "--lr", "0.001"], &common[..]].concat());
    assert!(train.status.success(), "{}", stderr(&train));
    let ckpt = runs.join("reddit_response_only");

    let preds = dir.path().join("preds.csv");
    let out = sarcasm(
        &[
            &["predict", "--checkpoint", s(&ckpt), "--out", s(&preds)],
            &common[..],
        ]
        .concat(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&preds).unwrap();
    assert_eq!(text.lines().count(), 24);
    for (line, i) in text.lines().zip(1..) {
        let (id, label) = line.split_once(',').unwrap();
        assert_eq!(id, format!("reddit-{i}"));
        assert!(label == "SARCASM" || label == "NOT_SARCASM");
    }

    let eval = sarcasm(
        &[
            &[
                "evaluate",
                "--checkpoint",
                s(&ckpt),
                "--predictions",
                s(&preds),
            ],
            &common[..],
        ]
        .concat(),
    );
    assert!(eval.status.success(), "{}", stderr(&eval));
    let metrics = fs::read_to_string(runs.join(METRICS)).unwrap();
    let rows: Vec<serde_json::Value> = metrics
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn predict_on_unlabeled_records() {
    let dir = tempfile::tempdir().unwrap();
    let train = synthetic(dir.path(), "train.jsonl", Source::Twitter, 16, 8);
    let runs = dir.path().join("runs");
    let out = sarcasm(&[
        "train",
        "--corpus",
        s(&train),
        "--output-dir",
        s(&runs),
        "--epochs",
        "1",
        "--mode",
        "context_response",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let unlabeled = dir.path().join("test.jsonl");
    let lines: String = (0..5)
        .map(|i| format!("{{\"id\": \"t{i}\", \"context\": [\"how was the game\"], \"response\": \"wow what a game\"}}\n"))
        .collect();
    fs::write(&unlabeled, lines).unwrap();
    let ckpt = runs.join("twitter_context_response");
    let out = sarcasm(&[
        "predict",
        "--checkpoint",
        s(&ckpt),
        "--corpus",
        s(&unlabeled),
        "--output-dir",
        s(&runs),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let preds = fs::read_to_string(runs.join("predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 5);

    let out = sarcasm(&[
        "evaluate",
        "--checkpoint",
        s(&ckpt),
        "--corpus",
        s(&unlabeled),
        "--output-dir",
        s(&runs),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn evaluate_single_record() {
    let dir = tempfile::tempdir().unwrap();
    let train = synthetic(dir.path(), "train.jsonl", Source::Twitter, 16, 2);
    let runs = dir.path().join("runs");
    let out = sarcasm(&[
        "train",
        "--corpus",
        s(&train),
        "--output-dir",
        s(&runs),
        "--epochs",
        "1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let one = synthetic(dir.path(), "one.jsonl", Source::Twitter, 1, 4);
    let ckpt = runs.join("twitter_context_response_separated");
    let out = sarcasm(&[
        "evaluate",
        "--checkpoint",
        s(&ckpt),
        "--corpus",
        s(&one),
        "--output-dir",
        s(&runs),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let row: serde_json::Value =
        serde_json::from_str(fs::read_to_string(runs.join(METRICS)).unwrap().trim()).unwrap();
    for key in [
        "precision_1",
        "recall_1",
        "f1_1",
        "precision_0",
        "recall_0",
        "f1_0",
    ] {
        let v = row[key].as_f64().unwrap();
        assert!(v == 0.0 || v == 1.0, "{key} = {v}");
    }
}

#[test]
fn config_file_is_honoured_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), "train.jsonl", Source::Twitter, 16, 6);
    let runs = dir.path().join("runs");
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        format!(
            "corpora = [{:?}]\noutput_dir = {:?}\nmode = \"response_only\"\n\n[hyperparams]\nepochs = 3\nlearning_rate = 1e-3\n",
            s(&corpus),
            s(&runs)
        ),
    )
    .unwrap();
    let out = sarcasm(&["train", "--config", s(&cfg), "--epochs", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).matches("epoch ").count(), 1);
    let hp: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(runs.join("twitter_response_only/hyperparams.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(hp["epochs"], 1);
    assert_eq!(hp["learning_rate"], 1e-3);
}
