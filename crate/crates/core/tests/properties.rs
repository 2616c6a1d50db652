use std::collections::BTreeSet;

use proptest::prelude::*;
use sarcasm_core::corpus::{parse_corpus, train_size, write_corpus};
use sarcasm_core::metrics::{confusion, score};
use sarcasm_core::tokenizer::WORDS;
use sarcasm_core::{
    build_input, compute_stats, mismatch_ratio, relative_improvement, select_context,
    train_val_split, Corpus, DialogueRecord, InputMode, Label, Source, SplitTag, Tokenizer,
    WordTokenizer,
};

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(WORDS).prop_map(str::to_string)
}

fn sentence(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..=max).prop_map(|w| w.join(" "))
}

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::Sarcasm), Just(Label::NotSarcasm)]
}

fn record_parts() -> impl Strategy<Value = (Vec<String>, String, Option<Label>)> {
    (
        prop::collection::vec(sentence(12), 0..6),
        sentence(20),
        prop::option::of(label()),
    )
}

fn corpus_of(parts: Vec<(Vec<String>, String, Option<Label>)>) -> Corpus {
    let records = parts
        .into_iter()
        .enumerate()
        .map(|(i, (context, response, label))| DialogueRecord {
            id: format!("r{i}"),
            source: Source::Reddit,
            context,
            response,
            label,
        })
        .collect();
    Corpus::new(Source::Reddit, SplitTag::Unsplit, records).unwrap()
}

fn labeled(corpus: Corpus) -> Corpus {
    let records = corpus
        .records()
        .iter()
        .cloned()
        .map(|mut r| {
            r.label.get_or_insert(Label::Sarcasm);
            r
        })
        .collect();
    Corpus::new(corpus.source(), corpus.split(), records).unwrap()
}

fn free_text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 éü漢字😀,.!?\"\\\\]{1,30}".prop_filter("non-blank", |s| !s.trim().is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corpus_round_trips_through_jsonl(
        parts in prop::collection::vec(
            (prop::collection::vec(free_text(), 0..4), free_text(), prop::option::of(label())),
            0..12,
        )
    ) {
        let corpus = corpus_of(parts);
        let mut buf = Vec::new();
        write_corpus(&corpus, &mut buf).unwrap();
        let back = parse_corpus(buf.as_slice(), Source::Reddit).unwrap();
        prop_assert_eq!(back.records(), corpus.records());
    }

    #[test]
    fn stats_match_direct_fold(parts in prop::collection::vec(record_parts(), 0..40)) {
        let corpus = corpus_of(parts);
        let stats = compute_stats(&corpus);
        prop_assert_eq!(stats.record_count, corpus.len());
        let turns: usize = corpus.records().iter().map(|r| r.context.len()).sum();
        if corpus.is_empty() {
            prop_assert_eq!(stats.avg_contexts_per_record, 0.0);
        } else {
            prop_assert!((stats.avg_contexts_per_record - turns as f64 / corpus.len() as f64).abs() < 1e-12);
        }
        let labeled_count: usize = stats.label_counts.values().sum();
        prop_assert_eq!(labeled_count, corpus.records().iter().filter(|r| r.label.is_some()).count());
    }

    #[test]
    fn split_partitions_records(
        parts in prop::collection::vec(record_parts(), 1..60),
        ratio in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let corpus = labeled(corpus_of(parts));
        let (train, val) = train_val_split(&corpus, ratio, seed).unwrap();
        prop_assert_eq!(train.len(), train_size(corpus.len(), ratio));
        prop_assert_eq!(train.len() + val.len(), corpus.len());
        let a: BTreeSet<_> = train.records().iter().map(|r| r.id.clone()).collect();
        let b: BTreeSet<_> = val.records().iter().map(|r| r.id.clone()).collect();
        prop_assert!(a.is_disjoint(&b));
        prop_assert_eq!(a.len() + b.len(), corpus.len());
        let (train2, val2) = train_val_split(&corpus, ratio, seed).unwrap();
        prop_assert_eq!(train2.records(), train.records());
        prop_assert_eq!(val2.records(), val.records());
    }

    #[test]
    fn mismatch_ratio_is_symmetric(
        a in prop::collection::vec(record_parts(), 1..20),
        b in prop::collection::vec(record_parts(), 1..20),
    ) {
        let (sa, sb) = (compute_stats(&corpus_of(a)), compute_stats(&corpus_of(b)));
        if sa.avg_contexts_per_record > 0.0 && sb.avg_contexts_per_record > 0.0 {
            let ab = mismatch_ratio(&sa, &sb).unwrap();
            let ba = mismatch_ratio(&sb, &sa).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 1.0);
        } else {
            prop_assert!(mismatch_ratio(&sa, &sb).is_err());
        }
    }

    #[test]
    fn inputs_fit_budget_and_are_deterministic(
        (context, response, _) in record_parts(),
        budget in 8usize..80,
        turns in 0usize..4,
    ) {
        let tok = WordTokenizer::new();
        let sp = tok.special_tokens();
        let record = DialogueRecord {
            id: "x".into(), source: Source::Twitter, context, response, label: None,
        };
        for mode in InputMode::ALL {
            let input = build_input(&record, mode, &tok, budget, turns).unwrap();
            prop_assert_eq!(input.token_ids.len(), budget);
            prop_assert_eq!(input.attention_mask.len(), budget);
            let real = input.real_len();
            prop_assert!(real <= budget);
            prop_assert!(input.attention_mask[..real].iter().all(|&m| m == 1));
            prop_assert!(input.attention_mask[real..].iter().all(|&m| m == 0));
            prop_assert!(input.token_ids[real..].iter().all(|&t| t == sp.pad));
            prop_assert_eq!(input.token_ids[0], sp.bos);
            prop_assert_eq!(input.token_ids[real - 1], sp.eos);
            prop_assert_eq!(&build_input(&record, mode, &tok, budget, turns).unwrap(), &input);
        }
    }

    #[test]
    fn response_only_ignores_context(
        (context, response, _) in record_parts(),
        other in prop::collection::vec(sentence(12), 0..6),
        budget in 8usize..80,
    ) {
        let tok = WordTokenizer::new();
        let mk = |context: Vec<String>| DialogueRecord {
            id: "x".into(), source: Source::Reddit, context, response: response.clone(), label: None,
        };
        let a = build_input(&mk(context), InputMode::ResponseOnly, &tok, budget, 2).unwrap();
        let b = build_input(&mk(other), InputMode::ResponseOnly, &tok, budget, 2).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn separator_costs_one_token(
        context in prop::collection::vec(sentence(6), 1..4),
        response in sentence(10),
    ) {
        let tok = WordTokenizer::new();
        let record = DialogueRecord {
            id: "x".into(), source: Source::Reddit, context, response, label: None,
        };
        let joint = build_input(&record, InputMode::ContextResponse, &tok, 256, 2).unwrap();
        let sep = build_input(&record, InputMode::ContextResponseSeparated, &tok, 256, 2).unwrap();
        prop_assert_eq!(sep.real_len(), joint.real_len() + 1);
        let n_ctx = tok.encode(&select_context(&record, 2).join(" ")).len();
        let mut without = sep.real_tokens().to_vec();
        without.remove(1 + n_ctx);
        prop_assert_eq!(without.as_slice(), joint.real_tokens());
    }

    #[test]
    fn swapping_labels_swaps_class_metrics(
        pairs in prop::collection::vec((0u8..2, 0u8..2), 1..200),
    ) {
        let (p, g): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let (cm, r) = score(&p, &g).unwrap();
        let flip = |v: &[u8]| v.iter().map(|x| 1 - x).collect::<Vec<_>>();
        let (cm2, s) = score(&flip(&p), &flip(&g)).unwrap();
        prop_assert_eq!((cm.tp, cm.fp, cm.fn_, cm.tn), (cm2.tn, cm2.fn_, cm2.fp, cm2.tp));
        prop_assert_eq!(r.precision_1, s.precision_0);
        prop_assert_eq!(r.recall_1, s.recall_0);
        prop_assert_eq!(r.f1_1, s.f1_0);
        prop_assert!((r.macro_f1 - s.macro_f1).abs() < 1e-15);
        for v in [r.precision_1, r.recall_1, r.f1_1, r.precision_0, r.recall_0, r.f1_0, r.macro_f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(r.f1_1 <= r.precision_1.max(r.recall_1) + 1e-15);
        prop_assert!(r.f1_1 >= r.precision_1.min(r.recall_1) - 1e-15);
        prop_assert_eq!(confusion(&p, &g).unwrap().total(), p.len());
    }

    #[test]
    fn relative_improvement_inverts(b in 0.01f64..1.0, i in 0.0f64..1.0) {
        let pct = relative_improvement(b, i).unwrap();
        prop_assert!((b * (1.0 + pct / 100.0) - i).abs() < 1e-12);
        prop_assert_eq!(pct > 0.0, i > b);
    }
}
