//! Synthetic conversation corpora for smoke tests, benchmarks and demos.
//!
//! Every generated word is in the [`WordTokenizer`](crate::tokenizer::WordTokenizer)
//! vocabulary. Sarcastic responses always carry a word from [`SARCASM_CUES`] and never one from
//! [`PLAIN_CUES`], and vice versa, so the label is a function of the response text.

use crate::corpus::{Corpus, DialogueRecord, Label, Source, SplitTag};
use crate::rng::SplitMix64;

pub const SARCASM_CUES: &[&str] = &[
    "totally",
    "fantastic",
    "wonderful",
    "amazing",
    "brilliant",
    "perfect",
    "awesome",
    "obviously",
    "clearly",
    "literally",
    "surely",
    "wow",
];

pub const PLAIN_CUES: &[&str] = &[
    "thanks", "sorry", "please", "okay", "agree", "glad", "true", "honestly", "helpful", "fine",
    "nope", "well",
];

const TOPIC: &[&str] = &[
    "the", "game", "exam", "traffic", "weather", "monday", "meeting", "phone", "battery", "coffee",
    "team", "boss", "homework", "update", "bus", "movie", "rain", "coach", "news", "price", "was",
    "is", "this", "my", "our", "today", "again", "work", "class", "wifi",
];

fn pick<'a>(rng: &mut SplitMix64, words: &[&'a str]) -> &'a str {
    words[rng.below(words.len())]
}

/// `len` words drawn uniformly from `words`, joined by spaces.
pub fn random_text(rng: &mut SplitMix64, words: &[&str], len: usize) -> String {
    (0..len)
        .map(|_| pick(rng, words))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Balanced labeled corpus of `n` records (even indices sarcastic) with 0 to 4 context turns.
pub fn separable_corpus(source: Source, n: usize, seed: u64) -> Corpus {
    let mut rng = SplitMix64::new(seed);
    let plain: Vec<&str> = PLAIN_CUES
        .iter()
        .copied()
        .filter(|w| crate::tokenizer::WORDS.contains(w))
        .collect();
    let records = (0..n)
        .map(|i| {
            let label = if i % 2 == 0 {
                Label::Sarcasm
            } else {
                Label::NotSarcasm
            };
            let depth = rng.below(5);
            let context = (0..depth)
                .map(|_| {
                    let len = 3 + rng.below(6);
                    random_text(&mut rng, TOPIC, len)
                })
                .collect();
            let cues: &[&str] = match label {
                Label::Sarcasm => SARCASM_CUES,
                Label::NotSarcasm => &plain,
            };
            let mut words: Vec<&str> = (0..2 + rng.below(5))
                .map(|_| pick(&mut rng, TOPIC))
                .collect();
            for _ in 0..1 + rng.below(2) {
                let at = rng.below(words.len() + 1);
                words.insert(at, pick(&mut rng, cues));
            }
            DialogueRecord {
                id: format!("{}-{}", source.as_str(), i + 1),
                source,
                context,
                response: words.join(" "),
                label: Some(label),
            }
        })
        .collect();
    Corpus::new(source, SplitTag::Unsplit, records).expect("generated records are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::{WordTokenizer, WORDS};

    #[test]
    fn cue_words_are_in_vocabulary() {
        let tok = WordTokenizer::new();
        for w in SARCASM_CUES.iter().chain(TOPIC) {
            assert!(tok.is_known(w), "{w}");
        }
        let known_plain = PLAIN_CUES.iter().filter(|w| WORDS.contains(w)).count();
        assert!(known_plain >= 8);
    }

    #[test]
    fn labels_are_balanced_and_determined_by_response() {
        let c = separable_corpus(Source::Reddit, 40, 1);
        assert_eq!(c.len(), 40);
        let sarcastic = c
            .records()
            .iter()
            .filter(|r| r.label == Some(Label::Sarcasm))
            .count();
        assert_eq!(sarcastic, 20);
        for r in c.records() {
            let has_cue = r.response.split(' ').any(|w| SARCASM_CUES.contains(&w));
            assert_eq!(has_cue, r.label == Some(Label::Sarcasm), "{}", r.response);
        }
    }

    #[test]
    fn generation_is_seeded() {
        let a = separable_corpus(Source::Twitter, 10, 5);
        let b = separable_corpus(Source::Twitter, 10, 5);
        let c = separable_corpus(Source::Twitter, 10, 6);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
