//! Tokenizers behind a common handle.
//!
//! [`WordTokenizer`] is the small deterministic tokenizer used by the tiny test encoder.
//! [`HfTokenizer`] wraps a `tokenizer.json` file (for example the byte-level BPE vocabulary of a
//! production encoder).

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ids of the framing, separator and padding tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialTokens {
    pub bos: u32,
    pub eos: u32,
    pub sep: u32,
    pub pad: u32,
}

impl SpecialTokens {
    /// Begin, end and padding ids must be pairwise distinct, and the separator must differ from
    /// begin and padding. The separator may coincide with the end token, which is how
    /// RoBERTa-style vocabularies mark segment boundaries.
    pub fn validate(&self, vocab_size: usize) -> Result<()> {
        let ids = [self.bos, self.eos, self.sep, self.pad];
        if let Some(&bad) = ids.iter().find(|&&id| id as usize >= vocab_size) {
            return Err(Error::VocabularyMismatch {
                token: bad,
                vocab: vocab_size,
            });
        }
        let distinct = self.bos != self.eos
            && self.bos != self.pad
            && self.eos != self.pad
            && self.sep != self.bos
            && self.sep != self.pad;
        if !distinct {
            return Err(Error::Tokenizer(format!(
                "special token ids are not distinct: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn is_framing_or_pad(&self, id: u32) -> bool {
        id == self.bos || id == self.eos || id == self.pad
    }
}

pub trait Tokenizer: Send + Sync {
    fn vocab_size(&self) -> usize;
    fn special_tokens(&self) -> SpecialTokens;
    /// Content tokens only; no framing tokens are added.
    fn encode(&self, text: &str) -> Vec<u32>;
    fn decode(&self, ids: &[u32]) -> String;
    /// Enough information to rebuild the same tokenizer in another process.
    fn descriptor(&self) -> TokenizerSpec;
}

/// Serializable description of a tokenizer, stored alongside checkpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TokenizerSpec {
    Word,
    HuggingFace { path: PathBuf },
}

impl TokenizerSpec {
    pub fn build(&self) -> Result<Arc<dyn Tokenizer>> {
        Ok(match self {
            TokenizerSpec::Word => Arc::new(WordTokenizer::new()),
            TokenizerSpec::HuggingFace { path } => Arc::new(HfTokenizer::from_file(path)?),
        })
    }
}

const SPECIALS: [&str; 4] = ["<s>", "<pad>", "</s>", "<sep>"];

/// Fixed in-vocabulary words of the [`WordTokenizer`], in id order after the specials.
pub const WORDS: &[&str] = &[
    "the",
    "a",
    "an",
    "and",
    "or",
    "but",
    "so",
    "if",
    "then",
    "than",
    "that",
    "this",
    "these",
    "those",
    "it",
    "its",
    "i",
    "you",
    "he",
    "she",
    "we",
    "they",
    "me",
    "him",
    "her",
    "us",
    "them",
    "my",
    "your",
    "our",
    "their",
    "is",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "am",
    "do",
    "does",
    "did",
    "done",
    "have",
    "has",
    "had",
    "will",
    "would",
    "can",
    "could",
    "should",
    "may",
    "might",
    "must",
    "shall",
    "not",
    "no",
    "yes",
    "very",
    "really",
    "just",
    "only",
    "also",
    "too",
    "even",
    "still",
    "already",
    "again",
    "never",
    "always",
    "ever",
    "often",
    "sometimes",
    "what",
    "which",
    "who",
    "whom",
    "whose",
    "when",
    "where",
    "why",
    "how",
    "all",
    "any",
    "some",
    "each",
    "every",
    "both",
    "few",
    "many",
    "much",
    "more",
    "most",
    "other",
    "such",
    "of",
    "in",
    "on",
    "at",
    "by",
    "for",
    "with",
    "about",
    "against",
    "between",
    "into",
    "through",
    "during",
    "before",
    "after",
    "above",
    "below",
    "to",
    "from",
    "up",
    "down",
    "out",
    "off",
    "over",
    "under",
    "oh",
    "wow",
    "great",
    "sure",
    "totally",
    "love",
    "loved",
    "lovely",
    "fantastic",
    "wonderful",
    "amazing",
    "brilliant",
    "perfect",
    "awesome",
    "nice",
    "fine",
    "good",
    "best",
    "better",
    "bad",
    "worse",
    "worst",
    "terrible",
    "awful",
    "horrible",
    "boring",
    "sad",
    "angry",
    "tired",
    "happy",
    "glad",
    "thanks",
    "thank",
    "please",
    "sorry",
    "day",
    "days",
    "night",
    "morning",
    "week",
    "weekend",
    "monday",
    "tuesday",
    "friday",
    "today",
    "tomorrow",
    "yesterday",
    "time",
    "year",
    "years",
    "hour",
    "minute",
    "work",
    "job",
    "boss",
    "meeting",
    "office",
    "school",
    "class",
    "exam",
    "test",
    "homework",
    "teacher",
    "student",
    "lesson",
    "game",
    "team",
    "player",
    "match",
    "win",
    "won",
    "lose",
    "lost",
    "score",
    "season",
    "coach",
    "fan",
    "fans",
    "phone",
    "computer",
    "internet",
    "email",
    "app",
    "update",
    "battery",
    "wifi",
    "screen",
    "laptop",
    "food",
    "coffee",
    "tea",
    "pizza",
    "lunch",
    "dinner",
    "breakfast",
    "cake",
    "water",
    "beer",
    "rain",
    "weather",
    "sun",
    "snow",
    "cold",
    "hot",
    "traffic",
    "bus",
    "train",
    "car",
    "road",
    "people",
    "person",
    "man",
    "woman",
    "friend",
    "friends",
    "family",
    "mom",
    "dad",
    "kid",
    "kids",
    "baby",
    "dog",
    "cat",
    "news",
    "story",
    "book",
    "movie",
    "show",
    "song",
    "music",
    "video",
    "picture",
    "post",
    "comment",
    "thread",
    "reply",
    "government",
    "politics",
    "president",
    "vote",
    "election",
    "law",
    "tax",
    "money",
    "price",
    "cost",
    "bank",
    "think",
    "know",
    "feel",
    "say",
    "said",
    "tell",
    "told",
    "see",
    "saw",
    "look",
    "want",
    "need",
    "like",
    "make",
    "made",
    "go",
    "went",
    "get",
    "got",
    "take",
    "come",
    "give",
    "find",
    "use",
    "try",
    "call",
    "keep",
    "let",
    "new",
    "old",
    "big",
    "small",
    "long",
    "short",
    "high",
    "low",
    "first",
    "last",
    "next",
    "right",
    "wrong",
    "true",
    "false",
    "real",
    "same",
    "different",
    "clearly",
    "obviously",
    "definitely",
    "exactly",
    "absolutely",
    "literally",
    "honestly",
    "seriously",
    "apparently",
    "surely",
    "because",
    "while",
    "until",
    "since",
    "though",
    "although",
    "unless",
    "whether",
    "one",
    "two",
    "three",
    "four",
    "five",
    "ten",
    "hundred",
    "yeah",
    "nope",
    "okay",
    "well",
    "hey",
    "hello",
    "bye",
    "lol",
];

const PUNCTUATION: &[&str] = &[
    ".", ",", "!", "?", "'", "\"", ":", ";", "-", "(", ")", "#", "@", "&", "/", "*", "<", ">",
    "...",
];

pub const UNKNOWN_BUCKETS: usize = 128;

/// Whitespace-plus-punctuation tokenizer over a fixed vocabulary.
///
/// Text is lowercased and split on whitespace; inside each chunk, alphanumeric runs form one
/// token and every other character is its own token (a run of dots becomes `...`). Tokens
/// outside the vocabulary hash (FNV-1a) into one of [`UNKNOWN_BUCKETS`] ids, which decode as
/// `<unk_N>`. Decoding joins tokens with single spaces, so `decode(encode(t))` equals the
/// lowercased, space-separated token sequence of `t` whenever every token is in the vocabulary.
#[derive(Debug, Clone)]
pub struct WordTokenizer {
    ids: HashMap<&'static str, u32>,
    tokens: Vec<&'static str>,
    first_bucket: u32,
}

impl Default for WordTokenizer {
    fn default() -> Self {
        Self::new()
    }
}

impl WordTokenizer {
    pub fn new() -> Self {
        let tokens: Vec<&'static str> = SPECIALS
            .iter()
            .chain(WORDS)
            .chain(PUNCTUATION)
            .copied()
            .collect();
        let ids = tokens
            .iter()
            .enumerate()
            .skip(SPECIALS.len())
            .map(|(i, t)| (*t, i as u32))
            .collect();
        let first_bucket = tokens.len() as u32;
        WordTokenizer {
            ids,
            tokens,
            first_bucket,
        }
    }

    /// Splits text into lowercased surface tokens without mapping them to ids.
    pub fn pieces(text: &str) -> Vec<String> {
        let mut out = Vec::new();
        for chunk in text.split_whitespace() {
            let lower = chunk.to_lowercase();
            let mut word = String::new();
            let mut chars = lower.chars().peekable();
            while let Some(c) = chars.next() {
                if c.is_alphanumeric() {
                    word.push(c);
                    continue;
                }
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                if c == '.' && chars.peek() == Some(&'.') {
                    let mut dots = 1;
                    while chars.peek() == Some(&'.') {
                        chars.next();
                        dots += 1;
                    }
                    out.push(if dots >= 3 { "...".into() } else { "..".into() });
                } else {
                    out.push(c.to_string());
                }
            }
            if !word.is_empty() {
                out.push(word);
            }
        }
        out
    }

    pub fn token_id(&self, piece: &str) -> u32 {
        match self.ids.get(piece) {
            Some(&id) => id,
            None => self.first_bucket + (fnv1a(piece) % UNKNOWN_BUCKETS as u64) as u32,
        }
    }

    pub fn is_known(&self, piece: &str) -> bool {
        self.ids.contains_key(piece)
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl Tokenizer for WordTokenizer {
    fn vocab_size(&self) -> usize {
        self.tokens.len() + UNKNOWN_BUCKETS
    }

    fn special_tokens(&self) -> SpecialTokens {
        SpecialTokens {
            bos: 0,
            pad: 1,
            eos: 2,
            sep: 3,
        }
    }

    fn encode(&self, text: &str) -> Vec<u32> {
        Self::pieces(text)
            .iter()
            .map(|p| self.token_id(p))
            .collect()
    }

    fn decode(&self, ids: &[u32]) -> String {
        ids.iter()
            .map(|&id| match self.tokens.get(id as usize) {
                Some(t) => t.to_string(),
                None => format!("<unk_{}>", id.saturating_sub(self.first_bucket)),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn descriptor(&self) -> TokenizerSpec {
        TokenizerSpec::Word
    }
}

/// A `tokenizer.json` loaded through the `tokenizers` crate. Special tokens are looked up by
/// their RoBERTa names (`<s>`, `</s>`, `<pad>`); the separator is `</s>`.
pub struct HfTokenizer {
    inner: tokenizers::Tokenizer,
    special: SpecialTokens,
    path: PathBuf,
}

impl HfTokenizer {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let inner = tokenizers::Tokenizer::from_file(path)
            .map_err(|e| Error::Tokenizer(format!("{}: {e}", path.display())))?;
        let lookup = |name: &str| {
            inner
                .token_to_id(name)
                .ok_or_else(|| Error::Tokenizer(format!("vocabulary has no {name} token")))
        };
        let special = SpecialTokens {
            bos: lookup("<s>")?,
            eos: lookup("</s>")?,
            sep: lookup("</s>")?,
            pad: lookup("<pad>")?,
        };
        special.validate(inner.get_vocab_size(true))?;
        Ok(HfTokenizer {
            inner,
            special,
            path: path.to_path_buf(),
        })
    }
}

impl Tokenizer for HfTokenizer {
    fn vocab_size(&self) -> usize {
        self.inner.get_vocab_size(true)
    }

    fn special_tokens(&self) -> SpecialTokens {
        self.special
    }

    fn encode(&self, text: &str) -> Vec<u32> {
        match self.inner.encode(text, false) {
            Ok(enc) => enc.get_ids().to_vec(),
            // encoding only fails on malformed added-token configuration
            Err(_) => Vec::new(),
        }
    }

    fn decode(&self, ids: &[u32]) -> String {
        self.inner.decode(ids, false).unwrap_or_default()
    }

    fn descriptor(&self) -> TokenizerSpec {
        TokenizerSpec::HuggingFace {
            path: self.path.clone(),
        }
    }
}
