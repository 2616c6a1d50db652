//! Conversation-thread corpora: loading, validation, statistics and splitting.
//!
//! Record files hold one JSON object per line:
//!
//! ```text
//! {"label": "SARCASM", "response": "oh great", "context": ["first turn", "second turn"]}
//! ```
//!
//! `context` is ordered oldest turn first. `label` may be omitted in prediction
//! corpora, and an optional `id` field is honoured when present; otherwise the
//! id is synthesized as `<source>-<line number>`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Reddit,
    Twitter,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Reddit => "reddit",
            Source::Twitter => "twitter",
        }
    }

    fn title(&self) -> &'static str {
        match self {
            Source::Reddit => "Reddit",
            Source::Twitter => "Twitter",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reddit" => Ok(Source::Reddit),
            "twitter" => Ok(Source::Twitter),
            other => Err(Error::Invalid(format!(
                "unknown source {other:?} (expected reddit or twitter)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "NOT_SARCASM")]
    NotSarcasm,
    #[serde(rename = "SARCASM")]
    Sarcasm,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Sarcasm => "SARCASM",
            Label::NotSarcasm => "NOT_SARCASM",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SARCASM" => Ok(Label::Sarcasm),
            "NOT_SARCASM" => Ok(Label::NotSarcasm),
            other => Err(Error::Invalid(format!("unknown label {other:?}"))),
        }
    }
}

/// The sarcastic class is the positive class (index 1).
pub fn encode_label(label: Label) -> u8 {
    match label {
        Label::Sarcasm => 1,
        Label::NotSarcasm => 0,
    }
}

pub fn decode_label(value: i64) -> Result<Label> {
    match value {
        1 => Ok(Label::Sarcasm),
        0 => Ok(Label::NotSarcasm),
        other => Err(Error::Domain(format!(
            "label index {other} not in {{0, 1}}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Validation,
    Test,
    Unsplit,
}

impl SplitTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Validation => "validation",
            SplitTag::Test => "test",
            SplitTag::Unsplit => "unsplit",
        }
    }

    fn title(&self) -> &'static str {
        match self {
            SplitTag::Train => "Training",
            SplitTag::Validation => "Validation",
            SplitTag::Test => "Testing",
            SplitTag::Unsplit => "Unsplit",
        }
    }
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitTag::Train),
            "validation" | "val" => Ok(SplitTag::Validation),
            "test" => Ok(SplitTag::Test),
            "unsplit" => Ok(SplitTag::Unsplit),
            other => Err(Error::Invalid(format!("unknown split {other:?}"))),
        }
    }
}

/// One conversation thread: prior turns (oldest first) and the response being classified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueRecord {
    pub id: String,
    pub source: Source,
    pub context: Vec<String>,
    pub response: String,
    pub label: Option<Label>,
}

impl DialogueRecord {
    pub fn validate(&self) -> Result<()> {
        if self.response.trim().is_empty() {
            return Err(Error::EmptyResponse {
                id: self.id.clone(),
            });
        }
        if let Some(turn) = self.context.iter().position(|t| t.trim().is_empty()) {
            return Err(Error::EmptyContextTurn {
                id: self.id.clone(),
                turn,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    source: Source,
    split: SplitTag,
    records: Vec<DialogueRecord>,
}

impl Corpus {
    /// Builds a corpus, checking every record and the unique-id / shared-source invariants.
    pub fn new(source: Source, split: SplitTag, records: Vec<DialogueRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for record in &records {
            record.validate()?;
            if record.source != source {
                return Err(Error::SourceMismatch {
                    id: record.id.clone(),
                    expected: source.to_string(),
                    found: record.source.to_string(),
                });
            }
            if !seen.insert(record.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: record.id.clone(),
                });
            }
        }
        Ok(Corpus {
            source,
            split,
            records,
        })
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn split(&self) -> SplitTag {
        self.split
    }

    pub fn records(&self) -> &[DialogueRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn with_split(mut self, split: SplitTag) -> Self {
        self.split = split;
        self
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.records.iter().all(|r| r.label.is_some())
    }

    /// Returns a copy with every utterance passed through `normalization`.
    pub fn normalized(&self, normalization: Normalization) -> Corpus {
        if normalization == Normalization::None {
            return self.clone();
        }
        let records = self
            .records
            .iter()
            .map(|r| DialogueRecord {
                context: r.context.iter().map(|t| normalization.apply(t)).collect(),
                response: normalization.apply(&r.response),
                ..r.clone()
            })
            .collect();
        Corpus {
            source: self.source,
            split: self.split,
            records,
        }
    }
}

/// Optional text clean-up applied before tokenization. The default is the identity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    None,
    /// Drops `@USER` mentions and `<URL>` placeholders and collapses whitespace.
    Tweet,
}

impl Normalization {
    pub fn apply(&self, text: &str) -> String {
        match self {
            Normalization::None => text.to_string(),
            Normalization::Tweet => {
                let cleaned = text
                    .split_whitespace()
                    .filter(|w| !w.starts_with("@USER") && *w != "<URL>")
                    .collect::<Vec<_>>()
                    .join(" ");
                // an utterance made only of placeholders keeps its original text
                if cleaned.is_empty() {
                    text.trim().to_string()
                } else {
                    cleaned
                }
            }
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "tweet" => Ok(Normalization::Tweet),
            other => Err(Error::Invalid(format!(
                "unknown normalization {other:?} (expected none or tweet)"
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    label: Option<Label>,
    response: String,
    #[serde(default)]
    context: Vec<String>,
}

#[derive(Serialize)]
struct RawRecordOut<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<Label>,
    response: &'a str,
    context: &'a [String],
    id: &'a str,
}

/// Parses line-delimited records. Blank lines are skipped but still count towards line numbers.
pub fn parse_corpus(reader: impl BufRead, source: Source) -> Result<Corpus> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let record = DialogueRecord {
            id: raw
                .id
                .unwrap_or_else(|| format!("{}-{}", source.as_str(), line_no)),
            source,
            context: raw.context,
            response: raw.response,
            label: raw.label,
        };
        record.validate().map_err(|e| match e {
            Error::EmptyResponse { id } => Error::Parse {
                line: line_no,
                message: format!("record {id}: response is empty"),
            },
            other => other,
        })?;
        records.push(record);
    }
    Corpus::new(source, SplitTag::Unsplit, records)
}

pub fn load_corpus(path: impl AsRef<Path>, source: Source) -> Result<Corpus> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(file), source)
}

pub fn write_corpus(corpus: &Corpus, mut writer: impl Write) -> std::io::Result<()> {
    for r in corpus.records() {
        let out = RawRecordOut {
            label: r.label,
            response: &r.response,
            context: &r.context,
            id: &r.id,
        };
        serde_json::to_writer(&mut writer, &out)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(corpus, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub record_count: usize,
    pub avg_contexts_per_record: f64,
    pub label_counts: BTreeMap<Label, usize>,
}

pub fn compute_stats(corpus: &Corpus) -> CorpusStats {
    let mut label_counts = BTreeMap::new();
    let mut total_turns = 0usize;
    for r in corpus.records() {
        total_turns += r.context.len();
        if let Some(label) = r.label {
            *label_counts.entry(label).or_insert(0) += 1;
        }
    }
    let n = corpus.len();
    CorpusStats {
        record_count: n,
        avg_contexts_per_record: if n == 0 {
            0.0
        } else {
            total_turns as f64 / n as f64
        },
        label_counts,
    }
}

/// Larger-to-smaller ratio of the two average context depths. Symmetric, always >= 1.
pub fn mismatch_ratio(a: &CorpusStats, b: &CorpusStats) -> Result<f64> {
    let (x, y) = (a.avg_contexts_per_record, b.avg_contexts_per_record);
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!(
            "mismatch ratio needs positive averages, got {x} and {y}"
        )));
    }
    Ok(x.max(y) / x.min(y))
}

/// Partitions a labeled corpus into (train, validation) with `floor(ratio * n)` training records.
///
/// Indices are shuffled by a Fisher-Yates pass driven by [`SplitMix64`] seeded with `seed`,
/// so the partition depends only on `(n, ratio, seed)`. Both halves keep corpus order.
pub fn train_val_split(corpus: &Corpus, ratio: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Domain(format!("split ratio {ratio} not in (0, 1)")));
    }
    if corpus.is_empty() {
        return Err(Error::Domain("cannot split an empty corpus".into()));
    }
    if let Some(r) = corpus.records().iter().find(|r| r.label.is_none()) {
        return Err(Error::Unlabeled { id: r.id.clone() });
    }
    let n = corpus.len();
    let n_train = train_size(n, ratio);
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let mut train_idx = order[..n_train].to_vec();
    let mut val_idx = order[n_train..].to_vec();
    train_idx.sort_unstable();
    val_idx.sort_unstable();
    let pick = |idx: &[usize], split| Corpus {
        source: corpus.source,
        split,
        records: idx.iter().map(|&i| corpus.records[i].clone()).collect(),
    };
    Ok((
        pick(&train_idx, SplitTag::Train),
        pick(&val_idx, SplitTag::Validation),
    ))
}

/// `floor(ratio * n)`, with a 1e-9 allowance so decimal ratios such as 0.29 * 100 land on 29.
pub fn train_size(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64) + 1e-9).floor() as usize
}

/// Average-context table: one row per split, one column per source.
#[derive(Debug, Clone, Default)]
pub struct StatsTable {
    entries: Vec<StatsEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsEntry {
    pub source: Source,
    pub split: SplitTag,
    #[serde(flatten)]
    pub stats: CorpusStats,
}

impl StatsTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, source: Source, split: SplitTag, stats: CorpusStats) {
        self.entries.push(StatsEntry {
            source,
            split,
            stats,
        });
    }

    pub fn entries(&self) -> &[StatsEntry] {
        &self.entries
    }

    fn get(&self, source: Source, split: SplitTag) -> Option<&CorpusStats> {
        self.entries
            .iter()
            .find(|e| e.source == source && e.split == split)
            .map(|e| &e.stats)
    }

    pub fn render_text(&self) -> String {
        let mut sources: Vec<Source> = self.entries.iter().map(|e| e.source).collect();
        sources.sort();
        sources.dedup();
        let mut splits: Vec<SplitTag> = self.entries.iter().map(|e| e.split).collect();
        splits.sort();
        splits.dedup();

        let mut out = format!("{:<16}", "Split/Dataset");
        for s in &sources {
            out.push_str(&format!(" {:>10}", s.title()));
        }
        out.push('\n');
        for split in &splits {
            out.push_str(&format!("{:<16}", split.title()));
            for source in &sources {
                match self.get(*source, *split) {
                    Some(stats) => {
                        out.push_str(&format!(" {:>10.3}", stats.avg_contexts_per_record))
                    }
                    None => out.push_str(&format!(" {:>10}", "-")),
                }
            }
            out.push('\n');
        }
        out
    }

    /// One JSON object per (source, split), in insertion order.
    pub fn render_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("stats entries serialize") + "\n")
            .collect()
    }
}
