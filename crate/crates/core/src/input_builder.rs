//! Turns dialogue records into encoder inputs for the three input modes.
//!
//! Layouts (before padding):
//!
//! ```text
//! response_only               <s> response </s>
//! context_response            <s> context response </s>
//! context_response_separated  <s> context <sep> response </s>
//! ```
//!
//! The context block is the last `k` turns joined by single spaces. When the selected context
//! is empty both context modes collapse to the response-only layout.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{encode_label, Corpus, DialogueRecord, Normalization};
use crate::encoder::Hyperparams;
use crate::error::{Error, Result};
use crate::tokenizer::{Tokenizer, TokenizerSpec};

pub const DEFAULT_CONTEXT_TURNS: usize = 2;
pub const MIN_BUDGET: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    ResponseOnly,
    ContextResponse,
    ContextResponseSeparated,
}

impl InputMode {
    pub const ALL: [InputMode; 3] = [
        InputMode::ResponseOnly,
        InputMode::ContextResponse,
        InputMode::ContextResponseSeparated,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            InputMode::ResponseOnly => "response_only",
            InputMode::ContextResponse => "context_response",
            InputMode::ContextResponseSeparated => "context_response_separated",
        }
    }

    /// Row label used in results tables.
    pub fn title(&self) -> &'static str {
        match self {
            InputMode::ResponseOnly => "Response-only",
            InputMode::ContextResponse => "Context-Response",
            InputMode::ContextResponseSeparated => "Context-Response (Separated)",
        }
    }

    pub fn uses_context(&self) -> bool {
        !matches!(self, InputMode::ResponseOnly)
    }
}

impl fmt::Display for InputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InputMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "unknown input mode {s:?} (expected response_only, context_response or context_response_separated)"
                ))
            })
    }
}

/// Everything besides the model needed to rebuild inputs the way a checkpoint was trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSettings {
    pub mode: InputMode,
    pub context_turns: usize,
    pub normalization: Normalization,
    pub tokenizer: TokenizerSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedInput {
    pub token_ids: Vec<u32>,
    pub attention_mask: Vec<u8>,
    pub mode: InputMode,
    pub budget: usize,
}

impl EncodedInput {
    /// Number of non-padding tokens.
    pub fn real_len(&self) -> usize {
        self.attention_mask.iter().filter(|&&m| m == 1).count()
    }

    pub fn real_tokens(&self) -> &[u32] {
        &self.token_ids[..self.real_len()]
    }

    /// Separator occurrences strictly inside the framing tokens.
    pub fn boundary_separators(&self, sep: u32) -> usize {
        let real = self.real_tokens();
        if real.len() < 2 {
            return 0;
        }
        real[1..real.len() - 1]
            .iter()
            .filter(|&&t| t == sep)
            .count()
    }

    /// Human-readable rendering of the real tokens, framing and separator included.
    pub fn render(&self, tokenizer: &dyn Tokenizer) -> String {
        let sp = tokenizer.special_tokens();
        let real = self.real_tokens();
        let mut parts = Vec::new();
        let mut run: Vec<u32> = Vec::new();
        for (i, &t) in real.iter().enumerate() {
            let name = if i == 0 && t == sp.bos {
                Some("<s>")
            } else if i + 1 == real.len() && t == sp.eos {
                Some("</s>")
            } else if t == sp.sep {
                Some("<sep>")
            } else {
                None
            };
            match name {
                Some(n) => {
                    if !run.is_empty() {
                        parts.push(tokenizer.decode(&run));
                        run.clear();
                    }
                    parts.push(n.to_string());
                }
                None => run.push(t),
            }
        }
        if !run.is_empty() {
            parts.push(tokenizer.decode(&run));
        }
        parts.join(" ")
    }
}

/// The final `min(k, |context|)` turns, in original order.
pub fn select_context(record: &DialogueRecord, k: usize) -> &[String] {
    let n = record.context.len();
    &record.context[n - k.min(n)..]
}

/// Fits `context + response + overhead` into `budget`.
///
/// Context tokens are dropped from the front first; only when the response alone exceeds the
/// room left by the framing is it cut, from its tail. Inputs already within budget come back
/// unchanged.
pub fn truncate_to_budget(
    context: &[u32],
    response: &[u32],
    overhead: usize,
    budget: usize,
) -> Result<(Vec<u32>, Vec<u32>)> {
    if budget <= overhead {
        return Err(Error::BudgetTooSmall {
            budget,
            overhead,
            minimum: overhead + 1,
        });
    }
    let room = budget - overhead;
    if response.len() >= room {
        return Ok((Vec::new(), response[..room].to_vec()));
    }
    let keep_ctx = context.len().min(room - response.len());
    Ok((
        context[context.len() - keep_ctx..].to_vec(),
        response.to_vec(),
    ))
}

pub fn build_input(
    record: &DialogueRecord,
    mode: InputMode,
    tokenizer: &dyn Tokenizer,
    budget: usize,
    context_turns: usize,
) -> Result<EncodedInput> {
    let sp = tokenizer.special_tokens();
    let response = tokenizer.encode(&record.response);
    if response.is_empty() {
        return Err(Error::EmptyResponse {
            id: record.id.clone(),
        });
    }
    let context = if mode.uses_context() {
        tokenizer.encode(&select_context(record, context_turns).join(" "))
    } else {
        Vec::new()
    };
    let separated = mode == InputMode::ContextResponseSeparated && !context.is_empty();
    let overhead = if separated { 3 } else { 2 };
    if budget < MIN_BUDGET {
        return Err(Error::BudgetTooSmall {
            budget,
            overhead,
            minimum: MIN_BUDGET,
        });
    }
    let (context, response) = truncate_to_budget(&context, &response, overhead, budget)?;

    let mut ids = Vec::with_capacity(budget);
    ids.push(sp.bos);
    ids.extend_from_slice(&context);
    if separated {
        ids.push(sp.sep);
    }
    ids.extend_from_slice(&response);
    ids.push(sp.eos);
    let real = ids.len();
    ids.resize(budget, sp.pad);
    let mut mask = vec![1u8; real];
    mask.resize(budget, 0);
    Ok(EncodedInput {
        token_ids: ids,
        attention_mask: mask,
        mode,
        budget,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedExample {
    pub id: String,
    pub input: EncodedInput,
    pub label: Option<u8>,
}

/// Encodes every record in corpus order. The budget comes from `hp` according to `mode`.
pub fn build_dataset(
    corpus: &Corpus,
    mode: InputMode,
    tokenizer: &dyn Tokenizer,
    hp: &Hyperparams,
    context_turns: usize,
) -> Result<Vec<EncodedExample>> {
    let budget = hp.budget_for(mode);
    corpus
        .records()
        .par_iter()
        .map(|r| {
            let input = build_input(r, mode, tokenizer, budget, context_turns)
                .map_err(|e| e.for_record(&r.id))?;
            Ok(EncodedExample {
                id: r.id.clone(),
                input,
                label: r.label.map(encode_label),
            })
        })
        .collect()
}
