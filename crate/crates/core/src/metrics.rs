//! Binary classification metrics with the sarcastic class (1) as positive.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::corpus::{encode_label, Corpus, Label, Source};
use crate::error::{Error, Result};
use crate::input_builder::InputMode;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(predictions: &[u8], gold: &[u8]) -> Result<ConfusionMatrix> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::Invalid(
            "cannot score an empty prediction set".into(),
        ));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &g) in predictions.iter().zip(gold) {
        match (p, g) {
            (1, 1) => cm.tp += 1,
            (1, 0) => cm.fp += 1,
            (0, 1) => cm.fn_ += 1,
            (0, 0) => cm.tn += 1,
            _ => {
                return Err(Error::Invalid(format!(
                    "label pair ({p}, {g}) outside {{0, 1}}"
                )))
            }
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision_1: f64,
    pub recall_1: f64,
    pub f1_1: f64,
    pub precision_0: f64,
    pub recall_0: f64,
    pub f1_0: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Zero denominators yield 0 rather than an undefined value.
pub fn report_from_confusion(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    if cm.total() == 0 {
        return Err(Error::Invalid("confusion matrix is empty".into()));
    }
    let precision_1 = ratio(cm.tp, cm.tp + cm.fp);
    let recall_1 = ratio(cm.tp, cm.tp + cm.fn_);
    let precision_0 = ratio(cm.tn, cm.tn + cm.fn_);
    let recall_0 = ratio(cm.tn, cm.tn + cm.fp);
    let f1_1 = f1(precision_1, recall_1);
    let f1_0 = f1(precision_0, recall_0);
    Ok(MetricsReport {
        precision_1,
        recall_1,
        f1_1,
        precision_0,
        recall_0,
        f1_0,
        macro_precision: (precision_1 + precision_0) / 2.0,
        macro_recall: (recall_1 + recall_0) / 2.0,
        macro_f1: (f1_1 + f1_0) / 2.0,
    })
}

pub fn score(predictions: &[u8], gold: &[u8]) -> Result<(ConfusionMatrix, MetricsReport)> {
    let cm = confusion(predictions, gold)?;
    let report = report_from_confusion(&cm)?;
    Ok((cm, report))
}

/// Percentage change from `baseline` to `improved`; negative for a decrease.
pub fn relative_improvement(baseline: f64, improved: f64) -> Result<f64> {
    if baseline.is_nan() || baseline <= 0.0 {
        return Err(Error::Domain(format!(
            "baseline must be positive, got {baseline}"
        )));
    }
    Ok(100.0 * (improved - baseline) / baseline)
}

/// Rounds half away from zero to three decimals.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub source: Source,
    pub mode: InputMode,
    pub confusion: ConfusionMatrix,
    pub report: MetricsReport,
}

/// Which averaging the table's Precision/Recall/F1 columns show.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TableAveraging {
    #[default]
    Macro,
    PositiveClass,
}

#[derive(Serialize)]
struct MetricsLine<'a> {
    source: Source,
    mode: InputMode,
    #[serde(flatten)]
    report: &'a MetricsReport,
    #[serde(flatten)]
    confusion: &'a ConfusionMatrix,
}

/// Results table with one row per input mode, in the fixed mode order.
#[derive(Debug, Clone, Default)]
pub struct ResultsTable {
    rows: Vec<RunResult>,
}

pub const TABLE_COLUMNS: [&str; 4] = ["Input", "F1-score", "Precision", "Recall"];

pub fn results_table(results: &[RunResult]) -> ResultsTable {
    let mut rows = results.to_vec();
    rows.sort_by_key(|r| (r.source, r.mode));
    ResultsTable { rows }
}

impl ResultsTable {
    pub fn rows(&self) -> &[RunResult] {
        &self.rows
    }

    fn triple(r: &MetricsReport, avg: TableAveraging) -> [f64; 3] {
        match avg {
            TableAveraging::Macro => [r.macro_f1, r.macro_precision, r.macro_recall],
            TableAveraging::PositiveClass => [r.f1_1, r.precision_1, r.recall_1],
        }
    }

    pub fn render_text(&self, avg: TableAveraging) -> String {
        let width = 30;
        let mut out = format!(
            "| {:<width$} | {:>9} | {:>9} | {:>9} |\n",
            TABLE_COLUMNS[0], TABLE_COLUMNS[1], TABLE_COLUMNS[2], TABLE_COLUMNS[3]
        );
        out.push_str(&format!(
            "|{}|{}|{}|{}|\n",
            "-".repeat(width + 2),
            "-".repeat(11),
            "-".repeat(11),
            "-".repeat(11)
        ));
        let multi_source = self.rows.windows(2).any(|w| w[0].source != w[1].source);
        for row in &self.rows {
            let [f, p, r] = Self::triple(&row.report, avg);
            let name = if multi_source {
                format!("{} ({})", row.mode.title(), row.source)
            } else {
                row.mode.title().to_string()
            };
            out.push_str(&format!(
                "| {:<width$} | {:>9.3} | {:>9.3} | {:>9.3} |\n",
                name,
                round3(f),
                round3(p),
                round3(r)
            ));
        }
        out
    }

    /// Comma-separated rendering with the same rows and rounding.
    pub fn render_csv(&self, avg: TableAveraging) -> String {
        let mut out = format!("source,mode,{}\n", TABLE_COLUMNS[1..].join(","));
        for row in &self.rows {
            let [f, p, r] = Self::triple(&row.report, avg);
            out.push_str(&format!(
                "{},{},{:.3},{:.3},{:.3}\n",
                row.source,
                row.mode,
                round3(f),
                round3(p),
                round3(r)
            ));
        }
        out
    }

    /// One JSON object per (source, mode) with all nine metrics and the four counts.
    pub fn render_jsonl(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line = MetricsLine {
                source: row.source,
                mode: row.mode,
                report: &row.report,
                confusion: &row.confusion,
            };
            out.push_str(&serde_json::to_string(&line).expect("metrics serialize"));
            out.push('\n');
        }
        out
    }
}

/// Reads a prediction file: one `<id>,<LABEL>` pair per line.
pub fn parse_predictions(reader: impl BufRead) -> Result<Vec<(String, Label)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (id, label) = line.rsplit_once(',').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: "expected <id>,<LABEL>".into(),
        })?;
        let label = label.trim().parse::<Label>().map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push((id.trim().to_string(), label));
    }
    Ok(out)
}

pub fn format_predictions(predictions: &[(String, Label)]) -> String {
    predictions
        .iter()
        .map(|(id, label)| format!("{id},{label}\n"))
        .collect()
}

/// Scores `(id, label)` predictions against a labeled corpus. Every gold record needs exactly one
/// prediction; ids the corpus does not contain are rejected.
pub fn score_predictions(
    predictions: &[(String, Label)],
    gold: &Corpus,
) -> Result<(ConfusionMatrix, MetricsReport)> {
    let mut by_id: HashMap<&str, Label> = HashMap::with_capacity(predictions.len());
    for (id, label) in predictions {
        if by_id.insert(id.as_str(), *label).is_some() {
            return Err(Error::DuplicateId { id: id.clone() });
        }
    }
    let mut preds = Vec::with_capacity(gold.len());
    let mut golds = Vec::with_capacity(gold.len());
    for r in gold.records() {
        let g = r
            .label
            .ok_or_else(|| Error::Unlabeled { id: r.id.clone() })?;
        let p = by_id
            .remove(r.id.as_str())
            .ok_or_else(|| Error::Invalid(format!("no prediction for record {}", r.id)))?;
        preds.push(encode_label(p));
        golds.push(encode_label(g));
    }
    if let Some(extra) = by_id.keys().next() {
        return Err(Error::Invalid(format!(
            "prediction for unknown record {extra}"
        )));
    }
    score(&preds, &golds)
}
