use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use sarcasm_core::metrics::{format_predictions, parse_predictions, score, score_predictions};
use sarcasm_core::{
    build_dataset, build_input, compute_stats, decode_label, fine_tune, load_corpus,
    mismatch_ratio, predict, results_table, train_val_split, Checkpoint, Corpus, EncodedExample,
    InputSettings, Label, RunResult, Source, SplitTag, StatsTable, TableAveraging, Tokenizer,
};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const INPUT_DUMP: &str = "inputs.txt";
pub const VALIDATION_METRICS: &str = "validation_metrics.jsonl";
pub const METRICS: &str = "metrics.jsonl";
pub const RESULTS_CSV: &str = "results.csv";
pub const PREDICTIONS: &str = "predictions.csv";

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Runtime(format!("writing output: {e}")))
}

/// Where `train` puts the checkpoint for a given source and mode.
pub fn checkpoint_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir.join(format!("{}_{}", cfg.source, cfg.mode))
}

/// A stats operand: `[SOURCE[/SPLIT]=]PATH`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusArg {
    pub source: Source,
    pub split: SplitTag,
    pub path: PathBuf,
}

impl CorpusArg {
    pub fn parse(arg: &str, default_source: Source) -> Result<Self, CliError> {
        let bad = |e: sarcasm_core::Error| CliError::Config(format!("{arg}: {e}"));
        match arg.split_once('=') {
            Some((tag, path)) => {
                let (source, split) = match tag.split_once('/') {
                    Some((s, p)) => (s.parse().map_err(bad)?, p.parse().map_err(bad)?),
                    None => (tag.parse().map_err(bad)?, SplitTag::Unsplit),
                };
                Ok(CorpusArg {
                    source,
                    split,
                    path: path.into(),
                })
            }
            None => Ok(CorpusArg {
                source: default_source,
                split: SplitTag::Unsplit,
                path: arg.into(),
            }),
        }
    }
}

fn load(path: &Path, source: Source) -> Result<Corpus, CliError> {
    load_corpus(path, source).map_err(|e| CliError::from(e).context(path.display()))
}

pub fn stats(
    cfg: &ExperimentConfig,
    operands: &[CorpusArg],
    jsonl: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if operands.is_empty() {
        return Err(CliError::Config("stats needs at least one corpus".into()));
    }
    let mut table = StatsTable::new();
    for op in operands {
        let corpus = load(&op.path, op.source)?.normalized(cfg.normalization);
        table.push(op.source, op.split, compute_stats(&corpus));
    }
    if jsonl {
        return emit(out, &table.render_jsonl());
    }
    let mut text = table.render_text();
    text.push('\n');
    for e in table.entries() {
        let count = |l: Label| e.stats.label_counts.get(&l).copied().unwrap_or(0);
        text.push_str(&format!(
            "{} {}: {} records, avg contexts {:.3}, {} {}, {} {}\n",
            e.source,
            e.split,
            e.stats.record_count,
            e.stats.avg_contexts_per_record,
            Label::Sarcasm,
            count(Label::Sarcasm),
            Label::NotSarcasm,
            count(Label::NotSarcasm),
        ));
    }
    if let [a, b] = table.entries() {
        let line = match mismatch_ratio(&a.stats, &b.stats) {
            Ok(ratio) => {
                let larger = if a.stats.avg_contexts_per_record >= b.stats.avg_contexts_per_record {
                    a
                } else {
                    b
                };
                format!(
                    "mismatch ratio: {ratio:.3} ({} {} has more context)\n",
                    larger.source, larger.split
                )
            }
            Err(_) => "mismatch ratio: undefined (a corpus has no context turns)\n".to_string(),
        };
        text.push_str(&line);
    }
    emit(out, &text)
}

fn dump_inputs(
    dir: &Path,
    corpus: &Corpus,
    settings: &InputSettings,
    tokenizer: &dyn Tokenizer,
    budget: usize,
    n: usize,
) -> Result<(), CliError> {
    let mut text = String::new();
    for r in corpus.records().iter().take(n) {
        let input = build_input(r, settings.mode, tokenizer, budget, settings.context_turns)
            .map_err(|e| CliError::from(e).context(&r.id))?;
        text.push_str(&format!("{}\t{}\n", r.id, input.render(tokenizer)));
    }
    write_file(&dir.join(INPUT_DUMP), &text)
}

fn labels_of(examples: &[EncodedExample]) -> Vec<u8> {
    examples.iter().filter_map(|e| e.label).collect()
}

/// Splits, fine-tunes and writes a checkpoint. Returns the checkpoint directory.
pub fn train(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<PathBuf, CliError> {
    let spec = cfg.encoder_spec()?;
    let settings = InputSettings {
        mode: cfg.mode,
        context_turns: cfg.context_turns,
        normalization: cfg.normalization,
        tokenizer: cfg.tokenizer_spec(),
    };
    let tokenizer = settings.tokenizer.build()?;
    spec.check_tokenizer(tokenizer.as_ref())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let hp = &cfg.hyperparams;
    let corpus = load(cfg.primary_corpus()?, cfg.source)?.normalized(cfg.normalization);
    let (train_set, val_set) = train_val_split(&corpus, hp.split_ratio, hp.seed)?;
    let dir = checkpoint_dir(cfg);
    if cfg.dump_inputs > 0 {
        dump_inputs(
            &dir,
            &corpus,
            &settings,
            tokenizer.as_ref(),
            hp.budget_for(cfg.mode),
            cfg.dump_inputs,
        )?;
    }
    let build = |c: &Corpus| build_dataset(c, cfg.mode, tokenizer.as_ref(), hp, cfg.context_turns);
    let train_data = build(&train_set)?;
    let val_data = build(&val_set)?;
    emit(
        out,
        &format!(
            "training {} on {} {} records ({} train, {} validation), mode {}\n",
            spec.encoder_id,
            corpus.len(),
            cfg.source,
            train_data.len(),
            val_data.len(),
            cfg.mode
        ),
    )?;
    let provider = cfg.weight_provider();
    let model = fine_tune(&spec, provider.as_ref(), &train_data, &val_data, hp)?;
    for h in &model.history {
        let mut line = format!("epoch {:>3}  train_loss {:.6}", h.epoch, h.train_loss);
        if let (Some(l), Some(f)) = (h.val_loss, h.val_macro_f1) {
            line.push_str(&format!("  val_loss {l:.6}  val_macro_f1 {f:.3}"));
        }
        line.push('\n');
        emit(out, &line)?;
    }
    if !val_data.is_empty() {
        let preds: Vec<u8> = predict(&model, &val_data)?
            .iter()
            .map(|p| p.label)
            .collect();
        let (confusion, report) = score(&preds, &labels_of(&val_data))?;
        let table = results_table(&[RunResult {
            source: cfg.source,
            mode: cfg.mode,
            confusion,
            report,
        }]);
        write_file(&dir.join(VALIDATION_METRICS), &table.render_jsonl())?;
    }
    Checkpoint {
        model,
        hyperparams: hp.clone(),
        input: settings,
    }
    .save(&dir)?;
    emit(out, &format!("checkpoint written to {}\n", dir.display()))?;
    Ok(dir)
}

fn load_checkpoint(dir: &Path) -> Result<Checkpoint, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Config(format!(
            "checkpoint {} is not a directory",
            dir.display()
        )));
    }
    Checkpoint::load(dir).map_err(|e| CliError::from(e).context(dir.display()))
}

/// Rebuilds inputs the way the checkpoint was trained and runs the model over them.
fn run_checkpoint(ckpt: &Checkpoint, corpus: &Corpus) -> Result<Vec<u8>, CliError> {
    let tokenizer = ckpt.input.tokenizer.build()?;
    ckpt.model
        .spec
        .check_tokenizer(tokenizer.as_ref())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let corpus = corpus.normalized(ckpt.input.normalization);
    let data = build_dataset(
        &corpus,
        ckpt.input.mode,
        tokenizer.as_ref(),
        &ckpt.hyperparams,
        ckpt.input.context_turns,
    )?;
    Ok(predict(&ckpt.model, &data)?
        .iter()
        .map(|p| p.label)
        .collect())
}

pub fn evaluate(
    cfg: &ExperimentConfig,
    checkpoints: &[PathBuf],
    predictions: Option<&Path>,
    averaging: TableAveraging,
    out: &mut dyn Write,
) -> Result<Vec<RunResult>, CliError> {
    if checkpoints.is_empty() && predictions.is_none() {
        return Err(CliError::Config(
            "evaluate needs --checkpoint or --predictions".into(),
        ));
    }
    let corpus = load(cfg.primary_corpus()?, cfg.source)?;
    if let Some(r) = corpus.records().iter().find(|r| r.label.is_none()) {
        return Err(sarcasm_core::Error::Unlabeled { id: r.id.clone() }.into());
    }
    let gold: Vec<u8> = corpus
        .records()
        .iter()
        .filter_map(|r| r.label.map(sarcasm_core::encode_label))
        .collect();
    let mut runs = Vec::new();
    for dir in checkpoints {
        let ckpt = load_checkpoint(dir)?;
        let preds = run_checkpoint(&ckpt, &corpus)?;
        let (confusion, report) = score(&preds, &gold)?;
        runs.push(RunResult {
            source: corpus.source(),
            mode: ckpt.input.mode,
            confusion,
            report,
        });
    }
    if let Some(path) = predictions {
        let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        let parsed = parse_predictions(BufReader::new(file))
            .map_err(|e| CliError::from(e).context(path.display()))?;
        let (confusion, report) = score_predictions(&parsed, &corpus)?;
        runs.push(RunResult {
            source: corpus.source(),
            mode: cfg.mode,
            confusion,
            report,
        });
    }
    let table = results_table(&runs);
    write_file(&cfg.output_dir.join(METRICS), &table.render_jsonl())?;
    write_file(
        &cfg.output_dir.join(RESULTS_CSV),
        &table.render_csv(averaging),
    )?;
    emit(out, &table.render_text(averaging))?;
    Ok(table.rows().to_vec())
}

pub fn predict_file(
    cfg: &ExperimentConfig,
    checkpoint: &Path,
    destination: Option<&Path>,
    out: &mut dyn Write,
) -> Result<PathBuf, CliError> {
    let ckpt = load_checkpoint(checkpoint)?;
    let corpus = load(cfg.primary_corpus()?, cfg.source)?;
    let preds = run_checkpoint(&ckpt, &corpus)?;
    let pairs = corpus
        .records()
        .iter()
        .zip(preds)
        .map(|(r, p)| Ok((r.id.clone(), decode_label(p.into())?)))
        .collect::<Result<Vec<(String, Label)>, sarcasm_core::Error>>()?;
    let path = destination
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output_dir.join(PREDICTIONS));
    write_file(&path, &format_predictions(&pairs))?;
    emit(
        out,
        &format!("wrote {} predictions to {}\n", pairs.len(), path.display()),
    )?;
    Ok(path)
}
