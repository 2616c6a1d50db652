use candle_core::{DType, Tensor, Var};
use candle_nn::{AdamW, Optimizer, ParamsAdamW};
use serde::{Deserialize, Serialize};

use super::model::{
    classification_head_forward, softmax2, Batch, DropoutSampler, EncoderModel, HeadParams,
};
use super::spec::EncoderSpec;
use super::weights::{EncoderWeights, WeightProvider};
use super::Hyperparams;
use crate::error::{Error, Result};
use crate::input_builder::EncodedExample;
use crate::metrics;
use crate::rng::SplitMix64;

const EVAL_BATCH: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_macro_f1: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub spec: EncoderSpec,
    pub head: HeadParams,
    pub history: Vec<EpochRecord>,
    pub encoder: EncoderWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Probability of the sarcastic class.
    pub probability: f64,
    pub label: u8,
}

impl Prediction {
    fn from_probability(probability: f64) -> Self {
        Prediction {
            probability,
            label: u8::from(probability >= 0.5),
        }
    }
}

fn check_inputs(
    spec: &EncoderSpec,
    set: &'static str,
    examples: &[EncodedExample],
    hp: Option<&Hyperparams>,
    need_labels: bool,
) -> Result<()> {
    for (index, e) in examples.iter().enumerate() {
        if need_labels && e.label.is_none() {
            return Err(Error::UnlabeledEntry { set, index });
        }
        let len = e.input.real_len();
        let budget = match hp {
            Some(hp) => hp.budget_for(e.input.mode).min(e.input.budget),
            None => e.input.budget,
        };
        if len > budget || e.input.token_ids.len() > e.input.budget {
            return Err(Error::OverBudget {
                set,
                index,
                len: len.max(e.input.token_ids.len()),
                budget,
            });
        }
        if len > spec.max_sequence() {
            return Err(Error::OverBudget {
                set,
                index,
                len,
                budget: spec.max_sequence(),
            });
        }
        if let Some(&token) = e
            .input
            .real_tokens()
            .iter()
            .find(|&&t| t as usize >= spec.vocabulary_size)
        {
            return Err(Error::VocabularyMismatch {
                token,
                vocab: spec.vocabulary_size,
            });
        }
    }
    Ok(())
}

fn scalar(t: &Tensor) -> Result<f64> {
    Ok(t.to_dtype(DType::F64)?.to_scalar::<f64>()?)
}

/// Evaluation-mode probabilities of class 1, in input order.
fn probabilities(
    model: &EncoderModel,
    head: &HeadParams,
    examples: &[EncodedExample],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(examples.len());
    for chunk in examples.chunks(EVAL_BATCH) {
        let refs: Vec<&EncodedExample> = chunk.iter().collect();
        let batch = Batch::new(model.spec(), &refs)?;
        let pooled: Vec<Vec<f64>> = model
            .pooled(&batch, &mut None)?
            .to_dtype(DType::F64)?
            .to_vec2()?;
        for row in pooled {
            out.push(softmax2(classification_head_forward(&row, head)?)[1]);
        }
    }
    Ok(out)
}

fn mean_cross_entropy(probs: &[f64], labels: &[u8]) -> f64 {
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let q = if y == 1 { p } else { 1.0 - p };
            -q.max(f64::MIN_POSITIVE).ln()
        })
        .sum();
    total / probs.len() as f64
}

/// Fine-tunes encoder and head with AdamW (default moments, constant rate, no warmup) on
/// mini-batch cross-entropy for exactly `hp.epochs` epochs. The final-epoch parameters are kept.
///
/// Every random choice (head init, epoch order, dropout masks) derives from `hp.seed`, so
/// identical arguments give identical results on the same platform.
pub fn fine_tune(
    spec: &EncoderSpec,
    provider: &dyn WeightProvider,
    train: &[EncodedExample],
    val: &[EncodedExample],
    hp: &Hyperparams,
) -> Result<TrainedModel> {
    hp.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    check_inputs(spec, "train", train, Some(hp), true)?;
    check_inputs(spec, "validation", val, Some(hp), true)?;

    let mut master = SplitMix64::new(hp.seed);
    let head_seed = master.next_u64();
    let dropout_seed = master.next_u64();

    let dtype = spec.arch.dtype.candle();
    let initial = provider.load(spec)?;
    initial.check(spec)?;
    let encoder_vars: Vec<(String, Var)> = initial
        .into_map()
        .into_iter()
        .map(|(name, t)| Ok((name, Var::from_tensor(&t)?)))
        .collect::<Result<_>>()?;
    let (w, b) = HeadParams::seeded(spec.hidden_width, head_seed).to_tensors(dtype)?;
    let head_w = Var::from_tensor(&w)?;
    let head_b = Var::from_tensor(&b)?;

    let model = EncoderModel::from_weights(
        spec,
        &EncoderWeights::from_map(
            encoder_vars
                .iter()
                .map(|(n, v)| (n.clone(), v.as_tensor().clone())),
        ),
    )?;
    let mut vars: Vec<Var> = encoder_vars.iter().map(|(_, v)| v.clone()).collect();
    vars.push(head_w.clone());
    vars.push(head_b.clone());
    let mut optimizer = AdamW::new(
        vars,
        ParamsAdamW {
            lr: hp.learning_rate,
            ..ParamsAdamW::default()
        },
    )?;
    let mut dropout = Some(DropoutSampler::new(dropout_seed, spec.arch.hidden_dropout));

    let val_labels: Vec<u8> = val.iter().map(|e| e.label.unwrap()).collect();
    let mut history = Vec::with_capacity(hp.epochs);
    for epoch in 0..hp.epochs {
        let mut order: Vec<usize> = (0..train.len()).collect();
        master.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(hp.batch_size) {
            let refs: Vec<&EncodedExample> = chunk.iter().map(|&i| &train[i]).collect();
            let batch = Batch::new(spec, &refs)?;
            let pooled = model.pooled(&batch, &mut dropout)?;
            let pooled = match dropout.as_mut() {
                Some(d) => d.apply(&pooled)?,
                None => pooled,
            };
            let logits = pooled
                .matmul(&head_w.as_tensor().t()?)?
                .broadcast_add(head_b.as_tensor())?;
            let labels = batch.labels.as_ref().expect("training inputs are labeled");
            let loss = candle_nn::loss::cross_entropy(&logits, labels)?;
            loss_sum += scalar(&loss)? * chunk.len() as f64;
            optimizer.backward_step(&loss)?;
        }

        let head = HeadParams::from_tensors(head_w.as_tensor(), head_b.as_tensor())?;
        let (val_loss, val_macro_f1) = if val.is_empty() {
            (None, None)
        } else {
            let probs = probabilities(&model, &head, val)?;
            let preds: Vec<u8> = probs
                .iter()
                .map(|&p| Prediction::from_probability(p).label)
                .collect();
            let (_, report) = metrics::score(&preds, &val_labels)?;
            (
                Some(mean_cross_entropy(&probs, &val_labels)),
                Some(report.macro_f1),
            )
        };
        history.push(EpochRecord {
            epoch: epoch + 1,
            train_loss: loss_sum / train.len() as f64,
            val_loss,
            val_macro_f1,
        });
    }

    let encoder = EncoderWeights::from_map(
        encoder_vars
            .into_iter()
            .map(|(n, v)| (n, v.as_detached_tensor())),
    );
    Ok(TrainedModel {
        spec: spec.clone(),
        head: HeadParams::from_tensors(head_w.as_tensor(), head_b.as_tensor())?,
        history,
        encoder,
    })
}

/// One prediction per input, in order; label 1 iff the sarcastic probability is at least 0.5.
pub fn predict(model: &TrainedModel, inputs: &[EncodedExample]) -> Result<Vec<Prediction>> {
    if inputs.is_empty() {
        return Ok(Vec::new());
    }
    check_inputs(&model.spec, "input", inputs, None, false)?;
    let encoder = EncoderModel::from_weights(&model.spec, &model.encoder)?;
    Ok(probabilities(&encoder, &model.head, inputs)?
        .into_iter()
        .map(Prediction::from_probability)
        .collect())
}

/// Evaluation-mode pooled features (one row per input).
pub fn pooled_features(
    spec: &EncoderSpec,
    weights: &EncoderWeights,
    inputs: &[EncodedExample],
) -> Result<Vec<Vec<f64>>> {
    let encoder = EncoderModel::from_weights(spec, weights)?;
    let mut out = Vec::with_capacity(inputs.len());
    for chunk in inputs.chunks(EVAL_BATCH) {
        let refs: Vec<&EncodedExample> = chunk.iter().collect();
        let batch = Batch::new(spec, &refs)?;
        let rows: Vec<Vec<f64>> = encoder
            .pooled(&batch, &mut None)?
            .to_dtype(DType::F64)?
            .to_vec2()?;
        out.extend(rows);
    }
    Ok(out)
}

/// Mean cross-entropy of the head over `pooled` rows and its gradient with respect to the head
/// parameters, obtained by reverse-mode differentiation through the training graph.
pub fn head_loss_and_grad(
    pooled: &[Vec<f64>],
    labels: &[u8],
    head: &HeadParams,
) -> Result<(f64, HeadParams)> {
    head.check()?;
    if pooled.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: pooled.len(),
            right: labels.len(),
        });
    }
    if let Some(row) = pooled.iter().find(|r| r.len() != head.hidden_width) {
        return Err(Error::WidthMismatch {
            expected: head.hidden_width,
            found: row.len(),
        });
    }
    let device = candle_core::Device::Cpu;
    let flat: Vec<f64> = pooled.iter().flatten().copied().collect();
    let x = Tensor::from_vec(flat, (pooled.len(), head.hidden_width), &device)?;
    let (w, b) = head.to_tensors(DType::F64)?;
    let w = Var::from_tensor(&w)?;
    let b = Var::from_tensor(&b)?;
    let logits = x
        .matmul(&w.as_tensor().t()?)?
        .broadcast_add(b.as_tensor())?;
    let targets = Tensor::from_vec(
        labels.iter().map(|&l| l as u32).collect::<Vec<_>>(),
        labels.len(),
        &device,
    )?;
    let loss = candle_nn::loss::cross_entropy(&logits, &targets)?;
    let grads = loss.backward()?;
    let gw = grads
        .get(w.as_tensor())
        .ok_or_else(|| Error::Invalid("no gradient for head weight".into()))?;
    let gb = grads
        .get(b.as_tensor())
        .ok_or_else(|| Error::Invalid("no gradient for head bias".into()))?;
    Ok((scalar(&loss)?, HeadParams::from_tensors(gw, gb)?))
}
