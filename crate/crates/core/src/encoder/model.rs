use candle_core::{DType, Device, Module, Tensor, D};
use candle_nn::{Embedding, Linear};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spec::EncoderSpec;
use super::weights::EncoderWeights;
use crate::error::{Error, Result};
use crate::input_builder::EncodedExample;

pub const HEAD_PREFIX: &str = "classifier";

/// Additive attention bias on padded key positions.
const MASKED: f64 = -1e9;

/// Seeded inverted dropout. Masks come from a ChaCha8 stream so training is reproducible.
pub(crate) struct DropoutSampler {
    rng: ChaCha8Rng,
    p: f64,
}

impl DropoutSampler {
    pub(crate) fn new(seed: u64, p: f64) -> Self {
        DropoutSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            p,
        }
    }

    pub(crate) fn apply(&mut self, xs: &Tensor) -> Result<Tensor> {
        if self.p <= 0.0 {
            return Ok(xs.clone());
        }
        let keep = 1.0 / (1.0 - self.p);
        let n = xs.elem_count();
        let mask: Vec<f64> = (0..n)
            .map(|_| {
                if self.rng.random::<f64>() < self.p {
                    0.0
                } else {
                    keep
                }
            })
            .collect();
        let mask = Tensor::from_vec(mask, xs.shape(), xs.device())?.to_dtype(xs.dtype())?;
        Ok(xs.mul(&mask)?)
    }
}

fn maybe_dropout(xs: Tensor, dropout: &mut Option<DropoutSampler>) -> Result<Tensor> {
    match dropout {
        Some(d) => d.apply(&xs),
        None => Ok(xs),
    }
}

struct LayerNorm {
    gain: Tensor,
    shift: Tensor,
    eps: f64,
}

impl LayerNorm {
    fn forward(&self, xs: &Tensor) -> Result<Tensor> {
        // the fused kernel has no backward pass
        Ok(candle_nn::ops::layer_norm_slow(
            xs,
            &self.gain,
            &self.shift,
            self.eps as f32,
        )?)
    }
}

struct Layer {
    query: Linear,
    key: Linear,
    value: Linear,
    attn_out: Linear,
    attn_norm: LayerNorm,
    intermediate: Linear,
    output: Linear,
    out_norm: LayerNorm,
}

/// Token ids, positions and key-padding bias for one batch, trimmed to its longest real input.
pub(crate) struct Batch {
    pub ids: Tensor,
    pub positions: Tensor,
    pub bias: Tensor,
    pub labels: Option<Tensor>,
}

impl Batch {
    pub(crate) fn new(spec: &EncoderSpec, examples: &[&EncodedExample]) -> Result<Self> {
        let device = Device::Cpu;
        let b = examples.len();
        let len = examples
            .iter()
            .map(|e| e.input.real_len())
            .max()
            .unwrap_or(0)
            .max(1);
        let pad = spec.arch.pad_token_id;
        let mut ids = Vec::with_capacity(b * len);
        let mut positions = Vec::with_capacity(b * len);
        let mut bias = Vec::with_capacity(b * len);
        for e in examples {
            let real = e.input.real_len();
            for i in 0..len {
                if i < real {
                    ids.push(e.input.token_ids[i]);
                    positions.push(i as u32 + pad + 1);
                    bias.push(0.0);
                } else {
                    ids.push(pad);
                    positions.push(pad);
                    bias.push(MASKED);
                }
            }
        }
        let labels = if examples.iter().all(|e| e.label.is_some()) {
            let l: Vec<u32> = examples.iter().map(|e| e.label.unwrap() as u32).collect();
            Some(Tensor::from_vec(l, b, &device)?)
        } else {
            None
        };
        Ok(Batch {
            ids: Tensor::from_vec(ids, (b, len), &device)?,
            positions: Tensor::from_vec(positions, (b, len), &device)?,
            bias: Tensor::from_vec(bias, (b, 1, 1, len), &device)?
                .to_dtype(spec.arch.dtype.candle())?,
            labels,
        })
    }
}

/// Forward pass of the encoder body. Tensors are shared with whatever they were built from, so a
/// model built over training variables sees every optimizer update.
pub struct EncoderModel {
    spec: EncoderSpec,
    word: Embedding,
    position: Embedding,
    token_type: Tensor,
    emb_norm: LayerNorm,
    layers: Vec<Layer>,
}

impl EncoderModel {
    pub fn from_weights(spec: &EncoderSpec, weights: &EncoderWeights) -> Result<Self> {
        weights.check(spec)?;
        let get = |name: &str| -> Tensor { weights.get(name).expect("checked above").clone() };
        let linear =
            |p: &str| Linear::new(get(&format!("{p}.weight")), Some(get(&format!("{p}.bias"))));
        let eps = spec.arch.layer_norm_eps;
        let norm = |p: &str| LayerNorm {
            gain: get(&format!("{p}.weight")),
            shift: get(&format!("{p}.bias")),
            eps,
        };
        let h = spec.hidden_width;
        let layers = (0..spec.arch.num_layers)
            .map(|i| {
                let p = format!("encoder.layer.{i}");
                Layer {
                    query: linear(&format!("{p}.attention.self.query")),
                    key: linear(&format!("{p}.attention.self.key")),
                    value: linear(&format!("{p}.attention.self.value")),
                    attn_out: linear(&format!("{p}.attention.output.dense")),
                    attn_norm: norm(&format!("{p}.attention.output.LayerNorm")),
                    intermediate: linear(&format!("{p}.intermediate.dense")),
                    output: linear(&format!("{p}.output.dense")),
                    out_norm: norm(&format!("{p}.output.LayerNorm")),
                }
            })
            .collect();
        Ok(EncoderModel {
            spec: spec.clone(),
            word: Embedding::new(get("embeddings.word_embeddings.weight"), h),
            position: Embedding::new(get("embeddings.position_embeddings.weight"), h),
            token_type: get("embeddings.token_type_embeddings.weight").narrow(0, 0, 1)?,
            emb_norm: norm("embeddings.LayerNorm"),
            layers,
        })
    }

    pub fn spec(&self) -> &EncoderSpec {
        &self.spec
    }

    fn attention(
        &self,
        layer: &Layer,
        xs: &Tensor,
        bias: &Tensor,
        dropout: &mut Option<DropoutSampler>,
    ) -> Result<Tensor> {
        let (b, t, h) = xs.dims3()?;
        let heads = self.spec.arch.num_heads;
        let hd = self.spec.head_dim();
        let split = |x: Tensor| -> Result<Tensor> {
            Ok(x.reshape((b, t, heads, hd))?
                .transpose(1, 2)?
                .contiguous()?)
        };
        let q = split(layer.query.forward(xs)?)?;
        let k = split(layer.key.forward(xs)?)?;
        let v = split(layer.value.forward(xs)?)?;
        let scores = (q.matmul(&k.t()?.contiguous()?)? / (hd as f64).sqrt())?;
        let scores = scores.broadcast_add(bias)?;
        let probs = candle_nn::ops::softmax(&scores, D::Minus1)?;
        let ctx = probs
            .matmul(&v)?
            .transpose(1, 2)?
            .contiguous()?
            .reshape((b, t, h))?;
        let out = maybe_dropout(layer.attn_out.forward(&ctx)?, dropout)?;
        layer.attn_norm.forward(&(out + xs)?)
    }

    fn feed_forward(
        &self,
        layer: &Layer,
        xs: &Tensor,
        dropout: &mut Option<DropoutSampler>,
    ) -> Result<Tensor> {
        let inner = layer.intermediate.forward(xs)?.gelu_erf()?;
        let out = maybe_dropout(layer.output.forward(&inner)?, dropout)?;
        layer.out_norm.forward(&(out + xs)?)
    }

    /// Hidden states `[batch, len, hidden]`.
    pub(crate) fn forward(
        &self,
        batch: &Batch,
        dropout: &mut Option<DropoutSampler>,
    ) -> Result<Tensor> {
        let emb = self
            .word
            .forward(&batch.ids)?
            .add(&self.position.forward(&batch.positions)?)?
            .broadcast_add(&self.token_type)?;
        let mut xs = maybe_dropout(self.emb_norm.forward(&emb)?, dropout)?;
        for layer in &self.layers {
            xs = self.attention(layer, &xs, &batch.bias, dropout)?;
            xs = self.feed_forward(layer, &xs, dropout)?;
        }
        Ok(xs)
    }

    /// First-position representation `[batch, hidden]`.
    pub(crate) fn pooled(
        &self,
        batch: &Batch,
        dropout: &mut Option<DropoutSampler>,
    ) -> Result<Tensor> {
        let hidden = self.forward(batch, dropout)?;
        Ok(hidden.narrow(1, 0, 1)?.squeeze(1)?)
    }
}

/// Affine two-class head: `logits = weight · pooled + bias`, weight stored row-major `[2, width]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadParams {
    pub hidden_width: usize,
    pub weight: Vec<f64>,
    pub bias: [f64; 2],
}

impl HeadParams {
    pub fn zeros(hidden_width: usize) -> Self {
        HeadParams {
            hidden_width,
            weight: vec![0.0; 2 * hidden_width],
            bias: [0.0; 2],
        }
    }

    pub(crate) fn seeded(hidden_width: usize, seed: u64) -> Self {
        use rand_distr::{Distribution, Normal};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, super::weights::INIT_STD).expect("valid std");
        HeadParams {
            hidden_width,
            weight: (0..2 * hidden_width)
                .map(|_| normal.sample(&mut rng))
                .collect(),
            bias: [0.0; 2],
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.weight.len() != 2 * self.hidden_width {
            return Err(Error::WidthMismatch {
                expected: 2 * self.hidden_width,
                found: self.weight.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn to_tensors(&self, dtype: DType) -> Result<(Tensor, Tensor)> {
        let w = Tensor::from_vec(self.weight.clone(), (2, self.hidden_width), &Device::Cpu)?
            .to_dtype(dtype)?;
        let b = Tensor::from_vec(self.bias.to_vec(), 2, &Device::Cpu)?.to_dtype(dtype)?;
        Ok((w, b))
    }

    pub(crate) fn from_tensors(weight: &Tensor, bias: &Tensor) -> Result<Self> {
        let (rows, width) = weight.dims2()?;
        if rows != 2 {
            return Err(Error::WidthMismatch {
                expected: 2,
                found: rows,
            });
        }
        let weight: Vec<f64> = weight.to_dtype(DType::F64)?.flatten_all()?.to_vec1()?;
        let b: Vec<f64> = bias.to_dtype(DType::F64)?.to_vec1()?;
        Ok(HeadParams {
            hidden_width: width,
            weight,
            bias: [b[0], b[1]],
        })
    }
}

/// Evaluation-mode head (dropout is the identity at inference).
pub fn classification_head_forward(pooled: &[f64], head: &HeadParams) -> Result<[f64; 2]> {
    head.check()?;
    if pooled.len() != head.hidden_width {
        return Err(Error::WidthMismatch {
            expected: head.hidden_width,
            found: pooled.len(),
        });
    }
    let mut logits = head.bias;
    for (c, logit) in logits.iter_mut().enumerate() {
        let row = &head.weight[c * head.hidden_width..(c + 1) * head.hidden_width];
        *logit += row.iter().zip(pooled).map(|(w, x)| w * x).sum::<f64>();
    }
    Ok(logits)
}

pub fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let z = e0 + e1;
    [e0 / z, e1 / z]
}
