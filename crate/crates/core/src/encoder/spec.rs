use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenizer::{Tokenizer, WordTokenizer};

pub const TINY_TEST: &str = "tiny-test";
pub const ROBERTA_LARGE: &str = "roberta-large";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamDType {
    F32,
    F64,
}

impl ParamDType {
    pub fn candle(&self) -> candle_core::DType {
        match self {
            ParamDType::F32 => candle_core::DType::F32,
            ParamDType::F64 => candle_core::DType::F64,
        }
    }
}

/// Post-layer-norm transformer encoder in the BERT/RoBERTa layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub num_layers: usize,
    pub num_heads: usize,
    pub intermediate_size: usize,
    /// Rows of the position table. Positions start at `pad_token_id + 1`, so this must be at
    /// least `budget + pad_token_id + 1`.
    pub max_positions: usize,
    pub type_vocab_size: usize,
    pub layer_norm_eps: f64,
    pub hidden_dropout: f64,
    pub pad_token_id: u32,
    pub dtype: ParamDType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub encoder_id: String,
    pub parameter_count: usize,
    pub vocabulary_size: usize,
    pub hidden_width: usize,
    pub arch: ArchConfig,
}

impl EncoderSpec {
    pub fn new(
        encoder_id: impl Into<String>,
        vocabulary_size: usize,
        hidden_width: usize,
        arch: ArchConfig,
    ) -> Result<Self> {
        if hidden_width == 0 || arch.num_heads == 0 || !hidden_width.is_multiple_of(arch.num_heads)
        {
            return Err(Error::Invalid(format!(
                "hidden width {hidden_width} not divisible into {} heads",
                arch.num_heads
            )));
        }
        let mut spec = EncoderSpec {
            encoder_id: encoder_id.into(),
            parameter_count: 0,
            vocabulary_size,
            hidden_width,
            arch,
        };
        spec.parameter_count = spec
            .parameter_shapes()
            .iter()
            .map(|(_, s)| s.iter().product::<usize>())
            .sum();
        Ok(spec)
    }

    /// 2 layers, width 32, 2 heads, paired with [`WordTokenizer`]. Runs in f64 so that
    /// finite-difference checks are meaningful.
    pub fn tiny_test() -> Self {
        let arch = ArchConfig {
            num_layers: 2,
            num_heads: 2,
            intermediate_size: 64,
            max_positions: 514,
            type_vocab_size: 1,
            layer_norm_eps: 1e-5,
            hidden_dropout: 0.1,
            pad_token_id: 1,
            dtype: ParamDType::F64,
        };
        EncoderSpec::new(TINY_TEST, WordTokenizer::new().vocab_size(), 32, arch)
            .expect("tiny-test spec is well formed")
    }

    pub fn roberta_large() -> Self {
        let arch = ArchConfig {
            num_layers: 24,
            num_heads: 16,
            intermediate_size: 4096,
            max_positions: 514,
            type_vocab_size: 1,
            layer_norm_eps: 1e-5,
            hidden_dropout: 0.1,
            pad_token_id: 1,
            dtype: ParamDType::F32,
        };
        EncoderSpec::new(ROBERTA_LARGE, 50_265, 1024, arch)
            .expect("roberta-large spec is well formed")
    }

    pub fn by_id(encoder_id: &str) -> Result<Self> {
        match encoder_id {
            TINY_TEST => Ok(Self::tiny_test()),
            ROBERTA_LARGE => Ok(Self::roberta_large()),
            other => Err(Error::UnknownEncoder(other.to_string())),
        }
    }

    pub fn head_dim(&self) -> usize {
        self.hidden_width / self.arch.num_heads
    }

    /// Largest sequence the position table can hold.
    pub fn max_sequence(&self) -> usize {
        self.arch.max_positions - self.arch.pad_token_id as usize - 1
    }

    pub fn check_tokenizer(&self, tokenizer: &dyn Tokenizer) -> Result<()> {
        if tokenizer.vocab_size() != self.vocabulary_size {
            return Err(Error::Invalid(format!(
                "tokenizer vocabulary {} does not match encoder {} vocabulary {}",
                tokenizer.vocab_size(),
                self.encoder_id,
                self.vocabulary_size
            )));
        }
        Ok(())
    }

    /// Encoder tensor names and shapes, using the Hugging Face BERT/RoBERTa naming.
    pub fn parameter_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let h = self.hidden_width;
        let a = &self.arch;
        let mut out = vec![
            (
                "embeddings.word_embeddings.weight".to_string(),
                vec![self.vocabulary_size, h],
            ),
            (
                "embeddings.position_embeddings.weight".to_string(),
                vec![a.max_positions, h],
            ),
            (
                "embeddings.token_type_embeddings.weight".to_string(),
                vec![a.type_vocab_size, h],
            ),
            ("embeddings.LayerNorm.weight".to_string(), vec![h]),
            ("embeddings.LayerNorm.bias".to_string(), vec![h]),
        ];
        for i in 0..a.num_layers {
            let p = format!("encoder.layer.{i}");
            for name in ["query", "key", "value"] {
                out.push((format!("{p}.attention.self.{name}.weight"), vec![h, h]));
                out.push((format!("{p}.attention.self.{name}.bias"), vec![h]));
            }
            out.push((format!("{p}.attention.output.dense.weight"), vec![h, h]));
            out.push((format!("{p}.attention.output.dense.bias"), vec![h]));
            out.push((format!("{p}.attention.output.LayerNorm.weight"), vec![h]));
            out.push((format!("{p}.attention.output.LayerNorm.bias"), vec![h]));
            out.push((
                format!("{p}.intermediate.dense.weight"),
                vec![a.intermediate_size, h],
            ));
            out.push((
                format!("{p}.intermediate.dense.bias"),
                vec![a.intermediate_size],
            ));
            out.push((
                format!("{p}.output.dense.weight"),
                vec![h, a.intermediate_size],
            ));
            out.push((format!("{p}.output.dense.bias"), vec![h]));
            out.push((format!("{p}.output.LayerNorm.weight"), vec![h]));
            out.push((format!("{p}.output.LayerNorm.bias"), vec![h]));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_spec_pairs_with_word_tokenizer() {
        let spec = EncoderSpec::tiny_test();
        assert_eq!(spec.arch.num_layers, 2);
        assert_eq!(spec.hidden_width, 32);
        assert_eq!(spec.arch.num_heads, 2);
        assert!(spec.vocabulary_size <= 1000);
        spec.check_tokenizer(&WordTokenizer::new()).unwrap();
        assert!(spec.max_sequence() >= 256);
    }

    #[test]
    fn roberta_large_size() {
        let spec = EncoderSpec::roberta_large();
        assert_eq!(spec.vocabulary_size, 50_265);
        // published size is 355M parameters; the encoder body alone is 354.3M
        let rel = (spec.parameter_count as f64 - 355e6).abs() / 355e6;
        assert!(rel < 0.005, "{}", spec.parameter_count);
        assert_eq!(spec.parameter_count, 354_310_144);
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(
            EncoderSpec::by_id("bert-base"),
            Err(Error::UnknownEncoder(_))
        ));
    }
}
