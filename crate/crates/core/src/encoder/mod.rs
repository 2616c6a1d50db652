//! Pretrained bidirectional encoder with a two-class head, plus fine-tuning and prediction.

mod checkpoint;
mod model;
mod spec;
mod train;
mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input_builder::InputMode;

pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use model::{classification_head_forward, softmax2, EncoderModel, HeadParams, HEAD_PREFIX};
pub use spec::{ArchConfig, EncoderSpec, ParamDType, ROBERTA_LARGE, TINY_TEST};
pub use train::{
    fine_tune, head_loss_and_grad, pooled_features, predict, EpochRecord, Prediction, TrainedModel,
};
pub use weights::{EncoderWeights, SafetensorsDir, SeededInit, WeightProvider};

/// Training constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub max_seq_len_response: usize,
    pub max_seq_len_context: usize,
    pub split_ratio: f64,
    pub seed: u64,
    pub batch_size: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 1e-5,
            epochs: 3,
            max_seq_len_response: 50,
            max_seq_len_context: 256,
            split_ratio: 0.9,
            seed: 42,
            batch_size: 16,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Invalid(format!("hyperparameter {what}")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.max_seq_len_response == 0 || self.max_seq_len_context == 0 {
            return bad("sequence budgets must be positive");
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad("split_ratio must lie in (0, 1)");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        Ok(())
    }

    pub fn budget_for(&self, mode: InputMode) -> usize {
        match mode {
            InputMode::ResponseOnly => self.max_seq_len_response,
            InputMode::ContextResponse | InputMode::ContextResponseSeparated => {
                self.max_seq_len_context
            }
        }
    }
}
