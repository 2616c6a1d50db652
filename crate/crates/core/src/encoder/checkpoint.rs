//! Checkpoint directory layout (format version 1):
//!
//! ```text
//! manifest.json        {"format": "sarcasm-checkpoint", "version": 1, "encoder_id": ...}
//! spec.json            EncoderSpec
//! hyperparams.json     Hyperparams used for training
//! input.json           InputSettings (mode, context turns, normalization, tokenizer)
//! head.json            HeadParams
//! history.json         [EpochRecord, ...]
//! encoder.safetensors  fine-tuned encoder tensors
//! ```

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::spec::EncoderSpec;
use super::train::{EpochRecord, TrainedModel};
use super::weights::EncoderWeights;
use super::Hyperparams;
use crate::error::{Error, Result};
use crate::input_builder::InputSettings;

pub const CHECKPOINT_FORMAT: &str = "sarcasm-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    encoder_id: String,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: TrainedModel,
    pub hyperparams: Hyperparams,
    pub input: InputSettings,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn read_json<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
}

impl Checkpoint {
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_json(
            dir,
            "manifest.json",
            &Manifest {
                format: CHECKPOINT_FORMAT.to_string(),
                version: CHECKPOINT_VERSION,
                encoder_id: self.model.spec.encoder_id.clone(),
            },
        )?;
        write_json(dir, "spec.json", &self.model.spec)?;
        write_json(dir, "hyperparams.json", &self.hyperparams)?;
        write_json(dir, "input.json", &self.input)?;
        write_json(dir, "head.json", &self.model.head)?;
        write_json(dir, "history.json", &self.model.history)?;
        self.model.encoder.save(dir.join("encoder.safetensors"))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: Manifest = read_json(dir, "manifest.json")?;
        if manifest.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!(
                "unrecognised format {:?}",
                manifest.format
            )));
        }
        if manifest.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {} (expected {CHECKPOINT_VERSION})",
                manifest.version
            )));
        }
        let spec: EncoderSpec = read_json(dir, "spec.json")?;
        if spec.encoder_id != manifest.encoder_id {
            return Err(Error::Checkpoint(format!(
                "manifest names encoder {}, spec names {}",
                manifest.encoder_id, spec.encoder_id
            )));
        }
        let head: super::HeadParams = read_json(dir, "head.json")?;
        head.check()?;
        if head.hidden_width != spec.hidden_width {
            return Err(Error::WidthMismatch {
                expected: spec.hidden_width,
                found: head.hidden_width,
            });
        }
        let history: Vec<EpochRecord> = read_json(dir, "history.json")?;
        let encoder = EncoderWeights::load(dir.join("encoder.safetensors"))?;
        encoder.check(&spec)?;
        Ok(Checkpoint {
            model: TrainedModel {
                spec,
                head,
                history,
                encoder,
            },
            hyperparams: read_json(dir, "hyperparams.json")?,
            input: read_json(dir, "input.json")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Normalization;
    use crate::encoder::{HeadParams, SeededInit, WeightProvider};
    use crate::input_builder::InputMode;
    use crate::tokenizer::TokenizerSpec;

    fn sample() -> Checkpoint {
        let spec = EncoderSpec::tiny_test();
        let encoder = SeededInit { seed: 1 }.load(&spec).unwrap();
        Checkpoint {
            model: TrainedModel {
                head: HeadParams::seeded(spec.hidden_width, 2),
                spec,
                history: vec![EpochRecord {
                    epoch: 1,
                    train_loss: 0.69,
                    val_loss: None,
                    val_macro_f1: None,
                }],
                encoder,
            },
            hyperparams: Hyperparams::default(),
            input: InputSettings {
                mode: InputMode::ContextResponseSeparated,
                context_turns: 2,
                normalization: Normalization::None,
                tokenizer: TokenizerSpec::Word,
            },
        }
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let ckpt = sample();
        ckpt.save(dir.path()).unwrap();
        let back = Checkpoint::load(dir.path()).unwrap();
        assert_eq!(back.model.spec, ckpt.model.spec);
        assert_eq!(back.model.head, ckpt.model.head);
        assert_eq!(back.model.history, ckpt.model.history);
        assert_eq!(back.hyperparams, ckpt.hyperparams);
        assert_eq!(back.input, ckpt.input);
        let name = "encoder.layer.0.output.dense.weight";
        let a: Vec<f64> = ckpt
            .model
            .encoder
            .get(name)
            .unwrap()
            .flatten_all()
            .unwrap()
            .to_vec1()
            .unwrap();
        let b: Vec<f64> = back
            .model
            .encoder
            .get(name)
            .unwrap()
            .flatten_all()
            .unwrap()
            .to_vec1()
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_other_versions_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        sample().save(dir.path()).unwrap();
        fs::write(
            dir.path().join("manifest.json"),
            r#"{"format": "sarcasm-checkpoint", "version": 99, "encoder_id": "tiny-test"}"#,
        )
        .unwrap();
        assert!(matches!(
            Checkpoint::load(dir.path()),
            Err(Error::Checkpoint(_))
        ));
        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(
            Checkpoint::load(empty.path()),
            Err(Error::Io { .. })
        ));
    }
}
