use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use candle_core::{Device, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::spec::EncoderSpec;
use crate::error::{Error, Result};

/// Named encoder tensors, keyed by the names from [`EncoderSpec::parameter_shapes`].
#[derive(Debug, Clone, Default)]
pub struct EncoderWeights {
    tensors: BTreeMap<String, Tensor>,
}

impl EncoderWeights {
    pub fn from_map(tensors: impl IntoIterator<Item = (String, Tensor)>) -> Self {
        EncoderWeights {
            tensors: tensors.into_iter().collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.tensors.iter()
    }

    pub fn into_map(self) -> BTreeMap<String, Tensor> {
        self.tensors
    }

    /// Every expected tensor is present with the expected shape and the encoder's dtype.
    pub fn check(&self, spec: &EncoderSpec) -> Result<()> {
        let dtype = spec.arch.dtype.candle();
        for (name, shape) in spec.parameter_shapes() {
            let t = self
                .tensors
                .get(&name)
                .ok_or_else(|| Error::Checkpoint(format!("missing encoder tensor {name}")))?;
            if t.dims() != shape.as_slice() {
                return Err(Error::Checkpoint(format!(
                    "tensor {name} has shape {:?}, expected {shape:?}",
                    t.dims()
                )));
            }
            if t.dtype() != dtype {
                return Err(Error::Checkpoint(format!(
                    "tensor {name} has dtype {:?}, expected {dtype:?}",
                    t.dtype()
                )));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let map: HashMap<String, Tensor> = self
            .tensors
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        candle_core::safetensors::save(&map, path.as_ref())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let map = candle_core::safetensors::load(path.as_ref(), &Device::Cpu)?;
        Ok(Self::from_map(map))
    }
}

/// Source of initial encoder weights for fine-tuning.
pub trait WeightProvider {
    fn load(&self, spec: &EncoderSpec) -> Result<EncoderWeights>;
}

/// Fresh weights from a seeded generator: normal(0, 0.02) matrices, zero biases, unit layer-norm
/// gains. Used for the tiny test encoder, which has no pretrained checkpoint.
#[derive(Debug, Clone, Copy)]
pub struct SeededInit {
    pub seed: u64,
}

pub(crate) const INIT_STD: f64 = 0.02;

impl WeightProvider for SeededInit {
    fn load(&self, spec: &EncoderSpec) -> Result<EncoderWeights> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let dtype = spec.arch.dtype.candle();
        let mut tensors = BTreeMap::new();
        for (name, shape) in spec.parameter_shapes() {
            let n: usize = shape.iter().product();
            let values: Vec<f64> = if name.ends_with("LayerNorm.weight") {
                vec![1.0; n]
            } else if name.ends_with(".bias") {
                vec![0.0; n]
            } else {
                (0..n).map(|_| normal.sample(&mut rng)).collect()
            };
            let t = Tensor::from_vec(values, shape, &Device::Cpu)?.to_dtype(dtype)?;
            tensors.insert(name, t);
        }
        Ok(EncoderWeights { tensors })
    }
}

/// Pretrained weights from `<dir>/model.safetensors` in Hugging Face layout. A leading
/// `roberta.` or `bert.` prefix is stripped; tensors outside the encoder body (pooler, LM head)
/// are ignored.
#[derive(Debug, Clone)]
pub struct SafetensorsDir {
    pub dir: PathBuf,
}

impl WeightProvider for SafetensorsDir {
    fn load(&self, spec: &EncoderSpec) -> Result<EncoderWeights> {
        let path = self.dir.join("model.safetensors");
        if !path.exists() {
            return Err(Error::Checkpoint(format!(
                "no pretrained weights at {}",
                path.display()
            )));
        }
        let raw = candle_core::safetensors::load(&path, &Device::Cpu)?;
        let wanted: HashMap<String, Vec<usize>> = spec.parameter_shapes().into_iter().collect();
        let dtype = spec.arch.dtype.candle();
        let mut tensors = BTreeMap::new();
        for (name, t) in raw {
            let stripped = name
                .strip_prefix("roberta.")
                .or_else(|| name.strip_prefix("bert."))
                .unwrap_or(&name);
            let stripped = stripped
                .replace("LayerNorm.gamma", "LayerNorm.weight")
                .replace("LayerNorm.beta", "LayerNorm.bias");
            if wanted.contains_key(&stripped) {
                tensors.insert(stripped, t.to_dtype(dtype)?);
            }
        }
        let weights = EncoderWeights { tensors };
        weights.check(spec)?;
        Ok(weights)
    }
}
