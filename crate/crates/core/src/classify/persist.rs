//! Single-document JSON container shared by both model kinds:
//!
//! ```text
//! {"format_version": 1, "kind": "nb" | "svm", "vocabulary": {...},
//!  "parameters": {...}, "training_config": {...}}
//! ```
//!
//! Parameters are written as f64 in shortest round-trip form, so a
//! save/load cycle reproduces every weight bit for bit (f32 widens exactly).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tokenize::Vocabulary;

use super::{LinearSvm, Model, ModelKind, ModelTarget, NaiveBayes, SvmConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    kind: ModelKind,
    vocabulary: Vocabulary,
    parameters: Value,
    training_config: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PerClass<V> {
    negative: V,
    positive: V,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NbParams {
    log_prior: PerClass<f64>,
    log_likelihood: PerClass<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NbConfig {
    alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<ModelTarget>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SvmParams {
    weights: Vec<f64>,
    bias: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SvmFileConfig {
    lambda: f64,
    epochs: usize,
    seed: u64,
    project: bool,
    binarize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<ModelTarget>,
}

fn widen<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossless()).collect()
}

fn narrow<T: Scalar>(v: &[f64]) -> Result<Vec<T>> {
    v.iter().map(|&x| narrow_one(x)).collect()
}

fn narrow_one<T: Scalar>(x: f64) -> Result<T> {
    T::from_f64(x)
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Model(format!("parameter {x} does not fit the scalar type")))
}

impl<T: Scalar> Model<T> {
    pub fn to_json(&self) -> String {
        let (parameters, training_config) = match self {
            Model::Nb(m) => {
                let (neg, pos) = m.log_prior();
                let params = NbParams {
                    log_prior: PerClass { negative: neg.to_f64_lossless(), positive: pos.to_f64_lossless() },
                    log_likelihood: PerClass {
                        negative: widen(m.log_likelihood(false)),
                        positive: widen(m.log_likelihood(true)),
                    },
                };
                let cfg = NbConfig { alpha: m.alpha().to_f64_lossless(), target: m.target };
                (serde_json::to_value(params), serde_json::to_value(cfg))
            }
            Model::Svm(m) => {
                let c = m.config();
                let params = SvmParams { weights: widen(m.weights()), bias: m.bias().to_f64_lossless() };
                let cfg = SvmFileConfig {
                    lambda: c.lambda.to_f64_lossless(),
                    epochs: c.epochs,
                    seed: c.seed,
                    project: c.project,
                    binarize: c.binarize,
                    target: m.target,
                };
                (serde_json::to_value(params), serde_json::to_value(cfg))
            }
        };
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            kind: self.kind(),
            vocabulary: self.vocabulary().clone(),
            parameters: parameters.expect("parameters serialize"),
            training_config: training_config.expect("config serializes"),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let header: Value = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        match header.get("format_version").and_then(Value::as_u64) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => return Err(Error::Model(format!("unsupported format_version {v}, expected {FORMAT_VERSION}"))),
            None => return Err(Error::Model("missing format_version".into())),
        }
        let file: ModelFile = serde_json::from_value(header).map_err(|e| Error::Model(e.to_string()))?;
        let bad = |e: serde_json::Error| Error::Model(e.to_string());
        match file.kind {
            ModelKind::Nb => {
                let p: NbParams = serde_json::from_value(file.parameters).map_err(bad)?;
                let c: NbConfig = serde_json::from_value(file.training_config).map_err(bad)?;
                let mut m = NaiveBayes::from_parts(
                    file.vocabulary,
                    narrow_one(c.alpha)?,
                    [narrow_one(p.log_prior.negative)?, narrow_one(p.log_prior.positive)?],
                    [narrow(&p.log_likelihood.negative)?, narrow(&p.log_likelihood.positive)?],
                )?;
                m.target = c.target;
                Ok(Model::Nb(m))
            }
            ModelKind::Svm => {
                let p: SvmParams = serde_json::from_value(file.parameters).map_err(bad)?;
                let c: SvmFileConfig = serde_json::from_value(file.training_config).map_err(bad)?;
                let config = SvmConfig {
                    lambda: narrow_one(c.lambda)?,
                    epochs: c.epochs,
                    seed: c.seed,
                    project: c.project,
                    binarize: c.binarize,
                };
                let mut m = LinearSvm::from_parts(file.vocabulary, narrow(&p.weights)?, narrow_one(p.bias)?, config)?;
                m.target = c.target;
                Ok(Model::Svm(m))
            }
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
