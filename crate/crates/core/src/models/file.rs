//! JSON model files.
//!
//! ```text
//! {"format":"cascade-ner-model","version":1,"kind":"gate|tagger|typer",
//!  "scheme":...,"labels":[...],"weights":{...},"transitions":{...},"meta":{...}}
//! ```
//!
//! Weight keys are 16-digit lowercase hex feature ids, so key order in the
//! file is numeric order and output is byte-stable.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::spans::TagScheme;

use super::linear::{GateModel, LinearModel, TyperModel};
use super::tagger::ChainTaggerModel;
use super::{ModelError, TrainMeta};

pub const MODEL_FORMAT: &str = "cascade-ner-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gate,
    Tagger,
    Typer,
}

#[derive(Debug, Serialize, Deserialize)]
struct Transitions {
    start: Vec<f64>,
    stop: Vec<f64>,
    matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    kind: ModelKind,
    scheme: Option<TagScheme>,
    labels: Vec<String>,
    weights: BTreeMap<String, Vec<f64>>,
    transitions: Option<Transitions>,
    meta: TrainMeta,
}

/// Any of the three native component models.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Gate(GateModel),
    Tagger(ChainTaggerModel),
    Typer(TyperModel),
}

fn encode_weights(weights: &BTreeMap<u64, Vec<f64>>) -> BTreeMap<String, Vec<f64>> {
    weights.iter().map(|(k, v)| (format!("{k:016x}"), v.clone())).collect()
}

fn decode_weights(weights: BTreeMap<String, Vec<f64>>, n_labels: usize) -> Result<BTreeMap<u64, Vec<f64>>, ModelError> {
    weights
        .into_iter()
        .map(|(k, v)| {
            let id = u64::from_str_radix(&k, 16)
                .map_err(|_| ModelError::InvalidModelFile(format!("bad feature id `{k}`")))?;
            if v.len() != n_labels {
                return Err(ModelError::InvalidModelFile(format!(
                    "feature {k} has {} weights, expected {n_labels}",
                    v.len()
                )));
            }
            Ok((id, v))
        })
        .collect()
}

fn invalid(msg: impl Into<String>) -> ModelError {
    ModelError::InvalidModelFile(msg.into())
}

impl AnyModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            AnyModel::Gate(_) => ModelKind::Gate,
            AnyModel::Tagger(_) => ModelKind::Tagger,
            AnyModel::Typer(_) => ModelKind::Typer,
        }
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            AnyModel::Gate(GateModel(m)) | AnyModel::Typer(TyperModel(m)) => ModelFile {
                format: MODEL_FORMAT.into(),
                version: MODEL_VERSION,
                kind: self.kind(),
                scheme: None,
                labels: m.labels.clone(),
                weights: encode_weights(&m.weights),
                transitions: None,
                meta: m.meta.clone(),
            },
            AnyModel::Tagger(t) => {
                let l = t.num_labels();
                ModelFile {
                    format: MODEL_FORMAT.into(),
                    version: MODEL_VERSION,
                    kind: ModelKind::Tagger,
                    scheme: Some(t.scheme),
                    labels: t.labels(),
                    weights: encode_weights(&t.emissions),
                    transitions: Some(Transitions {
                        start: t.start.clone(),
                        stop: t.stop.clone(),
                        matrix: t.transitions.chunks(l).map(<[f64]>::to_vec).collect(),
                    }),
                    meta: t.meta.clone(),
                }
            }
        };
        let mut out = serde_json::to_string(&file).expect("model weights are finite");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(invalid(format!("unexpected format `{}`", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(invalid(format!("unsupported version {}", file.version)));
        }
        let n = file.labels.len();
        match file.kind {
            ModelKind::Gate | ModelKind::Typer => {
                let expected = if file.kind == ModelKind::Gate { GateModel::labels() } else { TyperModel::labels() };
                if file.labels != expected {
                    return Err(invalid("label list does not match model kind"));
                }
                if file.transitions.is_some() || file.scheme.is_some() {
                    return Err(invalid("classifier models carry no scheme or transitions"));
                }
                let model =
                    LinearModel { labels: file.labels, weights: decode_weights(file.weights, n)?, meta: file.meta };
                Ok(if file.kind == ModelKind::Gate {
                    AnyModel::Gate(GateModel(model))
                } else {
                    AnyModel::Typer(TyperModel(model))
                })
            }
            ModelKind::Tagger => {
                let scheme = file.scheme.ok_or_else(|| invalid("tagger without scheme"))?;
                let expected: Vec<String> = scheme.labels().iter().map(|t| t.to_string()).collect();
                if file.labels != expected {
                    return Err(invalid("label list does not match tagger scheme"));
                }
                let tr = file.transitions.ok_or_else(|| invalid("tagger without transitions"))?;
                if tr.start.len() != n
                    || tr.stop.len() != n
                    || tr.matrix.len() != n
                    || tr.matrix.iter().any(|row| row.len() != n)
                {
                    return Err(invalid(format!("transition dimensions must be {n}x{n}")));
                }
                Ok(AnyModel::Tagger(ChainTaggerModel {
                    scheme,
                    emissions: decode_weights(file.weights, n)?,
                    transitions: tr.matrix.into_iter().flatten().collect(),
                    start: tr.start,
                    stop: tr.stop,
                    meta: file.meta,
                }))
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json())
            .map_err(|source| ModelError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}

impl From<GateModel> for AnyModel {
    fn from(m: GateModel) -> Self {
        AnyModel::Gate(m)
    }
}

impl From<ChainTaggerModel> for AnyModel {
    fn from(m: ChainTaggerModel) -> Self {
        AnyModel::Tagger(m)
    }
}

impl From<TyperModel> for AnyModel {
    fn from(m: TyperModel) -> Self {
        AnyModel::Typer(m)
    }
}
