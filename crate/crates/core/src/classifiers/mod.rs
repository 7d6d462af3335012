//! Pair scorers: a linear SVM trained by stochastic subgradient descent and
//! a ReLU multilayer perceptron, plus calibration of their confidences into
//! per-argument edge scores.

mod linear;
mod mlp;
mod persist;
mod scoring;
mod standardize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use linear::{train_linear_svm, LinearModel, SvmConfig};
pub use mlp::{train_mlp, Activation, DenseLayer, Gradients, MlpConfig, MlpModel};
pub use persist::{load_model, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use scoring::{calibrate_scores, score_argument, ScoreMatrix, ScoreMode};
pub use standardize::Standardizer;

pub const SUPPORT: &str = "support";
pub const ATTACK: &str = "attack";
pub const NEUTRAL: &str = "neutral";
/// Positive class of the Detection classifier (Support or Attack).
pub const EDGE: &str = "edge";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training data has a single class")]
    SingleClass,
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("feature width {found} does not match the model's {expected}")]
    Width { expected: usize, found: usize },
    #[error("label {label} outside the {classes}-class catalog")]
    Label { label: usize, classes: usize },
    #[error("model was trained on feature layout {expected}, pipeline has {found}")]
    LayoutMismatch { expected: String, found: String },
    #[error("model lacks class {0:?}")]
    MissingClass(String),
    #[error("argument {0} has fewer than two nodes")]
    TooSmall(String),
    #[error("empty score list")]
    Empty,
    #[error("unsupported model file version {found} (expected {expected})")]
    Version { expected: u32, found: u32 },
    #[error("corrupt model file {path}: {message}")]
    Corrupt { path: String, message: String },
    #[error("cannot access model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Row-major feature matrix with class ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    width: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
    classes: Vec<String>,
}

impl Dataset {
    pub fn new<S: Into<String>>(width: usize, classes: impl IntoIterator<Item = S>) -> Self {
        Dataset {
            width,
            values: Vec::new(),
            labels: Vec::new(),
            classes: classes.into_iter().map(Into::into).collect(),
        }
    }

    pub fn push(&mut self, row: &[f64], label: usize) -> Result<(), ModelError> {
        if row.len() != self.width {
            return Err(ModelError::Width {
                expected: self.width,
                found: row.len(),
            });
        }
        if label >= self.classes.len() {
            return Err(ModelError::Label {
                label,
                classes: self.classes.len(),
            });
        }
        self.values.extend_from_slice(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Per-example weights `N / (K * count(class))`, or all ones.
    pub fn class_weights(&self, balanced: bool) -> Vec<f64> {
        if !balanced {
            return vec![1.0; self.classes.len()];
        }
        let counts = self.class_counts();
        let present = counts.iter().filter(|&&c| c > 0).count() as f64;
        let n = self.len() as f64;
        counts
            .iter()
            .map(|&c| {
                if c == 0 {
                    0.0
                } else {
                    n / (present * c as f64)
                }
            })
            .collect()
    }

    fn check_trainable(&self) -> Result<(), ModelError> {
        if self.len() < self.classes.len() {
            return Err(ModelError::TooFewRows {
                needed: self.classes.len(),
                got: self.len(),
            });
        }
        if self.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(ModelError::SingleClass);
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("features"));
        }
        Ok(())
    }
}

/// A trained scorer of either family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Model {
    Linear(LinearModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn classes(&self) -> &[String] {
        match self {
            Model::Linear(m) => &m.classes,
            Model::Mlp(m) => &m.classes,
        }
    }

    pub fn fingerprint(&self) -> &str {
        match self {
            Model::Linear(m) => &m.fingerprint,
            Model::Mlp(m) => &m.fingerprint,
        }
    }

    pub fn set_fingerprint(&mut self, fingerprint: impl Into<String>) {
        let f = fingerprint.into();
        match self {
            Model::Linear(m) => m.fingerprint = f,
            Model::Mlp(m) => m.fingerprint = f,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Model::Linear(m) => m.standardizer.width(),
            Model::Mlp(m) => m.standardizer.width(),
        }
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes().iter().position(|c| c == name)
    }

    /// Raw confidence for the positive class (`classes[1]`) of a binary
    /// model: the SVM margin or the MLP probability.
    pub fn positive_score(&self, x: &[f64]) -> f64 {
        match self {
            Model::Linear(m) => {
                let margins = m.decision_value(x);
                if m.is_binary() {
                    margins[0]
                } else {
                    margins[1]
                }
            }
            Model::Mlp(m) => m.predict_proba(x)[1],
        }
    }

    /// Distribution over the class catalog.
    pub fn confidences(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Model::Linear(m) => m.confidences(x),
            Model::Mlp(m) => m.predict_proba(x),
        }
    }

    /// Index of the most confident class; ties go to the lower index.
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.confidences(x))
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}
