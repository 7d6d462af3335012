//! Structure and classifier evaluation, the random-tree baseline, and the
//! cross-validation and ablation harnesses.

mod ablation;
mod artifacts;
mod baseline;
mod crossval;
mod metrics;
mod pipeline;
mod render;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::classifiers::ModelError;
use crate::corpus::{Argument, CorpusError, Relation};
use crate::decoder::{DecodeError, PredictedStructure};
use crate::features::{FeatureError, FeatureGroup};

pub use ablation::{run_ablation, AblationMode, AblationReport, AblationRow};
pub use artifacts::{
    load_pipeline, save_pipeline, PipelineManifest, ResolverArtifact, FEATURES_FILE, MANIFEST_FILE,
    MODEL_FILE, PIPELINE_FORMAT, PIPELINE_VERSION, RESOLVER_FILE,
};
pub use baseline::{random_baseline, random_tree, RandomBaseline};
pub use crossval::{run_cross_validation, select_arguments, CrossValReport, SkippedArgument};
pub use metrics::{
    classifier_metrics, ArgumentSim, ClassMetrics, ClassifierReport, NodeGroup, PairPrediction,
    SimReport,
};
pub use pipeline::{
    fit_extractor, train_pipeline, ExperimentConfig, ExperimentFramework, ModelFamily, Resolver,
    Resources, TrainedPipeline, DEFAULT_FOLDS, DEFAULT_SEED,
};
pub use render::{render_ablation, render_classifier, render_crossval, render_sim};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("argument {0}: predicted and gold node sets differ")]
    NodeMismatch(String),
    #[error("argument {0}: gold structure has no edges")]
    NoGoldEdges(String),
    #[error("argument {0}: predicted structure carries no edge labels")]
    MissingLabels(String),
    #[error("{predictions} predictions for {gold} gold labels")]
    LengthMismatch { predictions: usize, gold: usize },
    #[error("no pair predictions to evaluate")]
    Empty,
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("no usable arguments after filtering ({skipped} skipped)")]
    NoArguments { skipped: usize },
    #[error("group {0} is not enabled in the base configuration")]
    GroupNotInBase(FeatureGroup),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Artifact { path: String, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

fn check_nodes(predicted: &PredictedStructure, gold: &Argument) -> Result<(), EvalError> {
    let p: BTreeSet<&str> = predicted.nodes.iter().map(String::as_str).collect();
    let g: BTreeSet<&str> = gold.nodes.iter().map(|n| n.id.as_str()).collect();
    if p != g || p.len() != predicted.nodes.len() {
        return Err(EvalError::NodeMismatch(gold.id.clone()));
    }
    if gold.edges.is_empty() {
        return Err(EvalError::NoGoldEdges(gold.id.clone()));
    }
    Ok(())
}

/// Fraction of gold edges present, with direction, in the prediction.
pub fn sim_score(predicted: &PredictedStructure, gold: &Argument) -> Result<f64, EvalError> {
    check_nodes(predicted, gold)?;
    let pred: BTreeSet<(&str, &str)> = predicted
        .edges
        .iter()
        .map(|e| (e.child.as_str(), e.parent.as_str()))
        .collect();
    let hits = gold
        .edges
        .iter()
        .filter(|e| pred.contains(&(e.child.as_str(), e.parent.as_str())))
        .count();
    Ok(hits as f64 / gold.edges.len() as f64)
}

/// As [`sim_score`], but an edge also needs the gold label.
pub fn labeled_sim_score(
    predicted: &PredictedStructure,
    gold: &Argument,
) -> Result<f64, EvalError> {
    check_nodes(predicted, gold)?;
    if !predicted.edges.iter().all(|e| e.label.is_some()) {
        return Err(EvalError::MissingLabels(gold.id.clone()));
    }
    let pred: BTreeSet<(&str, &str, Relation)> = predicted
        .edges
        .iter()
        .map(|e| {
            (
                e.child.as_str(),
                e.parent.as_str(),
                e.label.expect("checked"),
            )
        })
        .collect();
    let hits = gold
        .edges
        .iter()
        .filter(|e| pred.contains(&(e.child.as_str(), e.parent.as_str(), e.label)))
        .count();
    Ok(hits as f64 / gold.edges.len() as f64)
}
