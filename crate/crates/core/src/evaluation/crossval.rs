use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{
    classifier_metrics, ArgumentSim, ClassifierReport, PairPrediction, SimReport,
};
use super::pipeline::{combined_classes, primary_classes, resolver_classes, train_pipeline};
use super::{
    labeled_sim_score, sim_score, EvalError, ExperimentConfig, ExperimentFramework, Resources,
};
use crate::corpus::{split_folds, validate_argument, Argument, ValidationOptions};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkippedArgument {
    pub argument_id: String,
    pub reason: String,
}

/// Cross-validated classifier and structure results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossValReport {
    pub framework: String,
    pub model: String,
    /// Decoder for tree arguments; chain arguments use the chain decoder.
    pub decoder: String,
    pub features: String,
    pub k: usize,
    pub seed: u64,
    pub arguments: usize,
    pub skipped: Vec<SkippedArgument>,
    /// Feature width of each fold's extractor (the n-gram block varies).
    pub feature_width: Vec<usize>,
    /// Mean of the per-fold classifier reports.
    pub classifier: ClassifierReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<ClassifierReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolver: Option<ClassifierReport>,
    pub structure: SimReport,
}

struct FoldResult {
    width: usize,
    primary: Option<ClassifierReport>,
    resolver: Option<ClassifierReport>,
    combined: Option<ClassifierReport>,
    sims: Vec<ArgumentSim>,
}

/// Arguments usable under `config`, and the reasons for the others.
pub fn select_arguments<'a>(
    corpus: &'a [Argument],
    config: &ExperimentConfig,
) -> (Vec<&'a Argument>, Vec<SkippedArgument>) {
    let opts = ValidationOptions {
        node_cap: config.max_nodes,
    };
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for arg in corpus {
        let report = validate_argument(arg, &opts);
        let reason = if !report.is_ok() {
            Some(report.to_string())
        } else if arg.len() < 2 {
            Some("fewer than two nodes".to_string())
        } else if arg.len() > config.max_nodes {
            Some(format!(
                "{} nodes exceeds max_nodes {}",
                arg.len(),
                config.max_nodes
            ))
        } else if config
            .decoder_cap(arg.kind)
            .is_some_and(|cap| arg.len() > cap)
        {
            Some(format!(
                "{} nodes exceeds the {} decoder cap",
                arg.len(),
                config.decoder_for(arg.kind)
            ))
        } else if arg.has_attack() && !config.framework.handles_attack() {
            Some(format!(
                "attack edges are not used by the {} framework",
                config.framework
            ))
        } else {
            None
        };
        match reason {
            Some(reason) => {
                warn!("skipping argument {}: {reason}", arg.id);
                skipped.push(SkippedArgument {
                    argument_id: arg.id.clone(),
                    reason,
                });
            }
            None => kept.push(arg),
        }
    }
    (kept, skipped)
}

fn report(
    classes: Vec<String>,
    outcomes: &[(PairPrediction, usize)],
) -> Result<Option<ClassifierReport>, EvalError> {
    if outcomes.is_empty() {
        return Ok(None);
    }
    let (preds, gold): (Vec<PairPrediction>, Vec<usize>) = outcomes.iter().copied().unzip();
    classifier_metrics(&classes, &preds, &gold).map(Some)
}

/// k-fold cross-validation over arguments: per fold, fit the n-gram
/// vocabulary and classifiers on the training arguments, then score,
/// decode and evaluate the held-out ones.
pub fn run_cross_validation(
    corpus: &[Argument],
    config: &ExperimentConfig,
    resources: &Resources<'_>,
) -> Result<CrossValReport, EvalError> {
    config.validate()?;
    let (selected, skipped) = select_arguments(corpus, config);
    if selected.is_empty() {
        return Err(EvalError::NoArguments {
            skipped: skipped.len(),
        });
    }
    let owned: Vec<Argument> = selected.iter().map(|a| (*a).clone()).collect();
    let folds = split_folds(&owned, config.k, config.seed)?;
    info!(
        "cross-validating {} arguments in {} folds ({} skipped)",
        owned.len(),
        config.k,
        skipped.len()
    );

    let results: Vec<FoldResult> = (0..config.k)
        .into_par_iter()
        .map(|fold| -> Result<FoldResult, EvalError> {
            let (train, test) = folds.split(&owned, fold);
            let pipeline = train_pipeline(
                &train,
                config,
                resources,
                config.seed.wrapping_add(fold as u64),
            )?;
            let mut primary = Vec::new();
            let mut resolver = Vec::new();
            let mut combined = Vec::new();
            let mut sims = Vec::new();
            for arg in test {
                let prepared = pipeline.prepare(arg, resources.entities)?;
                let scores = pipeline.score(&prepared)?;
                let predicted = pipeline.decode(
                    &prepared,
                    &scores,
                    config.decoder_for(arg.kind),
                    &config.caps,
                )?;
                let outcomes =
                    pipeline.classify_pairs(arg, &prepared, &scores, config.detection)?;
                primary.extend(outcomes.primary);
                resolver.extend(outcomes.resolver);
                combined.extend(outcomes.combined);
                sims.push(ArgumentSim {
                    argument_id: arg.id.clone(),
                    fold,
                    nodes: arg.len(),
                    sim_score: sim_score(&predicted, arg)?,
                    labeled_sim_score: if config.framework.is_labeled() {
                        Some(labeled_sim_score(&predicted, arg)?)
                    } else {
                        None
                    },
                });
            }
            Ok(FoldResult {
                width: pipeline.extractor.width(),
                primary: report(primary_classes(config.framework), &primary)?,
                resolver: report(resolver_classes(), &resolver)?,
                combined: report(combined_classes(), &combined)?,
                sims,
            })
        })
        .collect::<Result<_, _>>()?;

    let mean = |pick: fn(&FoldResult) -> Option<ClassifierReport>| {
        let reports: Vec<ClassifierReport> = results.iter().filter_map(pick).collect();
        ClassifierReport::mean(&reports)
    };
    let primary = mean(|r| r.primary.clone());
    let (classifier, detection, resolver) = if config.framework == ExperimentFramework::TwoStep {
        (
            mean(|r| r.combined.clone()),
            primary,
            mean(|r| r.resolver.clone()),
        )
    } else {
        (primary, None, None)
    };
    let mut sims: Vec<ArgumentSim> = results
        .iter()
        .flat_map(|r| r.sims.iter().cloned())
        .collect();
    sims.sort_by(|a, b| a.argument_id.cmp(&b.argument_id));
    Ok(CrossValReport {
        framework: config.framework.to_string(),
        model: config.model.to_string(),
        decoder: config.decoder.to_string(),
        features: config.features.to_string(),
        k: config.k,
        seed: config.seed,
        arguments: owned.len(),
        skipped,
        feature_width: results.iter().map(|r| r.width).collect(),
        classifier: classifier.ok_or(EvalError::Empty)?,
        detection,
        resolver,
        structure: SimReport::from_arguments(sims),
    })
}
