use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use super::EvalError;
use crate::classifiers::{ATTACK, EDGE, NEUTRAL, SUPPORT};

/// One classified pair: the argmax class and the confidence that feeds the
/// per-class mean (for binary models, the calibrated positive score).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairPrediction {
    pub predicted: usize,
    pub confidence: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassMetrics {
    pub class: String,
    /// Gold pairs of this class.
    pub count: usize,
    pub confidence: Option<f64>,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
}

/// Per-class mean confidence, recall and precision plus accuracy.
///
/// Serializes flat, with a one-letter class suffix: `confidence_s`,
/// `recall_n`, ... Undefined values are `null`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierReport {
    pub classes: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub pairs: usize,
}

pub(crate) fn suffix(class: &str) -> String {
    class
        .chars()
        .next()
        .map(|c| c.to_ascii_lowercase().to_string())
        .unwrap_or_default()
}

impl Serialize for ClassifierReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        let ordered = self.ordered();
        for metric in ["confidence", "recall", "precision"] {
            for c in &ordered {
                let value = match metric {
                    "confidence" => c.confidence,
                    "recall" => c.recall,
                    _ => c.precision,
                };
                map.serialize_entry(&format!("{metric}_{}", suffix(&c.class)), &value)?;
            }
        }
        map.serialize_entry("accuracy", &self.accuracy)?;
        for c in &ordered {
            map.serialize_entry(&format!("count_{}", suffix(&c.class)), &c.count)?;
        }
        map.serialize_entry("pairs", &self.pairs)?;
        map.end()
    }
}

fn ratio(num: f64, den: usize) -> Option<f64> {
    (den > 0).then(|| num / den as f64)
}

pub fn classifier_metrics(
    classes: &[String],
    predictions: &[PairPrediction],
    gold: &[usize],
) -> Result<ClassifierReport, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let k = classes.len();
    let mut gold_count = vec![0usize; k];
    let mut pred_count = vec![0usize; k];
    let mut hits = vec![0usize; k];
    let mut conf_sum = vec![0.0; k];
    let mut conf_count = vec![0usize; k];
    for (p, &g) in predictions.iter().zip(gold) {
        gold_count[g] += 1;
        pred_count[p.predicted] += 1;
        if p.predicted == g {
            hits[g] += 1;
        }
        if let Some(c) = p.confidence {
            conf_sum[g] += c;
            conf_count[g] += 1;
        }
    }
    let metrics = (0..k)
        .map(|c| ClassMetrics {
            class: classes[c].clone(),
            count: gold_count[c],
            confidence: ratio(conf_sum[c], conf_count[c]),
            recall: ratio(hits[c] as f64, gold_count[c]),
            precision: ratio(hits[c] as f64, pred_count[c]),
        })
        .collect();
    Ok(ClassifierReport {
        classes: metrics,
        accuracy: hits.iter().sum::<usize>() as f64 / gold.len() as f64,
        pairs: gold.len(),
    })
}

impl ClassifierReport {
    /// Field-wise mean, skipping reports where a value is undefined.
    /// Counts are summed.
    pub fn mean(reports: &[ClassifierReport]) -> Option<ClassifierReport> {
        let first = reports.first()?;
        let mean_of = |values: Vec<Option<f64>>| {
            let defined: Vec<f64> = values.into_iter().flatten().collect();
            (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
        };
        let classes = first
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| ClassMetrics {
                class: c.class.clone(),
                count: reports.iter().map(|r| r.classes[i].count).sum(),
                confidence: mean_of(reports.iter().map(|r| r.classes[i].confidence).collect()),
                recall: mean_of(reports.iter().map(|r| r.classes[i].recall).collect()),
                precision: mean_of(reports.iter().map(|r| r.classes[i].precision).collect()),
            })
            .collect();
        Some(ClassifierReport {
            classes,
            accuracy: reports.iter().map(|r| r.accuracy).sum::<f64>() / reports.len() as f64,
            pairs: reports.iter().map(|r| r.pairs).sum(),
        })
    }

    /// Classes in report order: relation classes first, Neutral last.
    pub fn ordered(&self) -> Vec<&ClassMetrics> {
        let rank = |c: &ClassMetrics| match c.class.as_str() {
            SUPPORT => 0,
            ATTACK => 1,
            EDGE => 2,
            NEUTRAL => 4,
            _ => 3,
        };
        let mut v: Vec<&ClassMetrics> = self.classes.iter().collect();
        v.sort_by_key(|c| rank(c));
        v
    }

    pub fn class(&self, name: &str) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.class == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgumentSim {
    pub argument_id: String,
    pub fold: usize,
    pub nodes: usize,
    pub sim_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeled_sim_score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeGroup {
    pub nodes: usize,
    pub arguments: usize,
    pub sim_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeled_sim_score: Option<f64>,
    /// Expected SimScore of a random tree, `1/nodes`.
    pub random: f64,
}

/// SimScores per argument, grouped by node count and overall.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub arguments: Vec<ArgumentSim>,
    pub sim_score_by_nodes: Vec<NodeGroup>,
    pub mean_sim_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_labeled_sim_score: Option<f64>,
    /// Mean of `1/n` over the evaluated arguments.
    pub random_baseline: f64,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

impl SimReport {
    pub fn from_arguments(arguments: Vec<ArgumentSim>) -> Self {
        let mut groups: BTreeMap<usize, Vec<&ArgumentSim>> = BTreeMap::new();
        for a in &arguments {
            groups.entry(a.nodes).or_default().push(a);
        }
        let labeled = |items: &[&ArgumentSim]| {
            items
                .iter()
                .map(|a| a.labeled_sim_score)
                .collect::<Option<Vec<f64>>>()
                .filter(|v| !v.is_empty())
                .map(mean)
        };
        let sim_score_by_nodes = groups
            .iter()
            .map(|(&nodes, items)| NodeGroup {
                nodes,
                arguments: items.len(),
                sim_score: mean(items.iter().map(|a| a.sim_score)),
                labeled_sim_score: labeled(items),
                random: 1.0 / nodes as f64,
            })
            .collect();
        let all: Vec<&ArgumentSim> = arguments.iter().collect();
        SimReport {
            mean_sim_score: mean(arguments.iter().map(|a| a.sim_score)),
            mean_labeled_sim_score: labeled(&all),
            random_baseline: mean(arguments.iter().map(|a| 1.0 / a.nodes as f64)),
            sim_score_by_nodes,
            arguments,
        }
    }
}
