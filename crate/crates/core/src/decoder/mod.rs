//! Structure prediction: choose the tree or chain over an argument's nodes
//! whose edge scores sum to the maximum.
//!
//! Edges point from child to parent and score `s(child, parent)`. Among
//! structures with equal totals the decoders return the one whose edge list,
//! sorted by child index, is lexicographically smallest.

mod arborescence;
mod chain;
mod exhaustive;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::ScoreMatrix;
use crate::classifiers::{Model, ModelError, ATTACK, SUPPORT};
use crate::corpus::{check_structure, Relation, StructureKind, Violation};
use crate::features::{FeatureExtractor, PreparedArgument};

pub const DEFAULT_TREE_CAP: usize = 10;
/// Largest tree the exhaustive decoder will attempt.
pub const MAX_TREE_CAP: usize = 12;
pub const DEFAULT_CHAIN_CAP: usize = 8;
pub const MAX_CHAIN_CAP: usize = 10;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("argument {argument}: need at least two nodes")]
    TooSmall { argument: String },
    #[error("argument {argument} has {nodes} nodes, above the {decoder} cap of {cap}")]
    TooLarge {
        argument: String,
        nodes: usize,
        cap: usize,
        decoder: DecoderKind,
    },
    #[error("{decoder} cap {cap} outside 2..={max}")]
    Cap {
        decoder: DecoderKind,
        cap: usize,
        max: usize,
    },
    #[error("argument {0}: score matrix has no per-class confidences")]
    MissingConfidences(String),
    #[error("argument {argument}: decoded structure is invalid: {violations:?}")]
    Invalid {
        argument: String,
        violations: Vec<Violation>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    #[default]
    Exhaustive,
    Arborescence,
    Chain,
}

impl DecoderKind {
    pub fn structure(self) -> StructureKind {
        match self {
            DecoderKind::Chain => StructureKind::Chain,
            _ => StructureKind::Tree,
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Exhaustive => "exhaustive",
            DecoderKind::Arborescence => "arborescence",
            DecoderKind::Chain => "chain",
        })
    }
}

impl FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(DecoderKind::Exhaustive),
            "arborescence" => Ok(DecoderKind::Arborescence),
            "chain" => Ok(DecoderKind::Chain),
            other => Err(format!(
                "unknown decoder {other:?} (expected exhaustive, arborescence, chain)"
            )),
        }
    }
}

/// Node caps for the exhaustive decoders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub tree: usize,
    pub chain: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            tree: DEFAULT_TREE_CAP,
            chain: DEFAULT_CHAIN_CAP,
        }
    }
}

impl Caps {
    pub fn check(&self) -> Result<(), DecodeError> {
        for (decoder, cap, max) in [
            (DecoderKind::Exhaustive, self.tree, MAX_TREE_CAP),
            (DecoderKind::Chain, self.chain, MAX_CHAIN_CAP),
        ] {
            if !(2..=max).contains(&cap) {
                return Err(DecodeError::Cap { decoder, cap, max });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedEdge {
    #[serde(rename = "from")]
    pub child: String,
    #[serde(rename = "to")]
    pub parent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Relation>,
}

/// A decoded structure in the corpus edge schema plus its score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedStructure {
    #[serde(rename = "id")]
    pub argument_id: String,
    pub kind: StructureKind,
    pub nodes: Vec<String>,
    pub edges: Vec<PredictedEdge>,
    pub score: f64,
    pub decoder: DecoderKind,
}

impl PredictedStructure {
    /// Edges as `(child, parent)` node indices.
    pub fn indexed_edges(&self) -> Vec<(usize, usize)> {
        let index = |id: &str| {
            self.nodes
                .iter()
                .position(|n| n == id)
                .expect("edge endpoints are nodes")
        };
        self.edges
            .iter()
            .map(|e| (index(&e.child), index(&e.parent)))
            .collect()
    }

    pub fn is_labeled(&self) -> bool {
        !self.edges.is_empty() && self.edges.iter().all(|e| e.label.is_some())
    }
}

/// Dense `n x n` edge weights, `w[child * n + parent]`.
#[derive(Clone, Debug)]
pub(crate) struct Weights {
    n: usize,
    w: Vec<f64>,
}

impl Weights {
    pub(crate) fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut w = vec![f64::NEG_INFINITY; n * n];
        for c in 0..n {
            for p in 0..n {
                if c != p {
                    w[c * n + p] = f(c, p);
                }
            }
        }
        Weights { n, w }
    }

    fn of(scores: &ScoreMatrix) -> Self {
        Weights::from_fn(scores.len(), |c, p| scores.score(c, p))
    }

    #[inline]
    pub(crate) fn get(&self, child: usize, parent: usize) -> f64 {
        self.w[child * self.n + parent]
    }

    /// Sum of `w(c, parent[c])` over non-root children in index order.
    pub(crate) fn total(&self, parents: &[Option<usize>]) -> f64 {
        parents
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| self.get(c, p)))
            .sum()
    }
}

/// Tie-break order on parent vectors: the sorted edge list, compared
/// lexicographically, is the parent vector with the root ranked last.
pub(crate) fn compare_keys(a: &[Option<usize>], b: &[Option<usize>]) -> Ordering {
    let rank = |p: &Option<usize>| p.unwrap_or(usize::MAX);
    a.iter().map(rank).cmp(b.iter().map(rank))
}

/// Tolerant comparison used to detect ties between floating totals.
pub(crate) fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Picks the better of two candidates by total, then by key.
pub(crate) fn better(
    total: f64,
    key: &[Option<usize>],
    best_total: f64,
    best_key: &[Option<usize>],
) -> bool {
    if tied(total, best_total) {
        compare_keys(key, best_key) == Ordering::Less
    } else {
        total > best_total
    }
}

fn check_size(scores: &ScoreMatrix, cap: usize, decoder: DecoderKind) -> Result<(), DecodeError> {
    let n = scores.len();
    if n < 2 {
        return Err(DecodeError::TooSmall {
            argument: scores.argument_id.clone(),
        });
    }
    if n > cap {
        return Err(DecodeError::TooLarge {
            argument: scores.argument_id.clone(),
            nodes: n,
            cap,
            decoder,
        });
    }
    Ok(())
}

fn build(
    scores: &ScoreMatrix,
    weights: &Weights,
    parents: &[Option<usize>],
    labels: Option<&[Option<Relation>]>,
    decoder: DecoderKind,
) -> Result<PredictedStructure, DecodeError> {
    let ids: Vec<&str> = scores.node_ids.iter().map(String::as_str).collect();
    let indexed: Vec<(usize, usize)> = parents
        .iter()
        .enumerate()
        .filter_map(|(c, p)| p.map(|p| (c, p)))
        .collect();
    let violations = check_structure(&ids, &indexed, decoder.structure());
    if !violations.is_empty() {
        return Err(DecodeError::Invalid {
            argument: scores.argument_id.clone(),
            violations,
        });
    }
    let edges = indexed
        .iter()
        .map(|&(c, p)| PredictedEdge {
            child: ids[c].to_string(),
            parent: ids[p].to_string(),
            label: labels.and_then(|l| l[c]),
        })
        .collect();
    Ok(PredictedStructure {
        argument_id: scores.argument_id.clone(),
        kind: decoder.structure(),
        nodes: scores.node_ids.clone(),
        edges,
        score: weights.total(parents),
        decoder,
    })
}

/// Best-scoring rooted tree by exhaustive level-set recursion.
pub fn best_tree_exhaustive(
    scores: &ScoreMatrix,
    max_nodes: usize,
) -> Result<PredictedStructure, DecodeError> {
    let cap = max_nodes.min(MAX_TREE_CAP);
    check_size(scores, cap, DecoderKind::Exhaustive)?;
    let w = Weights::of(scores);
    build(
        scores,
        &w,
        &exhaustive::best_parents(&w),
        None,
        DecoderKind::Exhaustive,
    )
}

/// Best-scoring rooted tree as a maximum spanning arborescence.
pub fn best_arborescence(scores: &ScoreMatrix) -> Result<PredictedStructure, DecodeError> {
    check_size(scores, usize::MAX, DecoderKind::Arborescence)?;
    let w = Weights::of(scores);
    build(
        scores,
        &w,
        &arborescence::best_parents(&w),
        None,
        DecoderKind::Arborescence,
    )
}

/// Best-scoring chain by exhaustive permutation search.
pub fn best_chain(
    scores: &ScoreMatrix,
    max_nodes: usize,
) -> Result<PredictedStructure, DecodeError> {
    let cap = max_nodes.min(MAX_CHAIN_CAP);
    check_size(scores, cap, DecoderKind::Chain)?;
    let w = Weights::of(scores);
    build(
        scores,
        &w,
        &chain::best_parents(&w),
        None,
        DecoderKind::Chain,
    )
}

fn decode_weights(
    scores: &ScoreMatrix,
    weights: &Weights,
    decoder: DecoderKind,
    caps: &Caps,
) -> Result<Vec<Option<usize>>, DecodeError> {
    match decoder {
        DecoderKind::Exhaustive => {
            check_size(scores, caps.tree.min(MAX_TREE_CAP), decoder)?;
            Ok(exhaustive::best_parents(weights))
        }
        DecoderKind::Arborescence => {
            check_size(scores, usize::MAX, decoder)?;
            Ok(arborescence::best_parents(weights))
        }
        DecoderKind::Chain => {
            check_size(scores, caps.chain.min(MAX_CHAIN_CAP), decoder)?;
            Ok(chain::best_parents(weights))
        }
    }
}

/// Decodes unlabeled structure with the chosen decoder.
pub fn decode(
    scores: &ScoreMatrix,
    decoder: DecoderKind,
    caps: &Caps,
) -> Result<PredictedStructure, DecodeError> {
    let w = Weights::of(scores);
    let parents = decode_weights(scores, &w, decoder, caps)?;
    build(scores, &w, &parents, None, decoder)
}

/// Labels a chosen edge as Support or Attack.
pub trait EdgeResolver {
    fn resolve(&self, child: usize, parent: usize) -> Result<Relation, DecodeError>;
}

impl<F: Fn(usize, usize) -> Relation> EdgeResolver for F {
    fn resolve(&self, child: usize, parent: usize) -> Result<Relation, DecodeError> {
        Ok(self(child, parent))
    }
}

/// A Support-vs-Attack classifier applied to one prepared argument.
pub struct ModelResolver<'a> {
    model: &'a Model,
    extractor: &'a FeatureExtractor,
    prepared: &'a PreparedArgument,
    support: usize,
    attack: usize,
}

impl<'a> ModelResolver<'a> {
    pub fn new(
        model: &'a Model,
        extractor: &'a FeatureExtractor,
        prepared: &'a PreparedArgument,
    ) -> Result<Self, ModelError> {
        if model.fingerprint() != extractor.fingerprint() {
            return Err(ModelError::LayoutMismatch {
                expected: model.fingerprint().to_string(),
                found: extractor.fingerprint().to_string(),
            });
        }
        let slot = |name: &str| {
            model
                .class_index(name)
                .ok_or_else(|| ModelError::MissingClass(name.into()))
        };
        Ok(ModelResolver {
            model,
            extractor,
            prepared,
            support: slot(SUPPORT)?,
            attack: slot(ATTACK)?,
        })
    }
}

impl EdgeResolver for ModelResolver<'_> {
    fn resolve(&self, child: usize, parent: usize) -> Result<Relation, DecodeError> {
        let conf = self
            .model
            .confidences(&self.extractor.extract(self.prepared, child, parent));
        Ok(if conf[self.attack] > conf[self.support] {
            Relation::Attack
        } else {
            Relation::Support
        })
    }
}

/// Structure from the Detection scores, then one label per chosen edge.
pub fn decode_two_step(
    detection: &ScoreMatrix,
    resolver: &dyn EdgeResolver,
    decoder: DecoderKind,
    caps: &Caps,
) -> Result<PredictedStructure, DecodeError> {
    let w = Weights::of(detection);
    let parents = decode_weights(detection, &w, decoder, caps)?;
    let labels = parents
        .iter()
        .enumerate()
        .map(|(c, p)| p.map(|p| resolver.resolve(c, p)).transpose())
        .collect::<Result<Vec<_>, _>>()?;
    build(detection, &w, &parents, Some(&labels), decoder)
}

/// Weight and label of the edge from `[Support, Attack, Neutral]`
/// confidences: the larger of `S - N` and `A - N`, Support on ties.
pub fn single_step_weight(conf: [f64; 3]) -> (f64, Relation) {
    let (s, a) = (conf[0] - conf[2], conf[1] - conf[2]);
    if a > s {
        (a, Relation::Attack)
    } else {
        (s, Relation::Support)
    }
}

/// Structure and labels from one three-class score matrix.
pub fn decode_single_step(
    multiclass: &ScoreMatrix,
    decoder: DecoderKind,
    caps: &Caps,
) -> Result<PredictedStructure, DecodeError> {
    if !multiclass.has_confidences() {
        return Err(DecodeError::MissingConfidences(
            multiclass.argument_id.clone(),
        ));
    }
    let n = multiclass.len();
    let weight =
        |c: usize, p: usize| single_step_weight(multiclass.confidences(c, p).expect("checked"));
    let w = Weights::from_fn(n, |c, p| weight(c, p).0);
    let parents = decode_weights(multiclass, &w, decoder, caps)?;
    let labels: Vec<Option<Relation>> = parents
        .iter()
        .enumerate()
        .map(|(c, p)| p.map(|p| weight(c, p).1))
        .collect();
    build(multiclass, &w, &parents, Some(&labels), decoder)
}
