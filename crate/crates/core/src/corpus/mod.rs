//! Argument data model, the canonical JSON corpus format and its validation.
//!
//! An [`Argument`] is a set of [`PropositionNode`]s joined by directed,
//! labeled edges. Edges always point from the child (the *Text* side of a
//! relation) to the parent (the *Hypothesis* side).

mod folds;
mod pairs;
mod validate;

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{tokenize, TokenSequence};

pub use folds::{split_folds, FoldAssignment};
pub use pairs::{
    generate_pairs, generate_pairs_multiclass, generate_pairs_type1, generate_pairs_type2,
    Framework, LabeledPair, PairLabel,
};
pub use validate::{
    check_structure, validate_argument, ValidationOptions, ValidationReport, Violation,
    DEFAULT_NODE_CAP,
};

/// Relation carried by a gold edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Support,
    Attack,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Support => f.write_str("support"),
            Relation::Attack => f.write_str("attack"),
        }
    }
}

/// Overall shape an argument's edges must take.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    #[default]
    Tree,
    Chain,
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureKind::Tree => f.write_str("tree"),
            StructureKind::Chain => f.write_str("chain"),
        }
    }
}

/// A single proposition. Tokens are derived on first use.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropositionNode {
    pub id: String,
    pub text: String,
    #[serde(skip)]
    tokens: OnceLock<TokenSequence>,
}

impl PropositionNode {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        PropositionNode {
            id: id.into(),
            text: text.into(),
            tokens: OnceLock::new(),
        }
    }

    /// Lowercased tokens of the proposition text.
    pub fn tokens(&self) -> &TokenSequence {
        self.tokens.get_or_init(|| tokenize(&self.text))
    }
}

impl PartialEq for PropositionNode {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.text == other.text
    }
}

/// A gold edge `child -> parent`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    #[serde(rename = "from")]
    pub child: String,
    #[serde(rename = "to")]
    pub parent: String,
    pub label: Relation,
}

impl Edge {
    pub fn new(child: impl Into<String>, parent: impl Into<String>, label: Relation) -> Self {
        Edge {
            child: child.into(),
            parent: parent.into(),
            label,
        }
    }

    pub fn support(child: impl Into<String>, parent: impl Into<String>) -> Self {
        Self::new(child, parent, Relation::Support)
    }

    pub fn attack(child: impl Into<String>, parent: impl Into<String>) -> Self {
        Self::new(child, parent, Relation::Attack)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Argument {
    pub id: String,
    #[serde(default)]
    pub kind: StructureKind,
    pub nodes: Vec<PropositionNode>,
    #[serde(default)]
    pub edges: Vec<Edge>,
}

impl Argument {
    pub fn new(
        id: impl Into<String>,
        kind: StructureKind,
        nodes: Vec<PropositionNode>,
        edges: Vec<Edge>,
    ) -> Self {
        Argument {
            id: id.into(),
            kind,
            nodes,
            edges,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Position of a node id in `nodes`.
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn node(&self, id: &str) -> Option<&PropositionNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn has_attack(&self) -> bool {
        self.edges.iter().any(|e| e.label == Relation::Attack)
    }

    /// Gold edges as `(child index, parent index, label)`.
    ///
    /// Edges with unknown endpoints are dropped; call [`validate_argument`]
    /// first when that matters.
    pub fn indexed_edges(&self) -> Vec<(usize, usize, Relation)> {
        self.edges
            .iter()
            .filter_map(|e| {
                Some((
                    self.node_index(&e.child)?,
                    self.node_index(&e.parent)?,
                    e.label,
                ))
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation in argument {argument}, field `{field}`: {message}")]
    Schema {
        argument: String,
        field: String,
        message: String,
    },
    #[error("argument {argument} is invalid: {report}")]
    Invalid {
        argument: String,
        report: ValidationReport,
    },
    #[error("argument {argument} contains Attack edges; use the multi-class framework")]
    AttackEdges { argument: String },
    #[error("cannot split {arguments} arguments into {k} folds")]
    FoldCount { arguments: usize, k: usize },
    #[error("duplicate argument id {0}")]
    DuplicateArgument(String),
}

#[derive(Serialize)]
struct CorpusDocumentRef<'a> {
    arguments: &'a [Argument],
}

/// Reads a corpus file, rejecting any argument that fails validation.
pub fn parse_corpus(path: impl AsRef<Path>) -> Result<Vec<Argument>, CorpusError> {
    let text = read(path.as_ref())?;
    parse_corpus_str(&text)
}

/// Parses corpus JSON from memory with the same rules as [`parse_corpus`].
pub fn parse_corpus_str(text: &str) -> Result<Vec<Argument>, CorpusError> {
    let arguments = decode_document(text)?;
    let options = ValidationOptions::default();
    for arg in &arguments {
        let report = validate_argument(arg, &options);
        if !report.is_ok() {
            return Err(CorpusError::Invalid {
                argument: arg.id.clone(),
                report,
            });
        }
    }
    Ok(arguments)
}

/// Reads a corpus file checking only the schema and edge references;
/// structural invariants are left to [`validate_argument`]. Used for inputs
/// that may carry no gold edges.
pub fn read_corpus_unvalidated(path: impl AsRef<Path>) -> Result<Vec<Argument>, CorpusError> {
    decode_document(&read(path.as_ref())?)
}

/// Reads a corpus file, keeping valid arguments and returning the rejected
/// ones with their reports. Schema errors are still fatal.
pub fn parse_corpus_lenient(
    path: impl AsRef<Path>,
) -> Result<(Vec<Argument>, Vec<(String, ValidationReport)>), CorpusError> {
    let text = read(path.as_ref())?;
    let options = ValidationOptions::default();
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for arg in decode_document(&text)? {
        let report = validate_argument(&arg, &options);
        if report.is_ok() {
            kept.push(arg);
        } else {
            log::warn!("skipping argument {}: {}", arg.id, report);
            skipped.push((arg.id, report));
        }
    }
    Ok((kept, skipped))
}

pub fn serialize_corpus(arguments: &[Argument]) -> String {
    serde_json::to_string_pretty(&CorpusDocumentRef { arguments })
        .expect("corpus serialization is infallible")
}

pub fn write_corpus(path: impl AsRef<Path>, arguments: &[Argument]) -> Result<(), CorpusError> {
    let path = path.as_ref();
    fs::write(path, serialize_corpus(arguments)).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn schema(
    argument: impl Into<String>,
    field: impl Into<String>,
    message: impl Into<String>,
) -> CorpusError {
    CorpusError::Schema {
        argument: argument.into(),
        field: field.into(),
        message: message.into(),
    }
}

/// Decodes arguments one at a time so errors can name the argument.
fn decode_document(text: &str) -> Result<Vec<Argument>, CorpusError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| schema("<document>", "<root>", e.to_string()))?;
    let object = value
        .as_object()
        .ok_or_else(|| schema("<document>", "<root>", "expected a JSON object"))?;
    if let Some(key) = object.keys().find(|k| k.as_str() != "arguments") {
        return Err(schema("<document>", key.as_str(), "unknown field"));
    }
    let list = object
        .get("arguments")
        .ok_or_else(|| schema("<document>", "arguments", "missing field"))?
        .as_array()
        .ok_or_else(|| schema("<document>", "arguments", "expected an array"))?;

    let mut seen = HashSet::new();
    let mut arguments = Vec::with_capacity(list.len());
    for (position, raw) in list.iter().enumerate() {
        let label = raw
            .get("id")
            .and_then(|v| v.as_str())
            .map(str::to_owned)
            .unwrap_or_else(|| format!("#{position}"));
        let arg: Argument = serde_json::from_value(raw.clone())
            .map_err(|e| schema(label.clone(), field_of(&e.to_string()), e.to_string()))?;
        check_references(&arg)?;
        if !seen.insert(arg.id.clone()) {
            return Err(CorpusError::DuplicateArgument(arg.id));
        }
        arguments.push(arg);
    }
    Ok(arguments)
}

/// Best-effort field name from a serde message such as "missing field `text`".
fn field_of(message: &str) -> String {
    message
        .split('`')
        .nth(1)
        .map(str::to_owned)
        .unwrap_or_else(|| "<argument>".to_owned())
}

fn check_references(arg: &Argument) -> Result<(), CorpusError> {
    let ids: HashSet<&str> = arg.nodes.iter().map(|n| n.id.as_str()).collect();
    for edge in &arg.edges {
        if !ids.contains(edge.child.as_str()) {
            return Err(schema(
                arg.id.clone(),
                "edges.from",
                format!("unknown node id {:?}", edge.child),
            ));
        }
        if !ids.contains(edge.parent.as_str()) {
            return Err(schema(
                arg.id.clone(),
                "edges.to",
                format!("unknown node id {:?}", edge.parent),
            ));
        }
    }
    Ok(())
}
