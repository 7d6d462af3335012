//! Pair features: tokenization, the lexical groups, entity overlap, n-grams
//! and word vectors, assembled into a fixed layout.
//!
//! A [`FeatureExtractor`] owns the fitted and loaded artifacts and a
//! [`FeatureLayout`]. Nodes of an argument are tokenized and annotated once
//! ([`FeatureExtractor::prepare`]); any ordered pair can then be extracted.

mod embeddings;
mod entities;
mod lexical;
mod ngrams;
mod tokenize;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Argument, LabeledPair, PropositionNode};

pub use embeddings::{
    load_embeddings, load_embeddings_filtered, save_embeddings, wordvec_features, EmbeddingTable,
};
pub use entities::{
    annotate_entities, capitalized_runs, entity_overlap, CachedAnnotator, EntityAnnotation,
    EntityAnnotator, EntityCache, OfflineAnnotator, RemoteAnnotator, RemoteConfig,
    DEFAULT_TAGME_ENDPOINT, TAGME_KEY_ENV,
};
pub use lexical::{
    contrast_relation_features, discourse_marker_features, longest_common_phrase, modal_features,
    negation_marker_features, AntonymLexicon, Lexicon, DEFAULT_NEGATIONS, HYPOTHESIS_MARKERS,
    MODALS, TEXT_MARKERS,
};
pub use ngrams::{fit_ngram_vocab, ngram_features, NgramVocabulary, DEFAULT_LIKELIHOOD_THRESHOLD};
pub use tokenize::{tokenize, TokenSequence};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed embedding header {0:?} (expected \"<count> <dim>\")")]
    Header(String),
    #[error("embedding row on line {line} has {found} values, expected {expected}")]
    Dimension {
        expected: usize,
        found: usize,
        line: usize,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Lexicon {
        path: String,
        line: usize,
        message: String,
    },
    #[error("no training pairs to fit the n-gram vocabulary")]
    EmptyTraining,
    #[error("likelihood threshold must exceed 1, got {0}")]
    Threshold(f64),
    #[error("feature group `{0}` is enabled but its artifact is missing")]
    MissingArtifact(FeatureGroup),
    #[error("no entity annotation for node {node} of argument {argument}")]
    MissingEntities { argument: String, node: String },
    #[error("entity annotator: {0}")]
    Annotator(String),
    #[error("unknown feature group {name:?}; valid groups: {valid}")]
    UnknownGroup { name: String, valid: String },
    #[error("feature mask is empty")]
    EmptyMask,
    #[error("node {0} is not part of the argument")]
    UnknownNode(String),
}

/// A named block of the feature vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    Discourse,
    Modal,
    Lcp,
    Entity,
    Ngram,
    Wordvec,
    Negation,
    Contrast,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 8] = [
        FeatureGroup::Discourse,
        FeatureGroup::Modal,
        FeatureGroup::Lcp,
        FeatureGroup::Entity,
        FeatureGroup::Ngram,
        FeatureGroup::Wordvec,
        FeatureGroup::Negation,
        FeatureGroup::Contrast,
    ];

    /// Groups used for Support-only arguments.
    pub const BASE: [FeatureGroup; 6] = [
        FeatureGroup::Discourse,
        FeatureGroup::Modal,
        FeatureGroup::Lcp,
        FeatureGroup::Entity,
        FeatureGroup::Ngram,
        FeatureGroup::Wordvec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Discourse => "discourse",
            FeatureGroup::Modal => "modal",
            FeatureGroup::Lcp => "lcp",
            FeatureGroup::Entity => "entity",
            FeatureGroup::Ngram => "ngram",
            FeatureGroup::Wordvec => "wordvec",
            FeatureGroup::Negation => "negation",
            FeatureGroup::Contrast => "contrast",
        }
    }

    /// Human-readable row label used in reports.
    pub fn title(self) -> &'static str {
        match self {
            FeatureGroup::Discourse => "Discourse Markers",
            FeatureGroup::Modal => "Modal Features",
            FeatureGroup::Lcp => "Longest Common Phrase",
            FeatureGroup::Entity => "Wikipedia Similarity",
            FeatureGroup::Ngram => "Word N-grams",
            FeatureGroup::Wordvec => "Word Vectors",
            FeatureGroup::Negation => "Negation Markers",
            FeatureGroup::Contrast => "Contrast Indicators",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| FeatureError::UnknownGroup {
                name: s.to_owned(),
                valid: FeatureGroup::ALL.map(FeatureGroup::name).join(", "),
            })
    }
}

/// Set of enabled groups, kept in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<FeatureGroup>", into = "Vec<FeatureGroup>")]
pub struct FeatureMask(Vec<FeatureGroup>);

impl From<Vec<FeatureGroup>> for FeatureMask {
    fn from(groups: Vec<FeatureGroup>) -> Self {
        FeatureMask::new(groups)
    }
}

impl From<FeatureMask> for Vec<FeatureGroup> {
    fn from(mask: FeatureMask) -> Self {
        mask.0
    }
}

impl FeatureMask {
    pub fn new(groups: impl IntoIterator<Item = FeatureGroup>) -> Self {
        let mut v: Vec<_> = groups.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        FeatureMask(v)
    }

    pub fn base() -> Self {
        Self::new(FeatureGroup::BASE)
    }

    pub fn all() -> Self {
        Self::new(FeatureGroup::ALL)
    }

    /// Parses a comma-separated list such as `"discourse,ngram"`.
    pub fn parse(list: &str) -> Result<Self, FeatureError> {
        let mask = Self::new(
            list.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(str::parse)
                .collect::<Result<Vec<_>, _>>()?,
        );
        if mask.is_empty() {
            return Err(FeatureError::EmptyMask);
        }
        Ok(mask)
    }

    pub fn contains(&self, g: FeatureGroup) -> bool {
        self.0.contains(&g)
    }

    pub fn groups(&self) -> &[FeatureGroup] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn without(&self, g: FeatureGroup) -> Self {
        FeatureMask(self.0.iter().copied().filter(|&x| x != g).collect())
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.0.iter().map(|g| g.name()).collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub group: FeatureGroup,
    pub offset: usize,
    pub width: usize,
}

/// Contiguous placement of each enabled group in the feature vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub segments: Vec<Segment>,
    pub width: usize,
}

impl FeatureLayout {
    pub fn segment(&self, group: FeatureGroup) -> Option<&Segment> {
        self.segments.iter().find(|s| s.group == group)
    }
}

/// Serializable description of an extractor; embeddings are referenced by
/// dimension only and supplied separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub mask: FeatureMask,
    pub vocab: Option<NgramVocabulary>,
    pub embedding_dim: Option<usize>,
    pub negations: Lexicon,
    pub antonyms: AntonymLexicon,
}

/// Fitted and loaded resources used by the feature groups.
#[derive(Clone, Debug)]
pub struct FeatureArtifacts {
    pub vocab: Option<NgramVocabulary>,
    pub embeddings: Option<Arc<EmbeddingTable>>,
    pub negations: Lexicon,
    pub antonyms: AntonymLexicon,
}

impl Default for FeatureArtifacts {
    fn default() -> Self {
        FeatureArtifacts {
            vocab: None,
            embeddings: None,
            negations: Lexicon::default_negations(),
            antonyms: AntonymLexicon::default(),
        }
    }
}

/// Per-argument tokens and entity annotations, computed once.
#[derive(Clone, Debug)]
pub struct PreparedArgument {
    pub argument_id: String,
    pub node_ids: Vec<String>,
    pub tokens: Vec<TokenSequence>,
    pub entities: Vec<EntityAnnotation>,
}

impl PreparedArgument {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn index_of(&self, node: &str) -> Option<usize> {
        self.node_ids.iter().position(|n| n == node)
    }
}

/// Where entity annotations for a node come from.
pub trait EntitySource: Sync {
    fn entities(
        &self,
        arg: &Argument,
        node: &PropositionNode,
    ) -> Result<EntityAnnotation, FeatureError>;
}

impl<T: EntityAnnotator + ?Sized> EntitySource for T {
    fn entities(
        &self,
        _arg: &Argument,
        node: &PropositionNode,
    ) -> Result<EntityAnnotation, FeatureError> {
        self.annotate(&node.text)
    }
}

impl EntitySource for EntityCache {
    fn entities(
        &self,
        arg: &Argument,
        node: &PropositionNode,
    ) -> Result<EntityAnnotation, FeatureError> {
        self.get(&arg.id, &node.id)
            .cloned()
            .ok_or_else(|| FeatureError::MissingEntities {
                argument: arg.id.clone(),
                node: node.id.clone(),
            })
    }
}

#[derive(Clone, Debug)]
pub struct FeatureExtractor {
    mask: FeatureMask,
    layout: FeatureLayout,
    artifacts: FeatureArtifacts,
    fingerprint: String,
}

impl FeatureExtractor {
    pub fn new(mask: FeatureMask, artifacts: FeatureArtifacts) -> Result<Self, FeatureError> {
        if mask.is_empty() {
            return Err(FeatureError::EmptyMask);
        }
        let mut segments = Vec::new();
        let mut offset = 0;
        for &group in mask.groups() {
            let width = match group {
                FeatureGroup::Discourse => TEXT_MARKERS.len() + HYPOTHESIS_MARKERS.len(),
                FeatureGroup::Modal => 2 * MODALS.len(),
                FeatureGroup::Lcp | FeatureGroup::Entity => 1,
                FeatureGroup::Ngram => artifacts
                    .vocab
                    .as_ref()
                    .ok_or(FeatureError::MissingArtifact(group))?
                    .feature_width(),
                FeatureGroup::Wordvec => {
                    2 * artifacts
                        .embeddings
                        .as_ref()
                        .ok_or(FeatureError::MissingArtifact(group))?
                        .dim()
                }
                FeatureGroup::Negation => 2 * artifacts.negations.len(),
                FeatureGroup::Contrast => 3,
            };
            segments.push(Segment {
                group,
                offset,
                width,
            });
            offset += width;
        }
        let layout = FeatureLayout {
            segments,
            width: offset,
        };
        let mut extractor = FeatureExtractor {
            mask,
            layout,
            artifacts,
            fingerprint: String::new(),
        };
        extractor.fingerprint = fingerprint(&extractor.spec(), &extractor.layout);
        Ok(extractor)
    }

    pub fn from_spec(
        spec: FeatureSpec,
        embeddings: Option<Arc<EmbeddingTable>>,
    ) -> Result<Self, FeatureError> {
        if let (Some(want), Some(table)) = (spec.embedding_dim, &embeddings) {
            if want != table.dim() {
                return Err(FeatureError::Dimension {
                    expected: want,
                    found: table.dim(),
                    line: 0,
                });
            }
        }
        let embeddings = if spec.mask.contains(FeatureGroup::Wordvec) {
            embeddings
        } else {
            None
        };
        Self::new(
            spec.mask,
            FeatureArtifacts {
                vocab: spec.vocab,
                embeddings,
                negations: spec.negations,
                antonyms: spec.antonyms.reindexed(),
            },
        )
    }

    pub fn spec(&self) -> FeatureSpec {
        FeatureSpec {
            mask: self.mask.clone(),
            vocab: self
                .mask
                .contains(FeatureGroup::Ngram)
                .then(|| self.artifacts.vocab.clone())
                .flatten(),
            embedding_dim: self
                .mask
                .contains(FeatureGroup::Wordvec)
                .then(|| self.artifacts.embeddings.as_ref().map(|t| t.dim()))
                .flatten(),
            negations: self.artifacts.negations.clone(),
            antonyms: self.artifacts.antonyms.clone(),
        }
    }

    pub fn mask(&self) -> &FeatureMask {
        &self.mask
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    pub fn width(&self) -> usize {
        self.layout.width
    }

    pub fn artifacts(&self) -> &FeatureArtifacts {
        &self.artifacts
    }

    /// Stable digest of the layout and the artifacts that shape it.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn prepare(
        &self,
        arg: &Argument,
        entities: &dyn EntitySource,
    ) -> Result<PreparedArgument, FeatureError> {
        let annotate = self.mask.contains(FeatureGroup::Entity);
        Ok(PreparedArgument {
            argument_id: arg.id.clone(),
            node_ids: arg.nodes.iter().map(|n| n.id.clone()).collect(),
            tokens: arg.nodes.iter().map(|n| n.tokens().clone()).collect(),
            entities: if annotate {
                arg.nodes
                    .iter()
                    .map(|n| entities.entities(arg, n))
                    .collect::<Result<_, _>>()?
            } else {
                Vec::new()
            },
        })
    }

    /// Feature vector for the ordered pair `(text, hyp)` of node indices.
    pub fn extract(&self, prepared: &PreparedArgument, text: usize, hyp: usize) -> Vec<f64> {
        let (t, h) = (&prepared.tokens[text], &prepared.tokens[hyp]);
        let mut out = Vec::with_capacity(self.layout.width);
        for segment in &self.layout.segments {
            match segment.group {
                FeatureGroup::Discourse => out.extend(discourse_marker_features(t, h)),
                FeatureGroup::Modal => out.extend(modal_features(t, h)),
                FeatureGroup::Lcp => out.push(longest_common_phrase(t, h) as f64),
                FeatureGroup::Entity => out.push(entity_overlap(
                    &prepared.entities[text],
                    &prepared.entities[hyp],
                )),
                FeatureGroup::Ngram => out.extend(ngram_features(
                    t,
                    h,
                    self.artifacts.vocab.as_ref().expect("checked in new"),
                )),
                FeatureGroup::Wordvec => out.extend(wordvec_features(
                    t,
                    h,
                    self.artifacts.embeddings.as_ref().expect("checked in new"),
                )),
                FeatureGroup::Negation => {
                    out.extend(negation_marker_features(t, h, &self.artifacts.negations))
                }
                FeatureGroup::Contrast => out.extend(contrast_relation_features(
                    t,
                    h,
                    &self.artifacts.antonyms,
                    &self.artifacts.negations,
                )),
            }
        }
        debug_assert_eq!(out.len(), self.layout.width);
        out
    }
}

/// Extracts the feature vector of one labeled pair.
pub fn extract(
    pair: &LabeledPair,
    arg: &Argument,
    extractor: &FeatureExtractor,
    entities: &dyn EntitySource,
) -> Result<Vec<f64>, FeatureError> {
    let prepared = extractor.prepare(arg, entities)?;
    let t = prepared
        .index_of(&pair.text_node)
        .ok_or_else(|| FeatureError::UnknownNode(pair.text_node.clone()))?;
    let h = prepared
        .index_of(&pair.hypothesis_node)
        .ok_or_else(|| FeatureError::UnknownNode(pair.hypothesis_node.clone()))?;
    Ok(extractor.extract(&prepared, t, h))
}

fn fingerprint(spec: &FeatureSpec, layout: &FeatureLayout) -> String {
    let description = serde_json::to_string(&(spec, layout)).expect("spec serializes");
    let digest = Sha256::digest(description.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Training Support pairs as token sequences, the input to
/// [`fit_ngram_vocab`].
pub fn support_token_pairs<'a>(
    corpus: impl IntoIterator<Item = &'a Argument>,
) -> Vec<(TokenSequence, TokenSequence)> {
    let mut out = Vec::new();
    for arg in corpus {
        for e in &arg.edges {
            if e.label != crate::corpus::Relation::Support {
                continue;
            }
            if let (Some(c), Some(p)) = (arg.node(&e.child), arg.node(&e.parent)) {
                out.push((c.tokens().clone(), p.tokens().clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Edge, PairLabel, StructureKind};
    use proptest::prelude::*;

    fn table(dim: usize, words: &[&str]) -> Arc<EmbeddingTable> {
        let mut t = EmbeddingTable::new(dim);
        for (i, w) in words.iter().enumerate() {
            let v: Vec<f32> = (0..dim)
                .map(|j| ((i * 7 + j * 3) % 5) as f32 - 2.0)
                .collect();
            t.insert(*w, &v).unwrap();
        }
        Arc::new(t)
    }

    fn vocab_with(n: usize) -> NgramVocabulary {
        NgramVocabulary {
            text_unigrams: (0..n).map(|i| format!("w{i}")).collect(),
            text_bigrams: vec![],
            hyp_unigrams: vec![],
            hyp_bigrams: vec![],
            threshold: 3.0,
        }
    }

    fn debate() -> Argument {
        Argument::new(
            "d",
            StructureKind::Tree,
            vec![
                PropositionNode::new("a", "Violent games are harmful and never good"),
                PropositionNode::new("b", "Since Games are harmful, kids suffer"),
                PropositionNode::new("c", "Violent games are beneficial however"),
            ],
            vec![Edge::support("b", "a"), Edge::attack("c", "a")],
        )
    }

    #[test]
    fn widths() {
        // 367 selected n-grams give 734 n-gram slots.
        let artifacts = FeatureArtifacts {
            vocab: Some(vocab_with(367)),
            embeddings: Some(table(300, &["games"])),
            ..Default::default()
        };
        let all = FeatureExtractor::new(FeatureMask::base(), artifacts.clone()).unwrap();
        assert_eq!(all.width(), 11 + 16 + 1 + 1 + 734 + 600);
        assert_eq!(all.width(), 1363);
        let with_attack = FeatureExtractor::new(FeatureMask::all(), artifacts).unwrap();
        assert_eq!(with_attack.width(), 1363 + 22 + 3);

        let only = FeatureExtractor::new(
            FeatureMask::new([FeatureGroup::Discourse]),
            FeatureArtifacts::default(),
        )
        .unwrap();
        assert_eq!(only.width(), 11);
    }

    #[test]
    fn layout_is_contiguous() {
        let e = FeatureExtractor::new(
            FeatureMask::all(),
            FeatureArtifacts {
                vocab: Some(vocab_with(3)),
                embeddings: Some(table(4, &[])),
                ..Default::default()
            },
        )
        .unwrap();
        let mut offset = 0;
        for s in &e.layout().segments {
            assert_eq!(s.offset, offset);
            offset += s.width;
        }
        assert_eq!(offset, e.width());
    }

    #[test]
    fn missing_artifacts() {
        let err = FeatureExtractor::new(
            FeatureMask::new([FeatureGroup::Wordvec]),
            FeatureArtifacts::default(),
        );
        assert!(matches!(
            err,
            Err(FeatureError::MissingArtifact(FeatureGroup::Wordvec))
        ));
        let err = FeatureExtractor::new(
            FeatureMask::new([FeatureGroup::Ngram]),
            FeatureArtifacts::default(),
        );
        assert!(matches!(
            err,
            Err(FeatureError::MissingArtifact(FeatureGroup::Ngram))
        ));
        assert!(matches!(
            FeatureExtractor::new(FeatureMask::new([]), FeatureArtifacts::default()),
            Err(FeatureError::EmptyMask)
        ));
    }

    #[test]
    fn mask_parsing() {
        assert_eq!(
            FeatureMask::parse("ngram, discourse").unwrap().groups(),
            [FeatureGroup::Discourse, FeatureGroup::Ngram]
        );
        let err = FeatureMask::parse("discourse,pos").unwrap_err();
        assert!(err.to_string().contains("wordvec"), "{err}");
        assert!(matches!(
            FeatureMask::parse(""),
            Err(FeatureError::EmptyMask)
        ));
    }

    fn full_extractor() -> FeatureExtractor {
        let arg = debate();
        let vocab = fit_ngram_vocab(&support_token_pairs([&arg]), 1.5).unwrap();
        FeatureExtractor::new(
            FeatureMask::all(),
            FeatureArtifacts {
                vocab: Some(vocab),
                embeddings: Some(table(3, &["games", "harmful", "beneficial", "kids"])),
                antonyms: AntonymLexicon::new([("harmful", "beneficial")]),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn extraction_is_deterministic_and_ordered() {
        let arg = debate();
        let e = full_extractor();
        let pair = LabeledPair {
            argument_id: "d".into(),
            text_node: "c".into(),
            hypothesis_node: "a".into(),
            label: PairLabel::Attack,
        };
        let x = extract(&pair, &arg, &e, &OfflineAnnotator).unwrap();
        assert_eq!(x.len(), e.width());
        assert_eq!(x, extract(&pair, &arg, &e, &OfflineAnnotator).unwrap());
        let swapped = LabeledPair {
            text_node: "a".into(),
            hypothesis_node: "c".into(),
            ..pair.clone()
        };
        assert_ne!(x, extract(&swapped, &arg, &e, &OfflineAnnotator).unwrap());

        let contrast = e.layout().segment(FeatureGroup::Contrast).unwrap();
        assert_eq!(x[contrast.offset], 1.0, "harmful vs beneficial");
        let entity = e.layout().segment(FeatureGroup::Entity).unwrap();
        assert_eq!(x[entity.offset], 1.0, "both mention Violent");
    }

    #[test]
    fn entity_cache_feeds_extraction() {
        let arg = debate();
        let e = full_extractor();
        let cache = EntityCache::build(std::slice::from_ref(&arg), &OfflineAnnotator).unwrap();
        let a = e.prepare(&arg, &cache).unwrap();
        let b = e.prepare(&arg, &OfflineAnnotator).unwrap();
        assert_eq!(e.extract(&a, 1, 0), e.extract(&b, 1, 0));
        let empty = EntityCache::default();
        assert!(matches!(
            e.prepare(&arg, &empty),
            Err(FeatureError::MissingEntities { .. })
        ));
    }

    #[test]
    fn spec_round_trip_keeps_fingerprint() {
        let e = full_extractor();
        let json = serde_json::to_string(&e.spec()).unwrap();
        let spec: FeatureSpec = serde_json::from_str(&json).unwrap();
        let again = FeatureExtractor::from_spec(spec, e.artifacts().embeddings.clone()).unwrap();
        assert_eq!(again.fingerprint(), e.fingerprint());
        let arg = debate();
        let p = e.prepare(&arg, &OfflineAnnotator).unwrap();
        assert_eq!(again.extract(&p, 2, 0), e.extract(&p, 2, 0));
        let wrong_dim = Some(table(5, &[]));
        assert!(FeatureExtractor::from_spec(e.spec(), wrong_dim).is_err());
    }

    #[test]
    fn fingerprint_tracks_layout() {
        let a = FeatureExtractor::new(
            FeatureMask::new([FeatureGroup::Discourse]),
            FeatureArtifacts::default(),
        )
        .unwrap();
        let b = FeatureExtractor::new(
            FeatureMask::new([FeatureGroup::Modal]),
            FeatureArtifacts::default(),
        )
        .unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    proptest! {
        #[test]
        fn values_finite_counts_integral(
            text in "[A-Za-z ,.']{0,40}",
            hyp in "[A-Za-z ,.']{0,40}",
        ) {
            let e = FeatureExtractor::new(
                FeatureMask::all(),
                FeatureArtifacts {
                    vocab: Some(vocab_with(2)),
                    embeddings: Some(table(2, &["a", "b"])),
                    ..Default::default()
                },
            ).unwrap();
            let arg = Argument::new("p", StructureKind::Tree,
                vec![PropositionNode::new("t", text), PropositionNode::new("h", hyp)], vec![]);
            let prepared = e.prepare(&arg, &OfflineAnnotator).unwrap();
            let x = e.extract(&prepared, 0, 1);
            prop_assert!(x.iter().all(|v| v.is_finite()));
            for s in &e.layout().segments {
                if s.group != FeatureGroup::Wordvec {
                    for v in &x[s.offset..s.offset + s.width] {
                        prop_assert!(*v >= 0.0 && v.fract() == 0.0);
                    }
                }
            }
        }

        #[test]
        fn wordvec_is_additive(words in prop::collection::vec(0usize..4, 0..8), extra in 0usize..4) {
            let names = ["a", "b", "c", "d"];
            let t = table(3, &names);
            let text: TokenSequence = words.iter().map(|&i| names[i]).collect();
            let hyp: TokenSequence = ["b"].into_iter().collect();
            let before = wordvec_features(&text, &hyp, &t);
            let longer: TokenSequence = words.iter().map(|&i| names[i]).chain([names[extra]]).collect();
            let after = wordvec_features(&longer, &hyp, &t);
            let added = t.get(names[extra]).unwrap();
            for j in 0..3 {
                prop_assert!((after[j] - before[j] - f64::from(added[j])).abs() < 1e-9);
            }
            prop_assert_eq!(&after[3..], &before[3..]);
        }
    }
}
