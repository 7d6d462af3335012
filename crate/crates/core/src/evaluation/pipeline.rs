use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{EvalError, PairPrediction};
use crate::classifiers::{
    score_argument, train_linear_svm, train_mlp, Dataset, MlpConfig, Model, ModelError,
    ScoreMatrix, ScoreMode, SvmConfig, ATTACK, EDGE, NEUTRAL, SUPPORT,
};
use crate::corpus::{generate_pairs, Argument, Framework, PairLabel, Relation, StructureKind};
use crate::decoder::{
    decode, decode_single_step, decode_two_step, Caps, DecodeError, DecoderKind, EdgeResolver,
    ModelResolver, PredictedStructure, DEFAULT_TREE_CAP,
};
use crate::features::{
    fit_ngram_vocab, support_token_pairs, AntonymLexicon, EmbeddingTable, EntitySource,
    FeatureArtifacts, FeatureExtractor, FeatureGroup, FeatureMask, Lexicon, OfflineAnnotator,
    PreparedArgument, DEFAULT_LIKELIHOOD_THRESHOLD,
};

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_SEED: u64 = 42;

/// Which classifiers are trained and how their scores are decoded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentFramework {
    /// Support vs Neutral, every non-edge pair Neutral.
    #[default]
    #[serde(rename = "type1")]
    Type1,
    /// Support vs Neutral, reversed edges Neutral.
    #[serde(rename = "type2")]
    Type2,
    /// One Support/Attack/Neutral classifier (Single-Step).
    #[serde(rename = "multiclass")]
    MultiClass,
    /// Edge detection, then Support/Attack resolution of the chosen edges.
    #[serde(rename = "two-step")]
    TwoStep,
}

impl ExperimentFramework {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentFramework::Type1 => "type1",
            ExperimentFramework::Type2 => "type2",
            ExperimentFramework::MultiClass => "multiclass",
            ExperimentFramework::TwoStep => "two-step",
        }
    }

    /// Whether arguments with Attack edges can be used.
    pub fn handles_attack(self) -> bool {
        matches!(
            self,
            ExperimentFramework::MultiClass | ExperimentFramework::TwoStep
        )
    }

    pub fn is_labeled(self) -> bool {
        self.handles_attack()
    }
}

impl fmt::Display for ExperimentFramework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentFramework {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "type1" | "type-1" => Ok(ExperimentFramework::Type1),
            "type2" | "type-2" => Ok(ExperimentFramework::Type2),
            "multiclass" | "multi-class" | "single-step" => Ok(ExperimentFramework::MultiClass),
            "two-step" | "twostep" => Ok(ExperimentFramework::TwoStep),
            other => Err(format!(
                "unknown framework {other:?} (expected type1, type2, multiclass, two-step)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    #[default]
    Svm,
    Mlp,
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelFamily::Svm => "svm",
            ModelFamily::Mlp => "mlp",
        })
    }
}

impl FromStr for ModelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svm" => Ok(ModelFamily::Svm),
            "mlp" => Ok(ModelFamily::Mlp),
            other => Err(format!("unknown model {other:?} (expected svm, mlp)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub framework: ExperimentFramework,
    /// Neutral pairs of the Detection classifier in the two-step framework.
    pub detection: Framework,
    pub model: ModelFamily,
    pub features: FeatureMask,
    pub decoder: DecoderKind,
    pub caps: Caps,
    /// Arguments with more nodes are left out of experiments.
    pub max_nodes: usize,
    pub k: usize,
    pub seed: u64,
    pub ngram_threshold: f64,
    pub svm: SvmConfig,
    pub mlp: MlpConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            framework: ExperimentFramework::Type1,
            detection: Framework::Type2,
            model: ModelFamily::Svm,
            features: FeatureMask::base(),
            decoder: DecoderKind::Exhaustive,
            caps: Caps::default(),
            max_nodes: DEFAULT_TREE_CAP,
            k: DEFAULT_FOLDS,
            seed: DEFAULT_SEED,
            ngram_threshold: DEFAULT_LIKELIHOOD_THRESHOLD,
            svm: SvmConfig::default(),
            mlp: MlpConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.features.is_empty() {
            return Err(EvalError::Config("feature mask is empty".into()));
        }
        if self.k < 2 {
            return Err(EvalError::Config(format!(
                "k = {} leaves no training folds",
                self.k
            )));
        }
        if self.max_nodes < 2 {
            return Err(EvalError::Config(format!(
                "max_nodes = {} is below 2",
                self.max_nodes
            )));
        }
        if self.detection == Framework::MultiClass {
            return Err(EvalError::Config(
                "detection framework must be type1 or type2".into(),
            ));
        }
        if !(self.ngram_threshold > 1.0) {
            return Err(EvalError::Config(format!(
                "ngram_threshold {} must exceed 1",
                self.ngram_threshold
            )));
        }
        self.caps.check()?;
        Ok(())
    }

    /// Decoder used for an argument of `kind`: chains always use the chain
    /// decoder, trees the configured one.
    pub fn decoder_for(&self, kind: StructureKind) -> DecoderKind {
        match kind {
            StructureKind::Chain => DecoderKind::Chain,
            StructureKind::Tree => self.decoder,
        }
    }

    /// Node cap of the decoder used for `kind`, if it has one.
    pub fn decoder_cap(&self, kind: StructureKind) -> Option<usize> {
        match self.decoder_for(kind) {
            DecoderKind::Exhaustive => Some(self.caps.tree),
            DecoderKind::Chain => Some(self.caps.chain),
            DecoderKind::Arborescence => None,
        }
    }
}

/// Loaded resources shared by every fold.
#[derive(Clone)]
pub struct Resources<'a> {
    pub embeddings: Option<Arc<EmbeddingTable>>,
    pub negations: Lexicon,
    pub antonyms: AntonymLexicon,
    pub entities: &'a dyn EntitySource,
}

impl Default for Resources<'_> {
    fn default() -> Self {
        Resources {
            embeddings: None,
            negations: Lexicon::default_negations(),
            antonyms: AntonymLexicon::default(),
            entities: &OfflineAnnotator,
        }
    }
}

/// Support/Attack labeling of chosen edges in the two-step framework.
#[derive(Clone, Debug, PartialEq)]
pub enum Resolver {
    Model(Model),
    /// Training edges all had this label.
    Constant(Relation),
}

/// Everything needed to score and decode new arguments.
#[derive(Clone, Debug)]
pub struct TrainedPipeline {
    pub framework: ExperimentFramework,
    pub extractor: FeatureExtractor,
    /// The pair classifier, or the Detection classifier for two-step.
    pub model: Model,
    pub resolver: Option<Resolver>,
    /// Training pairs per class of `model`, then of the resolver.
    pub class_counts: Vec<(String, usize)>,
    pub resolver_counts: Vec<(String, usize)>,
}

/// Classifier outcomes on the pairs of one argument.
#[derive(Clone, Debug, Default)]
pub(crate) struct PairOutcomes {
    pub primary: Vec<(PairPrediction, usize)>,
    pub resolver: Vec<(PairPrediction, usize)>,
    /// Detection combined with the resolver, over Support/Attack/Neutral.
    pub combined: Vec<(PairPrediction, usize)>,
}

pub(crate) fn primary_classes(framework: ExperimentFramework) -> Vec<String> {
    let names: &[&str] = match framework {
        ExperimentFramework::Type1 | ExperimentFramework::Type2 => &[NEUTRAL, SUPPORT],
        ExperimentFramework::MultiClass => &[SUPPORT, ATTACK, NEUTRAL],
        ExperimentFramework::TwoStep => &[NEUTRAL, EDGE],
    };
    names.iter().map(|s| s.to_string()).collect()
}

pub(crate) fn resolver_classes() -> Vec<String> {
    vec![SUPPORT.into(), ATTACK.into()]
}

pub(crate) fn combined_classes() -> Vec<String> {
    vec![SUPPORT.into(), ATTACK.into(), NEUTRAL.into()]
}

fn class_of(label: PairLabel) -> &'static str {
    match label {
        PairLabel::Support => SUPPORT,
        PairLabel::Attack => ATTACK,
        PairLabel::Neutral => NEUTRAL,
    }
}

/// Training pairs of the primary classifier as `(text, hyp, class name)`.
pub(crate) fn primary_pairs(
    arg: &Argument,
    framework: ExperimentFramework,
    detection: Framework,
) -> Result<Vec<(usize, usize, &'static str)>, EvalError> {
    let index = |id: &str| arg.node_index(id).expect("validated argument");
    match framework {
        ExperimentFramework::Type1
        | ExperimentFramework::Type2
        | ExperimentFramework::MultiClass => {
            let fw = match framework {
                ExperimentFramework::Type1 => Framework::Type1,
                ExperimentFramework::Type2 => Framework::Type2,
                _ => Framework::MultiClass,
            };
            Ok(generate_pairs(arg, fw)?
                .into_iter()
                .map(|p| {
                    (
                        index(&p.text_node),
                        index(&p.hypothesis_node),
                        class_of(p.label),
                    )
                })
                .collect())
        }
        ExperimentFramework::TwoStep => {
            let edges = arg.indexed_edges();
            let n = arg.len();
            let mut out = Vec::new();
            match detection {
                Framework::Type2 => {
                    for &(c, p, _) in &edges {
                        out.push((c, p, EDGE));
                        out.push((p, c, NEUTRAL));
                    }
                }
                _ => {
                    for t in 0..n {
                        for h in (0..n).filter(|&h| h != t) {
                            let edge = edges.iter().any(|&(c, p, _)| (c, p) == (t, h));
                            out.push((t, h, if edge { EDGE } else { NEUTRAL }));
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

fn train_model(
    data: &Dataset,
    family: ModelFamily,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Model, ModelError> {
    Ok(match family {
        ModelFamily::Svm => Model::Linear(train_linear_svm(
            data,
            &SvmConfig {
                seed,
                ..config.svm.clone()
            },
        )?),
        ModelFamily::Mlp => Model::Mlp(train_mlp(
            data,
            &MlpConfig {
                seed,
                ..config.mlp.clone()
            },
        )?),
    })
}

fn counts(data: &Dataset) -> Vec<(String, usize)> {
    data.classes()
        .iter()
        .cloned()
        .zip(data.class_counts())
        .collect()
}

/// Fits the per-training-set artifacts (the n-gram vocabulary) and builds
/// the extractor.
pub fn fit_extractor(
    train: &[&Argument],
    config: &ExperimentConfig,
    resources: &Resources<'_>,
) -> Result<FeatureExtractor, EvalError> {
    let vocab = if config.features.contains(FeatureGroup::Ngram) {
        Some(fit_ngram_vocab(
            &support_token_pairs(train.iter().copied()),
            config.ngram_threshold,
        )?)
    } else {
        None
    };
    let embeddings = if config.features.contains(FeatureGroup::Wordvec) {
        resources.embeddings.clone()
    } else {
        None
    };
    Ok(FeatureExtractor::new(
        config.features.clone(),
        FeatureArtifacts {
            vocab,
            embeddings,
            negations: resources.negations.clone(),
            antonyms: resources.antonyms.clone(),
        },
    )?)
}

/// Trains the configured classifiers on `train`.
pub fn train_pipeline(
    train: &[&Argument],
    config: &ExperimentConfig,
    resources: &Resources<'_>,
    seed: u64,
) -> Result<TrainedPipeline, EvalError> {
    let extractor = fit_extractor(train, config, resources)?;
    let width = extractor.width();
    let mut primary = Dataset::new(width, primary_classes(config.framework));
    let mut resolver = Dataset::new(width, resolver_classes());
    for arg in train {
        let prepared = extractor.prepare(arg, resources.entities)?;
        for (t, h, class) in primary_pairs(arg, config.framework, config.detection)? {
            let label = primary.class_index(class).expect("catalog class");
            primary.push(&extractor.extract(&prepared, t, h), label)?;
        }
        if config.framework == ExperimentFramework::TwoStep {
            for (c, p, rel) in arg.indexed_edges() {
                let label = resolver
                    .class_index(class_of(rel.into()))
                    .expect("catalog class");
                resolver.push(&extractor.extract(&prepared, c, p), label)?;
            }
        }
    }
    let mut model = train_model(&primary, config.model, config, seed)?;
    model.set_fingerprint(extractor.fingerprint());
    let resolver_model = if config.framework == ExperimentFramework::TwoStep {
        let present: Vec<usize> = resolver.class_counts();
        Some(if present.iter().all(|&c| c > 0) {
            let mut m = train_model(&resolver, config.model, config, seed.wrapping_add(1))?;
            m.set_fingerprint(extractor.fingerprint());
            Resolver::Model(m)
        } else if present[1] > 0 {
            Resolver::Constant(Relation::Attack)
        } else {
            Resolver::Constant(Relation::Support)
        })
    } else {
        None
    };
    Ok(TrainedPipeline {
        framework: config.framework,
        class_counts: counts(&primary),
        resolver_counts: if resolver_model.is_some() {
            counts(&resolver)
        } else {
            Vec::new()
        },
        extractor,
        model,
        resolver: resolver_model,
    })
}

struct ConstantResolver(Relation);

impl EdgeResolver for ConstantResolver {
    fn resolve(&self, _: usize, _: usize) -> Result<Relation, DecodeError> {
        Ok(self.0)
    }
}

impl TrainedPipeline {
    pub fn score_mode(&self) -> ScoreMode {
        match self.framework {
            ExperimentFramework::MultiClass => ScoreMode::MultiClass,
            _ => ScoreMode::Binary,
        }
    }

    pub fn prepare(
        &self,
        arg: &Argument,
        entities: &dyn EntitySource,
    ) -> Result<PreparedArgument, EvalError> {
        Ok(self.extractor.prepare(arg, entities)?)
    }

    pub fn score(&self, prepared: &PreparedArgument) -> Result<ScoreMatrix, EvalError> {
        Ok(score_argument(
            &self.model,
            &self.extractor,
            prepared,
            self.score_mode(),
        )?)
    }

    /// Decodes one scored argument with the framework's labeling rule.
    pub fn decode(
        &self,
        prepared: &PreparedArgument,
        scores: &ScoreMatrix,
        decoder: DecoderKind,
        caps: &Caps,
    ) -> Result<PredictedStructure, EvalError> {
        Ok(match self.framework {
            ExperimentFramework::Type1 | ExperimentFramework::Type2 => {
                decode(scores, decoder, caps)?
            }
            ExperimentFramework::MultiClass => decode_single_step(scores, decoder, caps)?,
            ExperimentFramework::TwoStep => {
                match self.resolver.as_ref().expect("two-step has a resolver") {
                    Resolver::Model(m) => {
                        let r = ModelResolver::new(m, &self.extractor, prepared)?;
                        decode_two_step(scores, &r, decoder, caps)?
                    }
                    Resolver::Constant(rel) => {
                        decode_two_step(scores, &ConstantResolver(*rel), decoder, caps)?
                    }
                }
            }
        })
    }

    pub fn predict(
        &self,
        arg: &Argument,
        entities: &dyn EntitySource,
        decoder: DecoderKind,
        caps: &Caps,
    ) -> Result<PredictedStructure, EvalError> {
        let prepared = self.prepare(arg, entities)?;
        let scores = self.score(&prepared)?;
        self.decode(&prepared, &scores, decoder, caps)
    }

    fn resolve(
        &self,
        prepared: &PreparedArgument,
        c: usize,
        p: usize,
    ) -> (usize, Option<[f64; 2]>) {
        match self.resolver.as_ref().expect("two-step has a resolver") {
            Resolver::Model(m) => {
                let conf = m.confidences(&self.extractor.extract(prepared, c, p));
                let (s, a) = (
                    m.class_index(SUPPORT).expect("class"),
                    m.class_index(ATTACK).expect("class"),
                );
                let attack = conf[a] > conf[s];
                (usize::from(attack), Some([conf[s], conf[a]]))
            }
            Resolver::Constant(rel) => (usize::from(*rel == Relation::Attack), None),
        }
    }

    /// Pair-level predictions on a gold argument, for classifier metrics.
    pub(crate) fn classify_pairs(
        &self,
        arg: &Argument,
        prepared: &PreparedArgument,
        scores: &ScoreMatrix,
        detection: Framework,
    ) -> Result<PairOutcomes, EvalError> {
        let mut out = PairOutcomes::default();
        for (t, h, class) in primary_pairs(arg, self.framework, detection)? {
            let gold = self.model.class_index(class).expect("catalog class");
            let x = self.extractor.extract(prepared, t, h);
            let conf = self.model.confidences(&x);
            let predicted = crate::classifiers::argmax(&conf);
            let confidence = match self.framework {
                ExperimentFramework::MultiClass => conf[gold],
                _ => scores.score(t, h),
            };
            out.primary.push((
                PairPrediction {
                    predicted,
                    confidence: Some(confidence),
                },
                gold,
            ));
        }
        if self.framework == ExperimentFramework::TwoStep {
            for (c, p, rel) in arg.indexed_edges() {
                let gold = usize::from(rel == Relation::Attack);
                let (predicted, conf) = self.resolve(prepared, c, p);
                out.resolver.push((
                    PairPrediction {
                        predicted,
                        confidence: conf.map(|v| v[gold]),
                    },
                    gold,
                ));
            }
            let edge = self.model.class_index(EDGE).expect("detection class");
            let edges = arg.indexed_edges();
            let n = arg.len();
            for t in 0..n {
                for h in (0..n).filter(|&h| h != t) {
                    let gold = edges
                        .iter()
                        .find(|&&(c, p, _)| (c, p) == (t, h))
                        .map_or(2, |&(_, _, rel)| usize::from(rel == Relation::Attack));
                    let detected =
                        self.model.predict(&self.extractor.extract(prepared, t, h)) == edge;
                    let predicted = if detected {
                        self.resolve(prepared, t, h).0
                    } else {
                        2
                    };
                    out.combined.push((
                        PairPrediction {
                            predicted,
                            confidence: None,
                        },
                        gold,
                    ));
                }
            }
        }
        Ok(out)
    }
}
