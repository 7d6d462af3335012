use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{EvalError, ExperimentConfig, ExperimentFramework, Resolver, TrainedPipeline};
use crate::classifiers::{load_model, save_model};
use crate::corpus::Relation;
use crate::features::{EmbeddingTable, FeatureExtractor, FeatureGroup, FeatureSpec};

pub const PIPELINE_FORMAT: &str = "argstruct-pipeline";
pub const PIPELINE_VERSION: u32 = 1;

pub const MANIFEST_FILE: &str = "pipeline.json";
pub const MODEL_FILE: &str = "model.json";
pub const RESOLVER_FILE: &str = "resolver.json";
pub const FEATURES_FILE: &str = "features.json";

/// How the two-step resolver was stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolverArtifact {
    /// A model in [`RESOLVER_FILE`].
    Model,
    Constant(Relation),
}

/// Index file of a saved pipeline directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub format: String,
    pub version: u32,
    pub framework: ExperimentFramework,
    pub config: ExperimentConfig,
    pub feature_width: usize,
    pub fingerprint: String,
    pub class_counts: Vec<(String, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub resolver_counts: Vec<(String, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolver: Option<ResolverArtifact>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), EvalError> {
    let text = serde_json::to_string_pretty(value).expect("artifact serializes");
    fs::write(path, text + "\n").map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, EvalError> {
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| EvalError::Artifact {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes the manifest, model, resolver and feature spec (n-gram vocabulary
/// included) into `dir`. Embeddings are not copied. Returns the files written.
pub fn save_pipeline(
    dir: impl AsRef<Path>,
    pipeline: &TrainedPipeline,
    config: &ExperimentConfig,
) -> Result<Vec<PathBuf>, EvalError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| EvalError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    let model = dir.join(MODEL_FILE);
    save_model(&model, &pipeline.model)?;
    written.push(model);
    let resolver = match &pipeline.resolver {
        Some(Resolver::Model(m)) => {
            let path = dir.join(RESOLVER_FILE);
            save_model(&path, m)?;
            written.push(path);
            Some(ResolverArtifact::Model)
        }
        Some(Resolver::Constant(rel)) => Some(ResolverArtifact::Constant(*rel)),
        None => None,
    };
    let features = dir.join(FEATURES_FILE);
    write_json(&features, &pipeline.extractor.spec())?;
    written.push(features);
    let manifest = PipelineManifest {
        format: PIPELINE_FORMAT.into(),
        version: PIPELINE_VERSION,
        framework: pipeline.framework,
        config: config.clone(),
        feature_width: pipeline.extractor.width(),
        fingerprint: pipeline.extractor.fingerprint().to_string(),
        class_counts: pipeline.class_counts.clone(),
        resolver_counts: pipeline.resolver_counts.clone(),
        resolver,
    };
    let path = dir.join(MANIFEST_FILE);
    write_json(&path, &manifest)?;
    written.push(path);
    Ok(written)
}

/// Loads a directory written by [`save_pipeline`]. `embeddings` must match
/// the training dimension when the word-vector group is enabled.
pub fn load_pipeline(
    dir: impl AsRef<Path>,
    embeddings: Option<Arc<EmbeddingTable>>,
) -> Result<(TrainedPipeline, PipelineManifest), EvalError> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: PipelineManifest = read_json(&manifest_path)?;
    let bad = |message: String| EvalError::Artifact {
        path: manifest_path.display().to_string(),
        message,
    };
    if manifest.format != PIPELINE_FORMAT {
        return Err(bad(format!(
            "format {:?}, expected {PIPELINE_FORMAT:?}",
            manifest.format
        )));
    }
    if manifest.version != PIPELINE_VERSION {
        return Err(bad(format!(
            "version {}, expected {PIPELINE_VERSION}",
            manifest.version
        )));
    }
    let spec: FeatureSpec = read_json(&dir.join(FEATURES_FILE))?;
    if spec.mask.contains(FeatureGroup::Wordvec) && embeddings.is_none() {
        return Err(EvalError::Config(
            "the saved features use word vectors; supply the embeddings".into(),
        ));
    }
    let extractor = FeatureExtractor::from_spec(spec, embeddings)?;
    if extractor.fingerprint() != manifest.fingerprint {
        return Err(bad(
            "feature spec does not match the manifest fingerprint".into()
        ));
    }
    let model = load_model(dir.join(MODEL_FILE))?;
    let resolver = match &manifest.resolver {
        Some(ResolverArtifact::Model) => {
            Some(Resolver::Model(load_model(dir.join(RESOLVER_FILE))?))
        }
        Some(ResolverArtifact::Constant(rel)) => Some(Resolver::Constant(*rel)),
        None => None,
    };
    if (manifest.framework == ExperimentFramework::TwoStep) != resolver.is_some() {
        return Err(bad("resolver presence does not match the framework".into()));
    }
    Ok((
        TrainedPipeline {
            framework: manifest.framework,
            extractor,
            model,
            resolver,
            class_counts: manifest.class_counts.clone(),
            resolver_counts: manifest.resolver_counts.clone(),
        },
        manifest,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ModelError;
    use crate::decoder::Caps;
    use crate::evaluation::{train_pipeline, Resources};
    use crate::features::{FeatureMask, OfflineAnnotator};
    use crate::synthetic::{planted_corpus, PlantedConfig};

    fn round_trip(config: ExperimentConfig, attack_rate: f64) {
        let corpus = planted_corpus(&PlantedConfig {
            arguments: 12,
            attack_rate,
            ..PlantedConfig::default()
        });
        let table = Arc::new(corpus.embeddings.clone());
        let res = Resources {
            embeddings: Some(table.clone()),
            ..Resources::default()
        };
        let train: Vec<_> = corpus.arguments.iter().collect();
        let pipeline = train_pipeline(&train, &config, &res, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = save_pipeline(dir.path(), &pipeline, &config).unwrap();
        assert!(files.iter().all(|f| f.exists()));
        let (loaded, manifest) = load_pipeline(dir.path(), Some(table)).unwrap();
        assert_eq!(manifest.config, config);
        assert_eq!(loaded.model, pipeline.model);
        assert_eq!(loaded.resolver, pipeline.resolver);
        for arg in &corpus.arguments {
            let a = pipeline
                .predict(arg, &OfflineAnnotator, config.decoder, &Caps::default())
                .unwrap();
            let b = loaded
                .predict(arg, &OfflineAnnotator, config.decoder, &Caps::default())
                .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn binary_round_trip() {
        round_trip(ExperimentConfig::default(), 0.0);
    }

    #[test]
    fn two_step_round_trip() {
        round_trip(
            ExperimentConfig {
                framework: ExperimentFramework::TwoStep,
                features: FeatureMask::all(),
                ..ExperimentConfig::default()
            },
            0.4,
        );
    }

    #[test]
    fn missing_embeddings_and_tampering() {
        let corpus = planted_corpus(&PlantedConfig {
            arguments: 6,
            ..PlantedConfig::default()
        });
        let table = Arc::new(corpus.embeddings.clone());
        let res = Resources {
            embeddings: Some(table.clone()),
            ..Resources::default()
        };
        let train: Vec<_> = corpus.arguments.iter().collect();
        let config = ExperimentConfig::default();
        let pipeline = train_pipeline(&train, &config, &res, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_pipeline(dir.path(), &pipeline, &config).unwrap();
        assert!(matches!(
            load_pipeline(dir.path(), None),
            Err(EvalError::Config(_))
        ));

        let mut small = EmbeddingTable::new(3);
        small.insert("x", &[0.0; 3]).unwrap();
        assert!(matches!(
            load_pipeline(dir.path(), Some(Arc::new(small))),
            Err(EvalError::Feature(_))
        ));

        fs::write(dir.path().join(MODEL_FILE), "{").unwrap();
        assert!(matches!(
            load_pipeline(dir.path(), Some(table)),
            Err(EvalError::Model(ModelError::Corrupt { .. }))
        ));
    }
}
