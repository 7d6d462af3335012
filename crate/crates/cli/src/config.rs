use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use argstruct::corpus::Framework;
use argstruct::decoder::DecoderKind;
use argstruct::evaluation::{ExperimentConfig, ExperimentFramework, ModelFamily};
use argstruct::features::FeatureMask;
use clap::Args;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotatorMode {
    #[default]
    Offline,
    Remote,
    RemoteWithFallback,
}

impl fmt::Display for AnnotatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnnotatorMode::Offline => "offline",
            AnnotatorMode::Remote => "remote",
            AnnotatorMode::RemoteWithFallback => "remote-with-fallback",
        })
    }
}

impl FromStr for AnnotatorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "offline" => Ok(AnnotatorMode::Offline),
            "remote" => Ok(AnnotatorMode::Remote),
            "remote-with-fallback" => Ok(AnnotatorMode::RemoteWithFallback),
            other => Err(format!(
                "unknown annotator {other:?} (expected offline, remote, remote-with-fallback)"
            )),
        }
    }
}

/// Experiment manifest. Relative paths resolve against the manifest's
/// directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub negations: Option<PathBuf>,
    pub antonyms: Option<PathBuf>,
    pub annotator: AnnotatorMode,
    pub tagme_endpoint: Option<String>,
    /// Entity annotations are read from here, or computed and written here.
    pub entity_cache: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).with_context(|| format!("bad config {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("bad config {}", path.display()))?
        };
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.corpus,
            &mut config.embeddings,
            &mut config.negations,
            &mut config.antonyms,
            &mut config.entity_cache,
            &mut config.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}

/// Flags shared by every experiment command. Flags override the manifest.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// TOML or JSON experiment manifest
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus JSON file
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// word2vec text-format embeddings
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Negation word list, one per line
    #[arg(long)]
    pub negations: Option<PathBuf>,
    /// Antonym pairs, two words per line
    #[arg(long)]
    pub antonyms: Option<PathBuf>,
    /// offline, remote or remote-with-fallback
    #[arg(long)]
    pub annotator: Option<AnnotatorMode>,
    #[arg(long)]
    pub tagme_endpoint: Option<String>,
    #[arg(long, env = "ARGSTRUCT_TAGME_KEY", hide_env_values = true)]
    pub tagme_key: Option<String>,
    #[arg(long)]
    pub entity_cache: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (a file for predict)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// type1, type2, multiclass or two-step
    #[arg(long)]
    pub framework: Option<ExperimentFramework>,
    /// Neutral pairs of the two-step detector: type1 or type2
    #[arg(long, value_parser = parse_detection)]
    pub detection: Option<Framework>,
    /// svm or mlp
    #[arg(long)]
    pub model: Option<ModelFamily>,
    /// exhaustive, arborescence or chain
    #[arg(long)]
    pub decoder: Option<DecoderKind>,
    /// Comma-separated feature groups
    #[arg(long, value_parser = parse_mask)]
    pub features: Option<FeatureMask>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[arg(long)]
    pub tree_cap: Option<usize>,
    #[arg(long)]
    pub chain_cap: Option<usize>,
}

fn parse_mask(s: &str) -> Result<FeatureMask, String> {
    FeatureMask::parse(s).map_err(|e| e.to_string())
}

fn parse_detection(s: &str) -> Result<Framework, String> {
    match s {
        "type1" => Ok(Framework::Type1),
        "type2" => Ok(Framework::Type2),
        other => Err(format!(
            "unknown detection framework {other:?} (expected type1, type2)"
        )),
    }
}

impl CommonArgs {
    /// Manifest (if any) with the flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! over {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = Some(v.clone());
                }
            )*};
        }
        over!(
            corpus,
            embeddings,
            negations,
            antonyms,
            tagme_endpoint,
            entity_cache,
            out
        );
        if let Some(a) = self.annotator {
            c.annotator = a;
        }
        let e = &mut c.experiment;
        if let Some(v) = self.seed {
            e.seed = v;
        }
        if let Some(v) = self.framework {
            e.framework = v;
        }
        if let Some(v) = self.detection {
            e.detection = v;
        }
        if let Some(v) = self.model {
            e.model = v;
        }
        if let Some(v) = self.decoder {
            e.decoder = v;
        }
        if let Some(v) = &self.features {
            e.features = v.clone();
        }
        if let Some(v) = self.k {
            e.k = v;
        }
        if let Some(v) = self.max_nodes {
            e.max_nodes = v;
        }
        if let Some(v) = self.tree_cap {
            e.caps.tree = v;
        }
        if let Some(v) = self.chain_cap {
            e.caps.chain = v;
        }
        Ok(c)
    }
}

pub fn require<'a>(path: &'a Option<PathBuf>, what: &str, flag: &str) -> Result<&'a PathBuf> {
    match path {
        Some(p) => Ok(p),
        None => bail!("no {what} given (use {flag} or set it in the config)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_manifest_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            r#"
corpus = "data/corpus.json"
annotator = "remote-with-fallback"

[experiment]
framework = "two-step"
features = ["ngram", "discourse"]
k = 3

[experiment.svm]
epochs = 5
"#,
        )
        .unwrap();
        let args = CommonArgs {
            config: Some(path),
            k: Some(4),
            ..CommonArgs::default()
        };
        let c = args.resolve().unwrap();
        assert_eq!(c.corpus.unwrap(), dir.path().join("data/corpus.json"));
        assert_eq!(c.annotator, AnnotatorMode::RemoteWithFallback);
        assert_eq!(c.experiment.framework, ExperimentFramework::TwoStep);
        assert_eq!(c.experiment.features.to_string(), "discourse,ngram");
        assert_eq!(c.experiment.k, 4);
        assert_eq!(c.experiment.svm.epochs, 5);
        assert_eq!(c.experiment.seed, 42);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"experiment": {"folds": 3}}"#).unwrap();
        let err = RunConfig::load(&path).unwrap_err();
        assert!(format!("{err:#}").contains("folds"), "{err:#}");
    }
}
