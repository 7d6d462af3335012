use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{run_cross_validation, EvalError, ExperimentConfig, Resources};
use crate::corpus::Argument;
use crate::features::{FeatureError, FeatureGroup};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationMode {
    #[default]
    WithWordvec,
    /// Word vectors are removed from every run, including the baseline.
    WithoutWordvec,
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AblationMode::WithWordvec => "with-wordvec",
            AblationMode::WithoutWordvec => "without-wordvec",
        })
    }
}

impl FromStr for AblationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "with-wordvec" => Ok(AblationMode::WithWordvec),
            "without-wordvec" => Ok(AblationMode::WithoutWordvec),
            other => Err(format!(
                "unknown ablation mode {other:?} (expected with-wordvec, without-wordvec)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationRow {
    pub group: FeatureGroup,
    pub title: String,
    pub mean_sim_score: f64,
    /// `100 * (full - ablated) / full`; undefined when the full score is 0.
    pub pct_decrease: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationReport {
    pub mode: AblationMode,
    pub features: String,
    pub baseline_mean_sim_score: f64,
    pub rows: Vec<AblationRow>,
}

/// Leave-one-group-out ablation: one full run, then one run per named group
/// with that group removed, all on the same folds and seed. An empty `groups`
/// list ablates every group of the base configuration.
pub fn run_ablation(
    corpus: &[Argument],
    base: &ExperimentConfig,
    groups: &[String],
    mode: AblationMode,
    resources: &Resources<'_>,
) -> Result<AblationReport, EvalError> {
    let requested = groups
        .iter()
        .map(|g| g.parse::<FeatureGroup>())
        .collect::<Result<Vec<_>, FeatureError>>()?;
    let mut config = base.clone();
    if mode == AblationMode::WithoutWordvec {
        config.features = config.features.without(FeatureGroup::Wordvec);
    }
    let groups: Vec<FeatureGroup> = if requested.is_empty() {
        config.features.groups().to_vec()
    } else {
        for &g in &requested {
            if !base.features.contains(g) {
                return Err(EvalError::GroupNotInBase(g));
            }
        }
        requested
            .into_iter()
            .filter(|&g| !(mode == AblationMode::WithoutWordvec && g == FeatureGroup::Wordvec))
            .collect()
    };

    let full = run_cross_validation(corpus, &config, resources)?
        .structure
        .mean_sim_score;
    let mut rows = Vec::with_capacity(groups.len());
    for group in groups {
        let ablated = ExperimentConfig {
            features: config.features.without(group),
            ..config.clone()
        };
        if ablated.features.is_empty() {
            return Err(EvalError::Config(format!(
                "removing {group} leaves no features"
            )));
        }
        let score = run_cross_validation(corpus, &ablated, resources)?
            .structure
            .mean_sim_score;
        rows.push(AblationRow {
            group,
            title: group.title().to_string(),
            mean_sim_score: score,
            pct_decrease: (full != 0.0).then(|| 100.0 * (full - score) / full),
        });
    }
    Ok(AblationReport {
        mode,
        features: config.features.to_string(),
        baseline_mean_sim_score: full,
        rows,
    })
}
