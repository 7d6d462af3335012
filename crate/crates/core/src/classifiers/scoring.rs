use serde::{Deserialize, Serialize};

use super::{Model, ModelError, ATTACK, NEUTRAL, SUPPORT};
use crate::features::{FeatureExtractor, PreparedArgument};

/// Min-max maps `raw` onto `[0, 1]`; a constant list maps to 0.5 everywhere.
pub fn calibrate_scores(raw: &[f64]) -> Result<Vec<f64>, ModelError> {
    if raw.is_empty() {
        return Err(ModelError::Empty);
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite("scores"));
    }
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return Ok(vec![0.5; raw.len()]);
    }
    Ok(raw
        .iter()
        .map(|v| ((v - min) / (max - min)).clamp(0.0, 1.0))
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    /// Calibrated confidence of the model's positive class.
    #[default]
    Binary,
    /// Support, Attack and Neutral confidences per pair.
    MultiClass,
}

/// Scores for every ordered pair `(child, parent)` of one argument.
///
/// Entries are stored row-major by child index; the diagonal is unused.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub argument_id: String,
    pub node_ids: Vec<String>,
    raw: Vec<f64>,
    calibrated: Vec<f64>,
    confidences: Option<Vec<[f64; 3]>>,
}

impl ScoreMatrix {
    /// Builds a matrix from raw scores and calibrates them over the argument.
    pub fn from_raw(
        argument_id: impl Into<String>,
        node_ids: Vec<String>,
        mut raw: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, ModelError> {
        let argument_id = argument_id.into();
        let n = node_ids.len();
        if n < 2 {
            return Err(ModelError::TooSmall(argument_id));
        }
        let mut values = vec![0.0; n * n];
        let mut off_diagonal = Vec::with_capacity(n * (n - 1));
        for c in 0..n {
            for p in 0..n {
                if c != p {
                    let v = raw(c, p);
                    values[c * n + p] = v;
                    off_diagonal.push(v);
                }
            }
        }
        let scaled = calibrate_scores(&off_diagonal)?;
        let mut calibrated = vec![0.0; n * n];
        let mut it = scaled.into_iter();
        for c in 0..n {
            for p in 0..n {
                if c != p {
                    calibrated[c * n + p] = it.next().expect("one per pair");
                }
            }
        }
        Ok(ScoreMatrix {
            argument_id,
            node_ids,
            raw: values,
            calibrated,
            confidences: None,
        })
    }

    /// Uses `score` as the edge score directly, without calibration.
    pub fn from_scores(
        argument_id: impl Into<String>,
        node_ids: Vec<String>,
        mut score: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let n = node_ids.len();
        let mut values = vec![0.0; n * n];
        for c in 0..n {
            for p in 0..n {
                if c != p {
                    values[c * n + p] = score(c, p);
                }
            }
        }
        ScoreMatrix {
            argument_id: argument_id.into(),
            node_ids,
            raw: values.clone(),
            calibrated: values,
            confidences: None,
        }
    }

    /// Multi-class matrix from `[Support, Attack, Neutral]` confidences.
    /// The binary score of a pair is its calibrated Support confidence.
    pub fn from_confidences(
        argument_id: impl Into<String>,
        node_ids: Vec<String>,
        mut confidences: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self, ModelError> {
        let n = node_ids.len();
        let mut table = vec![[0.0; 3]; n * n];
        for c in 0..n {
            for p in 0..n {
                if c != p {
                    table[c * n + p] = confidences(c, p);
                }
            }
        }
        let mut m = ScoreMatrix::from_raw(argument_id, node_ids, |c, p| table[c * n + p][0])?;
        m.confidences = Some(table);
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    /// Calibrated score of the edge `child -> parent`.
    pub fn score(&self, child: usize, parent: usize) -> f64 {
        debug_assert_ne!(child, parent);
        self.calibrated[child * self.len() + parent]
    }

    pub fn raw(&self, child: usize, parent: usize) -> f64 {
        self.raw[child * self.len() + parent]
    }

    /// `[Support, Attack, Neutral]` confidences, in multi-class mode.
    pub fn confidences(&self, child: usize, parent: usize) -> Option<[f64; 3]> {
        self.confidences
            .as_ref()
            .map(|t| t[child * self.len() + parent])
    }

    pub fn has_confidences(&self) -> bool {
        self.confidences.is_some()
    }

    /// All ordered pairs `(child, parent)` in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |c| (0..n).filter(move |&p| p != c).map(move |p| (c, p)))
    }
}

/// Scores every ordered pair of a prepared argument.
pub fn score_argument(
    model: &Model,
    extractor: &FeatureExtractor,
    prepared: &PreparedArgument,
    mode: ScoreMode,
) -> Result<ScoreMatrix, ModelError> {
    if model.fingerprint() != extractor.fingerprint() {
        return Err(ModelError::LayoutMismatch {
            expected: model.fingerprint().to_string(),
            found: extractor.fingerprint().to_string(),
        });
    }
    if model.width() != extractor.width() {
        return Err(ModelError::Width {
            expected: model.width(),
            found: extractor.width(),
        });
    }
    if prepared.len() < 2 {
        return Err(ModelError::TooSmall(prepared.argument_id.clone()));
    }
    let ids = prepared.node_ids.clone();
    match mode {
        ScoreMode::Binary => ScoreMatrix::from_raw(&*prepared.argument_id, ids, |c, p| {
            model.positive_score(&extractor.extract(prepared, c, p))
        }),
        ScoreMode::MultiClass => {
            let slot = |name: &str| {
                model
                    .class_index(name)
                    .ok_or_else(|| ModelError::MissingClass(name.into()))
            };
            let (s, a, n) = (slot(SUPPORT)?, slot(ATTACK)?, slot(NEUTRAL)?);
            ScoreMatrix::from_confidences(&*prepared.argument_id, ids, |c, p| {
                let conf = model.confidences(&extractor.extract(prepared, c, p));
                [conf[s], conf[a], conf[n]]
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{train_linear_svm, Dataset, SvmConfig};
    use crate::features::{
        FeatureArtifacts, FeatureExtractor, FeatureGroup, FeatureMask, OfflineAnnotator,
    };
    use proptest::prelude::*;

    #[test]
    fn calibration_examples() {
        assert_eq!(
            calibrate_scores(&[-2.0, 0.0, 2.0]).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        assert_eq!(calibrate_scores(&[7.0, 7.0, 7.0]).unwrap(), vec![0.5; 3]);
        assert_eq!(calibrate_scores(&[1.0, 3.0]).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(calibrate_scores(&[]), Err(ModelError::Empty)));
        assert!(matches!(
            calibrate_scores(&[1.0, f64::NAN]),
            Err(ModelError::NonFinite(_))
        ));
    }

    proptest! {
        #[test]
        fn calibration_preserves_order(raw in prop::collection::vec(-1e6f64..1e6, 1..40)) {
            let cal = calibrate_scores(&raw).unwrap();
            prop_assert!(cal.iter().all(|v| (0.0..=1.0).contains(v)));
            for i in 0..raw.len() {
                for j in 0..raw.len() {
                    if raw[i] < raw[j] {
                        prop_assert!(cal[i] <= cal[j]);
                    }
                }
            }
            let best = crate::classifiers::argmax(&raw);
            prop_assert_eq!(cal[best], cal.iter().copied().fold(f64::MIN, f64::max));
        }
    }

    fn pipeline(classes: &[&str]) -> (Model, FeatureExtractor) {
        let mask = FeatureMask::new([FeatureGroup::Discourse, FeatureGroup::Lcp]);
        let extractor = FeatureExtractor::new(mask, FeatureArtifacts::default()).unwrap();
        let mut d = Dataset::new(extractor.width(), classes.iter().copied());
        for i in 0..30 {
            let mut row = vec![0.0; extractor.width()];
            row[i % extractor.width()] = (i % 5) as f64;
            d.push(&row, i % classes.len()).unwrap();
        }
        let mut model = Model::Linear(train_linear_svm(&d, &SvmConfig::default()).unwrap());
        model.set_fingerprint(extractor.fingerprint());
        (model, extractor)
    }

    #[test]
    fn binary_scores_cover_every_pair() {
        let (model, extractor) = pipeline(&["neutral", "support"]);
        let arg = crate::corpus::tests::fig1();
        let prepared = extractor.prepare(&arg, &OfflineAnnotator).unwrap();
        let m = score_argument(&model, &extractor, &prepared, ScoreMode::Binary).unwrap();
        assert_eq!(m.pairs().count(), 6);
        assert!(m.pairs().all(|(c, p)| (0.0..=1.0).contains(&m.score(c, p))));
        assert!(!m.has_confidences());
    }

    #[test]
    fn multiclass_confidences_sum_to_one() {
        let (model, extractor) = pipeline(&["support", "attack", "neutral"]);
        let arg = crate::corpus::tests::fig1();
        let prepared = extractor.prepare(&arg, &OfflineAnnotator).unwrap();
        let m = score_argument(&model, &extractor, &prepared, ScoreMode::MultiClass).unwrap();
        for (c, p) in m.pairs() {
            let conf = m.confidences(c, p).unwrap();
            assert!((conf.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mismatched_layout_rejected() {
        let (mut model, extractor) = pipeline(&["neutral", "support"]);
        model.set_fingerprint("0000");
        let prepared = extractor
            .prepare(&crate::corpus::tests::fig1(), &OfflineAnnotator)
            .unwrap();
        assert!(matches!(
            score_argument(&model, &extractor, &prepared, ScoreMode::Binary),
            Err(ModelError::LayoutMismatch { .. })
        ));
    }

    #[test]
    fn missing_class_in_multiclass_mode() {
        let (model, extractor) = pipeline(&["neutral", "support"]);
        let prepared = extractor
            .prepare(&crate::corpus::tests::fig1(), &OfflineAnnotator)
            .unwrap();
        assert!(matches!(
            score_argument(&model, &extractor, &prepared, ScoreMode::MultiClass),
            Err(ModelError::MissingClass(_))
        ));
    }

    #[test]
    fn single_node_rejected() {
        assert!(matches!(
            ScoreMatrix::from_raw("x", vec!["a".into()], |_, _| 0.0),
            Err(ModelError::TooSmall(_))
        ));
    }
}
