use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{FeatureError, TokenSequence};

pub const DEFAULT_LIKELIHOOD_THRESHOLD: f64 = 3.0;

/// Side-indicative unigrams and bigrams selected by likelihood ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgramVocabulary {
    pub text_unigrams: Vec<String>,
    pub text_bigrams: Vec<String>,
    pub hyp_unigrams: Vec<String>,
    pub hyp_bigrams: Vec<String>,
    pub threshold: f64,
}

impl NgramVocabulary {
    /// Every selected n-gram in feature order.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.text_unigrams
            .iter()
            .chain(&self.text_bigrams)
            .chain(&self.hyp_unigrams)
            .chain(&self.hyp_bigrams)
            .map(String::as_str)
    }

    /// Number of selected n-grams.
    pub fn len(&self) -> usize {
        self.text_unigrams.len()
            + self.text_bigrams.len()
            + self.hyp_unigrams.len()
            + self.hyp_bigrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Feature slots: each n-gram is counted on both sides.
    pub fn feature_width(&self) -> usize {
        2 * self.len()
    }
}

struct SideCounts {
    text: BTreeMap<String, usize>,
    hyp: BTreeMap<String, usize>,
}

impl SideCounts {
    fn collect(pairs: &[(TokenSequence, TokenSequence)], order: usize) -> Self {
        let mut text = BTreeMap::new();
        let mut hyp = BTreeMap::new();
        for (t, h) in pairs {
            for g in t.ngrams(order) {
                *text.entry(g).or_insert(0) += 1;
            }
            for g in h.ngrams(order) {
                *hyp.entry(g).or_insert(0) += 1;
            }
        }
        SideCounts { text, hyp }
    }

    /// `(text list, hypothesis list)` under add-one smoothing.
    fn select(&self, threshold: f64) -> (Vec<String>, Vec<String>) {
        let vocab: BTreeSet<&String> = self.text.keys().chain(self.hyp.keys()).collect();
        let v = vocab.len() as f64;
        let text_total = self.text.values().sum::<usize>() as f64;
        let hyp_total = self.hyp.values().sum::<usize>() as f64;
        let mut text_list = Vec::new();
        let mut hyp_list = Vec::new();
        for g in vocab {
            let p_text = (self.text.get(g).copied().unwrap_or(0) as f64 + 1.0) / (text_total + v);
            let p_hyp = (self.hyp.get(g).copied().unwrap_or(0) as f64 + 1.0) / (hyp_total + v);
            if p_text / p_hyp >= threshold {
                text_list.push(g.clone());
            } else if p_hyp / p_text >= threshold {
                hyp_list.push(g.clone());
            }
        }
        (text_list, hyp_list)
    }
}

/// Fits the vocabulary on `(Text, Hypothesis)` tokens of training Support pairs.
pub fn fit_ngram_vocab(
    pairs: &[(TokenSequence, TokenSequence)],
    threshold: f64,
) -> Result<NgramVocabulary, FeatureError> {
    if pairs.is_empty() {
        return Err(FeatureError::EmptyTraining);
    }
    if threshold.is_nan() || threshold <= 1.0 {
        return Err(FeatureError::Threshold(threshold));
    }
    let (text_unigrams, hyp_unigrams) = SideCounts::collect(pairs, 1).select(threshold);
    let (text_bigrams, hyp_bigrams) = SideCounts::collect(pairs, 2).select(threshold);
    Ok(NgramVocabulary {
        text_unigrams,
        text_bigrams,
        hyp_unigrams,
        hyp_bigrams,
        threshold,
    })
}

/// `(count in Text, count in Hypothesis)` for each vocabulary n-gram.
pub fn ngram_features(
    text: &TokenSequence,
    hyp: &TokenSequence,
    vocab: &NgramVocabulary,
) -> Vec<f64> {
    let count = |tokens: &TokenSequence, gram: &str| {
        let order = gram.split(' ').count();
        tokens.ngrams(order).filter(|g| g == gram).count() as f64
    };
    let mut out = Vec::with_capacity(vocab.feature_width());
    for gram in vocab.iter() {
        out.push(count(text, gram));
        out.push(count(hyp, gram));
    }
    out
}
