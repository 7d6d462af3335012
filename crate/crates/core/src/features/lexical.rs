//! Count-based lexical feature groups and the lexicons behind them.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureError, TokenSequence};

/// Markers counted on the Text side, in feature order.
pub const TEXT_MARKERS: [&str; 6] = ["as", "or", "and", "roughly", "then", "since"];
/// Markers counted on the Hypothesis side, in feature order.
pub const HYPOTHESIS_MARKERS: [&str; 5] = ["therefore", "however", "though", "but", "quite"];
pub const MODALS: [&str; 8] = [
    "can", "could", "may", "might", "must", "will", "would", "should",
];
pub const DEFAULT_NEGATIONS: [&str; 11] = [
    "not", "no", "never", "n't", "can't", "cannot", "won't", "don't", "neither", "nor", "without",
];

/// Words within this many preceding tokens of a negation are negated.
const NEGATION_SCOPE: usize = 2;

pub fn discourse_marker_features(text: &TokenSequence, hyp: &TokenSequence) -> Vec<f64> {
    TEXT_MARKERS
        .iter()
        .map(|w| text.count(w) as f64)
        .chain(HYPOTHESIS_MARKERS.iter().map(|w| hyp.count(w) as f64))
        .collect()
}

pub fn modal_features(text: &TokenSequence, hyp: &TokenSequence) -> Vec<f64> {
    let side = |t: &TokenSequence| MODALS.iter().map(|w| t.count(w) as f64).collect::<Vec<_>>();
    let mut out = side(text);
    out.extend(side(hyp));
    out
}

/// Length in tokens of the longest contiguous run shared by both sides.
pub fn longest_common_phrase(text: &[String], hyp: &[String]) -> usize {
    // Classic suffix-length table, one row at a time.
    let mut prev = vec![0usize; hyp.len() + 1];
    let mut cur = vec![0usize; hyp.len() + 1];
    let mut best = 0;
    for t in text {
        for (j, h) in hyp.iter().enumerate() {
            cur[j + 1] = if t == h { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// An ordered word list; feature order follows list order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    words: Vec<String>,
}

impl Lexicon {
    pub fn new<S: Into<String>>(words: impl IntoIterator<Item = S>) -> Self {
        let mut seen = HashSet::new();
        let words = words
            .into_iter()
            .map(|w| w.into().trim().to_lowercase())
            .filter(|w| !w.is_empty() && seen.insert(w.clone()))
            .collect();
        Lexicon { words }
    }

    pub fn default_negations() -> Self {
        Self::new(DEFAULT_NEGATIONS)
    }

    /// One entry per line; blank lines and `#` comments are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let text = read(path.as_ref())?;
        Ok(Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.iter().any(|w| w == word)
    }
}

/// Symmetric antonym relation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntonymLexicon {
    pairs: Vec<(String, String)>,
    #[serde(skip)]
    index: HashSet<(String, String)>,
}

impl AntonymLexicon {
    pub fn new<S: Into<String>>(pairs: impl IntoIterator<Item = (S, S)>) -> Self {
        let mut lexicon = AntonymLexicon::default();
        for (a, b) in pairs {
            let (a, b) = (
                a.into().trim().to_lowercase(),
                b.into().trim().to_lowercase(),
            );
            if !a.is_empty() && !b.is_empty() && lexicon.index.insert((a.clone(), b.clone())) {
                lexicon.index.insert((b.clone(), a.clone()));
                lexicon.pairs.push((a, b));
            }
        }
        lexicon.pairs.sort();
        lexicon
    }

    /// Two tab-separated columns per line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let path = path.as_ref();
        let text = read(path)?;
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) => pairs.push((a.to_owned(), b.to_owned())),
                _ => {
                    return Err(FeatureError::Lexicon {
                        path: path.display().to_string(),
                        line: lineno + 1,
                        message: "expected `word<TAB>antonym`".into(),
                    })
                }
            }
        }
        Ok(Self::new(pairs))
    }

    /// Rebuilds the lookup index after deserialization.
    pub(crate) fn reindexed(self) -> Self {
        Self::new(self.pairs)
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn are_antonyms(&self, a: &str, b: &str) -> bool {
        self.index.contains(&(a.to_owned(), b.to_owned()))
    }
}

fn read(path: &Path) -> Result<String, FeatureError> {
    fs::read_to_string(path).map_err(|source| FeatureError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn negation_marker_features(
    text: &TokenSequence,
    hyp: &TokenSequence,
    lexicon: &Lexicon,
) -> Vec<f64> {
    lexicon
        .words()
        .iter()
        .map(|w| text.count(w) as f64)
        .chain(lexicon.words().iter().map(|w| hyp.count(w) as f64))
        .collect()
}

/// Per-position flag: token is preceded within the scope by a negation word.
fn negated_positions(tokens: &[String], negations: &Lexicon) -> Vec<bool> {
    (0..tokens.len())
        .map(|i| {
            !negations.contains(&tokens[i])
                && tokens[i.saturating_sub(NEGATION_SCOPE)..i]
                    .iter()
                    .any(|t| negations.contains(t))
        })
        .collect()
}

/// `[antonym pairs, negation parity, negated overlap]` for an ordered pair.
pub fn contrast_relation_features(
    text: &TokenSequence,
    hyp: &TokenSequence,
    antonyms: &AntonymLexicon,
    negations: &Lexicon,
) -> Vec<f64> {
    let antonym_pairs = text
        .iter()
        .map(|t| hyp.iter().filter(|h| antonyms.are_antonyms(t, h)).count())
        .sum::<usize>();

    let has_neg = |s: &TokenSequence| s.iter().any(|t| negations.contains(t));
    let parity = usize::from(has_neg(text) != has_neg(hyp));

    let text_neg = negated_positions(text, negations);
    let hyp_neg = negated_positions(hyp, negations);
    let plain = |tokens: &[String], flags: &[bool]| -> HashSet<String> {
        tokens
            .iter()
            .zip(flags)
            .filter(|(t, &neg)| !neg && !negations.contains(t))
            .map(|(t, _)| t.clone())
            .collect()
    };
    let text_plain = plain(text, &text_neg);
    let hyp_plain = plain(hyp, &hyp_neg);
    let negated_overlap = |tokens: &[String], flags: &[bool], other: &HashSet<String>| {
        tokens
            .iter()
            .zip(flags)
            .filter(|(t, &neg)| neg && other.contains(*t))
            .count()
    };
    let overlap =
        negated_overlap(text, &text_neg, &hyp_plain) + negated_overlap(hyp, &hyp_neg, &text_plain);

    vec![antonym_pairs as f64, parity as f64, overlap as f64]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::tokenize;
    use proptest::prelude::*;

    fn t(s: &str) -> TokenSequence {
        tokenize(s)
    }

    #[test]
    fn discourse_counts() {
        assert_eq!(
            discourse_marker_features(&t("x and y and z"), &t("therefore w")),
            vec![0., 0., 2., 0., 0., 0., 1., 0., 0., 0., 0.]
        );
        assert_eq!(discourse_marker_features(&t(""), &t("")), vec![0.; 11]);
        // Text markers are not counted in the Hypothesis, and vice versa.
        assert_eq!(
            discourse_marker_features(&t("therefore"), &t("since")),
            vec![0.; 11]
        );
    }

    #[test]
    fn modal_counts() {
        let f = modal_features(&t("it must must go"), &t("it will go"));
        let mut expected = vec![0.; 16];
        expected[4] = 2.;
        expected[8 + 5] = 1.;
        assert_eq!(f, expected);
        assert_eq!(modal_features(&t(""), &t("")), vec![0.; 16]);
        let f = modal_features(&t("should"), &t("should"));
        assert_eq!((f[7], f[15]), (1., 1.));
    }

    /// All common substrings, checked by brute force.
    fn lcp_oracle(a: &[String], b: &[String]) -> usize {
        let mut best = 0;
        for i in 0..a.len() {
            for j in i + 1..=a.len() {
                let needle = &a[i..j];
                if b.windows(needle.len()).any(|w| w == needle) {
                    best = best.max(needle.len());
                }
            }
        }
        best
    }

    #[test]
    fn lcp_examples() {
        assert_eq!(longest_common_phrase(&t("a b c d"), &t("x b c y")), 2);
        assert_eq!(longest_common_phrase(&t("a b c d e"), &t("a b c d e")), 5);
        assert_eq!(longest_common_phrase(&t("a b"), &t("c d")), 0);
        assert_eq!(longest_common_phrase(&t(""), &t("c d")), 0);
    }

    proptest! {
        #[test]
        fn lcp_matches_oracle_and_is_symmetric(
            a in prop::collection::vec(0u8..4, 0..10),
            b in prop::collection::vec(0u8..4, 0..10),
        ) {
            let a: Vec<String> = a.iter().map(|x| x.to_string()).collect();
            let b: Vec<String> = b.iter().map(|x| x.to_string()).collect();
            let l = longest_common_phrase(&a, &b);
            prop_assert_eq!(l, lcp_oracle(&a, &b));
            prop_assert_eq!(l, longest_common_phrase(&b, &a));
            prop_assert!(l <= a.len().min(b.len()));
        }
    }

    #[test]
    fn negation_markers() {
        let lex = Lexicon::default_negations();
        let f = negation_marker_features(&t("never never"), &t(""), &lex);
        assert_eq!(f.len(), 22);
        assert_eq!(f[2], 2.);
        assert_eq!(f.iter().sum::<f64>(), 2.);
        assert_eq!(negation_marker_features(&t(""), &t(""), &lex), vec![0.; 22]);
        let f = negation_marker_features(&t("not"), &t("not"), &lex);
        assert_eq!((f[0], f[11]), (1., 1.));
    }

    #[test]
    fn contrast_examples() {
        let neg = Lexicon::default_negations();
        let ant = AntonymLexicon::new([("harmful", "beneficial")]);
        assert_eq!(
            contrast_relation_features(
                &t("games are harmful"),
                &t("games are beneficial"),
                &ant,
                &neg
            ),
            vec![1., 0., 0.]
        );
        assert_eq!(
            contrast_relation_features(&t("it is not safe"), &t("it is safe"), &ant, &neg),
            vec![0., 1., 1.]
        );
        assert_eq!(
            contrast_relation_features(&t("it is safe"), &t("it is safe"), &ant, &neg),
            vec![0., 0., 0.]
        );
        // Empty antonym lexicon leaves only the negation signals.
        let none = AntonymLexicon::default();
        assert_eq!(
            contrast_relation_features(
                &t("games are harmful"),
                &t("games are beneficial"),
                &none,
                &neg
            ),
            vec![0., 0., 0.]
        );
    }

    #[test]
    fn negation_scope_is_two_tokens() {
        let neg = Lexicon::default_negations();
        assert_eq!(
            negated_positions(&t("not very safe here"), &neg),
            vec![false, true, true, false]
        );
    }

    #[test]
    fn lexicon_files() {
        let dir = tempfile::tempdir().unwrap();
        let neg_path = dir.path().join("neg.txt");
        fs::write(&neg_path, "# negations\nnot\n\nNever\nnot\n").unwrap();
        assert_eq!(Lexicon::load(&neg_path).unwrap().words(), ["not", "never"]);

        let ant_path = dir.path().join("ant.tsv");
        fs::write(&ant_path, "hot\tcold\nup\tdown\n").unwrap();
        let ant = AntonymLexicon::load(&ant_path).unwrap();
        assert!(ant.are_antonyms("cold", "hot"));
        assert!(!ant.are_antonyms("hot", "down"));

        fs::write(&ant_path, "hot cold\n").unwrap();
        assert!(matches!(
            AntonymLexicon::load(&ant_path),
            Err(FeatureError::Lexicon { line: 1, .. })
        ));
    }
}
