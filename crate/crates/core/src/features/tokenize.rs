use std::ops::Deref;

use serde::{Deserialize, Serialize};

/// Lowercased word tokens of one proposition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn count(&self, word: &str) -> usize {
        self.0.iter().filter(|t| *t == word).count()
    }

    /// Space-joined n-grams of the given order, in text order.
    pub fn ngrams(&self, order: usize) -> impl Iterator<Item = String> + '_ {
        self.0.windows(order.max(1)).map(|w| w.join(" "))
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSequence(
            iter.into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty())
                .collect(),
        )
    }
}

pub(crate) fn strip_edges(word: &str) -> &str {
    word.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Whitespace split, edge punctuation stripped, lowercased.
///
/// Apostrophes inside a word survive, so `can't` stays one token.
pub fn tokenize(text: &str) -> TokenSequence {
    text.split_whitespace()
        .map(strip_edges)
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}
