use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Argument, CorpusError};

/// Argument-level fold membership.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub assignment: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn fold_of(&self, argument_id: &str) -> Option<usize> {
        self.assignment.get(argument_id).copied()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignment.values() {
            sizes[f] += 1;
        }
        sizes
    }

    /// `(train, test)` views of `corpus` for one fold, in corpus order.
    pub fn split<'a>(
        &self,
        corpus: &'a [Argument],
        fold: usize,
    ) -> (Vec<&'a Argument>, Vec<&'a Argument>) {
        corpus
            .iter()
            .partition(|a| self.fold_of(&a.id) != Some(fold))
    }
}

/// Shuffles argument ids with a seeded PRNG and deals them round-robin.
pub fn split_folds(
    corpus: &[Argument],
    k: usize,
    seed: u64,
) -> Result<FoldAssignment, CorpusError> {
    if k == 0 || k > corpus.len() {
        return Err(CorpusError::FoldCount {
            arguments: corpus.len(),
            k,
        });
    }
    let mut seen = HashSet::new();
    let mut ids: Vec<&str> = Vec::with_capacity(corpus.len());
    for arg in corpus {
        if !seen.insert(arg.id.as_str()) {
            return Err(CorpusError::DuplicateArgument(arg.id.clone()));
        }
        ids.push(&arg.id);
    }
    ids.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let assignment = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id.to_owned(), i % k))
        .collect();
    Ok(FoldAssignment { k, assignment })
}
