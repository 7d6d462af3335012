use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{FeatureError, TokenSequence};

/// Word vectors of a fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    /// Adds a vector unless the word is already present.
    pub fn insert(
        &mut self,
        word: impl Into<String>,
        vector: &[f32],
    ) -> Result<bool, FeatureError> {
        if vector.len() != self.dim {
            return Err(FeatureError::Dimension {
                expected: self.dim,
                found: vector.len(),
                line: 0,
            });
        }
        let word = word.into();
        if self.index.contains_key(&word) {
            return Ok(false);
        }
        self.index.insert(word, self.index.len());
        self.data.extend_from_slice(vector);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// `None` for out-of-vocabulary words.
    pub fn get(&self, word: &str) -> Option<&[f32]> {
        let row = *self.index.get(word)?;
        Some(&self.data[row * self.dim..(row + 1) * self.dim])
    }

    /// Sum of the in-vocabulary token vectors.
    pub fn sum(&self, tokens: &[String]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for v in tokens.iter().filter_map(|t| self.get(t)) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += f64::from(*x);
            }
        }
        out
    }
}

/// Writes the table in word2vec text format, rows sorted by word.
pub fn save_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<(), FeatureError> {
    let path = path.as_ref();
    let mut words: Vec<&String> = table.index.keys().collect();
    words.sort();
    let mut out = format!("{} {}\n", words.len(), table.dim);
    for w in words {
        out.push_str(w);
        for x in table.get(w).unwrap_or_default() {
            out.push(' ');
            out.push_str(&x.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| FeatureError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a word2vec text-format file.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, FeatureError> {
    load(path.as_ref(), None)
}

/// Loads only the rows whose word is in `keep`.
pub fn load_embeddings_filtered(
    path: impl AsRef<Path>,
    keep: &HashSet<String>,
) -> Result<EmbeddingTable, FeatureError> {
    load(path.as_ref(), Some(keep))
}

fn load(path: &Path, keep: Option<&HashSet<String>>) -> Result<EmbeddingTable, FeatureError> {
    let io = |source| FeatureError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut lines = BufReader::new(File::open(path).map_err(io)?).lines();
    let header = lines.next().transpose().map_err(io)?.unwrap_or_default();
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match fields.as_slice() {
        [c, d] => match (c.parse::<usize>(), d.parse::<usize>()) {
            (Ok(c), Ok(d)) if d > 0 => (c, d),
            _ => return Err(FeatureError::Header(header.clone())),
        },
        _ => return Err(FeatureError::Header(header.clone())),
    };

    let mut table = EmbeddingTable::new(dim);
    let mut rows = 0;
    let mut vector = Vec::with_capacity(dim);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io)?;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        rows += 1;
        if keep.is_some_and(|k| !k.contains(word)) {
            continue;
        }
        vector.clear();
        for p in parts {
            let x: f32 = p.parse().map_err(|_| FeatureError::Format {
                path: path.display().to_string(),
                message: format!("line {}: bad number {p:?}", i + 2),
            })?;
            vector.push(x);
        }
        if vector.len() != dim {
            return Err(FeatureError::Dimension {
                expected: dim,
                found: vector.len(),
                line: i + 2,
            });
        }
        table.insert(word, &vector)?;
    }
    if rows != count {
        log::warn!(
            "{}: header declares {count} rows, found {rows}",
            path.display()
        );
    }
    Ok(table)
}

/// Sum of Text vectors followed by the sum of Hypothesis vectors.
pub fn wordvec_features(
    text: &TokenSequence,
    hyp: &TokenSequence,
    table: &EmbeddingTable,
) -> Vec<f64> {
    let mut out = table.sum(text);
    out.extend(table.sum(hyp));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::tokenize;
    use std::fs;

    fn write(contents: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vec.txt");
        fs::write(&path, contents).unwrap();
        (dir, path)
    }

    #[test]
    fn loads_text_format() {
        let (_d, path) = write("2 3\na 1 0 0\nb 0 1 0\n");
        let t = load_embeddings(&path).unwrap();
        assert_eq!((t.dim(), t.len()), (3, 2));
        assert_eq!(t.get("b").unwrap(), &[0., 1., 0.]);
        assert!(t.get("c").is_none());
    }

    #[test]
    fn save_round_trip() {
        let mut t = EmbeddingTable::new(2);
        t.insert("b", &[0.25, -1.5]).unwrap();
        t.insert("a", &[1e-7, 3.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        save_embeddings(&t, &path).unwrap();
        assert_eq!(load_embeddings(&path).unwrap(), {
            let mut sorted = EmbeddingTable::new(2);
            sorted.insert("a", &[1e-7, 3.0]).unwrap();
            sorted.insert("b", &[0.25, -1.5]).unwrap();
            sorted
        });
    }

    #[test]
    fn dimension_mismatch() {
        let (_d, path) = write("2 3\na 1 0 0\nb 0 1\n");
        assert!(matches!(
            load_embeddings(&path),
            Err(FeatureError::Dimension {
                expected: 3,
                found: 2,
                line: 3
            })
        ));
    }

    #[test]
    fn bad_header() {
        for header in ["", "3", "x 3", "2 0", "2 3 4"] {
            let (_d, path) = write(&format!("{header}\na 1 0 0\n"));
            assert!(
                matches!(load_embeddings(&path), Err(FeatureError::Header(_))),
                "{header:?}"
            );
        }
    }

    #[test]
    fn duplicates_keep_first_and_filter() {
        let (_d, path) = write("3 2\na 1 2\na 3 4\nb 5 6\n");
        let t = load_embeddings(&path).unwrap();
        assert_eq!(t.get("a").unwrap(), &[1., 2.]);
        let keep: HashSet<String> = ["b".to_string()].into();
        let f = load_embeddings_filtered(&path, &keep).unwrap();
        assert_eq!(f.len(), 1);
        assert!(f.get("a").is_none());
    }

    #[test]
    fn wordvec_sums() {
        let mut t = EmbeddingTable::new(2);
        t.insert("a", &[1., 0.]).unwrap();
        t.insert("b", &[0., 1.]).unwrap();
        assert_eq!(
            wordvec_features(&tokenize("a b"), &tokenize("a"), &t),
            vec![1., 1., 1., 0.]
        );
        assert_eq!(
            wordvec_features(&tokenize("x"), &tokenize("y"), &t),
            vec![0.; 4]
        );
        // OOV tokens are skipped, and an absent word is not a zero vector.
        assert_eq!(
            wordvec_features(&tokenize("a zz"), &tokenize(""), &t),
            vec![1., 0., 0., 0.]
        );
    }

    #[test]
    fn width_is_twice_dim() {
        let mut t = EmbeddingTable::new(300);
        t.insert("a", &[0.5; 300]).unwrap();
        assert_eq!(
            wordvec_features(&tokenize("a"), &tokenize("a"), &t).len(),
            600
        );
    }
}
