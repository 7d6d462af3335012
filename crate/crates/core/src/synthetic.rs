//! Generated corpora with a known, learnable structure signal.
//!
//! [`PlantedSignal::Lexical`] trees mark every gold edge with a phrase shared
//! by child and parent (its first word is a capitalized entity), put
//! "therefore" in the root and "since" in every other node.
//! [`PlantedSignal::Wordvec`] arguments are stars whose root carries a word
//! from a pool aligned with one embedding direction and whose leaves carry
//! words aligned with the opposite direction; nothing else separates them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Argument, Edge, PropositionNode, Relation, StructureKind};
use crate::evaluation::random_tree;
use crate::features::EmbeddingTable;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantedSignal {
    #[default]
    Lexical,
    Wordvec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedConfig {
    pub arguments: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub dim: usize,
    /// Probability that a gold edge is an Attack; attacking children also
    /// contain "not".
    pub attack_rate: f64,
    pub kind: StructureKind,
    pub signal: PlantedSignal,
    /// Filler words per node.
    pub filler: usize,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            arguments: 100,
            min_nodes: 3,
            max_nodes: 6,
            dim: 16,
            attack_rate: 0.0,
            kind: StructureKind::Tree,
            signal: PlantedSignal::Lexical,
            filler: 6,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlantedCorpus {
    pub arguments: Vec<Argument>,
    /// Vectors for every generated word.
    pub embeddings: EmbeddingTable,
}

const ONSETS: [&str; 12] = ["b", "d", "f", "g", "k", "l", "m", "p", "r", "s", "v", "z"];
const NUCLEI: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 4] = ["", "n", "r", "x"];
const ROLE_POOL: usize = 30;

struct Words {
    rng: ChaCha8Rng,
    dim: usize,
    table: EmbeddingTable,
}

impl Words {
    fn syllable(&mut self) -> String {
        let o = ONSETS[self.rng.random_range(0..ONSETS.len())];
        let n = NUCLEI[self.rng.random_range(0..NUCLEI.len())];
        let c = CODAS[self.rng.random_range(0..CODAS.len())];
        format!("{o}{n}{c}")
    }

    /// Pseudo-word of 3 or 4 syllables, so it never collides with a marker,
    /// modal or negation word.
    fn word(&mut self) -> String {
        let k = self.rng.random_range(3..=4);
        let w: String = (0..k).map(|_| self.syllable()).collect();
        if self.table.get(&w).is_none() {
            let mut v: Vec<f32> = (0..self.dim)
                .map(|_| self.rng.random_range(-1.0..1.0))
                .collect();
            v[0] = 0.0;
            self.insert(&w, &v);
        }
        w
    }

    /// Word whose vector is `sign` along axis 0 (ordinary words are 0 there) plus small noise elsewhere.
    fn role_word(&mut self, sign: f32) -> String {
        loop {
            let k = self.rng.random_range(3..=4);
            let w: String = (0..k).map(|_| self.syllable()).collect();
            if self.table.get(&w).is_none() {
                let mut v: Vec<f32> = (0..self.dim)
                    .map(|_| self.rng.random_range(-0.1..0.1))
                    .collect();
                v[0] = sign;
                self.insert(&w, &v);
                return w;
            }
        }
    }

    fn insert(&mut self, w: &str, v: &[f32]) {
        self.table
            .insert(w, v)
            .expect("vector width matches the table");
    }

    fn filler(&mut self, k: usize) -> Vec<String> {
        (0..k).map(|_| self.word()).collect()
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

fn gold_parents(
    n: usize,
    kind: StructureKind,
    signal: PlantedSignal,
    rng: &mut ChaCha8Rng,
) -> Vec<Option<usize>> {
    match (kind, signal) {
        (StructureKind::Chain, _) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let mut parents = vec![None; n];
            for w in order.windows(2) {
                parents[w[0]] = Some(w[1]);
            }
            parents
        }
        (StructureKind::Tree, PlantedSignal::Wordvec) => {
            let root = rng.random_range(0..n);
            (0..n).map(|v| (v != root).then_some(root)).collect()
        }
        (StructureKind::Tree, PlantedSignal::Lexical) => random_tree(n, rng),
    }
}

/// Generates a planted corpus. Deterministic per `config.seed`.
pub fn planted_corpus(config: &PlantedConfig) -> PlantedCorpus {
    assert!(
        config.min_nodes >= 2 && config.min_nodes <= config.max_nodes,
        "node range must be within 2.."
    );
    assert!(config.dim >= 1, "embedding dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut words = Words {
        rng: ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed),
        dim: config.dim,
        table: EmbeddingTable::new(config.dim),
    };
    let root_pool: Vec<String> = (0..ROLE_POOL).map(|_| words.role_word(1.0)).collect();
    let leaf_pool: Vec<String> = (0..ROLE_POOL).map(|_| words.role_word(-1.0)).collect();

    let mut arguments = Vec::with_capacity(config.arguments);
    for a in 0..config.arguments {
        let n = rng.random_range(config.min_nodes..=config.max_nodes);
        let parents = gold_parents(n, config.kind, config.signal, &mut rng);
        let labels: Vec<Relation> = (0..n)
            .map(|_| {
                if rng.random_bool(config.attack_rate.clamp(0.0, 1.0)) {
                    Relation::Attack
                } else {
                    Relation::Support
                }
            })
            .collect();

        // Each node is a list of chunks so planted phrases stay contiguous.
        let mut texts: Vec<Vec<Vec<String>>> = (0..n)
            .map(|_| {
                words
                    .filler(config.filler)
                    .into_iter()
                    .map(|w| vec![w])
                    .collect()
            })
            .collect();
        match config.signal {
            PlantedSignal::Lexical => {
                for (child, parent) in parents.iter().enumerate() {
                    let Some(parent) = *parent else {
                        texts[child].insert(0, vec!["therefore".into()]);
                        continue;
                    };
                    let phrase = vec![capitalize(&words.word()), words.word(), words.word()];
                    let mut marker = vec!["since".to_string()];
                    if labels[child] == Relation::Attack {
                        marker.push("not".into());
                    }
                    texts[child].insert(0, marker);
                    for side in [child, parent] {
                        let at = rng.random_range(1..=texts[side].len());
                        texts[side].insert(at, phrase.clone());
                    }
                }
            }
            PlantedSignal::Wordvec => {
                for (v, parent) in parents.iter().enumerate() {
                    let pool = if parent.is_none() {
                        &root_pool
                    } else {
                        &leaf_pool
                    };
                    let w = pool[rng.random_range(0..pool.len())].clone();
                    let at = rng.random_range(0..=texts[v].len());
                    texts[v].insert(at, vec![w]);
                    if labels[v] == Relation::Attack {
                        texts[v].insert(0, vec!["not".into()]);
                    }
                }
            }
        }

        let ids: Vec<String> = (0..n).map(|i| format!("p{}", i + 1)).collect();
        let nodes = ids
            .iter()
            .zip(&texts)
            .map(|(id, t)| PropositionNode::new(id.clone(), format!("{}.", t.concat().join(" "))))
            .collect();
        let edges = parents
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| Edge::new(ids[c].clone(), ids[p].clone(), labels[c])))
            .collect();
        arguments.push(Argument::new(
            format!("planted-{:03}", a + 1),
            config.kind,
            nodes,
            edges,
        ));
    }
    PlantedCorpus {
        arguments,
        embeddings: words.table,
    }
}
