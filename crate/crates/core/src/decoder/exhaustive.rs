use std::collections::HashMap;
use std::rc::Rc;

use super::{better, Weights};

const UNSET: u8 = u8::MAX;

struct Best {
    total: f64,
    /// Parent per node for the nodes placed by this subproblem, else `UNSET`.
    parents: Vec<u8>,
}

struct Search<'a> {
    w: &'a Weights,
    /// `best_parent[v][mask]`: highest-scoring parent of `v` within `mask`,
    /// lowest index on ties.
    best_parent: Vec<Vec<u8>>,
    memo: HashMap<(u32, u32), Rc<Best>>,
}

impl Search<'_> {
    /// Best way to hang the nodes of `rest` below the level `last`: choose the
    /// next level as any non-empty subset of `rest`, attach each of its nodes
    /// to its best parent in `last`, and recurse on the remainder.
    fn solve(&mut self, last: u32, rest: u32) -> Rc<Best> {
        if let Some(hit) = self.memo.get(&(last, rest)) {
            return hit.clone();
        }
        let n = self.w.n;
        let mut best: Option<Best> = None;
        let mut level = rest;
        while level != 0 {
            let below = self.solve(level, rest & !level);
            let mut total = below.total;
            let mut parents = below.parents.clone();
            for v in 0..n {
                if level >> v & 1 == 1 {
                    let p = self.best_parent[v][last as usize];
                    parents[v] = p;
                    total += self.w.get(v, p as usize);
                }
            }
            let replace = match &best {
                None => true,
                Some(b) => better(total, &as_key(&parents), b.total, &as_key(&b.parents)),
            };
            if replace {
                best = Some(Best { total, parents });
            }
            level = (level - 1) & rest;
        }
        let best = Rc::new(best.unwrap_or(Best {
            total: 0.0,
            parents: vec![UNSET; n],
        }));
        self.memo.insert((last, rest), best.clone());
        best
    }
}

fn as_key(parents: &[u8]) -> Vec<Option<usize>> {
    parents
        .iter()
        .map(|&p| (p != UNSET).then_some(p as usize))
        .collect()
}

/// Optimal parent vector over all rooted trees, by level-set recursion.
pub(crate) fn best_parents(w: &Weights) -> Vec<Option<usize>> {
    let n = w.n;
    assert!(
        (2..=16).contains(&n),
        "exhaustive decoding supports 2..=16 nodes"
    );
    let full: u32 = (1 << n) - 1;
    let best_parent = (0..n)
        .map(|v| {
            (0..=full as usize)
                .map(|mask| {
                    let mut best = UNSET;
                    for u in 0..n {
                        if u != v
                            && mask >> u & 1 == 1
                            && (best == UNSET || w.get(v, u) > w.get(v, best as usize))
                        {
                            best = u as u8;
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();
    let mut search = Search {
        w,
        best_parent,
        memo: HashMap::new(),
    };
    let mut best: Option<(f64, Vec<Option<usize>>)> = None;
    for root in 0..n {
        let sub = search.solve(1 << root, full & !(1 << root));
        let key = as_key(&sub.parents);
        let replace = match &best {
            None => true,
            Some((total, k)) => better(sub.total, &key, *total, k),
        };
        if replace {
            best = Some((sub.total, key));
        }
    }
    best.expect("n >= 2").1
}
