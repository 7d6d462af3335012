use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomBaseline {
    pub nodes: usize,
    pub trials: usize,
    pub analytic: f64,
    pub monte_carlo: f64,
}

/// Uniformly random rooted labeled tree as a parent vector: a Prüfer
/// sequence fixes an unrooted tree, then a uniform root orients it.
pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Option<usize>> {
    assert!(n >= 2, "random trees need at least two nodes");
    let prufer: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    prufer.iter().for_each(|&v| degree[v] += 1);
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut adjacent = vec![Vec::new(); n];
    for &v in &prufer {
        let leaf = leaves.pop_first().expect("a leaf remains");
        adjacent[leaf].push(v);
        adjacent[v].push(leaf);
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.insert(v);
        }
    }
    let last: Vec<usize> = leaves.into_iter().collect();
    adjacent[last[0]].push(last[1]);
    adjacent[last[1]].push(last[0]);

    let root = rng.random_range(0..n);
    let mut parents = vec![None; n];
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(v) = stack.pop() {
        for &u in &adjacent[v] {
            if !seen[u] {
                seen[u] = true;
                parents[u] = Some(v);
                stack.push(u);
            }
        }
    }
    parents
}

/// Expected SimScore of a uniformly random tree against a fixed gold tree:
/// `1/n` exactly, plus a seeded Monte Carlo estimate.
pub fn random_baseline(n: usize, trials: usize, seed: u64) -> RandomBaseline {
    assert!(n >= 2 && trials >= 1, "need n >= 2 and at least one trial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Gold: the path 1 -> 0, 2 -> 1, ...
    let gold: Vec<Option<usize>> = (0..n).map(|v| v.checked_sub(1)).collect();
    let mut total = 0usize;
    for _ in 0..trials {
        let t = random_tree(n, &mut rng);
        total += (0..n)
            .filter(|&v| gold[v].is_some() && t[v] == gold[v])
            .count();
    }
    RandomBaseline {
        nodes: n,
        trials,
        analytic: 1.0 / n as f64,
        monte_carlo: total as f64 / (trials * (n - 1)) as f64,
    }
}
