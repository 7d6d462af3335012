use super::{better, Weights};

/// Optimal chain over all node orders. `order[i]` is the child of
/// `order[i + 1]`; the last node is the root.
pub(crate) fn best_parents(w: &Weights) -> Vec<Option<usize>> {
    let n = w.n;
    let mut order: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, Vec<Option<usize>>)> = None;
    loop {
        let mut parents = vec![None; n];
        for pair in order.windows(2) {
            parents[pair[0]] = Some(pair[1]);
        }
        let total = w.total(&parents);
        let replace = match &best {
            None => true,
            Some((t, k)) => better(total, &parents, *t, k),
        };
        if replace {
            best = Some((total, parents));
        }
        if !next_permutation(&mut order) {
            break;
        }
    }
    best.expect("at least one order").1
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("pivot exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
