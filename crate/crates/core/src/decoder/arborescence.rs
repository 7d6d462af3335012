use super::{better, Weights};

const NONE: usize = usize::MAX;

/// Maximum spanning arborescence, best over every choice of root.
pub(crate) fn best_parents(w: &Weights) -> Vec<Option<usize>> {
    let mut best: Option<(f64, Vec<Option<usize>>)> = None;
    for root in 0..w.n {
        let parents: Vec<Option<usize>> = chu_liu_edmonds(w.n, root, &w.w)
            .into_iter()
            .map(|p| (p != NONE).then_some(p))
            .collect();
        let total = w.total(&parents);
        let replace = match &best {
            None => true,
            Some((t, k)) => better(total, &parents, *t, k),
        };
        if replace {
            best = Some((total, parents));
        }
    }
    best.expect("n >= 2").1
}

/// Maximum-weight choice of one parent per non-root node with no cycles.
/// `w[c * n + p]` is the weight of `c -> p`; `-inf` marks a missing edge.
fn chu_liu_edmonds(n: usize, root: usize, w: &[f64]) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    for v in (0..n).filter(|&v| v != root) {
        for p in (0..n).filter(|&p| p != v) {
            if w[v * n + p] > f64::NEG_INFINITY
                && (parent[v] == NONE || w[v * n + p] > w[v * n + parent[v]])
            {
                parent[v] = p;
            }
        }
    }
    let Some(cycle) = find_cycle(&parent, root) else {
        return parent;
    };

    let mut in_cycle = vec![false; n];
    cycle.iter().for_each(|&v| in_cycle[v] = true);
    let mut index = vec![NONE; n];
    let mut outside = Vec::new();
    for v in (0..n).filter(|&v| !in_cycle[v]) {
        index[v] = outside.len();
        outside.push(v);
    }
    let x = outside.len();
    let m = x + 1;
    let mut sub = vec![f64::NEG_INFINITY; m * m];
    // Which cycle node a child enters through, and which cycle node leaves
    // towards an outside parent.
    let mut enter = vec![NONE; m];
    let mut leave = vec![NONE; m];
    for &c in &outside {
        for &p in &outside {
            if c != p {
                sub[index[c] * m + index[p]] = w[c * n + p];
            }
        }
        for &p in &cycle {
            let v = w[c * n + p];
            if v > sub[index[c] * m + x] {
                sub[index[c] * m + x] = v;
                enter[index[c]] = p;
            }
        }
    }
    for &p in &outside {
        for &c in &cycle {
            let v = w[c * n + p] - w[c * n + parent[c]];
            if v > sub[x * m + index[p]] {
                sub[x * m + index[p]] = v;
                leave[index[p]] = c;
            }
        }
    }

    let contracted = chu_liu_edmonds(m, index[root], &sub);
    for &v in &outside {
        let p = contracted[index[v]];
        if p == NONE {
            continue;
        }
        parent[v] = if p == x { enter[index[v]] } else { outside[p] };
    }
    let out = contracted[x];
    parent[leave[out]] = outside[out];
    parent
}

fn find_cycle(parent: &[usize], root: usize) -> Option<Vec<usize>> {
    let n = parent.len();
    // 0 = unvisited, 1 = on the current walk, 2 = done.
    let mut state = vec![0u8; n];
    state[root] = 2;
    for start in 0..n {
        let mut walk = Vec::new();
        let mut v = start;
        while v != NONE && state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            v = parent[v];
        }
        if v != NONE && state[v] == 1 {
            let from = walk.iter().position(|&u| u == v).expect("on walk");
            return Some(walk[from..].to_vec());
        }
        walk.iter().for_each(|&u| state[u] = 2);
    }
    None
}
