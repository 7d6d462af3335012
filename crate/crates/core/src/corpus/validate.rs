use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{Argument, StructureKind};

/// Node count above which arguments are flagged (not rejected).
pub const DEFAULT_NODE_CAP: usize = 10;

#[derive(Clone, Debug)]
pub struct ValidationOptions {
    pub node_cap: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

/// A broken invariant, naming the ids involved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NoNodes,
    EmptyNodeId,
    DuplicateNodeId { node: String },
    EmptyText { node: String },
    UnknownNode { node: String },
    SelfLoop { node: String },
    DuplicateEdge { child: String, parent: String },
    MultipleParents { node: String },
    RootCount { roots: Vec<String> },
    Cycle { nodes: Vec<String> },
    ChainBranching { node: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoNodes => write!(f, "argument has no nodes"),
            Violation::EmptyNodeId => write!(f, "empty node id"),
            Violation::DuplicateNodeId { node } => write!(f, "duplicate node id {node}"),
            Violation::EmptyText { node } => write!(f, "node {node} has empty text"),
            Violation::UnknownNode { node } => write!(f, "edge references unknown node {node}"),
            Violation::SelfLoop { node } => write!(f, "self-loop on {node}"),
            Violation::DuplicateEdge { child, parent } => {
                write!(f, "duplicate edge {child} -> {parent}")
            }
            Violation::MultipleParents { node } => write!(f, "node {node} has several parents"),
            Violation::RootCount { roots } => {
                write!(f, "expected exactly one root, found [{}]", roots.join(", "))
            }
            Violation::Cycle { nodes } => write!(f, "cycle through [{}]", nodes.join(", ")),
            Violation::ChainBranching { node } => {
                write!(f, "chain branches at node {node}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Set when the argument exceeds the configured node cap.
    pub oversize: Option<usize>,
}

impl ValidationReport {
    /// True when no invariant is violated. Oversize arguments are still ok.
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            f.write_str("ok")?;
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        if let Some(n) = self.oversize {
            write!(f, " (oversize: {n} nodes)")?;
        }
        Ok(())
    }
}

pub fn validate_argument(arg: &Argument, options: &ValidationOptions) -> ValidationReport {
    let mut violations = Vec::new();
    if arg.nodes.is_empty() {
        violations.push(Violation::NoNodes);
    }
    let mut seen = HashSet::new();
    for node in &arg.nodes {
        if node.id.is_empty() {
            violations.push(Violation::EmptyNodeId);
        } else if !seen.insert(node.id.as_str()) {
            violations.push(Violation::DuplicateNodeId {
                node: node.id.clone(),
            });
        }
        if node.text.trim().is_empty() {
            violations.push(Violation::EmptyText {
                node: node.id.clone(),
            });
        }
    }

    let mut indexed = Vec::with_capacity(arg.edges.len());
    for edge in &arg.edges {
        match (arg.node_index(&edge.child), arg.node_index(&edge.parent)) {
            (Some(c), Some(p)) => indexed.push((c, p)),
            (c, _) => violations.push(Violation::UnknownNode {
                node: if c.is_none() {
                    edge.child.clone()
                } else {
                    edge.parent.clone()
                },
            }),
        }
    }

    if violations.is_empty() {
        let ids: Vec<&str> = arg.nodes.iter().map(|n| n.id.as_str()).collect();
        violations.extend(check_structure(&ids, &indexed, arg.kind));
    }

    ValidationReport {
        violations,
        oversize: (arg.nodes.len() > options.node_cap).then_some(arg.nodes.len()),
    }
}

/// Structural checks over indexed `(child, parent)` edges.
///
/// Shared by gold validation and post-decode checks.
pub fn check_structure(
    ids: &[&str],
    edges: &[(usize, usize)],
    kind: StructureKind,
) -> Vec<Violation> {
    let n = ids.len();
    let mut violations = Vec::new();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut children = vec![0usize; n];
    let mut seen = HashSet::new();

    for &(c, p) in edges {
        if c == p {
            violations.push(Violation::SelfLoop {
                node: ids[c].to_owned(),
            });
            continue;
        }
        if !seen.insert((c, p)) {
            violations.push(Violation::DuplicateEdge {
                child: ids[c].to_owned(),
                parent: ids[p].to_owned(),
            });
            continue;
        }
        if parent[c].is_some() {
            violations.push(Violation::MultipleParents {
                node: ids[c].to_owned(),
            });
            continue;
        }
        parent[c] = Some(p);
        children[p] += 1;
    }

    let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
    if roots.len() != 1 {
        violations.push(Violation::RootCount {
            roots: roots.iter().map(|&r| ids[r].to_owned()).collect(),
        });
    }

    // A walk of more than n steps up the parent pointers must revisit a node.
    let mut reported = vec![false; n];
    for start in 0..n {
        let mut v = start;
        let mut steps = 0;
        while let Some(p) = parent[v] {
            v = p;
            steps += 1;
            if steps > n {
                break;
            }
        }
        if steps > n && !reported[v] {
            let mut cycle = vec![v];
            let mut u = parent[v].unwrap();
            while u != v {
                cycle.push(u);
                u = parent[u].unwrap();
            }
            for &u in &cycle {
                reported[u] = true;
            }
            cycle.sort_unstable();
            violations.push(Violation::Cycle {
                nodes: cycle.iter().map(|&u| ids[u].to_owned()).collect(),
            });
        }
    }

    if kind == StructureKind::Chain {
        for (v, &count) in children.iter().enumerate() {
            if count > 1 {
                violations.push(Violation::ChainBranching {
                    node: ids[v].to_owned(),
                });
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::fig1;
    use crate::corpus::{Edge, PropositionNode};

    fn arg(kind: StructureKind, nodes: &[&str], edges: &[(&str, &str)]) -> Argument {
        Argument::new(
            "t",
            kind,
            nodes
                .iter()
                .map(|id| PropositionNode::new(*id, format!("text {id}")))
                .collect(),
            edges.iter().map(|(c, p)| Edge::support(*c, *p)).collect(),
        )
    }

    fn violations(a: &Argument) -> Vec<Violation> {
        validate_argument(a, &ValidationOptions::default()).violations
    }

    #[test]
    fn fig1_is_valid() {
        assert!(validate_argument(&fig1(), &ValidationOptions::default()).is_ok());
    }

    #[test]
    fn two_cycle() {
        let v = violations(&arg(
            StructureKind::Tree,
            &["a", "b"],
            &[("a", "b"), ("b", "a")],
        ));
        assert!(v.contains(&Violation::Cycle {
            nodes: vec!["a".into(), "b".into()]
        }));
        assert!(v.contains(&Violation::RootCount { roots: vec![] }));
    }

    #[test]
    fn chain_branching() {
        let v = violations(&arg(
            StructureKind::Chain,
            &["a", "b", "c"],
            &[("b", "a"), ("c", "a")],
        ));
        assert_eq!(v, vec![Violation::ChainBranching { node: "a".into() }]);
        let ok = arg(
            StructureKind::Chain,
            &["a", "b", "c"],
            &[("c", "b"), ("b", "a")],
        );
        assert!(violations(&ok).is_empty());
    }

    #[test]
    fn forest_has_two_roots() {
        let v = violations(&arg(StructureKind::Tree, &["a", "b", "c"], &[("b", "a")]));
        assert_eq!(
            v,
            vec![Violation::RootCount {
                roots: vec!["a".into(), "c".into()]
            }]
        );
    }

    #[test]
    fn node_level_violations() {
        let mut a = arg(StructureKind::Tree, &["a", "a"], &[]);
        a.nodes[1].text = "   ".into();
        let v = violations(&a);
        assert!(v.contains(&Violation::DuplicateNodeId { node: "a".into() }));
        assert!(v.contains(&Violation::EmptyText { node: "a".into() }));
    }

    #[test]
    fn self_loop_and_duplicate() {
        let v = violations(&arg(
            StructureKind::Tree,
            &["a", "b"],
            &[("a", "a"), ("b", "a"), ("b", "a")],
        ));
        assert!(v.contains(&Violation::SelfLoop { node: "a".into() }));
        assert!(v.contains(&Violation::DuplicateEdge {
            child: "b".into(),
            parent: "a".into()
        }));
    }

    #[test]
    fn oversize_is_flagged_not_rejected() {
        let ids: Vec<String> = (0..12).map(|i| format!("n{i}")).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let edges: Vec<(&str, &str)> = refs[1..].iter().map(|c| (*c, refs[0])).collect();
        let report = validate_argument(
            &arg(StructureKind::Tree, &refs, &edges),
            &ValidationOptions::default(),
        );
        assert!(report.is_ok());
        assert_eq!(report.oversize, Some(12));
    }
}
