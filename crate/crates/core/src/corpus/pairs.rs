use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Argument, CorpusError, Relation};

/// Class of an ordered node pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairLabel {
    Support,
    Attack,
    Neutral,
}

impl From<Relation> for PairLabel {
    fn from(r: Relation) -> Self {
        match r {
            Relation::Support => PairLabel::Support,
            Relation::Attack => PairLabel::Attack,
        }
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairLabel::Support => "support",
            PairLabel::Attack => "attack",
            PairLabel::Neutral => "neutral",
        })
    }
}

/// An ordered `(Text, Hypothesis)` pair with its class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub argument_id: String,
    pub text_node: String,
    pub hypothesis_node: String,
    pub label: PairLabel,
}

/// How Neutral training pairs are drawn from an argument.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Framework {
    /// Every ordered pair that is not a gold edge is Neutral.
    #[default]
    #[serde(rename = "type1")]
    Type1,
    /// Only reversed gold edges are Neutral.
    #[serde(rename = "type2")]
    Type2,
    /// Gold Support and Attack edges keep their labels; the rest are Neutral.
    #[serde(rename = "multiclass")]
    MultiClass,
}

impl FromStr for Framework {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "type1" | "type-1" => Ok(Framework::Type1),
            "type2" | "type-2" => Ok(Framework::Type2),
            "multiclass" | "multi-class" => Ok(Framework::MultiClass),
            other => Err(format!(
                "unknown pair framework {other:?} (expected type1, type2, multiclass)"
            )),
        }
    }
}

pub fn generate_pairs(
    arg: &Argument,
    framework: Framework,
) -> Result<Vec<LabeledPair>, CorpusError> {
    match framework {
        Framework::Type1 => generate_pairs_type1(arg),
        Framework::Type2 => generate_pairs_type2(arg),
        Framework::MultiClass => Ok(generate_pairs_multiclass(arg)),
    }
}

fn pair(arg: &Argument, text: &str, hyp: &str, label: PairLabel) -> LabeledPair {
    LabeledPair {
        argument_id: arg.id.clone(),
        text_node: text.to_owned(),
        hypothesis_node: hyp.to_owned(),
        label,
    }
}

fn support_only(arg: &Argument) -> Result<(), CorpusError> {
    if arg.has_attack() {
        Err(CorpusError::AttackEdges {
            argument: arg.id.clone(),
        })
    } else {
        Ok(())
    }
}

/// All `n(n-1)` ordered pairs in node order; gold edges keep their label.
fn all_ordered_pairs(arg: &Argument) -> Vec<LabeledPair> {
    let gold: HashMap<(&str, &str), Relation> = arg
        .edges
        .iter()
        .map(|e| ((e.child.as_str(), e.parent.as_str()), e.label))
        .collect();
    let mut out = Vec::with_capacity(arg.len() * arg.len().saturating_sub(1));
    for t in &arg.nodes {
        for h in &arg.nodes {
            if t.id == h.id {
                continue;
            }
            let label = gold
                .get(&(t.id.as_str(), h.id.as_str()))
                .map_or(PairLabel::Neutral, |&r| r.into());
            out.push(pair(arg, &t.id, &h.id, label));
        }
    }
    out
}

pub fn generate_pairs_type1(arg: &Argument) -> Result<Vec<LabeledPair>, CorpusError> {
    support_only(arg)?;
    Ok(all_ordered_pairs(arg))
}

pub fn generate_pairs_type2(arg: &Argument) -> Result<Vec<LabeledPair>, CorpusError> {
    support_only(arg)?;
    let mut out = Vec::with_capacity(2 * arg.edges.len());
    for e in &arg.edges {
        out.push(pair(arg, &e.child, &e.parent, PairLabel::Support));
        out.push(pair(arg, &e.parent, &e.child, PairLabel::Neutral));
    }
    Ok(out)
}

pub fn generate_pairs_multiclass(arg: &Argument) -> Vec<LabeledPair> {
    all_ordered_pairs(arg)
}
