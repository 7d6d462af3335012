use std::fmt::Write;

use super::metrics::suffix;
use super::{AblationMode, AblationReport, ClassifierReport, CrossValReport, SimReport};
use crate::features::FeatureGroup;

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

/// Measure/Value table of per-class classifier metrics.
pub fn render_classifier(report: &ClassifierReport) -> String {
    let mut out = String::new();
    let ordered = report.ordered();
    let _ = writeln!(out, "{:<16}{:>8}", "Measure", "Value");
    for metric in ["confidence", "recall", "precision"] {
        for c in &ordered {
            let value = match metric {
                "confidence" => c.confidence,
                "recall" => c.recall,
                _ => c.precision,
            };
            let name = format!("{metric}_{}", suffix(&c.class).to_uppercase());
            let _ = writeln!(out, "{name:<16}{:>8}", num(value));
        }
    }
    let _ = writeln!(out, "{:<16}{:>8}", "accuracy", num(Some(report.accuracy)));
    out
}

/// SimScore by node count. `columns` names the unlabeled and labeled
/// SimScore columns.
pub fn render_sim(report: &SimReport, columns: (&str, &str)) -> String {
    let labeled = report.mean_labeled_sim_score.is_some();
    let mut out = String::new();
    let _ = write!(out, "{:<8}{:>10}{:>10}", "Nodes", "Arguments", columns.0);
    if labeled {
        let _ = write!(out, "{:>10}", columns.1);
    }
    let _ = writeln!(out, "{:>10}", "Random");
    let mut row = |nodes: String, args: usize, sim: f64, lab: Option<f64>, random: f64| {
        let _ = write!(out, "{nodes:<8}{args:>10}{:>10}", num(Some(sim)));
        if labeled {
            let _ = write!(out, "{:>10}", num(lab));
        }
        let _ = writeln!(out, "{:>10}", num(Some(random)));
    };
    for g in &report.sim_score_by_nodes {
        row(
            g.nodes.to_string(),
            g.arguments,
            g.sim_score,
            g.labeled_sim_score,
            g.random,
        );
    }
    row(
        "Any".into(),
        report.arguments.len(),
        report.mean_sim_score,
        report.mean_labeled_sim_score,
        report.random_baseline,
    );
    out
}

pub fn render_crossval(report: &CrossValReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "framework {}  model {}  decoder {}  k {}  seed {}",
        report.framework, report.model, report.decoder, report.k, report.seed
    );
    let _ = writeln!(out, "features {}", report.features);
    let _ = writeln!(
        out,
        "arguments {} ({} skipped); feature width per fold {:?}",
        report.arguments,
        report.skipped.len(),
        report.feature_width
    );
    let blocks: Vec<(&str, Option<&ClassifierReport>)> = match report.framework.as_str() {
        "two-step" => vec![
            ("Detection", report.detection.as_ref()),
            ("Resolver", report.resolver.as_ref()),
            ("Two-Step", Some(&report.classifier)),
        ],
        "multiclass" => vec![("Single-Step", Some(&report.classifier))],
        _ => vec![("Classifier", Some(&report.classifier))],
    };
    for (title, block) in blocks {
        if let Some(r) = block {
            let _ = writeln!(out, "\n{title}");
            out.push_str(&render_classifier(r));
        }
    }
    let columns = match report.framework.as_str() {
        "two-step" => ("T-S-1", "T-S"),
        "multiclass" => ("Unlabeled", "S-S"),
        _ => ("SimScore", "Labeled"),
    };
    let _ = writeln!(out, "\nStructure");
    out.push_str(&render_sim(&report.structure, columns));
    out
}

pub fn render_ablation(report: &AblationReport) -> String {
    let mut out = String::new();
    let header = match report.mode {
        AblationMode::WithWordvec => "With Word Vectors",
        AblationMode::WithoutWordvec => "Without Word Vectors",
    };
    let _ = writeln!(
        out,
        "baseline mean SimScore {:.3} ({})",
        report.baseline_mean_sim_score, report.features
    );
    let _ = writeln!(
        out,
        "{:<24}{:>24}",
        "Feature Set",
        format!("% decrease ({header})")
    );
    for row in &report.rows {
        let pct = row
            .pct_decrease
            .map_or_else(|| "-".to_string(), |p| format!("{p:.2}%"));
        let _ = writeln!(out, "{:<24}{pct:>24}", row.title);
    }
    if report.mode == AblationMode::WithoutWordvec {
        let _ = writeln!(out, "{:<24}{:>24}", FeatureGroup::Wordvec.title(), "-");
    }
    out
}
