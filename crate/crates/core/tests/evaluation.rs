use std::sync::Arc;
use std::time::Instant;

use argstruct::corpus::{Framework, StructureKind};
use argstruct::decoder::DecoderKind;
use argstruct::evaluation::{
    render_ablation, render_crossval, run_ablation, run_cross_validation, AblationMode, EvalError,
    ExperimentConfig, ExperimentFramework, ModelFamily, Resources,
};
use argstruct::features::{FeatureGroup, FeatureMask};
use argstruct::synthetic::{planted_corpus, PlantedConfig, PlantedCorpus, PlantedSignal};

fn resources(corpus: &PlantedCorpus) -> Resources<'static> {
    Resources {
        embeddings: Some(Arc::new(corpus.embeddings.clone())),
        ..Resources::default()
    }
}

#[test]
fn planted_corpus_beats_random_by_two() {
    let corpus = planted_corpus(&PlantedConfig::default());
    let start = Instant::now();
    let report = run_cross_validation(
        &corpus.arguments,
        &ExperimentConfig::default(),
        &resources(&corpus),
    )
    .unwrap();
    let s = &report.structure;
    assert_eq!(s.arguments.len(), 100);
    assert!(
        s.mean_sim_score >= 2.0 * s.random_baseline,
        "{} vs {}",
        s.mean_sim_score,
        s.random_baseline
    );
    assert!(start.elapsed().as_secs() < 300);
    let groups: usize = s.sim_score_by_nodes.iter().map(|g| g.arguments).sum();
    assert_eq!(groups, 100);
    assert!(s
        .arguments
        .iter()
        .all(|a| (0.0..=1.0).contains(&a.sim_score)));
}

#[test]
fn cross_validation_is_reproducible() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 30,
        ..PlantedConfig::default()
    });
    let config = ExperimentConfig {
        framework: ExperimentFramework::Type2,
        ..ExperimentConfig::default()
    };
    let res = resources(&corpus);
    let a = run_cross_validation(&corpus.arguments, &config, &res).unwrap();
    let b = run_cross_validation(&corpus.arguments, &config, &res).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(render_crossval(&a), render_crossval(&b));
}

#[test]
fn leave_one_out() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 8,
        ..PlantedConfig::default()
    });
    let config = ExperimentConfig {
        k: 8,
        ..ExperimentConfig::default()
    };
    let report = run_cross_validation(&corpus.arguments, &config, &resources(&corpus)).unwrap();
    assert_eq!(report.feature_width.len(), 8);
    let mut folds: Vec<usize> = report.structure.arguments.iter().map(|a| a.fold).collect();
    folds.sort();
    assert_eq!(folds, (0..8).collect::<Vec<_>>());
}

#[test]
fn k_larger_than_corpus_fails() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 4,
        ..PlantedConfig::default()
    });
    let config = ExperimentConfig {
        k: 5,
        ..ExperimentConfig::default()
    };
    assert!(matches!(
        run_cross_validation(&corpus.arguments, &config, &resources(&corpus)),
        Err(EvalError::Corpus(_))
    ));
}

#[test]
fn empty_mask_is_a_config_error() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 10,
        ..PlantedConfig::default()
    });
    let config = ExperimentConfig {
        features: FeatureMask::new([]),
        ..ExperimentConfig::default()
    };
    assert!(matches!(
        run_cross_validation(&corpus.arguments, &config, &resources(&corpus)),
        Err(EvalError::Config(_))
    ));
}

#[test]
fn attack_arguments_are_skipped_by_binary_frameworks() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 30,
        attack_rate: 0.3,
        ..PlantedConfig::default()
    });
    let report = run_cross_validation(
        &corpus.arguments,
        &ExperimentConfig::default(),
        &resources(&corpus),
    )
    .unwrap();
    let with_attack = corpus.arguments.iter().filter(|a| a.has_attack()).count();
    assert!(with_attack > 0);
    assert_eq!(report.skipped.len(), with_attack);
    assert_eq!(report.arguments, 30 - with_attack);
}

#[test]
fn two_step_and_single_step_report_labels() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 40,
        attack_rate: 0.4,
        ..PlantedConfig::default()
    });
    let res = resources(&corpus);
    let features = FeatureMask::all();
    let two = run_cross_validation(
        &corpus.arguments,
        &ExperimentConfig {
            framework: ExperimentFramework::TwoStep,
            // Type2 Neutral pairs are reversed edges only, which on this
            // corpus carries direction but not adjacency.
            detection: Framework::Type1,
            features: features.clone(),
            ..ExperimentConfig::default()
        },
        &res,
    )
    .unwrap();
    assert!(two.detection.is_some() && two.resolver.is_some());
    let s = &two.structure;
    let labeled = s.mean_labeled_sim_score.unwrap();
    assert!(labeled <= s.mean_sim_score + 1e-12);
    let text = render_crossval(&two);
    assert!(s.mean_sim_score >= 2.0 * s.random_baseline, "{text}");
    assert!(text.contains("T-S-1") && text.contains("T-S "));
    let json = serde_json::to_value(&two).unwrap();
    assert!(json["classifier"]["confidence_a"].is_null());
    assert!(json["resolver"]["recall_a"].is_number());

    let single = run_cross_validation(
        &corpus.arguments,
        &ExperimentConfig {
            framework: ExperimentFramework::MultiClass,
            features,
            ..ExperimentConfig::default()
        },
        &res,
    )
    .unwrap();
    assert!(
        single.structure.mean_labeled_sim_score.unwrap() <= single.structure.mean_sim_score + 1e-12
    );
    assert!(serde_json::to_value(&single).unwrap()["classifier"]["confidence_s"].is_number());
}

#[test]
fn chain_corpus_decodes_chains() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 30,
        kind: StructureKind::Chain,
        ..PlantedConfig::default()
    });
    // Chain arguments pick the chain decoder whatever the tree decoder is.
    let config = ExperimentConfig {
        decoder: DecoderKind::Arborescence,
        caps: argstruct::decoder::Caps { tree: 2, chain: 6 },
        ..ExperimentConfig::default()
    };
    let report = run_cross_validation(&corpus.arguments, &config, &resources(&corpus)).unwrap();
    assert!(report.skipped.is_empty());
    assert!(report.structure.mean_sim_score >= 2.0 * report.structure.random_baseline);
}

#[test]
fn mlp_learns_the_planted_corpus() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 40,
        ..PlantedConfig::default()
    });
    let mut config = ExperimentConfig {
        model: ModelFamily::Mlp,
        ..ExperimentConfig::default()
    };
    config.mlp.hidden = vec![32];
    config.mlp.epochs = 60;
    let report = run_cross_validation(&corpus.arguments, &config, &resources(&corpus)).unwrap();
    assert!(report.structure.mean_sim_score >= 2.0 * report.structure.random_baseline);
}

#[test]
fn ablating_word_vectors_hurts_most_when_only_they_inform() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 60,
        signal: PlantedSignal::Wordvec,
        ..PlantedConfig::default()
    });
    let report = run_ablation(
        &corpus.arguments,
        &ExperimentConfig::default(),
        &[],
        AblationMode::WithWordvec,
        &resources(&corpus),
    )
    .unwrap();
    let worst = report
        .rows
        .iter()
        .max_by(|a, b| a.pct_decrease.unwrap().total_cmp(&b.pct_decrease.unwrap()))
        .unwrap();
    assert_eq!(
        worst.group,
        FeatureGroup::Wordvec,
        "{}",
        render_ablation(&report)
    );
    // No fillers are modal verbs, so that group is identically zero.
    let modal = report
        .rows
        .iter()
        .find(|r| r.group == FeatureGroup::Modal)
        .unwrap();
    assert!(
        modal.pct_decrease.unwrap().abs() < 1e-9,
        "{}",
        render_ablation(&report)
    );
}

#[test]
fn ablation_without_word_vectors() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 20,
        ..PlantedConfig::default()
    });
    let report = run_ablation(
        &corpus.arguments,
        &ExperimentConfig::default(),
        &["ngram".into(), "wordvec".into()],
        AblationMode::WithoutWordvec,
        &resources(&corpus),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.rows[0].group, FeatureGroup::Ngram);
    assert!(!report.features.contains("wordvec"));
    let text = render_ablation(&report);
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("Word Vectors") && last.ends_with('-'));
}

#[test]
fn ablation_rejects_unknown_and_absent_groups() {
    let corpus = planted_corpus(&PlantedConfig {
        arguments: 10,
        ..PlantedConfig::default()
    });
    let res = resources(&corpus);
    let base = ExperimentConfig::default();
    let err = run_ablation(
        &corpus.arguments,
        &base,
        &["syntax".into()],
        AblationMode::WithWordvec,
        &res,
    )
    .unwrap_err();
    assert!(err.to_string().contains("discourse, modal"), "{err}");
    assert!(matches!(
        run_ablation(
            &corpus.arguments,
            &base,
            &["negation".into()],
            AblationMode::WithWordvec,
            &res
        ),
        Err(EvalError::GroupNotInBase(FeatureGroup::Negation))
    ));
}
