mod config;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use argstruct::classifiers::ModelError;
use argstruct::corpus::{
    parse_corpus_lenient, read_corpus_unvalidated, validate_argument, write_corpus, Argument,
    CorpusError, StructureKind, ValidationOptions, Violation,
};
use argstruct::decoder::{DecodeError, DecoderKind, PredictedStructure};
use argstruct::evaluation::{
    labeled_sim_score, load_pipeline, render_ablation, render_crossval, run_ablation,
    run_cross_validation, save_pipeline, select_arguments, sim_score, train_pipeline, AblationMode,
    EvalError, PipelineManifest, Resources, MANIFEST_FILE,
};
use argstruct::features::{
    load_embeddings_filtered, save_embeddings, tokenize, AntonymLexicon, CachedAnnotator,
    EntityAnnotator, EntityCache, EntitySource, FeatureError, FeatureGroup, Lexicon,
    OfflineAnnotator, RemoteAnnotator, RemoteConfig,
};
use argstruct::synthetic::{planted_corpus, PlantedConfig, PlantedSignal};
use clap::{Parser, Subcommand};
use log::info;
use serde::Serialize;
use serde_json::json;

use config::{require, AnnotatorMode, CommonArgs, RunConfig};

#[derive(Parser)]
#[command(
    name = "argstruct",
    version,
    about = "Argument structure prediction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train on a corpus and write the model artifacts to --out
    Train {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Predict structures for a corpus with a trained model
    Predict {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory written by `train`
        #[arg(long)]
        model_dir: PathBuf,
    },
    /// k-fold cross-validation; writes crossval.json and crossval.txt
    Crossval {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Leave-one-group-out feature ablation; writes ablation.json and ablation.txt
    Ablate {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated groups to ablate (default: every enabled group)
        #[arg(long, value_delimiter = ',')]
        groups: Vec<String>,
        /// with-wordvec or without-wordvec
        #[arg(long, default_value_t = AblationMode::WithWordvec)]
        mode: AblationMode,
    },
    /// Write a planted synthetic corpus and matching embeddings to --out
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        arguments: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Probability that a gold edge is an Attack
        #[arg(long, default_value_t = 0.0)]
        attack_rate: f64,
        /// Generate chains instead of trees
        #[arg(long)]
        chain: bool,
        /// lexical or wordvec
        #[arg(long, default_value = "lexical", value_parser = parse_signal)]
        signal: PlantedSignal,
    },
    /// Check a corpus against the structural invariants
    Validate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = argstruct::corpus::DEFAULT_NODE_CAP)]
        max_nodes: usize,
    },
}

/// Error category printed with every failure.
fn kind_of(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<EvalError>() {
            return match e {
                EvalError::Config(_) | EvalError::GroupNotInBase(_) => "config",
                EvalError::Corpus(_) => "corpus",
                EvalError::Feature(FeatureError::UnknownGroup { .. }) => "config",
                EvalError::Feature(_) => "features",
                EvalError::Model(ModelError::LayoutMismatch { .. }) => "fingerprint",
                EvalError::Model(_) => "model",
                EvalError::Decode(DecodeError::TooLarge { .. }) => "size",
                EvalError::Decode(_) => "decode",
                EvalError::Io { .. } | EvalError::Artifact { .. } => "artifact",
                _ => "evaluation",
            };
        }
        if cause.downcast_ref::<CorpusError>().is_some() {
            return "corpus";
        }
        if let Some(e) = cause.downcast_ref::<FeatureError>() {
            return match e {
                FeatureError::UnknownGroup { .. } | FeatureError::EmptyMask => "config",
                _ => "features",
            };
        }
        if cause.downcast_ref::<ModelError>().is_some() {
            return "model";
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
    }
    "config"
}

#[derive(Debug)]
struct Invalid(usize);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} invalid arguments", self.0)
    }
}

impl std::error::Error for Invalid {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train { common } => train(&common),
        Command::Predict { common, model_dir } => predict(&common, &model_dir),
        Command::Crossval { common } => crossval(&common),
        Command::Ablate {
            common,
            groups,
            mode,
        } => ablate(&common, &groups, mode),
        Command::Validate { corpus, max_nodes } => validate(&corpus, max_nodes),
        Command::Synth {
            out,
            arguments,
            seed,
            attack_rate,
            chain,
            signal,
        } => synth(
            &out,
            &PlantedConfig {
                arguments,
                seed,
                attack_rate,
                signal,
                kind: if chain {
                    StructureKind::Chain
                } else {
                    StructureKind::Tree
                },
                ..PlantedConfig::default()
            },
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = if err.downcast_ref::<Invalid>().is_some() {
                "validation"
            } else {
                kind_of(&err)
            };
            eprintln!("{}", json!({ "error": format!("{err:#}"), "kind": kind }));
            ExitCode::FAILURE
        }
    }
}

/// Owns whatever the entity source borrows from.
enum Entities {
    Offline(OfflineAnnotator),
    Annotator(CachedAnnotator<RemoteAnnotator>),
    Cache(EntityCache),
}

impl Entities {
    fn source(&self) -> &dyn EntitySource {
        match self {
            Entities::Offline(a) => a,
            Entities::Annotator(a) => a,
            Entities::Cache(c) => c,
        }
    }
}

fn annotator(run: &RunConfig, common: &CommonArgs) -> Entities {
    let fallback = match run.annotator {
        AnnotatorMode::Offline => return Entities::Offline(OfflineAnnotator),
        AnnotatorMode::Remote => false,
        AnnotatorMode::RemoteWithFallback => true,
    };
    let mut cfg = RemoteConfig {
        fallback,
        ..RemoteConfig::default()
    };
    if let Some(e) = &run.tagme_endpoint {
        cfg.endpoint = e.clone();
    }
    if common.tagme_key.is_some() {
        cfg.api_key = common.tagme_key.clone();
    }
    Entities::Annotator(CachedAnnotator::new(RemoteAnnotator::new(cfg)))
}

/// Uses the cache file when it covers `corpus`; otherwise annotates and,
/// if a cache path is set, writes it.
fn entities(run: &RunConfig, common: &CommonArgs, corpus: &[Argument]) -> Result<Entities> {
    let Some(path) = &run.entity_cache else {
        return Ok(annotator(run, common));
    };
    if path.exists() {
        let cache = EntityCache::load(path)?;
        let covered = corpus
            .iter()
            .all(|a| a.nodes.iter().all(|n| cache.get(&a.id, &n.id).is_some()));
        if covered {
            info!("entity annotations from {}", path.display());
            return Ok(Entities::Cache(cache));
        }
        info!(
            "{} does not cover the corpus; re-annotating",
            path.display()
        );
    }
    let live = annotator(run, common);
    let cache = match &live {
        Entities::Offline(a) => EntityCache::build(corpus, a as &dyn EntityAnnotator)?,
        Entities::Annotator(a) => EntityCache::build(corpus, a as &dyn EntityAnnotator)?,
        Entities::Cache(_) => unreachable!("annotator() never returns a cache"),
    };
    cache.save(path)?;
    info!("wrote entity annotations to {}", path.display());
    Ok(Entities::Cache(cache))
}

fn vocabulary(corpus: &[Argument]) -> HashSet<String> {
    corpus
        .iter()
        .flat_map(|a| &a.nodes)
        .flat_map(|n| tokenize(&n.text).iter().cloned().collect::<Vec<_>>())
        .collect()
}

fn resources<'a>(
    run: &RunConfig,
    corpus: &[Argument],
    needs_wordvec: bool,
    entities: &'a Entities,
) -> Result<Resources<'a>> {
    let embeddings = match &run.embeddings {
        Some(path) => {
            let table = load_embeddings_filtered(path, &vocabulary(corpus))?;
            info!(
                "{} of the corpus words have vectors (dim {})",
                table.len(),
                table.dim()
            );
            Some(Arc::new(table))
        }
        None if needs_wordvec => bail!(EvalError::Config(
            "feature group wordvec needs --embeddings (or leave it out of --features)".into()
        )),
        None => None,
    };
    Ok(Resources {
        embeddings,
        negations: match &run.negations {
            Some(p) => Lexicon::load(p)?,
            None => Lexicon::default_negations(),
        },
        antonyms: match &run.antonyms {
            Some(p) => AntonymLexicon::load(p)?,
            None => AntonymLexicon::default(),
        },
        entities: entities.source(),
    })
}

fn load_corpus(run: &RunConfig) -> Result<Vec<Argument>> {
    let path = require(&run.corpus, "corpus", "--corpus")?;
    let (kept, rejected) = parse_corpus_lenient(path)?;
    if !rejected.is_empty() {
        info!(
            "{} arguments failed validation and are ignored",
            rejected.len()
        );
    }
    Ok(kept)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn train(common: &CommonArgs) -> Result<()> {
    let run = common.resolve()?;
    let config = &run.experiment;
    config.validate()?;
    let out = require(&run.out, "output directory", "--out")?;
    let corpus = load_corpus(&run)?;
    let ents = entities(&run, common, &corpus)?;
    let res = resources(
        &run,
        &corpus,
        config.features.contains(FeatureGroup::Wordvec),
        &ents,
    )?;
    let (train, skipped) = select_arguments(&corpus, config);
    if train.is_empty() {
        bail!(EvalError::NoArguments {
            skipped: skipped.len()
        });
    }
    let pipeline = train_pipeline(&train, config, &res, config.seed)?;
    for (class, n) in pipeline
        .class_counts
        .iter()
        .chain(&pipeline.resolver_counts)
    {
        info!("{class}: {n} training pairs");
    }
    info!("feature width {}", pipeline.extractor.width());
    let files = save_pipeline(out, &pipeline, config)?;
    let summary = json!({
        "arguments": train.len(),
        "skipped": skipped,
        "feature_width": pipeline.extractor.width(),
        "class_counts": pipeline.class_counts.iter().cloned().collect::<BTreeMap<_, _>>(),
        "resolver_counts": pipeline.resolver_counts.iter().cloned().collect::<BTreeMap<_, _>>(),
        "files": files,
    });
    print!("{}", to_json(&summary));
    Ok(())
}

#[derive(Serialize)]
struct Prediction {
    #[serde(flatten)]
    structure: PredictedStructure,
    #[serde(skip_serializing_if = "Option::is_none")]
    sim_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labeled_sim_score: Option<f64>,
}

#[derive(Serialize)]
struct Predictions {
    framework: String,
    decoder: DecoderKind,
    predictions: Vec<Prediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_sim_score: Option<f64>,
}

/// Arguments with gold edges must be fully valid; edge-free inputs only
/// need a usable node list.
fn check_input(arg: &Argument) -> Result<()> {
    let report = validate_argument(
        arg,
        &ValidationOptions {
            node_cap: usize::MAX,
        },
    );
    let fatal: Vec<&Violation> = report
        .violations
        .iter()
        .filter(|v| !(arg.edges.is_empty() && matches!(v, Violation::RootCount { .. })))
        .collect();
    if !fatal.is_empty() {
        bail!(CorpusError::Invalid {
            argument: arg.id.clone(),
            report,
        });
    }
    Ok(())
}

fn predict(common: &CommonArgs, model_dir: &Path) -> Result<()> {
    let run = common.resolve()?;
    let path = require(&run.corpus, "corpus", "--corpus")?;
    let corpus = read_corpus_unvalidated(path)?;
    for arg in &corpus {
        check_input(arg)?;
    }
    let needs_wordvec = read_manifest(model_dir)?
        .config
        .features
        .contains(FeatureGroup::Wordvec);
    let ents = entities(&run, common, &corpus)?;
    let res = resources(&run, &corpus, needs_wordvec, &ents)?;
    let (pipeline, manifest) = load_pipeline(model_dir, res.embeddings.clone())?;
    let mut config = manifest.config;
    if let Some(d) = common.decoder {
        config.decoder = d;
    }
    if let Some(c) = common.tree_cap {
        config.caps.tree = c;
    }
    if let Some(c) = common.chain_cap {
        config.caps.chain = c;
    }
    config.caps.check()?;

    let mut predictions = Vec::with_capacity(corpus.len());
    for arg in &corpus {
        let structure = pipeline.predict(
            arg,
            res.entities,
            config.decoder_for(arg.kind),
            &config.caps,
        )?;
        let gold = !arg.edges.is_empty();
        let sim = gold.then(|| sim_score(&structure, arg)).transpose()?;
        let labeled = (gold && structure.is_labeled())
            .then(|| labeled_sim_score(&structure, arg))
            .transpose()?;
        predictions.push(Prediction {
            structure,
            sim_score: sim,
            labeled_sim_score: labeled,
        });
    }
    let scored: Vec<f64> = predictions.iter().filter_map(|p| p.sim_score).collect();
    let doc = Predictions {
        framework: pipeline.framework.to_string(),
        decoder: config.decoder,
        mean_sim_score: (!scored.is_empty())
            .then(|| scored.iter().sum::<f64>() / scored.len() as f64),
        predictions,
    };
    match &run.out {
        Some(out) => {
            write_file(out, &to_json(&doc))?;
            info!(
                "wrote {} predictions to {}",
                doc.predictions.len(),
                out.display()
            );
        }
        None => print!("{}", to_json(&doc)),
    }
    Ok(())
}

/// The manifest alone, to learn which resources a saved pipeline needs.
fn read_manifest(dir: &Path) -> Result<PipelineManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text =
        fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        anyhow!(EvalError::Artifact {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    })
}

fn crossval(common: &CommonArgs) -> Result<()> {
    let run = common.resolve()?;
    let config = &run.experiment;
    config.validate()?;
    let out = require(&run.out, "output directory", "--out")?;
    let corpus = load_corpus(&run)?;
    let ents = entities(&run, common, &corpus)?;
    let res = resources(
        &run,
        &corpus,
        config.features.contains(FeatureGroup::Wordvec),
        &ents,
    )?;
    let report = run_cross_validation(&corpus, config, &res)?;
    let text = render_crossval(&report);
    write_file(&out.join("crossval.json"), &to_json(&report))?;
    write_file(&out.join("crossval.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn ablate(common: &CommonArgs, groups: &[String], mode: AblationMode) -> Result<()> {
    let run = common.resolve()?;
    let config = &run.experiment;
    config.validate()?;
    for g in groups {
        g.parse::<FeatureGroup>()?;
    }
    let out = require(&run.out, "output directory", "--out")?;
    let corpus = load_corpus(&run)?;
    let ents = entities(&run, common, &corpus)?;
    let wordvec =
        config.features.contains(FeatureGroup::Wordvec) && mode == AblationMode::WithWordvec;
    let res = resources(&run, &corpus, wordvec, &ents)?;
    let report = run_ablation(&corpus, config, groups, mode, &res)?;
    let text = render_ablation(&report);
    write_file(&out.join("ablation.json"), &to_json(&report))?;
    write_file(&out.join("ablation.txt"), &text)?;
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct ValidationSummary {
    arguments: usize,
    valid: usize,
    with_attack: usize,
    nodes: BTreeMap<usize, usize>,
    oversize: Vec<String>,
    invalid: BTreeMap<String, Vec<Violation>>,
}

fn validate(corpus: &Path, max_nodes: usize) -> Result<()> {
    let arguments = read_corpus_unvalidated(corpus)?;
    let options = ValidationOptions {
        node_cap: max_nodes,
    };
    let mut summary = ValidationSummary {
        arguments: arguments.len(),
        valid: 0,
        with_attack: arguments.iter().filter(|a| a.has_attack()).count(),
        nodes: BTreeMap::new(),
        oversize: Vec::new(),
        invalid: BTreeMap::new(),
    };
    for arg in &arguments {
        *summary.nodes.entry(arg.len()).or_default() += 1;
        let report = validate_argument(arg, &options);
        if report.oversize.is_some() {
            summary.oversize.push(arg.id.clone());
        }
        if report.is_ok() {
            summary.valid += 1;
        } else {
            log::warn!("{}: {report}", arg.id);
            summary.invalid.insert(arg.id.clone(), report.violations);
        }
    }
    print!("{}", to_json(&summary));
    if !summary.invalid.is_empty() {
        return Err(Invalid(summary.invalid.len()).into());
    }
    Ok(())
}

fn parse_signal(s: &str) -> Result<PlantedSignal, String> {
    match s {
        "lexical" => Ok(PlantedSignal::Lexical),
        "wordvec" => Ok(PlantedSignal::Wordvec),
        other => Err(format!(
            "unknown signal {other:?} (expected lexical, wordvec)"
        )),
    }
}

fn synth(out: &Path, config: &PlantedConfig) -> Result<()> {
    if !(0.0..=1.0).contains(&config.attack_rate) {
        bail!("attack rate must lie in [0, 1]");
    }
    let planted = planted_corpus(config);
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let corpus = out.join("corpus.json");
    let embeddings = out.join("embeddings.txt");
    write_corpus(&corpus, &planted.arguments)?;
    save_embeddings(&planted.embeddings, &embeddings)?;
    print!(
        "{}",
        to_json(&json!({ "corpus": corpus, "embeddings": embeddings }))
    );
    Ok(())
}
