//! Experiment orchestration: seeded multi-run induction with artifacts on
//! disk, grid sweeps over the main hyperparameters, and synthetic corpus
//! generation for end-to-end checks.
//!
//! Every run writes its own subdirectory (`run-<k>`, seeded `seed + k`)
//! containing the per-iteration log-joint trace, the final grammar, the
//! Viterbi parses, and — when reference trees are available — a score
//! record. Scores are also pooled over the concatenation of all runs'
//! Viterbi trees. Punctuation stays in the corpus during induction and is
//! removed only for scoring.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::eval::{evaluate, normalize_pairs, EvalError, EvalReport};
use crate::grammar::{sample_prior, Grammar, GrammarError};
use crate::inducer::{gibbs_run_with, GibbsConfig, InducerError, ViterbiParser};
use crate::rng::{substream, STREAM_SYNTH_GRAMMAR, STREAM_SYNTH_TREES};
use crate::treebank::{
    parse_bracketed, serialize, BinaryTree, Corpus, PunctPolicy, Tree, TreebankError, Vocabulary,
};

pub const DEFAULT_ITERATIONS: usize = 700;
pub const DEFAULT_RUNS: usize = 10;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Treebank(#[from] TreebankError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Inducer(#[from] InducerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("a sweep needs at least one axis value")]
    EmptySweep,
    #[error(
        "sentence sampling accepted {accepted} of {attempts} attempts; \
         raise max_len or lower beta_gen"
    )]
    RejectionRate { attempts: u64, accepted: u64 },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

/// Everything one induction experiment needs: where the data lives, the
/// model hyperparameters, and how many seeded runs to execute.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    pub gold: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub categories: usize,
    pub beta: f64,
    pub depth_bound: Option<usize>,
    pub iterations: usize,
    pub runs: usize,
    pub seed: u64,
    pub punct: PunctPolicy,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::InvalidConfig(msg));
        if self.categories == 0 {
            return bad("categories must be at least 1".into());
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive and finite, got {}", self.beta));
        }
        if self.depth_bound == Some(0) {
            return bad("depth bound must be at least 1 (or unbounded)".into());
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        Ok(())
    }
}

/// Outcome of a single seeded run; a failed run records its error and
/// leaves the other runs untouched.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub log_joint: Option<f64>,
    pub scores: Option<EvalReport>,
    pub error: Option<String>,
}

/// Full record of a multi-run experiment, also written as `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub corpus: PathBuf,
    pub sentences: usize,
    pub categories: usize,
    pub beta: f64,
    pub depth_bound: Option<usize>,
    pub iterations: usize,
    pub runs: usize,
    pub seed: u64,
    pub punct: String,
    pub outcomes: Vec<RunOutcome>,
    /// Scores over the concatenation of all successful runs' Viterbi trees,
    /// with the reference trees repeated per run.
    pub pooled: Option<EvalReport>,
}

const SCORE_METRICS: [&str; 6] = ["f1", "rh", "rvm", "h", "c", "v"];

fn score_values(report: &EvalReport) -> [f64; 6] {
    [report.f1, report.rh, report.rvm, report.h, report.c, report.v]
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn load_corpus(config: &ExperimentConfig) -> Result<Corpus, ExperimentError> {
    let raw = fs::read_to_string(&config.corpus).map_err(io_err(&config.corpus))?;
    let corpus = Corpus::from_raw_text(&raw)?;
    match &config.gold {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            Ok(corpus.with_gold(parse_bracketed(&text)?)?)
        }
        None => Ok(corpus),
    }
}

/// What one run hands back for pooling: its final log joint, its scores
/// when gold trees are present, and the normalized tree pairs.
struct RunArtifacts {
    log_joint: f64,
    scores: Option<EvalReport>,
    norm_gold: Vec<Tree>,
    norm_pred: Vec<Tree>,
}

/// One seeded run: induce, write trace/grammar/Viterbi artifacts, score.
fn run_one(
    corpus: &Corpus,
    config: &ExperimentConfig,
    run_seed: u64,
    run_dir: &Path,
) -> Result<RunArtifacts, ExperimentError> {
    let gibbs = GibbsConfig {
        categories: config.categories,
        beta: config.beta,
        depth_bound: config.depth_bound,
        iterations: config.iterations,
        seed: run_seed,
    };

    let trace_path = run_dir.join("trace.log");
    let mut trace = String::new();
    let state = gibbs_run_with(corpus, &gibbs, |iteration, log_joint| {
        writeln!(trace, "iter {iteration} logjoint {log_joint}").expect("string write");
    })?;
    fs::write(&trace_path, trace).map_err(io_err(&trace_path))?;

    let grammar_path = run_dir.join("grammar.txt");
    let mut out = BufWriter::new(File::create(&grammar_path).map_err(io_err(&grammar_path))?);
    state.grammar.write_text(corpus.vocab(), &mut out)?;
    out.flush().map_err(io_err(&grammar_path))?;

    let parser = ViterbiParser::new(&state.grammar, config.depth_bound)?;
    let viterbi_path = run_dir.join("viterbi.txt");
    let mut out = BufWriter::new(File::create(&viterbi_path).map_err(io_err(&viterbi_path))?);
    let mut predicted = Vec::with_capacity(corpus.len());
    for sentence in corpus.sentences() {
        let tree = parser.parse(sentence)?.to_tree(corpus.vocab());
        writeln!(out, "{}", serialize(&tree)).map_err(io_err(&viterbi_path))?;
        predicted.push(tree);
    }
    out.flush().map_err(io_err(&viterbi_path))?;

    let log_joint = state.log_joint();
    match corpus.gold() {
        Some(gold) => {
            let norm = normalize_pairs(gold, &predicted, &config.punct)?;
            let report = evaluate(&norm.gold, &norm.pred)?;
            write_json(&run_dir.join("scores.json"), &report)?;
            Ok(RunArtifacts {
                log_joint,
                scores: Some(report),
                norm_gold: norm.gold,
                norm_pred: norm.pred,
            })
        }
        None => Ok(RunArtifacts {
            log_joint,
            scores: None,
            norm_gold: Vec::new(),
            norm_pred: Vec::new(),
        }),
    }
}

/// Runs `config.runs` seeded inductions (run `k` uses seed `seed + k`),
/// writing per-run artifacts under `out_dir/run-<k>`, a long-format
/// `summary.csv`, and `report.json`. A failing run is recorded in its
/// outcome; the remaining runs still execute.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let corpus = load_corpus(config)?;
    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;

    let mut outcomes = Vec::with_capacity(config.runs);
    let mut pooled_gold = Vec::new();
    let mut pooled_pred = Vec::new();
    for run in 0..config.runs {
        let run_seed = config.seed.wrapping_add(run as u64);
        let run_dir = config.out_dir.join(format!("run-{run}"));
        fs::create_dir_all(&run_dir).map_err(io_err(&run_dir))?;
        match run_one(&corpus, config, run_seed, &run_dir) {
            Ok(artifacts) => {
                pooled_gold.extend(artifacts.norm_gold);
                pooled_pred.extend(artifacts.norm_pred);
                outcomes.push(RunOutcome {
                    run,
                    seed: run_seed,
                    log_joint: Some(artifacts.log_joint),
                    scores: artifacts.scores,
                    error: None,
                });
            }
            Err(err) => outcomes.push(RunOutcome {
                run,
                seed: run_seed,
                log_joint: None,
                scores: None,
                error: Some(err.to_string()),
            }),
        }
    }

    let pooled = if corpus.gold().is_some() && outcomes.iter().any(|o| o.error.is_none()) {
        Some(evaluate(&pooled_gold, &pooled_pred)?)
    } else {
        None
    };

    let report = ExperimentReport {
        corpus: config.corpus.clone(),
        sentences: corpus.len(),
        categories: config.categories,
        beta: config.beta,
        depth_bound: config.depth_bound,
        iterations: config.iterations,
        runs: config.runs,
        seed: config.seed,
        punct: config.punct.to_string(),
        outcomes,
        pooled,
    };

    let summary_path = config.out_dir.join("summary.csv");
    let mut csv = csv::Writer::from_path(&summary_path)?;
    csv.write_record(["run", "metric", "score"])?;
    for outcome in &report.outcomes {
        let run = outcome.run.to_string();
        if let Some(log_joint) = outcome.log_joint {
            csv.write_record([run.as_str(), "log_joint", &log_joint.to_string()])?;
        }
        if let Some(scores) = &outcome.scores {
            for (metric, value) in SCORE_METRICS.iter().zip(score_values(scores)) {
                csv.write_record([run.as_str(), metric, &value.to_string()])?;
            }
        }
    }
    if let Some(pooled) = &report.pooled {
        for (metric, value) in SCORE_METRICS.iter().zip(score_values(pooled)) {
            csv.write_record(["pooled", metric, &value.to_string()])?;
        }
    }
    csv.flush().map_err(io_err(&summary_path))?;

    write_json(&config.out_dir.join("report.json"), &report)?;
    Ok(report)
}

/// One hyperparameter to vary, with the values to try.
#[derive(Debug, Clone)]
pub enum SweepAxis {
    Beta(Vec<f64>),
    Categories(Vec<usize>),
    Depth(Vec<Option<usize>>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Beta(_) => "beta",
            SweepAxis::Categories(_) => "categories",
            SweepAxis::Depth(_) => "depth",
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            SweepAxis::Beta(v) => v.is_empty(),
            SweepAxis::Categories(v) => v.is_empty(),
            SweepAxis::Depth(v) => v.is_empty(),
        }
    }

    /// Axis-value labels as they appear in directory names and CSV rows;
    /// an unbounded depth cell is labeled `unbounded`.
    pub fn labels(&self) -> Vec<String> {
        match self {
            SweepAxis::Beta(v) => v.iter().map(|b| b.to_string()).collect(),
            SweepAxis::Categories(v) => v.iter().map(|c| c.to_string()).collect(),
            SweepAxis::Depth(v) => v
                .iter()
                .map(|d| match d {
                    Some(d) => d.to_string(),
                    None => "unbounded".to_string(),
                })
                .collect(),
        }
    }

    fn apply(&self, index: usize, config: &mut ExperimentConfig) {
        match self {
            SweepAxis::Beta(v) => config.beta = v[index],
            SweepAxis::Categories(v) => config.categories = v[index],
            SweepAxis::Depth(v) => config.depth_bound = v[index],
        }
    }
}

/// One grid cell of a sweep: the experiment at a single axis value.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub value: String,
    pub dir: PathBuf,
    pub report: Option<ExperimentReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub axis: String,
    pub cells: Vec<SweepCell>,
}

/// Runs [`run_experiment`] once per axis value, each in its own
/// subdirectory, and writes a long-format `sweep.csv` with columns
/// (axis_value, run, metric, score). A failing cell or run is skipped in
/// the CSV and listed in `failures.txt`; the sweep continues.
pub fn sweep(base: &ExperimentConfig, axis: &SweepAxis) -> Result<SweepReport, ExperimentError> {
    if axis.is_empty() {
        return Err(ExperimentError::EmptySweep);
    }
    fs::create_dir_all(&base.out_dir).map_err(io_err(&base.out_dir))?;

    let labels = axis.labels();
    let mut cells = Vec::with_capacity(labels.len());
    for (index, label) in labels.into_iter().enumerate() {
        let dir = base.out_dir.join(format!("{}-{label}", axis.name()));
        let mut config = base.clone();
        config.out_dir = dir.clone();
        axis.apply(index, &mut config);
        match run_experiment(&config) {
            Ok(report) => {
                cells.push(SweepCell { value: label, dir, report: Some(report), error: None })
            }
            Err(err) => cells.push(SweepCell {
                value: label,
                dir,
                report: None,
                error: Some(err.to_string()),
            }),
        }
    }

    let report = SweepReport { axis: axis.name().to_string(), cells };

    let csv_path = base.out_dir.join("sweep.csv");
    let mut csv = csv::Writer::from_path(&csv_path)?;
    csv.write_record(["axis_value", "run", "metric", "score"])?;
    let mut failures = Vec::new();
    for cell in &report.cells {
        if let Some(error) = &cell.error {
            failures.push(format!("{} {}: {error}", report.axis, cell.value));
            continue;
        }
        let cell_report = cell.report.as_ref().expect("cell without error has a report");
        for outcome in &cell_report.outcomes {
            if let Some(error) = &outcome.error {
                failures.push(format!(
                    "{} {} run {}: {error}",
                    report.axis, cell.value, outcome.run
                ));
                continue;
            }
            let run = outcome.run.to_string();
            if let Some(log_joint) = outcome.log_joint {
                csv.write_record([
                    cell.value.as_str(),
                    run.as_str(),
                    "log_joint",
                    &log_joint.to_string(),
                ])?;
            }
            if let Some(scores) = &outcome.scores {
                for (metric, value) in SCORE_METRICS.iter().zip(score_values(scores)) {
                    csv.write_record([
                        cell.value.as_str(),
                        run.as_str(),
                        metric,
                        &value.to_string(),
                    ])?;
                }
            }
        }
    }
    csv.flush().map_err(io_err(&csv_path))?;

    if !failures.is_empty() {
        let path = base.out_dir.join("failures.txt");
        let mut text = failures.join("\n");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))?;
    }

    write_json(&base.out_dir.join("sweep.json"), &report)?;
    Ok(report)
}

/// Parameters for sampling a corpus from a freshly drawn grammar.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub categories: usize,
    pub vocab: usize,
    pub beta_gen: f64,
    pub sentences: usize,
    pub max_len: usize,
    pub seed: u64,
}

/// A sampled corpus with its generating trees and grammar. Category labels
/// in the trees are the generating category indices; tokens are `w0`,
/// `w1`, … in vocabulary order.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub sentences: Vec<Vec<String>>,
    pub gold: Vec<Tree>,
    pub grammar: Grammar,
    pub vocab: Vocabulary,
}

impl Synthetic {
    /// Raw corpus text: one sentence per line, tokens space-separated.
    pub fn corpus_text(&self) -> String {
        let mut text = String::new();
        for sentence in &self.sentences {
            text.push_str(&sentence.join(" "));
            text.push('\n');
        }
        text
    }

    /// Reference trees, one bracketed line per sentence.
    pub fn gold_text(&self) -> String {
        let mut text = String::new();
        for tree in &self.gold {
            text.push_str(&serialize(tree));
            text.push('\n');
        }
        text
    }

    pub fn write_corpus(&self, path: &Path) -> Result<(), ExperimentError> {
        fs::write(path, self.corpus_text()).map_err(io_err(path))
    }

    pub fn write_gold(&self, path: &Path) -> Result<(), ExperimentError> {
        fs::write(path, self.gold_text()).map_err(io_err(path))
    }

    pub fn write_grammar(&self, path: &Path) -> Result<(), ExperimentError> {
        let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
        self.grammar.write_text(&self.vocab, &mut out)?;
        out.flush().map_err(io_err(path))
    }
}

const SYNTH_MAX_ATTEMPTS: u64 = 1_000_000;
const SYNTH_MIN_ACCEPT_RATE: f64 = 1e-3;

fn draw_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let threshold: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (index, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last_positive = index;
        cumulative += p;
        if threshold < cumulative {
            return index;
        }
    }
    last_positive
}

/// Samples one derivation top-down, aborting as soon as the finished yield
/// would exceed `max_len`. `reserved` counts category slots elsewhere in
/// the derivation that still owe at least one terminal each, so the abort
/// decision is exact: a derivation is aborted iff its completed yield
/// would be longer than `max_len`.
fn expand_category(
    grammar: &Grammar,
    cat: usize,
    reserved: usize,
    emitted: &mut usize,
    max_len: usize,
    rng: &mut ChaCha8Rng,
) -> Option<BinaryTree> {
    let classes = grammar.categories();
    let choice = draw_index(grammar.row(cat), rng);
    if choice < classes * classes {
        if *emitted + reserved + 2 > max_len {
            return None;
        }
        let (left_cat, right_cat) = (choice / classes, choice % classes);
        let left = expand_category(grammar, left_cat, reserved + 1, emitted, max_len, rng)?;
        let right = expand_category(grammar, right_cat, reserved, emitted, max_len, rng)?;
        Some(BinaryTree::Branch { cat, left: Box::new(left), right: Box::new(right) })
    } else {
        *emitted += 1;
        if *emitted + reserved > max_len {
            return None;
        }
        Some(BinaryTree::Preterminal { cat, word: choice - classes * classes })
    }
}

fn sample_corpus(
    grammar: &Grammar,
    vocab: &Vocabulary,
    config: &SynthConfig,
    max_attempts: u64,
) -> Result<Synthetic, ExperimentError> {
    let mut sentences = Vec::with_capacity(config.sentences);
    let mut gold = Vec::with_capacity(config.sentences);
    let mut attempts = 0u64;
    while gold.len() < config.sentences {
        if attempts >= max_attempts
            && (gold.len() as f64) < SYNTH_MIN_ACCEPT_RATE * attempts as f64
        {
            return Err(ExperimentError::RejectionRate {
                attempts,
                accepted: gold.len() as u64,
            });
        }
        let mut rng = substream(config.seed, STREAM_SYNTH_TREES, attempts, 0);
        attempts += 1;
        let root = draw_index(grammar.root(), &mut rng);
        let mut emitted = 0;
        if let Some(tree) =
            expand_category(grammar, root, 0, &mut emitted, config.max_len, &mut rng)
        {
            let rendered = tree.to_tree(vocab);
            sentences
                .push(rendered.leaves().iter().map(|token| token.to_string()).collect());
            gold.push(rendered);
        }
    }
    Ok(Synthetic { sentences, gold, grammar: grammar.clone(), vocab: vocab.clone() })
}

/// Draws a grammar from the prior at `beta_gen`, then samples sentences
/// from it, rejecting any longer than `max_len`. Deterministic in the
/// seed: attempt `k` always uses the same random substream whether or not
/// earlier attempts were accepted. Fails if fewer than 0.1% of a million
/// attempts fit the length cap.
pub fn generate_synthetic(config: &SynthConfig) -> Result<Synthetic, ExperimentError> {
    let bad = |msg: String| Err(ExperimentError::InvalidConfig(msg));
    if config.categories == 0 {
        return bad("categories must be at least 1".into());
    }
    if config.vocab == 0 {
        return bad("vocab must be at least 1".into());
    }
    if !(config.beta_gen > 0.0 && config.beta_gen.is_finite()) {
        return bad(format!("beta_gen must be positive and finite, got {}", config.beta_gen));
    }
    if config.sentences == 0 {
        return bad("sentences must be at least 1".into());
    }
    if config.max_len == 0 {
        return bad("max_len must be at least 1".into());
    }
    let tokens: Vec<String> = (0..config.vocab).map(|w| format!("w{w}")).collect();
    let vocab = Vocabulary::from_sentences([tokens.iter().map(String::as_str)]);
    let mut rng = substream(config.seed, STREAM_SYNTH_GRAMMAR, 0, 0);
    let grammar = sample_prior(config.categories, config.vocab, config.beta_gen, &mut rng)?;
    sample_corpus(&grammar, &vocab, config, SYNTH_MAX_ATTEMPTS)
}
