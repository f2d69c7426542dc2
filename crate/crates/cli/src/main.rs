//! Command-line frontend for the grammar-induction laboratory.
//!
//! Subcommands cover the full workflow: `synth` samples a corpus from a
//! random grammar, `induce` runs seeded Gibbs inductions and writes
//! artifacts, `sweep` repeats that over a hyperparameter grid, `eval` and
//! `sigtest` score bracketed trees, `depth` reports center-embedding
//! depths, and `stats` summarizes a treebank.
//!
//! `induce` and `sweep` read an optional `key = value` config file; any
//! flag of the same name overrides the file entry.

mod config;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pcfg_lab::depth::tree_depth;
use pcfg_lab::eval::{evaluate, normalize_pairs, per_sentence_brackets, permutation_test};
use pcfg_lab::experiment::{
    generate_synthetic, run_experiment, sweep, ExperimentConfig, SweepAxis, SynthConfig,
    DEFAULT_ITERATIONS, DEFAULT_RUNS,
};
use pcfg_lab::rng::substream;
use pcfg_lab::treebank::{corpus_stats, parse_bracketed, PunctPolicy, Tree};

use config::{pick, require, FileConfig};

#[derive(Parser)]
#[command(
    name = "pcfg-lab",
    version,
    about = "Grammar induction by Gibbs sampling, with depth bounds and labeled evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded Gibbs inductions and write per-run artifacts
    Induce(InduceArgs),
    /// Run `induce` once per value of one hyperparameter axis
    Sweep(SweepArgs),
    /// Score predicted trees against gold trees
    Eval(EvalArgs),
    /// Paired permutation test between two systems' trees
    Sigtest(SigtestArgs),
    /// Print the center-embedding depth of each tree in a file
    Depth(DepthArgs),
    /// Sample a synthetic corpus and gold trees from a random grammar
    Synth(SynthArgs),
    /// Summarize the categories and rules of a treebank
    Stats(StatsArgs),
}

/// Settings shared by `induce` and `sweep`. Every field can also be given
/// in the config file under the same name as its long flag.
#[derive(Args)]
struct ExperimentArgs {
    /// Config file with `key = value` lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Raw corpus: one sentence per line, tokens space-separated
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Gold trees, one bracketed tree per line, aligned with the corpus
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Output directory for run artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of grammar categories
    #[arg(long)]
    categories: Option<usize>,
    /// Dirichlet concentration of the rule prior
    #[arg(long)]
    beta: Option<f64>,
    /// Center-embedding depth bound: a positive integer or `unbounded`
    #[arg(long)]
    depth_bound: Option<String>,
    /// Gibbs iterations per run [default: 700]
    #[arg(long)]
    iterations: Option<usize>,
    /// Seeded runs per setting [default: 10]
    #[arg(long)]
    runs: Option<usize>,
    /// Master seed; run k uses seed + k
    #[arg(long)]
    seed: Option<u64>,
    /// Punctuation policy for scoring: `chars`, `none`, or `tags:<file>`
    #[arg(long)]
    punct: Option<String>,
}

#[derive(Args)]
struct InduceArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Hyperparameter to vary: `beta`, `categories`, or `depth`
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated axis values; `depth` accepts `unbounded`
    #[arg(long)]
    values: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    F1,
    Rh,
    Rvm,
    H,
    C,
    V,
}

#[derive(Args)]
struct EvalArgs {
    /// Gold trees, one bracketed tree per line
    gold: PathBuf,
    /// Predicted trees, line-aligned with the gold file
    pred: PathBuf,
    /// Print just this score instead of the full JSON record
    #[arg(long)]
    metric: Option<Metric>,
    /// Punctuation policy: `chars`, `none`, or `tags:<file>`
    #[arg(long, default_value = "chars")]
    punct: String,
}

#[derive(Args)]
struct SigtestArgs {
    /// Gold trees, one bracketed tree per line
    gold: PathBuf,
    /// First system's predicted trees
    pred_a: PathBuf,
    /// Second system's predicted trees
    pred_b: PathBuf,
    /// Permutation resamples
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Punctuation policy: `chars`, `none`, or `tags:<file>`
    #[arg(long, default_value = "chars")]
    punct: String,
}

#[derive(Args)]
struct DepthArgs {
    /// Binary trees, one bracketed tree per line
    trees: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    categories: usize,
    /// Vocabulary size; tokens are named w0, w1, ...
    #[arg(long)]
    vocab: usize,
    /// Dirichlet concentration of the generating grammar
    #[arg(long)]
    beta_gen: f64,
    #[arg(long)]
    sentences: usize,
    /// Longest sentence kept; longer samples are rejected
    #[arg(long, default_value_t = 10)]
    max_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the raw corpus
    #[arg(long)]
    corpus_out: PathBuf,
    /// Where to write the generating trees
    #[arg(long)]
    gold_out: PathBuf,
    /// Optionally write the generating grammar too
    #[arg(long)]
    grammar_out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Treebank file, one bracketed tree per line
    trees: PathBuf,
}

fn parse_punct(value: &str) -> Result<PunctPolicy> {
    match value {
        "chars" => Ok(PunctPolicy::Chars),
        "none" => Ok(PunctPolicy::None),
        _ => match value.strip_prefix("tags:") {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading punctuation tag file {path}"))?;
                let tags: Vec<&str> =
                    text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
                if tags.is_empty() {
                    bail!("punctuation tag file {path} lists no tags");
                }
                Ok(PunctPolicy::tags(tags))
            }
            None => bail!("punctuation policy must be `chars`, `none`, or `tags:<file>`"),
        },
    }
}

fn parse_depth_bound(value: &str) -> Result<Option<usize>> {
    match value {
        "unbounded" | "none" => Ok(None),
        _ => value
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("depth bound must be a positive integer or `unbounded`")),
    }
}

fn resolve_experiment(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let depth_bound = match pick(args.depth_bound.clone(), &file, "depth-bound")? {
        Some(raw) => parse_depth_bound(&raw)?,
        None => None,
    };
    let punct = match pick(args.punct.clone(), &file, "punct")? {
        Some(raw) => parse_punct(&raw)?,
        None => PunctPolicy::Chars,
    };
    Ok(ExperimentConfig {
        corpus: require(args.corpus.clone(), &file, "corpus")?,
        gold: pick(args.gold.clone(), &file, "gold")?,
        out_dir: require(args.out.clone(), &file, "out")?,
        categories: require(args.categories, &file, "categories")?,
        beta: require(args.beta, &file, "beta")?,
        depth_bound,
        iterations: pick(args.iterations, &file, "iterations")?.unwrap_or(DEFAULT_ITERATIONS),
        runs: pick(args.runs, &file, "runs")?.unwrap_or(DEFAULT_RUNS),
        seed: pick(args.seed, &file, "seed")?.unwrap_or(0),
        punct,
    })
}

fn resolve_axis(args: &SweepArgs, file: &FileConfig) -> Result<SweepAxis> {
    let axis = require(args.axis.clone(), file, "axis")?;
    let values = require(args.values.clone(), file, "values")?;
    let items: Vec<&str> =
        values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if items.is_empty() {
        bail!("`values` lists no axis values");
    }
    match axis.as_str() {
        "beta" => items
            .iter()
            .map(|v| v.parse().map_err(|_| anyhow!("bad beta value `{v}`")))
            .collect::<Result<_>>()
            .map(SweepAxis::Beta),
        "categories" => items
            .iter()
            .map(|v| v.parse().map_err(|_| anyhow!("bad category count `{v}`")))
            .collect::<Result<_>>()
            .map(SweepAxis::Categories),
        "depth" => items
            .iter()
            .map(|v| parse_depth_bound(v))
            .collect::<Result<_>>()
            .map(SweepAxis::Depth),
        other => bail!("axis must be `beta`, `categories`, or `depth`, got `{other}`"),
    }
}

fn load_trees(path: &Path) -> Result<Vec<Tree>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_bracketed(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_induce(args: &InduceArgs) -> Result<()> {
    let config = resolve_experiment(&args.experiment)?;
    let report = run_experiment(&config)?;
    print_json(&report)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let config = resolve_experiment(&args.experiment)?;
    let file = match &args.experiment.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let axis = resolve_axis(args, &file)?;
    let report = sweep(&config, &axis)?;
    print_json(&report)
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let gold = load_trees(&args.gold)?;
    let pred = load_trees(&args.pred)?;
    let policy = parse_punct(&args.punct)?;
    let norm = normalize_pairs(&gold, &pred, &policy)?;
    let report = evaluate(&norm.gold, &norm.pred)?;
    match args.metric {
        Some(metric) => {
            let value = match metric {
                Metric::F1 => report.f1,
                Metric::Rh => report.rh,
                Metric::Rvm => report.rvm,
                Metric::H => report.h,
                Metric::C => report.c,
                Metric::V => report.v,
            };
            println!("{value}");
            Ok(())
        }
        None => print_json(&report),
    }
}

fn cmd_sigtest(args: &SigtestArgs) -> Result<()> {
    let gold = load_trees(&args.gold)?;
    let pred_a = load_trees(&args.pred_a)?;
    let pred_b = load_trees(&args.pred_b)?;
    let policy = parse_punct(&args.punct)?;
    let norm_a = normalize_pairs(&gold, &pred_a, &policy)?;
    let norm_b = normalize_pairs(&gold, &pred_b, &policy)?;
    let records_a = per_sentence_brackets(&norm_a.gold, &norm_a.pred)?;
    let records_b = per_sentence_brackets(&norm_b.gold, &norm_b.pred)?;
    let mut rng = substream(args.seed, 0, 0, 0);
    let result = permutation_test(&records_a, &records_b, args.iterations, &mut rng)?;
    print_json(&result)
}

fn cmd_depth(args: &DepthArgs) -> Result<()> {
    let trees = load_trees(&args.trees)?;
    for (index, tree) in trees.iter().enumerate() {
        let depth = tree_depth(tree).with_context(|| format!("tree {}", index + 1))?;
        println!("{depth}");
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let synth = generate_synthetic(&SynthConfig {
        categories: args.categories,
        vocab: args.vocab,
        beta_gen: args.beta_gen,
        sentences: args.sentences,
        max_len: args.max_len,
        seed: args.seed,
    })?;
    synth.write_corpus(&args.corpus_out)?;
    synth.write_gold(&args.gold_out)?;
    if let Some(path) = &args.grammar_out {
        synth.write_grammar(path)?;
    }
    eprintln!(
        "wrote {} sentences to {} and {}",
        synth.sentences.len(),
        args.corpus_out.display(),
        args.gold_out.display()
    );
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> Result<()> {
    let trees = load_trees(&args.trees)?;
    let stats = corpus_stats(&trees)?;
    print_json(&stats)
}

fn main() -> Result<()> {
    match &Cli::parse().command {
        Command::Induce(args) => cmd_induce(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sigtest(args) => cmd_sigtest(args),
        Command::Depth(args) => cmd_depth(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Stats(args) => cmd_stats(args),
    }
}
