use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod config;
mod manifest;

/// Word-to-word translation models from sentence-aligned bitexts.
#[derive(Debug, Parser, Serialize)]
#[command(name = "wordlink", version, args_override_self = true)]
struct Cli {
    /// File of `key=value` defaults for the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
enum Command {
    /// Train a model and write it as TSV, with a manifest and convergence log.
    Train(TrainArgs),
    /// Score a model against a gold standard.
    Evaluate(EvaluateArgs),
    /// Extract a ranked translation lexicon from a trained model.
    Lexicon(LexiconArgs),
    /// Sparse-data and link-statistics tables.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Generate a synthetic bitext with gold links and word classes.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Serialize)]
struct BitextArgs {
    /// Source half, one segment per line.
    #[arg(long)]
    src: PathBuf,
    /// Target half, line-aligned with the source.
    #[arg(long)]
    tgt: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ClassArgs {
    /// `word TAB class` map for the source language.
    #[arg(long)]
    classes_src: Option<PathBuf>,
    /// `word TAB class` map for the target language.
    #[arg(long)]
    classes_tgt: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[command(flatten)]
    bitext: BitextArgs,
    /// A, B, C or model1.
    #[arg(long, default_value = "A")]
    method: String,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    classes: ClassArgs,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Stop once 1 - Dice between successive models drops below this.
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
    /// Skip Good-Turing smoothing of the initial counts.
    #[arg(long)]
    no_smoothing: bool,
    /// Link classes with less co-occurrence mass use global noise parameters.
    #[arg(long, default_value_t = 100.0)]
    min_class_mass: f64,
    /// Leave the NULL word out of Model 1.
    #[arg(long)]
    no_model1_null: bool,
    /// Keep word pairs whose words score negatively with every partner
    /// (Methods B, C) instead of routing those words to NULL.
    #[arg(long)]
    keep_uncertain: bool,
    /// Per-iteration log (default: `<out>.convergence.tsv`).
    #[arg(long)]
    convergence_log: Option<PathBuf>,
    /// Also write the final link counts, `u v links cooc`.
    #[arg(long)]
    links_out: Option<PathBuf>,
    /// Run manifest (default: `<out>.manifest.json`).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    bitext: BitextArgs,
    /// Gold links, `annotator TAB segment TAB src_pos TAB tgt_pos`.
    #[arg(long)]
    gold: PathBuf,
    /// single-best or whole-dist.
    #[arg(long, default_value = "single-best")]
    task: String,
    /// Score content words only; needs both class maps.
    #[arg(long)]
    open_class_only: bool,
    #[command(flatten)]
    classes: ClassArgs,
    /// Report file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run manifest (default: `<out>.manifest.json` when --out is given).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct LexiconArgs {
    #[arg(long)]
    model: PathBuf,
    /// The bitext the model was trained on, for co-occurrence counts.
    #[command(flatten)]
    bitext: BitextArgs,
    /// Keep entries scoring at least this much.
    #[arg(long, default_value_t = f64::NEG_INFINITY, allow_hyphen_values = true)]
    min_like: f64,
    /// Lexicon file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plateau summary, `start end length like links cooc`.
    #[arg(long)]
    plateaus: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
enum AnalyzeCommand {
    /// Proportion of tokens whose type occurs k times, by sample size.
    Singletons(SingletonArgs),
    /// Chance that more than one of gamma rare words co-occurs with a word.
    MultiRare(MultiRareArgs),
    /// Histogram of links/cooc over word pairs.
    LinkRatioHistogram(HistogramArgs),
}

#[derive(Debug, Args, Serialize)]
struct SingletonArgs {
    /// Whitespace-tokenized text.
    #[arg(long)]
    tokens: PathBuf,
    /// Sample sizes in tokens, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Count tokens of types seen exactly this often.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct MultiRareArgs {
    #[arg(long)]
    gamma: u64,
    #[arg(long)]
    p: f64,
}

#[derive(Debug, Args, Serialize)]
struct HistogramArgs {
    #[command(flatten)]
    bitext: BitextArgs,
    /// Take link counts from this model file instead of training.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Method A iterations to run when no model is given.
    #[arg(long, default_value_t = 1)]
    iterations: usize,
    /// Only pairs co-occurring at least this often.
    #[arg(long, default_value_t = 5.0)]
    min_cooc: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    /// Directory for src.txt, tgt.txt, gold.tsv, classes.src.tsv,
    /// classes.tgt.tsv and lexicon.tsv.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    segments: usize,
    #[arg(long, default_value_t = 500)]
    lexicon_size: usize,
    /// Fraction of segments whose halves are unrelated.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
}

/// 1 for usage errors, 2 for unreadable or malformed input, 3 when
/// estimation fails.
fn exit_code(e: &wordlink::Error) -> u8 {
    match e {
        wordlink::Error::Usage(_) => 1,
        e if e.is_input_error() => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let argv = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
