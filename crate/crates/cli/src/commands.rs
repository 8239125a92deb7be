use std::path::{Path, PathBuf};

use wordlink::estimation::{Method, TrainConfig};
use wordlink::evaluation::{
    evaluate, extract_lexicon, link_ratio_histogram, log_log_slope, prob_multi_rare,
    singleton_fraction, OpenClassFilter, Task,
};
use wordlink::synth::{generate, SynthConfig};
use wordlink::{
    count_cooc, load_bitext, load_classes, load_gold, read_model, train, write_model, Bitext,
    Error, LikelihoodTable, LinkCounts, ModelHeader, Result, TranslationModel, Vocab, WordClassMap,
    WordId,
};

use crate::manifest::{self, ConvergenceSummary, Recorder};
use crate::{AnalyzeCommand, BitextArgs, ClassArgs, Cli, Command};

pub fn run(cli: &Cli) -> Result<()> {
    let config = serde_json::to_value(&cli.command).expect("arguments serialize");
    match &cli.command {
        Command::Train(a) => {
            let mut rec = Recorder::new("train", config, cli.seed);
            train_cmd(a, &mut rec)?;
            let path = a.manifest.clone().unwrap_or_else(|| sibling(&a.out, "manifest.json"));
            manifest::write(&path, &rec.finish()?)
        }
        Command::Evaluate(a) => {
            let mut rec = Recorder::new("evaluate", config, cli.seed);
            evaluate_cmd(a, &mut rec)?;
            finish(rec, a.manifest.as_deref(), a.out.as_deref())
        }
        Command::Lexicon(a) => {
            let mut rec = Recorder::new("lexicon", config, cli.seed);
            lexicon_cmd(a, &mut rec)?;
            finish(rec, a.manifest.as_deref(), a.out.as_deref())
        }
        Command::Analyze(AnalyzeCommand::Singletons(a)) => {
            let mut rec = Recorder::new("analyze singletons", config, cli.seed);
            singletons_cmd(a, cli.seed, &mut rec)?;
            finish(rec, a.manifest.as_deref(), a.out.as_deref())
        }
        Command::Analyze(AnalyzeCommand::MultiRare(a)) => {
            if !(0.0..=1.0).contains(&a.p) {
                return Err(Error::Usage(format!("--p must lie in [0,1], got {}", a.p)));
            }
            print!("gamma,p,prob_multi_rare\n{},{},{}\n", a.gamma, a.p, prob_multi_rare(a.gamma, a.p));
            Ok(())
        }
        Command::Analyze(AnalyzeCommand::LinkRatioHistogram(a)) => {
            let mut rec = Recorder::new("analyze link-ratio-histogram", config, cli.seed);
            histogram_cmd(a, &mut rec)?;
            finish(rec, a.manifest.as_deref(), a.out.as_deref())
        }
        Command::Synth(a) => {
            let mut rec = Recorder::new("synth", config, cli.seed);
            synth_cmd(a, cli.seed, &mut rec)?;
            manifest::write(&a.out_dir.join("manifest.json"), &rec.finish()?)
        }
    }
}

/// `<path>.<suffix>`, keeping the full original file name.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes the manifest to `manifest`, or next to `out` if only that is
/// given. Runs that print to standard output without `--manifest` skip it.
fn finish(rec: Recorder, manifest: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let path = match (manifest, out) {
        (Some(m), _) => m.to_path_buf(),
        (None, Some(o)) => sibling(o, "manifest.json"),
        (None, None) => return Ok(()),
    };
    manifest::write(&path, &rec.finish()?)
}

fn write_file(path: &Path, text: &str, rec: &mut Recorder) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    rec.output(path);
    Ok(())
}

/// Writes to `out`, or to standard output.
fn emit(out: Option<&Path>, text: &str, rec: &mut Recorder) -> Result<()> {
    match out {
        Some(p) => write_file(p, text, rec),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_bitext(args: &BitextArgs, rec: &mut Recorder) -> Result<Bitext> {
    let b = load_bitext(&args.src, &args.tgt)?;
    rec.input(&args.src);
    rec.input(&args.tgt);
    log::info!("read {} segments", b.len());
    Ok(b)
}

/// Both class maps, or neither.
fn read_classes(args: &ClassArgs, rec: &mut Recorder) -> Result<Option<(WordClassMap, WordClassMap)>> {
    match (&args.classes_src, &args.classes_tgt) {
        (Some(s), Some(t)) => {
            let maps = (
                load_classes(s, &WordClassMap::new())?,
                load_classes(t, &WordClassMap::new())?,
            );
            rec.input(s);
            rec.input(t);
            Ok(Some(maps))
        }
        (None, None) => Ok(None),
        _ => Err(Error::Usage(
            "--classes-src and --classes-tgt must be given together".into(),
        )),
    }
}

fn train_cmd(a: &crate::TrainArgs, rec: &mut Recorder) -> Result<()> {
    let method: Method = a.method.parse().map_err(Error::Usage)?;
    let classes = read_classes(&a.classes, rec)?;
    if method == Method::C && classes.is_none() {
        return Err(Error::Usage(
            "method C needs --classes-src and --classes-tgt".into(),
        ));
    }
    let bitext = read_bitext(&a.bitext, rec)?;
    let cfg = TrainConfig {
        max_iters: a.max_iters,
        threshold: a.threshold,
        smoothing: !a.no_smoothing,
        min_class_mass: a.min_class_mass,
        model1_null: !a.no_model1_null,
        uncertain_to_null: !a.keep_uncertain,
        ..TrainConfig::new(method)
    };
    let outcome = train(&bitext, &cfg, classes.as_ref().map(|(s, t)| (s, t)))?;
    let report = &outcome.report;
    log::info!(
        "{} iterations, converged: {}",
        report.iteration_count(),
        report.converged
    );

    let header = ModelHeader {
        method,
        iterations: report.iteration_count(),
        converged: report.converged,
        links_total: outcome.model.links_total(),
        aux: outcome.aux.as_ref().map(|x| x.all_params()).unwrap_or_default(),
    };
    write_model(&a.out, &outcome.model, &header, &outcome.likelihoods)?;
    rec.output(&a.out);
    let log_path = a
        .convergence_log
        .clone()
        .unwrap_or_else(|| sibling(&a.out, "convergence.tsv"));
    write_file(&log_path, &report.to_tsv(), rec)?;
    if let Some(path) = &a.links_out {
        let (s, t) = (bitext.src_vocab(), bitext.tgt_vocab());
        let mut text = String::from("u\tv\tlinks\tcooc\n");
        for ((u, v), n) in outcome.links.iter() {
            text.push_str(&format!(
                "{}\t{}\t{n}\t{}\n",
                s.word(u),
                t.word(v),
                outcome.cooc.get(u, v)
            ));
        }
        write_file(path, &text, rec)?;
    }
    rec.convergence = Some(ConvergenceSummary::from(report));
    Ok(())
}

fn evaluate_cmd(a: &crate::EvaluateArgs, rec: &mut Recorder) -> Result<()> {
    let task: Task = a.task.parse()?;
    let classes = read_classes(&a.classes, rec)?;
    if a.open_class_only && classes.is_none() {
        return Err(Error::Usage(
            "--open-class-only needs --classes-src and --classes-tgt".into(),
        ));
    }
    let file = read_model(&a.model)?;
    rec.input(&a.model);
    let bitext = read_bitext(&a.bitext, rec)?;
    let gold = load_gold(&a.gold)?;
    rec.input(&a.gold);
    gold.restricted_to(&bitext).validate(&bitext)?;
    let filter = classes
        .as_ref()
        .filter(|_| a.open_class_only)
        .map(|(src, tgt)| OpenClassFilter { src, tgt });
    let report = evaluate(&file.model, &bitext, &gold, task, filter)?;
    log::info!(
        "{} segments, precision {:.4} recall {:.4} dice {:.4}",
        report.segments,
        report.mean.precision,
        report.mean.recall,
        report.mean.dice
    );
    emit(a.out.as_deref(), &report.to_tsv(), rec)
}

/// Id in `to` of the word `id` names in `from`.
fn translate_id(from: &Vocab, to: &Vocab, id: WordId) -> Option<WordId> {
    if id.is_null() {
        Some(WordId::NULL)
    } else {
        to.get(from.word(id))
    }
}

/// Link counts `joint × K` of a model, re-keyed to `bitext`'s vocabularies.
/// Counts are rounded to whole links.
fn model_links(model: &TranslationModel, bitext: &Bitext) -> Result<LinkCounts> {
    if !model.has_joint() || model.links_total() <= 0.0 {
        return Err(Error::Usage(format!(
            "a {} model carries no link counts",
            model.method
        )));
    }
    let k = model.links_total();
    let counts: Vec<_> = model
        .joint_map()
        .iter()
        .filter_map(|(&(u, v), &p)| {
            let key = (
                translate_id(model.src_vocab(), bitext.src_vocab(), u)?,
                translate_id(model.tgt_vocab(), bitext.tgt_vocab(), v)?,
            );
            Some((key, (p * k).round()))
        })
        .collect();
    let missing = model.joint_map().len() - counts.len();
    if missing > 0 {
        log::warn!("{missing} model pairs name words absent from the bitext");
    }
    Ok(LinkCounts::from_counts(counts))
}

fn lexicon_cmd(a: &crate::LexiconArgs, rec: &mut Recorder) -> Result<()> {
    let file = read_model(&a.model)?;
    rec.input(&a.model);
    if file.like.is_empty() {
        return Err(Error::Usage(format!(
            "{}: the model file has no likelihood scores",
            a.model.display()
        )));
    }
    let bitext = read_bitext(&a.bitext, rec)?;
    let links = model_links(&file.model, &bitext)?;
    let cooc = count_cooc(&bitext);
    let (ms, mt) = (file.model.src_vocab(), file.model.tgt_vocab());
    let (bs, bt) = (bitext.src_vocab(), bitext.tgt_vocab());
    let like: LikelihoodTable = file
        .like
        .iter()
        .filter_map(|((u, v), x)| {
            Some(((translate_id(ms, bs, u)?, translate_id(mt, bt, v)?), x))
        })
        .collect();
    let lexicon = extract_lexicon(&like, &links, &cooc, bs, bt, a.min_like);
    log::info!("{} lexicon entries", lexicon.len());
    if let Some(path) = &a.plateaus {
        write_file(path, &lexicon.plateau_tsv(), rec)?;
    }
    emit(a.out.as_deref(), &lexicon.to_tsv(), rec)
}

fn singletons_cmd(a: &crate::SingletonArgs, seed: u64, rec: &mut Recorder) -> Result<()> {
    let text = std::fs::read_to_string(&a.tokens).map_err(|e| Error::io(&a.tokens, e))?;
    rec.input(&a.tokens);
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let points = singleton_fraction(&tokens, &a.sizes, a.trials, a.k, seed)?;
    if let Some(slope) = log_log_slope(&points) {
        log::info!("log-log slope {slope:.4}");
    }
    let mut csv = String::from("size,fraction\n");
    for p in &points {
        csv.push_str(&format!("{},{}\n", p.size, p.fraction));
    }
    emit(a.out.as_deref(), &csv, rec)
}

fn histogram_cmd(a: &crate::HistogramArgs, rec: &mut Recorder) -> Result<()> {
    let bitext = read_bitext(&a.bitext, rec)?;
    let cooc = count_cooc(&bitext);
    let links = match &a.model {
        Some(path) => {
            let file = read_model(path)?;
            rec.input(path);
            model_links(&file.model, &bitext)?
        }
        None => {
            let cfg = TrainConfig {
                max_iters: a.iterations,
                ..TrainConfig::new(Method::A)
            };
            train(&bitext, &cfg, None)?.links
        }
    };
    let hist = link_ratio_histogram(&links, &cooc, a.min_cooc);
    log::info!("{} word pairs with cooc >= {}", hist.total(), a.min_cooc);
    emit(a.out.as_deref(), &hist.to_csv(), rec)
}

fn synth_cmd(a: &crate::SynthArgs, seed: u64, rec: &mut Recorder) -> Result<()> {
    let cfg = SynthConfig {
        segments: a.segments,
        lexicon_size: a.lexicon_size,
        noise_fraction: a.noise,
        seed,
        ..SynthConfig::default()
    };
    if !(0.0..=1.0).contains(&cfg.noise_fraction) {
        return Err(Error::Usage("--noise must lie in [0,1]".into()));
    }
    let s = generate(&cfg)?;
    let dir = &a.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (src, tgt) = (dir.join("src.txt"), dir.join("tgt.txt"));
    s.bitext.write(&src, &tgt)?;
    rec.output(&src);
    rec.output(&tgt);
    write_file(&dir.join("gold.tsv"), &s.gold.to_tsv(), rec)?;
    write_file(&dir.join("classes.src.tsv"), &s.src_classes.to_tsv(), rec)?;
    write_file(&dir.join("classes.tgt.tsv"), &s.tgt_classes.to_tsv(), rec)?;
    let lexicon: String = s.lexicon.iter().map(|(u, v)| format!("{u}\t{v}\n")).collect();
    write_file(&dir.join("lexicon.tsv"), &lexicon, rec)
}
