use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wordlink::evaluation::{evaluate, extract_lexicon, Task};
use wordlink::{count_cooc, load_bitext, load_gold, read_model, LinkCounts};

fn wordlink(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wordlink"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run wordlink")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = wordlink(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    wordlink(dir, args).status.code().unwrap()
}

/// A small synthetic fixture in a fresh directory.
fn fixture(segments: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--out-dir", "fx", "--segments", segments, "--lexicon-size", "60"]);
    dir
}

const BITEXT: [&str; 4] = ["--src", "fx/src.txt", "--tgt", "fx/tgt.txt"];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(tail).copied().collect()
}

#[test]
fn train_writes_model_log_and_manifest() {
    let dir = fixture("150");
    let d = dir.path();
    ok(d, &with(&["train", "--method", "A", "--out", "m.tsv"], &BITEXT));
    let model = std::fs::read_to_string(d.join("m.tsv")).unwrap();
    assert!(model.starts_with("#method=A\t"));
    let log = std::fs::read_to_string(d.join("m.tsv.convergence.tsv")).unwrap();
    assert!(log.starts_with("iteration\tdelta"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("m.tsv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "train");
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["convergence"]["iterations"].as_u64().unwrap() >= 1);
    assert!(manifest["wall_time_secs"].as_f64().unwrap() >= 0.0);
}

#[test]
fn one_iteration_is_logged_once() {
    let dir = fixture("80");
    let d = dir.path();
    ok(d, &with(&["train", "--max-iters", "1", "--out", "m.tsv"], &BITEXT));
    let log = std::fs::read_to_string(d.join("m.tsv.convergence.tsv")).unwrap();
    assert_eq!(log.lines().count(), 2, "{log}");
    assert!(std::fs::read_to_string(d.join("m.tsv")).unwrap().contains("iterations=1\t"));
}

#[test]
fn exit_codes() {
    let dir = fixture("40");
    let d = dir.path();
    assert_eq!(code(d, &with(&["train", "--method", "C", "--out", "m.tsv"], &BITEXT)), 1);
    assert_eq!(code(d, &with(&["train", "--method", "Z", "--out", "m.tsv"], &BITEXT)), 1);
    assert_eq!(code(d, &["train", "--nonsense"]), 1);
    assert_eq!(code(d, &["train", "--src", "missing.txt", "--tgt", "fx/tgt.txt", "--out", "m.tsv"]), 2);
    ok(d, &with(&["train", "--out", "m.tsv"], &BITEXT));
    let eval = with(&["evaluate", "--model", "m.tsv", "--gold", "nope.tsv"], &BITEXT);
    assert_eq!(code(d, &eval), 2);
    std::fs::write(d.join("bad.tsv"), "not a model\n").unwrap();
    let eval = with(&["evaluate", "--model", "bad.tsv", "--gold", "fx/gold.tsv"], &BITEXT);
    assert_eq!(code(d, &eval), 2);
}

#[test]
fn perfect_model_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("s.txt"), "a b\nb a\n").unwrap();
    std::fs::write(d.join("t.txt"), "x y\ny x\n").unwrap();
    std::fs::write(
        d.join("gold.tsv"),
        "g\t1\t0\t0\ng\t1\t1\t1\ng\t2\t0\t0\ng\t2\t1\t1\n",
    )
    .unwrap();
    std::fs::write(
        d.join("m.tsv"),
        "#method=A\titerations=1\tconverged=true\tlinks_total=4\n\
         u\tv\ttrans_joint\ttrans_v_given_u\ttrans_u_given_v\tlike\n\
         a\tx\t0.5\t1\t1\t1\n\
         b\ty\t0.5\t1\t1\t1\n",
    )
    .unwrap();
    let args = ["evaluate", "--model", "m.tsv", "--src", "s.txt", "--tgt", "t.txt", "--gold", "gold.tsv"];
    let report = ok(d, &args);
    let last = report.lines().last().unwrap();
    assert_eq!(last, "averaged\tmean\t1\t1\t1");
}

#[test]
fn evaluate_matches_the_library() {
    let dir = fixture("150");
    let d = dir.path();
    ok(d, &with(&["train", "--method", "B", "--out", "m.tsv"], &BITEXT));
    let classes = ["--classes-src", "fx/classes.src.tsv", "--classes-tgt", "fx/classes.tgt.tsv"];
    let args = with(
        &with(&["evaluate", "--model", "m.tsv", "--gold", "fx/gold.tsv", "--task", "whole-dist", "--out", "r.tsv"], &BITEXT),
        &classes,
    );
    ok(d, &args);
    let cli = std::fs::read_to_string(d.join("r.tsv")).unwrap();
    assert!(d.join("r.tsv.manifest.json").exists());

    let model = read_model(&d.join("m.tsv")).unwrap().model;
    let bitext = load_bitext(&d.join("fx/src.txt"), &d.join("fx/tgt.txt")).unwrap();
    let gold = load_gold(&d.join("fx/gold.tsv")).unwrap();
    let lib = evaluate(&model, &bitext, &gold, Task::WholeDistribution, None).unwrap();
    assert_eq!(cli, lib.to_tsv());

    let open = with(&args, &["--open-class-only"]);
    ok(d, &open);
    let filtered = std::fs::read_to_string(d.join("r.tsv")).unwrap();
    assert_ne!(filtered, cli);
    assert_eq!(code(d, &with(&["evaluate", "--model", "m.tsv", "--gold", "fx/gold.tsv", "--open-class-only"], &BITEXT)), 1);
}

fn lexicon_lines(d: &Path, min_like: &str) -> Vec<String> {
    ok(d, &with(&["lexicon", "--model", "m.tsv", "--min-like", min_like], &BITEXT))
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn lexicon_thresholds_nest_and_plateaus_match() {
    let dir = fixture("150");
    let d = dir.path();
    ok(d, &with(&["train", "--out", "m.tsv"], &BITEXT));
    let all = lexicon_lines(d, "-inf");
    let mid = lexicon_lines(d, "-3");
    let top = lexicon_lines(d, "-1");
    assert!(top.len() <= mid.len() && mid.len() <= all.len());
    assert!(top.iter().all(|l| mid.contains(l)) && mid.iter().all(|l| all.contains(l)));
    assert!(lexicon_lines(d, "1e300").is_empty());

    ok(d, &with(&["lexicon", "--model", "m.tsv", "--out", "lex.tsv", "--plateaus", "p.tsv"], &BITEXT));
    let file = read_model(&d.join("m.tsv")).unwrap();
    let bitext = load_bitext(&d.join("fx/src.txt"), &d.join("fx/tgt.txt")).unwrap();
    let (bs, bt) = (bitext.src_vocab(), bitext.tgt_vocab());
    let (ms, mt) = (file.model.src_vocab(), file.model.tgt_vocab());
    let id = |from: &wordlink::Vocab, to: &wordlink::Vocab, w: wordlink::WordId| {
        if w.is_null() { w } else { to.get(from.word(w)).unwrap() }
    };
    let k = file.model.links_total();
    let links = LinkCounts::from_counts(
        file.model.joint_map().iter().map(|(&(u, v), &p)| ((id(ms, bs, u), id(mt, bt, v)), (p * k).round())),
    );
    let like = file.like.iter().map(|((u, v), x)| ((id(ms, bs, u), id(mt, bt, v)), x)).collect();
    let lex = extract_lexicon(&like, &links, &count_cooc(&bitext), bs, bt, f64::NEG_INFINITY);
    assert_eq!(std::fs::read_to_string(d.join("p.tsv")).unwrap(), lex.plateau_tsv());
    assert_eq!(std::fs::read_to_string(d.join("lex.tsv")).unwrap(), lex.to_tsv());
}

#[test]
fn analyze_commands() {
    let dir = fixture("150");
    let d = dir.path();
    let rare = |g: &str, p: &str| {
        ok(d, &["analyze", "multi-rare", "--gamma", g, "--p", p])
            .lines()
            .last()
            .unwrap()
            .rsplit(',')
            .next()
            .unwrap()
            .parse::<f64>()
            .unwrap()
    };
    assert_eq!(rare("2", "0.5"), 0.25);
    assert_eq!(rare("1", "0.7"), 0.0);
    assert_eq!(code(d, &["analyze", "multi-rare", "--gamma", "2", "--p", "1.5"]), 1);

    let csv = ok(d, &with(&["analyze", "link-ratio-histogram", "--min-cooc", "2"], &BITEXT));
    let total: usize = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    let bitext = load_bitext(&d.join("fx/src.txt"), &d.join("fx/tgt.txt")).unwrap();
    let pairs = count_cooc(&bitext)
        .iter()
        .filter(|((u, v), n)| !u.is_null() && !v.is_null() && *n >= 2.0)
        .count();
    assert_eq!(total, pairs);

    let s = ok(d, &["analyze", "singletons", "--tokens", "fx/src.txt", "--sizes", "100,500,1000", "--trials", "3"]);
    assert_eq!(s.lines().count(), 4);
    assert_eq!(code(d, &["analyze", "singletons", "--tokens", "fx/src.txt", "--sizes", "100000000"]), 1);
}

#[test]
fn config_file_supplies_flags_that_the_command_line_overrides() {
    let dir = fixture("80");
    let d = dir.path();
    std::fs::write(d.join("run.cfg"), "# training defaults\nmethod = B\nmax-iters = 2\n").unwrap();
    ok(d, &with(&["--config", "run.cfg", "train", "--out", "a.tsv"], &BITEXT));
    let a = std::fs::read_to_string(d.join("a.tsv")).unwrap();
    assert!(a.starts_with("#method=B\titerations=2\t") || a.starts_with("#method=B\titerations=1\t"), "{}", a.lines().next().unwrap());
    ok(d, &with(&["train", "--config", "run.cfg", "--out", "b.tsv", "--method", "A"], &BITEXT));
    assert!(std::fs::read_to_string(d.join("b.tsv")).unwrap().starts_with("#method=A\t"));
    std::fs::write(d.join("bad.cfg"), "no-such-flag = 1\n").unwrap();
    assert_eq!(code(d, &with(&["--config", "bad.cfg", "train", "--out", "c.tsv"], &BITEXT)), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = fixture("120");
    let d = dir.path();
    let outputs = |tag: &str| -> Vec<Vec<u8>> {
        let out = format!("{tag}.tsv");
        ok(d, &with(&["train", "--method", "B", "--out", &out, "--links-out", &format!("{tag}.links")], &BITEXT));
        [out.clone(), format!("{out}.convergence.tsv"), format!("{tag}.links")]
            .iter()
            .map(|p| std::fs::read(d.join(p)).unwrap())
            .collect()
    };
    assert_eq!(outputs("first"), outputs("second"));

    let other = tempfile::tempdir().unwrap();
    ok(other.path(), &["synth", "--out-dir", "fx", "--segments", "150", "--lexicon-size", "60"]);
    let files = ["src.txt", "tgt.txt", "gold.tsv", "classes.src.tsv"];
    for f in files {
        let p: PathBuf = ["fx", f].iter().collect();
        assert!(!std::fs::read(d.join(&p)).unwrap().is_empty());
    }
    let again = tempfile::tempdir().unwrap();
    ok(again.path(), &["synth", "--out-dir", "fx", "--segments", "150", "--lexicon-size", "60"]);
    for f in files {
        let p: PathBuf = ["fx", f].iter().collect();
        assert_eq!(std::fs::read(other.path().join(&p)).unwrap(), std::fs::read(again.path().join(&p)).unwrap());
    }
}
