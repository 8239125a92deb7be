use std::collections::BTreeMap;
use std::fmt;

use crate::corpus::{Bitext, GoldStandard, SegmentPair, Side, TokenLink, WordClass, WordClassMap};
use crate::error::{Error, Result};
use crate::estimation::{Conditional, TranslationModel};
use crate::vocab::{WordId, WordPair};

use super::metrics::{FuzzyLinkSet, Overlap, Scores};

/// A predicted or gold link token seen from one input side: the input token
/// at `pos` of segment `seg` paired with a partner word type (`None` is
/// NULL). Partner positions are not compared.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvalLink {
    pub seg: String,
    pub pos: usize,
    pub partner: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    SingleBest,
    WholeDistribution,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::SingleBest => "single-best",
            Task::WholeDistribution => "whole-dist",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single-best" => Ok(Task::SingleBest),
            "whole-dist" | "whole-distribution" => Ok(Task::WholeDistribution),
            _ => Err(Error::Usage(format!(
                "unknown task {s:?} (expected single-best or whole-dist)"
            ))),
        }
    }
}

/// Most probable partner of `given`; ties go to the smaller id, which is the
/// lexicographically smaller word, with NULL last.
fn argmax(dist: &[(WordId, f64)]) -> Option<WordId> {
    let mut best: Option<(WordId, f64)> = None;
    for &(w, p) in dist {
        if best.is_none_or(|(_, b)| p > b) {
            best = Some((w, p));
        }
    }
    best.map(|(w, _)| w)
}

/// Per-segment predictions keyed by `(input position, partner)`.
fn predict_segment<'m>(
    model: &'m TranslationModel,
    bitext: &Bitext,
    pair: &SegmentPair,
    input: Side,
    task: Task,
    keep_token: &dyn Fn(&str) -> bool,
) -> FuzzyLinkSet<(usize, Option<&'m str>)> {
    let cond = model.conditional(input);
    let in_vocab = model.vocab(input);
    let out_vocab = model.vocab(input.other());
    let partner = |w: WordId| (!w.is_null()).then(|| out_vocab.word(w));
    let mut set = FuzzyLinkSet::new();
    for (pos, word) in bitext.words(pair, input).into_iter().enumerate() {
        if !keep_token(word) {
            continue;
        }
        let dist = in_vocab.get(word).map_or(&[][..], |u| cond.dist(u));
        if dist.is_empty() {
            set.add((pos, None), 1.0);
            continue;
        }
        match task {
            Task::SingleBest => {
                let best = argmax(dist).expect("non-empty distribution");
                set.add((pos, partner(best)), 1.0);
            }
            Task::WholeDistribution => {
                for &(w, p) in dist {
                    set.add((pos, partner(w)), p);
                }
            }
        }
    }
    set
}

fn predict(
    model: &TranslationModel,
    bitext: &Bitext,
    input: Side,
    task: Task,
) -> FuzzyLinkSet<EvalLink> {
    let mut out = FuzzyLinkSet::new();
    for pair in bitext.pairs() {
        for ((pos, partner), w) in predict_segment(model, bitext, pair, input, task, &|_| true).iter() {
            out.add(
                EvalLink {
                    seg: pair.id.clone(),
                    pos: *pos,
                    partner: partner.map(str::to_string),
                },
                w,
            );
        }
    }
    out
}

/// One crisp link per input token, to its most probable translation. Words
/// the model has never seen link to NULL.
pub fn predict_single_best(
    model: &TranslationModel,
    bitext: &Bitext,
    input: Side,
) -> FuzzyLinkSet<EvalLink> {
    predict(model, bitext, input, Task::SingleBest)
}

/// Every translation with positive probability, weighted by that probability.
pub fn predict_whole_distribution(
    model: &TranslationModel,
    bitext: &Bitext,
    input: Side,
) -> FuzzyLinkSet<EvalLink> {
    predict(model, bitext, input, Task::WholeDistribution)
}

fn gold_segment<'b>(
    bitext: &'b Bitext,
    pair: &'b SegmentPair,
    links: &std::collections::BTreeSet<TokenLink>,
    input: Side,
    keep_link: &dyn Fn(&str, Option<&str>) -> bool,
) -> FuzzyLinkSet<(usize, Option<&'b str>)> {
    let in_words = bitext.words(pair, input);
    let out_words = bitext.words(pair, input.other());
    let mut set = FuzzyLinkSet::new();
    for link in links {
        let Some(pos) = link.pos(input) else { continue };
        let partner = link.pos(input.other()).map(|j| out_words[j]);
        if keep_link(in_words[pos], partner) {
            set.add((pos, partner), 1.0);
        }
    }
    set
}

/// Gold links seen from `input`: links whose input side is NULL are left
/// out here and counted in the other direction.
pub fn gold_link_set(
    gold: &GoldStandard,
    annotator: &str,
    bitext: &Bitext,
    input: Side,
) -> FuzzyLinkSet<EvalLink> {
    let mut out = FuzzyLinkSet::new();
    for (id, links) in gold.annotation(annotator).into_iter().flatten() {
        let Some(pair) = bitext.segment(id) else { continue };
        for ((pos, partner), w) in gold_segment(bitext, pair, links, input, &|_, _| true).iter() {
            out.add(
                EvalLink {
                    seg: id.clone(),
                    pos: *pos,
                    partner: partner.map(str::to_string),
                },
                w,
            );
        }
    }
    out
}

/// Word classes of the two languages, used to restrict evaluation to
/// content words.
#[derive(Clone, Copy)]
pub struct OpenClassFilter<'a> {
    pub src: &'a WordClassMap,
    pub tgt: &'a WordClassMap,
}

impl<'a> OpenClassFilter<'a> {
    fn map(&self, side: Side) -> &'a WordClassMap {
        match side {
            Side::Src => self.src,
            Side::Tgt => self.tgt,
        }
    }

    fn is_open(&self, side: Side, word: Option<&str>) -> bool {
        matches!(self.map(side).class_of(word), WordClass::C | WordClass::Nu)
    }

    /// Keeps a link only if its source word is a content word and its target
    /// is a content word or NULL (or the other way round).
    pub fn keeps_link(&self, src: Option<&str>, tgt: Option<&str>) -> bool {
        (src.is_some() || tgt.is_some()) && self.is_open(Side::Src, src) && self.is_open(Side::Tgt, tgt)
    }

    /// Drops closed-class entries from a link set keyed by `(source word,
    /// target word)`.
    pub fn filter_pairs<K: Ord>(
        &self,
        set: &FuzzyLinkSet<K>,
        words: impl Fn(&K) -> (Option<&str>, Option<&str>),
    ) -> FuzzyLinkSet<K>
    where
        K: Clone,
    {
        set.iter()
            .filter(|(k, _)| {
                let (s, t) = words(k);
                self.keeps_link(s, t)
            })
            .map(|(k, w)| (k.clone(), w))
            .collect()
    }

    /// Removes every entry involving a closed-class word and renormalizes
    /// both conditionals (and the joint table, if any).
    pub fn filter_model(&self, model: &TranslationModel) -> TranslationModel {
        let src = model.src_vocab();
        let tgt = model.tgt_vocab();
        let keep = |u: WordId, v: WordId| {
            let su = (!u.is_null()).then(|| src.word(u));
            let tv = (!v.is_null()).then(|| tgt.word(v));
            self.keeps_link(su, tv)
        };
        if model.has_joint() {
            let kept: BTreeMap<WordPair, f64> = model
                .joint_map()
                .iter()
                .filter(|(&(u, v), _)| keep(u, v))
                .map(|(&k, &p)| (k, p))
                .collect();
            let total: f64 = kept.values().sum();
            let joint = kept.into_iter().map(|(k, p)| (k, p / total)).collect();
            return TranslationModel::from_joint(
                model.method,
                model.iterations,
                src.clone(),
                tgt.clone(),
                joint,
                model.links_total(),
            );
        }
        let forward = Conditional::from_weights(
            model
                .conditional(Side::Src)
                .iter()
                .filter(|&(u, v, _)| keep(u, v)),
        );
        let backward = Conditional::from_weights(
            model
                .conditional(Side::Tgt)
                .iter()
                .filter(|&(v, u, _)| keep(u, v)),
        );
        TranslationModel::from_conditionals(
            model.method,
            model.iterations,
            src.clone(),
            tgt.clone(),
            forward,
            backward,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionReport {
    pub input: Side,
    pub per_annotator: BTreeMap<String, Scores>,
    pub mean: Scores,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub task: Task,
    pub open_class_only: bool,
    pub segments: usize,
    pub directions: Vec<DirectionReport>,
    /// Per annotator, averaged over the two directions.
    pub per_annotator: BTreeMap<String, Scores>,
    /// Mean over annotators of the direction-averaged scores.
    pub mean: Scores,
}

impl EvalReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("direction\tannotator\tprecision\trecall\tdice\n");
        let mut row = |dir: &str, who: &str, s: &Scores| {
            out.push_str(&format!(
                "{dir}\t{who}\t{}\t{}\t{}\n",
                s.precision, s.recall, s.dice
            ));
        };
        for d in &self.directions {
            let dir = match d.input {
                Side::Src => "src->tgt",
                Side::Tgt => "tgt->src",
            };
            for (who, s) in &d.per_annotator {
                row(dir, who, s);
            }
            row(dir, "mean", &d.mean);
        }
        for (who, s) in &self.per_annotator {
            row("averaged", who, s);
        }
        row("averaged", "mean", &self.mean);
        out
    }
}

/// Scores `model` against every annotation of `gold`, in both directions.
pub fn evaluate(
    model: &TranslationModel,
    bitext: &Bitext,
    gold: &GoldStandard,
    task: Task,
    open_class: Option<OpenClassFilter<'_>>,
) -> Result<EvalReport> {
    let filtered;
    let model = match open_class {
        Some(f) => {
            filtered = f.filter_model(model);
            &filtered
        }
        None => model,
    };
    let segments: Vec<&SegmentPair> = gold
        .segment_ids()
        .into_iter()
        .filter_map(|id| bitext.segment(id))
        .collect();
    if segments.is_empty() {
        return Err(Error::NoOverlap);
    }

    let mut directions = Vec::new();
    for input in [Side::Src, Side::Tgt] {
        let keep_token = |w: &str| open_class.is_none_or(|f| f.is_open(input, Some(w)));
        let keep_link = |w: &str, partner: Option<&str>| {
            open_class.is_none_or(|f| match input {
                Side::Src => f.keeps_link(Some(w), partner),
                Side::Tgt => f.keeps_link(partner, Some(w)),
            })
        };
        let predictions: Vec<_> = segments
            .iter()
            .map(|pair| predict_segment(model, bitext, pair, input, task, &keep_token))
            .collect();
        let mut per_annotator = BTreeMap::new();
        for who in gold.annotators() {
            let annotation = gold.annotation(who).expect("listed annotator");
            let mut overlap = Overlap::default();
            for (pair, predicted) in segments.iter().zip(&predictions) {
                let Some(links) = annotation.get(&pair.id) else { continue };
                let gold_set = gold_segment(bitext, pair, links, input, &keep_link);
                overlap.add(Overlap::between(predicted, &gold_set));
            }
            per_annotator.insert(who.to_string(), overlap.scores()?);
        }
        let mean = Scores::mean(per_annotator.values());
        directions.push(DirectionReport {
            input,
            per_annotator,
            mean,
        });
    }

    let per_annotator: BTreeMap<String, Scores> = directions[0]
        .per_annotator
        .keys()
        .map(|who| {
            let s = Scores::mean(directions.iter().map(|d| &d.per_annotator[who]));
            (who.clone(), s)
        })
        .collect();
    let mean = Scores::mean(per_annotator.values());
    Ok(EvalReport {
        task,
        open_class_only: open_class.is_some(),
        segments: segments.len(),
        directions,
        per_annotator,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::Method;
    use crate::vocab::Vocab;
    use std::sync::Arc;

    fn vocab(words: &[&str]) -> Arc<Vocab> {
        Arc::new(Vocab::from_counts(
            words.iter().map(|w| (w.to_string(), 1)).collect(),
        ))
    }

    fn bitext(segs: &[(&str, &str)]) -> Bitext {
        Bitext::from_segments(segs.iter().enumerate().map(|(i, (s, t))| {
            (
                (i + 1).to_string(),
                s.split_whitespace().collect::<Vec<_>>(),
                t.split_whitespace().collect::<Vec<_>>(),
            )
        }))
        .unwrap()
    }

    /// Source conditional `a -> {x: px, y: py, NULL: pn}` over vocabularies
    /// {a, b} and {x, y}.
    fn model(px: f64, py: f64, pn: f64) -> TranslationModel {
        let src = vocab(&["a", "b"]);
        let tgt = vocab(&["x", "y"]);
        let (a, x, y) = (WordId::new(0), WordId::new(0), WordId::new(1));
        let forward = Conditional::from_weights([(a, x, px), (a, y, py), (a, WordId::NULL, pn)]);
        let backward = Conditional::from_weights([(x, a, 1.0), (y, a, 1.0)]);
        TranslationModel::from_conditionals(Method::Model1, 1, src, tgt, forward, backward)
    }

    fn partners(set: &FuzzyLinkSet<EvalLink>) -> Vec<(Option<String>, f64)> {
        set.iter().map(|(k, w)| (k.partner.clone(), w)).collect()
    }

    #[test]
    fn single_best_is_the_argmax() {
        let b = bitext(&[("a", "x")]);
        let p = predict_single_best(&model(0.9, 0.1, 0.0), &b, Side::Src);
        assert_eq!(partners(&p), [(Some("x".into()), 1.0)]);
    }

    #[test]
    fn null_can_be_the_argmax() {
        let b = bitext(&[("a", "x")]);
        let p = predict_single_best(&model(0.0, 0.0, 1.0), &b, Side::Src);
        assert_eq!(partners(&p), [(None, 1.0)]);
    }

    #[test]
    fn ties_go_to_the_smaller_word() {
        let b = bitext(&[("a", "x")]);
        let p = predict_single_best(&model(0.5, 0.5, 0.0), &b, Side::Src);
        assert_eq!(partners(&p), [(Some("x".into()), 1.0)]);
    }

    #[test]
    fn unseen_words_link_to_null() {
        let b = bitext(&[("zzz", "x")]);
        let p = predict_single_best(&model(0.9, 0.1, 0.0), &b, Side::Src);
        assert_eq!(partners(&p), [(None, 1.0)]);
    }

    #[test]
    fn whole_distribution_copies_the_conditional() {
        let b = bitext(&[("a", "x")]);
        let p = predict_whole_distribution(&model(0.7, 0.3, 0.0), &b, Side::Src);
        let got = partners(&p);
        assert_eq!(got.len(), 2);
        assert!((got[0].1 - 0.7).abs() < 1e-15 && (got[1].1 - 0.3).abs() < 1e-15);
        assert!((p.mass() - 1.0).abs() < 1e-12);

        let peaked = model(1.0, 0.0, 0.0);
        assert_eq!(
            predict_whole_distribution(&peaked, &b, Side::Src),
            predict_single_best(&peaked, &b, Side::Src)
        );
    }

    #[test]
    fn closed_class_entries_are_removed_and_renormalized() {
        let mut tgt = WordClassMap::new();
        tgt.insert("y", WordClass::F);
        let src = WordClassMap::new();
        let f = OpenClassFilter { src: &src, tgt: &tgt };
        let m = f.filter_model(&model(0.6, 0.4, 0.0));
        let (a, x, y) = (WordId::new(0), WordId::new(0), WordId::new(1));
        assert_eq!(m.tgt_given_src(a, x), 1.0);
        assert_eq!(m.tgt_given_src(a, y), 0.0);

        let open = WordClassMap::new();
        let all_open = OpenClassFilter { src: &open, tgt: &open };
        let original = model(0.6, 0.4, 0.0);
        let kept = all_open.filter_model(&original);
        assert_eq!(kept.conditional(Side::Src), original.conditional(Side::Src));

        let mut fr = WordClassMap::new();
        fr.insert("le", WordClass::F);
        let mut en = WordClassMap::new();
        en.insert("the", WordClass::F);
        let f = OpenClassFilter { src: &en, tgt: &fr };
        assert!(!f.keeps_link(Some("the"), Some("le")));
        assert!(f.keeps_link(Some("house"), None));
    }

    #[test]
    fn perfect_model_scores_one() {
        let b = bitext(&[("a b", "x y"), ("b", "y")]);
        let src = vocab(&["a", "b"]);
        let tgt = vocab(&["x", "y"]);
        let joint = [
            ((WordId::new(0), WordId::new(0)), 0.5),
            ((WordId::new(1), WordId::new(1)), 0.5),
        ]
        .into();
        let m = TranslationModel::from_joint(Method::A, 1, src, tgt, joint, 2.0);
        let mut gold = GoldStandard::default();
        for who in ["g1", "g2"] {
            gold.insert(who, "1", TokenLink { src: Some(0), tgt: Some(0) });
            gold.insert(who, "1", TokenLink { src: Some(1), tgt: Some(1) });
            gold.insert(who, "2", TokenLink { src: Some(0), tgt: Some(0) });
        }
        let r = evaluate(&m, &b, &gold, Task::SingleBest, None).unwrap();
        assert_eq!(r.mean.dice, 1.0);
        assert_eq!(r.per_annotator.len(), 2);
        for d in &r.directions {
            for s in d.per_annotator.values() {
                let h = 2.0 * s.precision * s.recall / (s.precision + s.recall);
                assert!((s.dice - h).abs() < 1e-12);
            }
        }

        let mut elsewhere = GoldStandard::default();
        elsewhere.insert("g1", "99", TokenLink { src: Some(0), tgt: None });
        assert!(matches!(
            evaluate(&m, &b, &elsewhere, Task::SingleBest, None),
            Err(Error::NoOverlap)
        ));
    }
}
