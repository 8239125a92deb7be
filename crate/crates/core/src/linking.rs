//! Competitive linking: greedy, winner-take-all token linking under the
//! one-to-one assumption, plus an exhaustive search used to check it.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::cooc::CoocTable;
use crate::corpus::{Bitext, SegmentPair, TokenLink};
use crate::error::{Error, Result};
use crate::estimation::TranslationModel;
use crate::vocab::{Vocab, WordId, WordPair};

/// Current `like(u,v)` scores. Pairs that are absent cannot be linked.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LikelihoodTable {
    values: BTreeMap<WordPair, f64>,
}

impl LikelihoodTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, u: WordId, v: WordId, like: f64) {
        assert!(like.is_finite(), "like({u:?},{v:?}) = {like}");
        self.values.insert((u, v), like);
    }

    pub fn remove(&mut self, u: WordId, v: WordId) -> Option<f64> {
        self.values.remove(&(u, v))
    }

    pub fn get(&self, u: WordId, v: WordId) -> Option<f64> {
        self.values.get(&(u, v)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (WordPair, f64)> + '_ {
        self.values.iter().map(|(&k, &x)| (k, x))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        self.iter().map(|(k, x)| (k, x * factor)).collect()
    }
}

impl FromIterator<(WordPair, f64)> for LikelihoodTable {
    fn from_iter<I: IntoIterator<Item = (WordPair, f64)>>(iter: I) -> Self {
        let mut t = LikelihoodTable::new();
        for ((u, v), x) in iter {
            t.insert(u, v, x);
        }
        t
    }
}

/// Type-level link counts `links(u,v)`, NULL links included.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinkCounts {
    counts: BTreeMap<WordPair, f64>,
    total: f64,
}

impl LinkCounts {
    pub fn from_counts(counts: impl IntoIterator<Item = (WordPair, f64)>) -> Self {
        let counts: BTreeMap<WordPair, f64> =
            counts.into_iter().filter(|&(_, c)| c > 0.0).collect();
        let total = counts.values().sum();
        LinkCounts { counts, total }
    }

    pub fn get(&self, u: WordId, v: WordId) -> f64 {
        self.counts.get(&(u, v)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (WordPair, f64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    /// K, the total number of links.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Fails on the first pair linked more often than it co-occurs.
    pub fn check_against(&self, cooc: &CoocTable, src: &Vocab, tgt: &Vocab) -> Result<()> {
        for ((u, v), links) in self.iter() {
            let c = cooc.get(u, v);
            if links > c {
                return Err(Error::LinksExceedCooc {
                    u: src.word(u).to_string(),
                    v: tgt.word(v).to_string(),
                    links,
                    cooc: c,
                });
            }
        }
        Ok(())
    }
}

/// One-to-one mapping of the tokens of a segment pair, NULL-padded so that
/// every token appears exactly once.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    links: Vec<TokenLink>,
}

impl Assignment {
    pub fn new(mut links: Vec<TokenLink>) -> Self {
        links.sort_unstable();
        Assignment { links }
    }

    pub fn links(&self) -> &[TokenLink] {
        &self.links
    }

    /// Number of concepts b, i.e. links including those to NULL.
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Word-type pair of every link.
    pub fn word_pairs<'a>(
        &'a self,
        pair: &'a SegmentPair,
    ) -> impl Iterator<Item = WordPair> + 'a {
        self.links.iter().map(move |l| {
            (
                l.src.map_or(WordId::NULL, |i| pair.src[i]),
                l.tgt.map_or(WordId::NULL, |j| pair.tgt[j]),
            )
        })
    }

    /// Sum of `like` over the links. Missing NULL entries contribute nothing;
    /// a missing word-word entry makes the assignment infeasible (`-inf`).
    pub fn score(&self, pair: &SegmentPair, like: &LikelihoodTable) -> f64 {
        self.word_pairs(pair)
            .map(|(u, v)| match like.get(u, v) {
                Some(x) => x,
                None if u.is_null() || v.is_null() => 0.0,
                None => f64::NEG_INFINITY,
            })
            .sum()
    }

    /// True when no position occurs twice and every token is covered.
    pub fn is_complete_one_to_one(&self, pair: &SegmentPair) -> bool {
        let mut src = vec![0usize; pair.src.len()];
        let mut tgt = vec![0usize; pair.tgt.len()];
        for l in &self.links {
            if l.src.is_none() && l.tgt.is_none() {
                return false;
            }
            if let Some(i) = l.src {
                src[i] += 1;
            }
            if let Some(j) = l.tgt {
                tgt[j] += 1;
            }
        }
        src.iter().chain(&tgt).all(|&n| n == 1)
    }

    /// Link dump lines `segId TAB srcPos TAB tgtPos`.
    pub fn to_tsv(&self, seg_id: &str) -> String {
        self.links
            .iter()
            .map(|l| {
                format!(
                    "{seg_id}\t{}\t{}\n",
                    crate::corpus::render_pos(l.src),
                    crate::corpus::render_pos(l.tgt)
                )
            })
            .collect()
    }
}

fn distinct(tokens: &[WordId]) -> Vec<WordId> {
    let mut types = tokens.to_vec();
    types.sort_unstable();
    types.dedup();
    types
}

/// Competitive linking on one segment pair.
///
/// Candidate type pairs are visited by descending `like`, ties broken by
/// ascending `(u, v)` with NULL after every word. Each candidate links all
/// still-unlinked co-occurring tokens, leftmost first. Tokens left over at
/// the end are linked to NULL.
pub fn link_segment(pair: &SegmentPair, like: &LikelihoodTable) -> Assignment {
    let src_types = distinct(&pair.src);
    let tgt_types = distinct(&pair.tgt);
    let mut candidates: Vec<(f64, WordPair)> = Vec::new();
    for &u in src_types.iter().chain([&WordId::NULL]) {
        for &v in tgt_types.iter().chain([&WordId::NULL]) {
            if u.is_null() && v.is_null() {
                continue;
            }
            if let Some(x) = like.get(u, v) {
                candidates.push((x, (u, v)));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut src_linked = vec![false; pair.src.len()];
    let mut tgt_linked = vec![false; pair.tgt.len()];
    let mut links = Vec::with_capacity(pair.src.len().max(pair.tgt.len()));
    for (_, (u, v)) in candidates {
        if u.is_null() {
            for (j, &w) in pair.tgt.iter().enumerate() {
                if w == v && !tgt_linked[j] {
                    tgt_linked[j] = true;
                    links.push(TokenLink {
                        src: None,
                        tgt: Some(j),
                    });
                }
            }
        } else if v.is_null() {
            for (i, &w) in pair.src.iter().enumerate() {
                if w == u && !src_linked[i] {
                    src_linked[i] = true;
                    links.push(TokenLink {
                        src: Some(i),
                        tgt: None,
                    });
                }
            }
        } else {
            let free_src: Vec<usize> = (0..pair.src.len())
                .filter(|&i| pair.src[i] == u && !src_linked[i])
                .collect();
            let free_tgt: Vec<usize> = (0..pair.tgt.len())
                .filter(|&j| pair.tgt[j] == v && !tgt_linked[j])
                .collect();
            for (i, j) in free_src.into_iter().zip(free_tgt) {
                src_linked[i] = true;
                tgt_linked[j] = true;
                links.push(TokenLink {
                    src: Some(i),
                    tgt: Some(j),
                });
            }
        }
    }
    for (i, linked) in src_linked.iter().enumerate() {
        if !linked {
            links.push(TokenLink {
                src: Some(i),
                tgt: None,
            });
        }
    }
    for (j, linked) in tgt_linked.iter().enumerate() {
        if !linked {
            links.push(TokenLink {
                src: None,
                tgt: Some(j),
            });
        }
    }
    Assignment::new(links)
}

/// Competitive linking on every segment; returns the assignments in
/// segment order.
pub fn link_all(bitext: &Bitext, like: &LikelihoodTable) -> Vec<Assignment> {
    bitext
        .pairs()
        .par_iter()
        .map(|pair| link_segment(pair, like))
        .collect()
}

/// Type-level link counts from competitive linking over the whole bitext.
pub fn link_bitext(bitext: &Bitext, like: &LikelihoodTable) -> LinkCounts {
    count_links(bitext, &link_all(bitext, like))
}

/// Accumulates assignments into type-level counts, in segment order.
pub fn count_links(bitext: &Bitext, assignments: &[Assignment]) -> LinkCounts {
    let mut counts: BTreeMap<WordPair, f64> = BTreeMap::new();
    for (pair, a) in bitext.pairs().iter().zip(assignments) {
        for key in a.word_pairs(pair) {
            *counts.entry(key).or_default() += 1.0;
        }
    }
    LinkCounts::from_counts(counts)
}

/// Serial reference for [`link_bitext`].
pub fn link_bitext_serial(bitext: &Bitext, like: &LikelihoodTable) -> LinkCounts {
    let assignments: Vec<Assignment> = bitext
        .pairs()
        .iter()
        .map(|pair| link_segment(pair, like))
        .collect();
    count_links(bitext, &assignments)
}

/// Largest combined segment length the exhaustive search accepts.
pub const ORACLE_MAX_TOKENS: usize = 12;

/// Best assignment by exhaustive enumeration, maximizing the summed `like`
/// of its links (the `log Z(b) b!` term held constant).
pub fn viterbi_oracle(pair: &SegmentPair, like: &LikelihoodTable) -> Result<Assignment> {
    let n_tokens = pair.src.len() + pair.tgt.len();
    if n_tokens > ORACLE_MAX_TOKENS {
        return Err(Error::OracleTooLarge(n_tokens));
    }
    let word = |i: usize, j: usize| like.get(pair.src[i], pair.tgt[j]);
    let src_null: Vec<f64> = pair
        .src
        .iter()
        .map(|&u| like.get(u, WordId::NULL).unwrap_or(0.0))
        .collect();
    let tgt_null: Vec<f64> = pair
        .tgt
        .iter()
        .map(|&v| like.get(WordId::NULL, v).unwrap_or(0.0))
        .collect();

    struct Search<'a, F: Fn(usize, usize) -> Option<f64>> {
        word: F,
        src_null: &'a [f64],
        tgt_null: &'a [f64],
        choice: Vec<Option<usize>>,
        best: f64,
        best_choice: Vec<Option<usize>>,
    }

    impl<F: Fn(usize, usize) -> Option<f64>> Search<'_, F> {
        fn run(&mut self, i: usize, used: u32, score: f64) {
            if i == self.src_null.len() {
                let rest: f64 = (0..self.tgt_null.len())
                    .filter(|&j| used & (1 << j) == 0)
                    .map(|j| self.tgt_null[j])
                    .sum();
                if score + rest > self.best {
                    self.best = score + rest;
                    self.best_choice.clone_from(&self.choice);
                }
                return;
            }
            self.choice[i] = None;
            self.run(i + 1, used, score + self.src_null[i]);
            for j in 0..self.tgt_null.len() {
                if used & (1 << j) != 0 {
                    continue;
                }
                if let Some(x) = (self.word)(i, j) {
                    self.choice[i] = Some(j);
                    self.run(i + 1, used | (1 << j), score + x);
                }
            }
            self.choice[i] = None;
        }
    }

    let mut search = Search {
        word,
        src_null: &src_null,
        tgt_null: &tgt_null,
        choice: vec![None; pair.src.len()],
        best: f64::NEG_INFINITY,
        best_choice: vec![None; pair.src.len()],
    };
    search.run(0, 0, 0.0);

    let mut links: Vec<TokenLink> = search
        .best_choice
        .iter()
        .enumerate()
        .map(|(i, &j)| TokenLink { src: Some(i), tgt: j })
        .collect();
    let mut used = vec![false; pair.tgt.len()];
    for j in search.best_choice.iter().flatten() {
        used[*j] = true;
    }
    links.extend(
        used.iter()
            .enumerate()
            .filter(|(_, &u)| !u)
            .map(|(j, _)| TokenLink {
                src: None,
                tgt: Some(j),
            }),
    );
    Ok(Assignment::new(links))
}

/// Log-probability of generating a segment pair through an assignment, or
/// the factor that makes it impossible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AssignmentLogProb {
    Finite(f64),
    /// `trans` of this link is zero.
    ZeroPair(TokenLink),
    /// `Z(b)` is zero or missing for this b.
    ZeroSize(usize),
}

impl AssignmentLogProb {
    /// The log-probability, negative infinity when impossible.
    pub fn value(&self) -> f64 {
        match self {
            AssignmentLogProb::Finite(x) => *x,
            _ => f64::NEG_INFINITY,
        }
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `log Z(b) + log b! + Σ log trans(u,v)` over the links of `assign`.
pub fn assignment_log_prob(
    pair: &SegmentPair,
    assign: &Assignment,
    trans: &TranslationModel,
    size_dist: &BTreeMap<usize, f64>,
) -> AssignmentLogProb {
    let b = assign.len();
    let z = size_dist.get(&b).copied().unwrap_or(0.0);
    if z <= 0.0 {
        return AssignmentLogProb::ZeroSize(b);
    }
    let mut total = z.ln() + ln_factorial(b);
    for (link, (u, v)) in assign.links().iter().zip(assign.word_pairs(pair)) {
        let p = trans.joint(u, v);
        if p <= 0.0 {
            return AssignmentLogProb::ZeroPair(*link);
        }
        total += p.ln();
    }
    AssignmentLogProb::Finite(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(src: &[u32], tgt: &[u32]) -> SegmentPair {
        SegmentPair {
            id: "1".into(),
            src: src.iter().map(|&i| WordId::new(i as usize)).collect(),
            tgt: tgt.iter().map(|&i| WordId::new(i as usize)).collect(),
        }
    }

    fn w(i: usize) -> WordId {
        WordId::new(i)
    }

    fn link(src: Option<usize>, tgt: Option<usize>) -> TokenLink {
        TokenLink { src, tgt }
    }

    #[test]
    fn indirect_association_is_blocked() {
        // u1=0, u2=1; v1=0, v2=1.
        let like: LikelihoodTable = [
            ((w(0), w(0)), 0.05),
            ((w(0), w(1)), 0.02),
            ((w(1), w(1)), 0.01),
        ]
        .into_iter()
        .collect();
        let a = link_segment(&seg(&[0, 1], &[0, 1]), &like);
        assert_eq!(
            a.links(),
            &[link(Some(0), Some(0)), link(Some(1), Some(1))]
        );
    }

    #[test]
    fn uncontested_pair() {
        let like: LikelihoodTable = [
            ((w(0), w(0)), 3.0),
            ((w(0), WordId::NULL), 1e-6),
            ((WordId::NULL, w(0)), 1e-6),
        ]
        .into_iter()
        .collect();
        let a = link_segment(&seg(&[0], &[0]), &like);
        assert_eq!(a.links(), &[link(Some(0), Some(0))]);
    }

    #[test]
    fn ties_go_to_the_lexicographically_smaller_pair() {
        // U=[a], V=[x,y] with x < y.
        let like: LikelihoodTable = [((w(0), w(0)), 1.0), ((w(0), w(1)), 1.0)]
            .into_iter()
            .collect();
        let a = link_segment(&seg(&[0], &[0, 1]), &like);
        assert_eq!(
            a.links(),
            &[link(None, Some(1)), link(Some(0), Some(0))]
        );
    }

    #[test]
    fn null_sorts_after_words_on_ties() {
        let like: LikelihoodTable = [((w(0), WordId::NULL), 1.0), ((w(0), w(0)), 1.0)]
            .into_iter()
            .collect();
        let a = link_segment(&seg(&[0], &[0]), &like);
        assert_eq!(a.links(), &[link(Some(0), Some(0))]);
    }

    #[test]
    fn repeated_types_pair_leftmost_first() {
        let like: LikelihoodTable = [((w(0), w(0)), 1.0)].into_iter().collect();
        let a = link_segment(&seg(&[0, 1, 0], &[2, 0]), &like);
        assert_eq!(
            a.links(),
            &[
                link(None, Some(0)),
                link(Some(0), Some(1)),
                link(Some(1), None),
                link(Some(2), None),
            ]
        );
    }

    #[test]
    fn null_link_takes_all_remaining_tokens_of_the_type() {
        let like: LikelihoodTable = [((w(0), WordId::NULL), 5.0), ((w(0), w(0)), 1.0)]
            .into_iter()
            .collect();
        let a = link_segment(&seg(&[0, 0], &[0]), &like);
        assert_eq!(
            a.links(),
            &[link(None, Some(0)), link(Some(0), None), link(Some(1), None)]
        );
    }

    #[test]
    fn empty_table_links_everything_to_null() {
        let a = link_segment(&seg(&[0, 1], &[0]), &LikelihoodTable::new());
        assert_eq!(a.len(), 3);
        assert!(a.links().iter().all(|l| l.src.is_none() || l.tgt.is_none()));
    }

    #[test]
    fn oracle_single_token() {
        let like: LikelihoodTable = [((w(0), w(0)), 1.0)].into_iter().collect();
        let a = viterbi_oracle(&seg(&[0], &[0]), &like).unwrap();
        assert_eq!(a.links(), &[link(Some(0), Some(0))]);
    }

    #[test]
    fn oracle_beats_greedy_on_crafted_instance() {
        // a=0, b=1; x=0, y=1.
        let like: LikelihoodTable = [
            ((w(0), w(0)), 5.0),
            ((w(0), w(1)), 4.0),
            ((w(1), w(0)), 4.0),
            ((w(1), w(1)), 0.1),
        ]
        .into_iter()
        .collect();
        let s = seg(&[0, 1], &[0, 1]);
        let oracle = viterbi_oracle(&s, &like).unwrap();
        let greedy = link_segment(&s, &like);
        assert_eq!(
            oracle.links(),
            &[link(Some(0), Some(1)), link(Some(1), Some(0))]
        );
        assert_eq!(
            greedy.links(),
            &[link(Some(0), Some(0)), link(Some(1), Some(1))]
        );
        assert!((oracle.score(&s, &like) - 8.0).abs() < 1e-12);
        assert!((greedy.score(&s, &like) - 5.1).abs() < 1e-12);
    }

    #[test]
    fn oracle_agrees_when_greedy_is_optimal() {
        let like: LikelihoodTable = [
            ((w(0), w(0)), 5.0),
            ((w(0), w(1)), 1.0),
            ((w(1), w(0)), 1.0),
            ((w(1), w(1)), 4.0),
        ]
        .into_iter()
        .collect();
        let s = seg(&[0, 1], &[0, 1]);
        assert_eq!(
            viterbi_oracle(&s, &like).unwrap(),
            link_segment(&s, &like)
        );
    }

    #[test]
    fn oracle_refuses_large_segments() {
        let s = seg(&[0; 7], &[0; 6]);
        assert!(matches!(
            viterbi_oracle(&s, &LikelihoodTable::new()),
            Err(Error::OracleTooLarge(13))
        ));
    }

    #[test]
    fn scaling_likelihoods_does_not_change_links() {
        let like: LikelihoodTable = [
            ((w(0), w(0)), 2.0),
            ((w(0), w(1)), 3.0),
            ((w(1), w(0)), 1.5),
            ((w(1), WordId::NULL), 0.5),
        ]
        .into_iter()
        .collect();
        let s = seg(&[0, 1], &[0, 1]);
        assert_eq!(link_segment(&s, &like), link_segment(&s, &like.scaled(7.5)));
    }

    #[test]
    fn dump_format() {
        let a = Assignment::new(vec![link(Some(0), Some(1)), link(None, Some(0))]);
        assert_eq!(a.to_tsv("3"), "3\t-\t0\n3\t0\t1\n");
    }
}
