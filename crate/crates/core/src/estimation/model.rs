use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::corpus::Side;
use crate::error::{Error, Result};
use crate::linking::{LikelihoodTable, LinkCounts};
use crate::vocab::{Vocab, WordId, WordPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Competitive linking, parameters re-estimated as `log trans`.
    A,
    /// Method A plus the two-binomial noise model.
    B,
    /// Method B with noise parameters conditioned on word-class pairs.
    C,
    /// EM-trained baseline, one conditional model per direction.
    Model1,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::A => "A",
            Method::B => "B",
            Method::C => "C",
            Method::Model1 => "model1",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Method::A),
            "b" => Ok(Method::B),
            "c" => Ok(Method::C),
            "model1" | "1" => Ok(Method::Model1),
            _ => Err(format!("unknown method {s:?} (expected A, B, C or model1)")),
        }
    }
}

/// A family of conditional distributions `trans(partner | given)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Conditional {
    dists: BTreeMap<WordId, Vec<(WordId, f64)>>,
}

impl Conditional {
    /// Normalizes non-negative weights per conditioning word. Conditioning
    /// words whose weights sum to zero are dropped.
    pub fn from_weights(weights: impl IntoIterator<Item = (WordId, WordId, f64)>) -> Self {
        let mut raw: BTreeMap<WordId, BTreeMap<WordId, f64>> = BTreeMap::new();
        for (given, partner, w) in weights {
            if w > 0.0 {
                *raw.entry(given).or_default().entry(partner).or_default() += w;
            }
        }
        let dists = raw
            .into_iter()
            .filter_map(|(given, partners)| {
                let sum: f64 = partners.values().sum();
                (sum > 0.0).then(|| {
                    let dist = partners.into_iter().map(|(p, w)| (p, w / sum)).collect();
                    (given, dist)
                })
            })
            .collect();
        Conditional { dists }
    }

    /// Takes probabilities as given, without renormalizing. Non-positive
    /// entries are dropped.
    pub fn from_probabilities(entries: impl IntoIterator<Item = (WordId, WordId, f64)>) -> Self {
        let mut dists: BTreeMap<WordId, Vec<(WordId, f64)>> = BTreeMap::new();
        for (given, partner, p) in entries {
            if p > 0.0 {
                dists.entry(given).or_default().push((partner, p));
            }
        }
        for d in dists.values_mut() {
            d.sort_by_key(|&(w, _)| w);
            d.dedup_by_key(|&mut (w, _)| w);
        }
        Conditional { dists }
    }

    pub fn get(&self, given: WordId, partner: WordId) -> f64 {
        self.dists
            .get(&given)
            .and_then(|d| {
                d.binary_search_by_key(&partner, |&(p, _)| p)
                    .ok()
                    .map(|i| d[i].1)
            })
            .unwrap_or(0.0)
    }

    /// Distribution for `given`, sorted by partner id. Empty if unknown.
    pub fn dist(&self, given: WordId) -> &[(WordId, f64)] {
        self.dists.get(&given).map_or(&[], Vec::as_slice)
    }

    pub fn givens(&self) -> impl Iterator<Item = WordId> + '_ {
        self.dists.keys().copied()
    }

    /// `(given, partner, probability)` triples.
    pub fn iter(&self) -> impl Iterator<Item = (WordId, WordId, f64)> + '_ {
        self.dists
            .iter()
            .flat_map(|(&g, d)| d.iter().map(move |&(p, x)| (g, p, x)))
    }

    pub fn is_empty(&self) -> bool {
        self.dists.is_empty()
    }

    /// Flattened `(given, partner) -> probability` map.
    pub fn to_map(&self) -> BTreeMap<WordPair, f64> {
        self.iter().map(|(g, p, x)| ((g, p), x)).collect()
    }
}

/// A word-to-word translation model over one source and one target
/// vocabulary.
///
/// Methods A, B and C produce a joint distribution `trans(u,v)` from which
/// both conditionals are derived. Model 1 has no joint distribution; its two
/// conditionals are trained independently.
#[derive(Clone, Debug)]
pub struct TranslationModel {
    pub method: Method,
    pub iterations: usize,
    src_vocab: Arc<Vocab>,
    tgt_vocab: Arc<Vocab>,
    joint: BTreeMap<WordPair, f64>,
    links_total: f64,
    forward: Conditional,
    backward: Conditional,
}

impl TranslationModel {
    pub fn from_joint(
        method: Method,
        iterations: usize,
        src_vocab: Arc<Vocab>,
        tgt_vocab: Arc<Vocab>,
        joint: BTreeMap<WordPair, f64>,
        links_total: f64,
    ) -> Self {
        let forward = Conditional::from_weights(joint.iter().map(|(&(u, v), &p)| (u, v, p)));
        let backward = Conditional::from_weights(joint.iter().map(|(&(u, v), &p)| (v, u, p)));
        TranslationModel {
            method,
            iterations,
            src_vocab,
            tgt_vocab,
            joint,
            links_total,
            forward,
            backward,
        }
    }

    /// A model made of two directional conditionals only: `forward` is
    /// `trans(v|u)` keyed by source word, `backward` is `trans(u|v)`.
    pub fn from_conditionals(
        method: Method,
        iterations: usize,
        src_vocab: Arc<Vocab>,
        tgt_vocab: Arc<Vocab>,
        forward: Conditional,
        backward: Conditional,
    ) -> Self {
        TranslationModel {
            method,
            iterations,
            src_vocab,
            tgt_vocab,
            joint: BTreeMap::new(),
            links_total: 0.0,
            forward,
            backward,
        }
    }

    pub fn has_joint(&self) -> bool {
        !self.joint.is_empty()
    }

    pub fn joint(&self, u: WordId, v: WordId) -> f64 {
        self.joint.get(&(u, v)).copied().unwrap_or(0.0)
    }

    pub fn joint_map(&self) -> &BTreeMap<WordPair, f64> {
        &self.joint
    }

    /// K of the link counts this model was normalized from (0 for Model 1).
    pub fn links_total(&self) -> f64 {
        self.links_total
    }

    /// `trans(v|u)`.
    pub fn tgt_given_src(&self, u: WordId, v: WordId) -> f64 {
        self.forward.get(u, v)
    }

    /// `trans(u|v)`.
    pub fn src_given_tgt(&self, u: WordId, v: WordId) -> f64 {
        self.backward.get(v, u)
    }

    /// Conditional for translating words of `input` into the other side.
    pub fn conditional(&self, input: Side) -> &Conditional {
        match input {
            Side::Src => &self.forward,
            Side::Tgt => &self.backward,
        }
    }

    pub fn vocab(&self, side: Side) -> &Arc<Vocab> {
        match side {
            Side::Src => &self.src_vocab,
            Side::Tgt => &self.tgt_vocab,
        }
    }

    pub fn src_vocab(&self) -> &Arc<Vocab> {
        &self.src_vocab
    }

    pub fn tgt_vocab(&self) -> &Arc<Vocab> {
        &self.tgt_vocab
    }

    /// Every word pair with probability mass in any of the three tables.
    pub fn pairs(&self) -> Vec<WordPair> {
        let mut keys: Vec<WordPair> = self.joint.keys().copied().collect();
        keys.extend(self.forward.iter().map(|(u, v, _)| (u, v)));
        keys.extend(self.backward.iter().map(|(v, u, _)| (u, v)));
        keys.sort_unstable();
        keys.dedup();
        keys
    }
}

/// Maximum-likelihood joint model: `trans(u,v) = links(u,v) / K`.
pub fn normalize_links(
    links: &LinkCounts,
    method: Method,
    iterations: usize,
    src_vocab: Arc<Vocab>,
    tgt_vocab: Arc<Vocab>,
) -> Result<TranslationModel> {
    let k = links.total();
    if k <= 0.0 {
        return Err(Error::DegenerateModel);
    }
    let joint = links.iter().map(|(pair, c)| (pair, c / k)).collect();
    Ok(TranslationModel::from_joint(
        method, iterations, src_vocab, tgt_vocab, joint, k,
    ))
}

/// `like(u,v) = log trans(u,v)` for every pair with positive probability.
pub fn loglike_from_model(model: &TranslationModel) -> LikelihoodTable {
    model
        .joint_map()
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(&k, &p)| (k, p.ln()))
        .collect()
}

/// Fuzzy-set Dice coefficient `2 Σ min(p,q) / (Σp + Σq)`.
pub fn fuzzy_dice<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let sum_p: f64 = p.values().sum();
    let sum_q: f64 = q.values().sum();
    if sum_p + sum_q == 0.0 {
        return 1.0;
    }
    let shared: f64 = p
        .iter()
        .filter_map(|(k, &x)| q.get(k).map(|&y| x.min(y)))
        .sum();
    2.0 * shared / (sum_p + sum_q)
}

/// Fraction of the model that changed between two iterations,
/// `1 - Dice(prev, curr)`, measured on the joint tables (or on the
/// source-conditioned tables for models without one).
pub fn change_between(prev: &TranslationModel, curr: &TranslationModel) -> f64 {
    if prev.has_joint() || curr.has_joint() {
        1.0 - fuzzy_dice(prev.joint_map(), curr.joint_map())
    } else {
        1.0 - fuzzy_dice(
            &prev.conditional(Side::Src).to_map(),
            &curr.conditional(Side::Src).to_map(),
        )
    }
}

pub fn converged(prev: &TranslationModel, curr: &TranslationModel, threshold: f64) -> bool {
    change_between(prev, curr) < threshold
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(n: usize) -> Arc<Vocab> {
        Arc::new(Vocab::from_counts(
            (0..n).map(|i| (format!("w{i:03}"), 1)).collect(),
        ))
    }

    fn w(i: usize) -> WordId {
        WordId::new(i)
    }

    fn model(pairs: &[((usize, usize), f64)]) -> TranslationModel {
        let links = LinkCounts::from_counts(pairs.iter().map(|&((u, v), c)| ((w(u), w(v)), c)));
        normalize_links(&links, Method::A, 1, vocab(4), vocab(4)).unwrap()
    }

    #[test]
    fn single_link_type() {
        let m = model(&[((0, 0), 7.0)]);
        assert_eq!(m.joint(w(0), w(0)), 1.0);
        assert_eq!(m.links_total(), 7.0);
    }

    #[test]
    fn direct_ratio() {
        let m = model(&[((0, 0), 3.0), ((1, 1), 1.0)]);
        assert_eq!(m.joint(w(0), w(0)), 0.75);
        assert_eq!(m.joint(w(1), w(1)), 0.25);
    }

    #[test]
    fn zero_links_is_degenerate() {
        let err = normalize_links(&LinkCounts::default(), Method::A, 1, vocab(1), vocab(1));
        assert!(matches!(err, Err(Error::DegenerateModel)));
    }

    #[test]
    fn conditionals_are_normalized() {
        let m = model(&[((0, 0), 3.0), ((0, 1), 1.0), ((1, 1), 2.0)]);
        assert!((m.tgt_given_src(w(0), w(0)) - 0.75).abs() < 1e-15);
        assert!((m.src_given_tgt(w(0), w(1)) - 1.0 / 3.0).abs() < 1e-15);
        for given in m.conditional(Side::Src).givens() {
            let s: f64 = m.conditional(Side::Src).dist(given).iter().map(|x| x.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_scaling() {
        let m = model(&[((0, 0), 1.0), ((1, 1), 1.0)]);
        let like = loglike_from_model(&m);
        assert!((like.get(w(0), w(0)).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let single = loglike_from_model(&model(&[((2, 3), 5.0)]));
        assert_eq!(single.get(w(2), w(3)), Some(0.0));
    }

    #[test]
    fn convergence_measure() {
        let a = model(&[((0, 0), 1.0), ((1, 1), 1.0)]);
        assert!(converged(&a, &a.clone(), 1e-4));
        let disjoint = model(&[((2, 2), 1.0)]);
        assert!((change_between(&a, &disjoint) - 1.0).abs() < 1e-15);
        assert!(!converged(&a, &disjoint, 1e-4));
        let shifted = model(&[((0, 0), 4.0), ((1, 1), 6.0)]);
        assert!((change_between(&a, &shifted) - 0.1).abs() < 1e-12);
        assert!(!converged(&a, &shifted, 1e-4));
    }

    #[test]
    fn method_names() {
        for m in [Method::A, Method::B, Method::C, Method::Model1] {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
        assert!("D".parse::<Method>().is_err());
    }
}
