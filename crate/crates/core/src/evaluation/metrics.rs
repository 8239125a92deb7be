use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A fuzzy set of link tokens; crisp sets have every weight equal to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyLinkSet<K: Ord> {
    weights: BTreeMap<K, f64>,
}

impl<K: Ord> Default for FuzzyLinkSet<K> {
    fn default() -> Self {
        FuzzyLinkSet {
            weights: BTreeMap::new(),
        }
    }
}

impl<K: Ord> FuzzyLinkSet<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `weight` to the membership of `key`, capped at 1. Non-positive
    /// weights are ignored.
    pub fn add(&mut self, key: K, weight: f64) {
        if weight > 0.0 {
            let w = self.weights.entry(key).or_default();
            *w = (*w + weight).min(1.0);
        }
    }

    pub fn weight(&self, key: &K) -> f64 {
        self.weights.get(key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.weights.iter().map(|(k, &w)| (k, w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `|X| = Σ weights`.
    pub fn mass(&self) -> f64 {
        self.weights.values().sum()
    }

    /// `|X ∩ Y| = Σ min(weight_X, weight_Y)` over shared keys.
    pub fn intersection_mass(&self, other: &FuzzyLinkSet<K>) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .weights
            .iter()
            .filter_map(|(k, &w)| large.weights.get(k).map(|&v| w.min(v)))
            .sum()
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&K) -> bool) {
        self.weights.retain(|k, _| keep(k));
    }
}

impl<K: Ord> FromIterator<(K, f64)> for FuzzyLinkSet<K> {
    fn from_iter<I: IntoIterator<Item = (K, f64)>>(iter: I) -> Self {
        let mut set = FuzzyLinkSet::new();
        for (k, w) in iter {
            set.add(k, w);
        }
        set
    }
}

/// Additive sufficient statistics for precision and recall.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overlap {
    pub shared: f64,
    pub test: f64,
    pub gold: f64,
}

impl Overlap {
    pub fn between<K: Ord>(test: &FuzzyLinkSet<K>, gold: &FuzzyLinkSet<K>) -> Self {
        Overlap {
            shared: test.intersection_mass(gold),
            test: test.mass(),
            gold: gold.mass(),
        }
    }

    pub fn add(&mut self, other: Overlap) {
        self.shared += other.shared;
        self.test += other.test;
        self.gold += other.gold;
    }

    pub fn scores(&self) -> Result<Scores> {
        if self.test <= 0.0 {
            return Err(Error::UndefinedMetric("test"));
        }
        if self.gold <= 0.0 {
            return Err(Error::UndefinedMetric("gold"));
        }
        Ok(Scores {
            precision: self.shared / self.test,
            recall: self.shared / self.gold,
            dice: 2.0 * self.shared / (self.test + self.gold),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub dice: f64,
}

impl Scores {
    pub fn mean<'a>(scores: impl IntoIterator<Item = &'a Scores>) -> Scores {
        let mut sum = Scores::default();
        let mut n = 0.0;
        for s in scores {
            sum.precision += s.precision;
            sum.recall += s.recall;
            sum.dice += s.dice;
            n += 1.0;
        }
        if n == 0.0 {
            return sum;
        }
        Scores {
            precision: sum.precision / n,
            recall: sum.recall / n,
            dice: sum.dice / n,
        }
    }
}

/// Precision `|X∩Y|/|X|`, recall `|X∩Y|/|Y|` and Dice `2|X∩Y|/(|X|+|Y|)`
/// of `test` against `gold`.
pub fn precision_recall<K: Ord>(test: &FuzzyLinkSet<K>, gold: &FuzzyLinkSet<K>) -> Result<Scores> {
    Overlap::between(test, gold).scores()
}

/// `1 − B(0|γ,p) − B(1|γ,p)`: the chance that more than one of `gamma`
/// independent trials with success probability `p` succeeds.
pub fn prob_multi_rare(gamma: u64, p: f64) -> f64 {
    if gamma < 2 || p <= 0.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    let g = gamma as f64;
    let none = q.powf(g);
    let one = g * p * q.powf(g - 1.0);
    (1.0 - none - one).clamp(0.0, 1.0)
}
