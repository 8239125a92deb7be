//! Model 1 trained by EM, separately in each direction.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::corpus::{Bitext, Side};
use crate::vocab::{WordId, WordPair};

use super::model::{fuzzy_dice, Conditional};

/// One segment as `(type, within-segment frequency)` lists, input side first.
struct BagPair {
    input: Vec<(WordId, f64)>,
    output: Vec<(WordId, f64)>,
    input_len: f64,
}

fn bag(words: &[WordId]) -> Vec<(WordId, f64)> {
    let mut counts: BTreeMap<WordId, f64> = BTreeMap::new();
    for &w in words {
        *counts.entry(w).or_default() += 1.0;
    }
    counts.into_iter().collect()
}

/// EM state for `trans(out|in)` with `in` drawn from one side of the bitext.
pub struct Model1Direction {
    bags: Vec<BagPair>,
    table: HashMap<WordPair, f64>,
    with_null: bool,
}

impl Model1Direction {
    /// Uniform initialization over the output types that co-occur with each
    /// input type (and with NULL when `with_null` is set).
    pub fn new(bitext: &Bitext, input: Side, with_null: bool) -> Self {
        let bags: Vec<BagPair> = bitext
            .pairs()
            .iter()
            .map(|pair| {
                let mut input_bag = bag(pair.side(input));
                if with_null {
                    input_bag.push((WordId::NULL, 1.0));
                }
                BagPair {
                    input: input_bag,
                    output: bag(pair.side(input.other())),
                    input_len: pair.side(input).len() as f64 + with_null as u8 as f64,
                }
            })
            .collect();
        let mut table = HashMap::new();
        for b in &bags {
            for &(u, _) in &b.input {
                for &(v, _) in &b.output {
                    table.insert((u, v), 1.0);
                }
            }
        }
        Model1Direction {
            bags,
            table,
            with_null,
        }
    }

    pub fn with_null(&self) -> bool {
        self.with_null
    }

    fn t(&self, u: WordId, v: WordId) -> f64 {
        self.table.get(&(u, v)).copied().unwrap_or(0.0)
    }

    /// E step: expected link counts `links(u,v)` and the training-data
    /// log-likelihood of the current parameters.
    pub fn expected_counts(&self) -> (Vec<(WordPair, f64)>, f64) {
        let per_segment: Vec<(Vec<(WordPair, f64)>, f64)> = self
            .bags
            .par_iter()
            .map(|b| {
                let mut expected = Vec::with_capacity(b.input.len() * b.output.len());
                let mut loglik = 0.0;
                for &(v, fv) in &b.output {
                    let denom: f64 = b.input.iter().map(|&(u, eu)| eu * self.t(u, v)).sum();
                    loglik += fv * (denom / b.input_len).ln();
                    for &(u, eu) in &b.input {
                        expected.push(((u, v), self.t(u, v) / denom * eu * fv));
                    }
                }
                (expected, loglik)
            })
            .collect();

        // Accumulate in segment order so the sums do not depend on scheduling.
        let mut links: HashMap<WordPair, f64> = HashMap::with_capacity(self.table.len());
        let mut loglik = 0.0;
        for (expected, ll) in per_segment {
            loglik += ll;
            for (pair, c) in expected {
                *links.entry(pair).or_default() += c;
            }
        }
        let mut ordered: Vec<(WordPair, f64)> = links.into_iter().collect();
        ordered.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        (ordered, loglik)
    }

    /// One EM iteration. Returns the training-data log-likelihood of the
    /// updated parameters.
    pub fn step(&mut self) -> f64 {
        let (ordered, _) = self.expected_counts();
        let mut totals: HashMap<WordId, f64> = HashMap::new();
        for &((u, _), c) in &ordered {
            *totals.entry(u).or_default() += c;
        }
        self.table = ordered
            .into_iter()
            .map(|((u, v), c)| ((u, v), c / totals[&u]))
            .collect();
        self.log_likelihood()
    }

    /// Training-data log-likelihood `Σ_v ln(Σ_{u∈U} t(v|u) / |U|)`, with
    /// `|U|` counting the NULL token when present.
    pub fn log_likelihood(&self) -> f64 {
        let per_segment: Vec<f64> = self
            .bags
            .par_iter()
            .map(|b| {
                b.output
                    .iter()
                    .map(|&(v, fv)| {
                        let denom: f64 = b.input.iter().map(|&(u, eu)| eu * self.t(u, v)).sum();
                        fv * (denom / b.input_len).ln()
                    })
                    .sum::<f64>()
            })
            .collect();
        per_segment.iter().sum()
    }

    pub fn table(&self) -> BTreeMap<WordPair, f64> {
        self.table.iter().map(|(&k, &p)| (k, p)).collect()
    }

    pub fn conditional(&self) -> Conditional {
        Conditional::from_weights(self.table.iter().map(|(&(u, v), &p)| (u, v, p)))
    }
}

/// `1 - Dice` between two conditional tables.
pub fn table_change(prev: &BTreeMap<WordPair, f64>, curr: &BTreeMap<WordPair, f64>) -> f64 {
    1.0 - fuzzy_dice(prev, curr)
}
