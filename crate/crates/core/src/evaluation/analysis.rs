//! Sparse-data measurements: singleton proportions by sample size and the
//! distribution of link/co-occurrence ratios.

use std::collections::HashMap;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cooc::CoocTable;
use crate::error::{Error, Result};
use crate::linking::LinkCounts;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingletonPoint {
    pub size: usize,
    pub fraction: f64,
}

/// For each sample size, the mean over `trials` random contiguous windows of
/// the proportion of tokens whose type occurs exactly `k` times in the
/// window.
pub fn singleton_fraction<T: Hash + Eq>(
    tokens: &[T],
    sizes: &[usize],
    trials: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<SingletonPoint>> {
    if trials == 0 {
        return Err(Error::Usage("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sizes
        .iter()
        .map(|&size| {
            if size == 0 || size > tokens.len() {
                return Err(Error::Usage(format!(
                    "sample size {size} is outside 1..={}",
                    tokens.len()
                )));
            }
            let mut sum = 0.0;
            for _ in 0..trials {
                let start = rng.random_range(0..=tokens.len() - size);
                let mut counts: HashMap<&T, usize> = HashMap::new();
                for t in &tokens[start..start + size] {
                    *counts.entry(t).or_default() += 1;
                }
                let hits: usize = counts.values().filter(|&&c| c == k).map(|&c| c).sum();
                sum += hits as f64 / size as f64;
            }
            Ok(SingletonPoint {
                size,
                fraction: sum / trials as f64,
            })
        })
        .collect()
}

/// Least-squares slope of `ln fraction` against `ln size`, over points with
/// a positive fraction.
pub fn log_log_slope(points: &[SingletonPoint]) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.fraction > 0.0)
        .map(|p| ((p.size as f64).ln(), p.fraction.ln()))
        .collect();
    if xy.len() < 2 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Ten ratio bins: `[0, .1]`, `(.1, .2]`, ..., `(.8, .9)`, `[.9, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioHistogram {
    pub counts: [usize; 10],
    pub min_cooc: f64,
}

impl RatioHistogram {
    pub fn bin_of(ratio: f64) -> usize {
        if ratio <= 0.1 {
            0
        } else if ratio >= 0.9 {
            9
        } else {
            ((ratio * 10.0).ceil() as usize - 1).clamp(1, 8)
        }
    }

    pub fn bin_label(bin: usize) -> String {
        match bin {
            0 => "<=0.1".to_string(),
            9 => ">=0.9".to_string(),
            b => format!("{:.1}-{:.1}", b as f64 / 10.0, (b + 1) as f64 / 10.0),
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Indices of the two fullest bins, fullest first (lower bin on ties).
    pub fn top_two(&self) -> (usize, usize) {
        let mut order: Vec<usize> = (0..10).collect();
        order.sort_by(|&a, &b| self.counts[b].cmp(&self.counts[a]).then(a.cmp(&b)));
        (order[0], order[1])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{c}\n", Self::bin_label(i)));
        }
        out
    }
}

/// Histogram of `links(u,v)/cooc(u,v)` over word pairs (NULL excluded) with
/// `cooc(u,v) >= min_cooc`.
pub fn link_ratio_histogram(links: &LinkCounts, cooc: &CoocTable, min_cooc: f64) -> RatioHistogram {
    let mut counts = [0; 10];
    for ((u, v), n) in cooc.iter() {
        if u.is_null() || v.is_null() || n < min_cooc {
            continue;
        }
        counts[RatioHistogram::bin_of(links.get(u, v) / n)] += 1;
    }
    RatioHistogram { counts, min_cooc }
}
