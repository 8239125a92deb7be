//! Boundary-based co-occurrence counts, Good-Turing smoothing and the G²
//! association statistic used to seed the likelihood table.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::corpus::{Bitext, SegmentPair};
use crate::error::{Error, Result};
use crate::linking::LikelihoodTable;
use crate::smoothing::SimpleGoodTuring;
use crate::vocab::{Vocab, WordId, WordPair};

/// Co-occurrence counts over word-type pairs, including the NULL cells
/// `cooc(u, NULL) = e(u)` and `cooc(NULL, v) = f(v)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoocTable {
    cells: BTreeMap<WordPair, f64>,
    rows: BTreeMap<WordId, f64>,
    cols: BTreeMap<WordId, f64>,
    total: f64,
}

impl CoocTable {
    /// Builds a table from explicit cells; marginals and N are derived.
    /// Zero cells are dropped.
    pub fn from_cells(cells: impl IntoIterator<Item = (WordPair, f64)>) -> Self {
        let cells: BTreeMap<WordPair, f64> = cells.into_iter().filter(|&(_, c)| c > 0.0).collect();
        let mut rows: BTreeMap<WordId, f64> = BTreeMap::new();
        let mut cols: BTreeMap<WordId, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (&(u, v), &c) in &cells {
            *rows.entry(u).or_default() += c;
            *cols.entry(v).or_default() += c;
            total += c;
        }
        CoocTable {
            cells,
            rows,
            cols,
            total,
        }
    }

    pub fn get(&self, u: WordId, v: WordId) -> f64 {
        self.cells.get(&(u, v)).copied().unwrap_or(0.0)
    }

    /// `cooc(u, ·)`, NULL column included.
    pub fn row(&self, u: WordId) -> f64 {
        self.rows.get(&u).copied().unwrap_or(0.0)
    }

    /// `cooc(·, v)`, NULL row included.
    pub fn col(&self, v: WordId) -> f64 {
        self.cols.get(&v).copied().unwrap_or(0.0)
    }

    /// N, the sum of all cells (NULL cells included).
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells in `(u, v)` order.
    pub fn iter(&self) -> impl Iterator<Item = (WordPair, f64)> + '_ {
        self.cells.iter().map(|(&k, &c)| (k, c))
    }

    pub fn contingency(&self, u: WordId, v: WordId) -> ContingencyCells {
        let a = self.get(u, v);
        // Smoothed tables can leave rounding residue below zero.
        let b = (self.col(v) - a).max(0.0);
        let c = (self.row(u) - a).max(0.0);
        let d = (self.total - a - b - c).max(0.0);
        ContingencyCells { a, b, c, d }
    }

    /// Debug dump `u TAB v TAB cooc TAB g2` of the word-word cells, by
    /// descending G² and then by `(u, v)`.
    pub fn dump_tsv(&self, src: &Vocab, tgt: &Vocab) -> String {
        let mut rows: Vec<(WordPair, f64, f64)> = self
            .iter()
            .filter(|((u, v), _)| !u.is_null() && !v.is_null())
            .map(|((u, v), c)| {
                let g2 = g2_score(self.contingency(u, v)).unwrap_or(0.0);
                ((u, v), c, g2)
            })
            .collect();
        rows.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)));
        rows.iter()
            .map(|&((u, v), c, g2)| format!("{}\t{}\t{c}\t{g2}\n", src.word(u), tgt.word(v)))
            .collect()
    }
}

/// Cells of the 2x2 contingency table for one word pair:
/// `a = cooc(u,v)`, `b = cooc(¬u,v)`, `c = cooc(u,¬v)`, `d = cooc(¬u,¬v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContingencyCells {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl ContingencyCells {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        ContingencyCells { a, b, c, d }
    }

    pub fn total(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }
}

fn segment_cells(pair: &SegmentPair, out: &mut HashMap<WordPair, u64>) {
    let src = type_counts(&pair.src);
    let tgt = type_counts(&pair.tgt);
    for &(u, eu) in &src {
        for &(v, fv) in &tgt {
            *out.entry((u, v)).or_default() += eu.min(fv);
        }
    }
}

fn type_counts(tokens: &[WordId]) -> Vec<(WordId, u64)> {
    let mut sorted = tokens.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<(WordId, u64)> = Vec::new();
    for w in sorted {
        match out.last_mut() {
            Some((last, n)) if *last == w => *n += 1,
            _ => out.push((w, 1)),
        }
    }
    out
}

/// Counts `cooc(u,v) = Σ_i min(e(u,U_i), f(v,V_i))` over all segments and
/// adds the NULL cells.
pub fn count_cooc(bitext: &Bitext) -> CoocTable {
    let merged = bitext
        .pairs()
        .par_iter()
        .fold(HashMap::new, |mut acc, pair| {
            segment_cells(pair, &mut acc);
            acc
        })
        .reduce(HashMap::new, merge_counts);
    let src = bitext.src_vocab();
    let tgt = bitext.tgt_vocab();
    let nulls = src
        .ids()
        .map(|u| ((u, WordId::NULL), src.freq(u) as f64))
        .chain(tgt.ids().map(|v| ((WordId::NULL, v), tgt.freq(v) as f64)));
    CoocTable::from_cells(merged.into_iter().map(|(k, c)| (k, c as f64)).chain(nulls))
}

fn merge_counts(
    a: HashMap<WordPair, u64>,
    b: HashMap<WordPair, u64>,
) -> HashMap<WordPair, u64> {
    let (mut into, from) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    for (k, c) in from {
        *into.entry(k).or_default() += c;
    }
    into
}

/// Result of Good-Turing smoothing. `skipped` carries the reason when the
/// table was returned unchanged.
#[derive(Clone, Debug)]
pub struct Smoothed {
    pub table: CoocTable,
    pub skipped: Option<String>,
}

/// Replaces the word-word counts by Simple Good-Turing expected counts.
/// NULL cells are left alone.
pub fn sgt_smooth(table: &CoocTable) -> Result<Smoothed> {
    let mut freq_of_freq: BTreeMap<u64, u64> = BTreeMap::new();
    for ((u, v), c) in table.iter() {
        if u.is_null() || v.is_null() {
            continue;
        }
        if c.fract() != 0.0 {
            return Err(Error::Domain(format!(
                "Good-Turing smoothing needs integer counts, found {c}"
            )));
        }
        *freq_of_freq.entry(c as u64).or_default() += 1;
    }
    if freq_of_freq.is_empty() {
        return Ok(Smoothed {
            table: table.clone(),
            skipped: None,
        });
    }
    let sgt = match SimpleGoodTuring::fit(&freq_of_freq) {
        Ok(sgt) => sgt,
        Err(e) => {
            return Ok(Smoothed {
                table: table.clone(),
                skipped: Some(e.to_string()),
            });
        }
    };
    let cells = table.iter().map(|((u, v), c)| {
        if u.is_null() || v.is_null() {
            ((u, v), c)
        } else {
            ((u, v), sgt.adjusted_count(c as u64).expect("fitted"))
        }
    });
    Ok(Smoothed {
        table: CoocTable::from_cells(cells),
        skipped: None,
    })
}

/// `x * ln(y)` with the convention `0 * ln 0 = 0`.
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Log-likelihood ratio G² for a 2x2 table. The binomial coefficients cancel,
/// so only the `k ln p + (n-k) ln(1-p)` terms are evaluated.
pub fn g2_score(cells: ContingencyCells) -> Result<f64> {
    let ContingencyCells { a, b, c, d } = cells;
    if [a, b, c, d].iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Domain(format!(
            "contingency cells must be finite and non-negative: {cells:?}"
        )));
    }
    let n = a + b + c + d;
    if a + b <= 0.0 || c + d <= 0.0 || n <= 0.0 {
        return Err(Error::Domain(format!(
            "G² needs a+b > 0 and c+d > 0: {cells:?}"
        )));
    }
    let p1 = a / (a + b);
    let p2 = c / (c + d);
    let p = (a + c) / n;
    let alternative = xlny(a, p1) + xlny(b, 1.0 - p1) + xlny(c, p2) + xlny(d, 1.0 - p2);
    let null = xlny(a, p) + xlny(b, 1.0 - p) + xlny(c, p) + xlny(d, 1.0 - p);
    Ok((2.0 * (alternative - null)).max(0.0))
}

/// Lower bound for the NULL initialization value.
pub const NULL_LIKE_FLOOR: f64 = 1e-30;

/// Seeds `like(u,v)` with G² for every co-occurring word pair. Links to NULL
/// get an infinitesimal value below every positive G² in the table.
pub fn init_likelihoods(table: &CoocTable) -> LikelihoodTable {
    let mut like = LikelihoodTable::new();
    let mut min_positive = f64::INFINITY;
    for ((u, v), _) in table.iter() {
        if u.is_null() || v.is_null() {
            continue;
        }
        let g2 = g2_score(table.contingency(u, v)).unwrap_or(0.0);
        if g2 > 0.0 {
            min_positive = min_positive.min(g2);
        }
        like.insert(u, v, g2);
    }
    let epsilon = if min_positive.is_finite() {
        (min_positive * 1e-6).max(NULL_LIKE_FLOOR)
    } else {
        NULL_LIKE_FLOOR
    };
    for ((u, v), _) in table.iter() {
        if u.is_null() || v.is_null() {
            like.insert(u, v, epsilon);
        }
    }
    like
}
