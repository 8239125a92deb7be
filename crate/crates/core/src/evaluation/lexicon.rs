use std::collections::BTreeSet;

use crate::cooc::CoocTable;
use crate::corpus::{Bitext, Side};
use crate::linking::{LikelihoodTable, LinkCounts};
use crate::vocab::Vocab;

#[derive(Clone, Debug, PartialEq)]
pub struct LexiconEntry {
    pub u: String,
    pub v: String,
    pub like: f64,
    pub links: f64,
    pub cooc: f64,
}

/// Lexicon entries sorted by descending score, then `(u, v)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    pub entries: Vec<LexiconEntry>,
}

/// A run of consecutive lexicon entries with the same `(links, cooc)`
/// signature. Ranks are 0-based and `end` is exclusive.
#[derive(Clone, Debug, PartialEq)]
pub struct Plateau {
    pub start: usize,
    pub end: usize,
    pub like: f64,
    pub links: f64,
    pub cooc: f64,
}

impl Plateau {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

impl Lexicon {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                e.u, e.v, e.like, e.links, e.cooc
            ));
        }
        out
    }

    pub fn plateaus(&self) -> Vec<Plateau> {
        let mut out: Vec<Plateau> = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            match out.last_mut() {
                Some(p) if p.links == e.links && p.cooc == e.cooc && p.end == i => p.end = i + 1,
                _ => out.push(Plateau {
                    start: i,
                    end: i + 1,
                    like: e.like,
                    links: e.links,
                    cooc: e.cooc,
                }),
            }
        }
        out
    }

    /// The `n` longest plateaus, longest first (earlier ones on ties).
    pub fn longest_plateaus(&self, n: usize) -> Vec<Plateau> {
        let mut p = self.plateaus();
        p.sort_by(|a, b| b.len().cmp(&a.len()).then(a.start.cmp(&b.start)));
        p.truncate(n);
        p
    }

    /// Plateau table: `start end length like links cooc`.
    pub fn plateau_tsv(&self) -> String {
        let mut out = String::from("start\tend\tlength\tlike\tlinks\tcooc\n");
        for p in self.plateaus() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                p.start,
                p.end,
                p.len(),
                p.like,
                p.links,
                p.cooc
            ));
        }
        out
    }
}

/// Word-pair entries scoring at least `min_like`. NULL entries and
/// non-finite scores are left out.
pub fn extract_lexicon(
    like: &LikelihoodTable,
    links: &LinkCounts,
    cooc: &CoocTable,
    src: &Vocab,
    tgt: &Vocab,
    min_like: f64,
) -> Lexicon {
    let mut entries: Vec<LexiconEntry> = like
        .iter()
        .filter(|&((u, v), x)| !u.is_null() && !v.is_null() && x.is_finite() && x >= min_like)
        .map(|((u, v), x)| LexiconEntry {
            u: src.word(u).to_string(),
            v: tgt.word(v).to_string(),
            like: x,
            links: links.get(u, v),
            cooc: cooc.get(u, v),
        })
        .collect();
    entries.sort_by(|a, b| {
        b.like
            .total_cmp(&a.like)
            .then_with(|| a.u.cmp(&b.u))
            .then_with(|| a.v.cmp(&b.v))
    });
    Lexicon { entries }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Coverage {
    pub covered: usize,
    pub total: usize,
}

impl Coverage {
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.covered as f64 / self.total as f64
        }
    }
}

/// Word types of each language that appear in at least one lexicon entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TypeRecall {
    pub src: Coverage,
    pub tgt: Coverage,
    pub combined: Coverage,
}

pub fn recall_by_type(lexicon: &Lexicon, bitext: &Bitext) -> TypeRecall {
    let coverage = |side: Side| {
        let vocab = bitext.vocab(side);
        let seen: BTreeSet<&str> = lexicon
            .entries
            .iter()
            .map(|e| if side == Side::Src { e.u.as_str() } else { e.v.as_str() })
            .filter(|w| vocab.get(w).is_some())
            .collect();
        Coverage {
            covered: seen.len(),
            total: vocab.len(),
        }
    };
    let src = coverage(Side::Src);
    let tgt = coverage(Side::Tgt);
    TypeRecall {
        src,
        tgt,
        combined: Coverage {
            covered: src.covered + tgt.covered,
            total: src.total + tgt.total,
        },
    }
}
