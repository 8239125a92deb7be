//! Word types and vocabularies.
//!
//! Word ids are assigned in lexicographic order of the surface strings, so
//! comparing two ids from the same vocabulary is the same as comparing the
//! words. The NULL word sorts after every real word.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordId(u32);

impl WordId {
    /// The empty word. It belongs to neither vocabulary.
    pub const NULL: WordId = WordId(u32::MAX);

    pub fn new(index: usize) -> Self {
        assert!(index < u32::MAX as usize, "vocabulary too large");
        WordId(index as u32)
    }

    pub fn is_null(self) -> bool {
        self == Self::NULL
    }

    pub fn index(self) -> usize {
        debug_assert!(!self.is_null());
        self.0 as usize
    }
}

impl fmt::Debug for WordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_null() {
            f.write_str("NULL")
        } else {
            write!(f, "w{}", self.0)
        }
    }
}

/// Ordered pair of word types, `(source, target)`. Either side may be NULL.
pub type WordPair = (WordId, WordId);

/// Rendering of the NULL word in every text format this crate writes.
pub const NULL_MARKER: &str = "-";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocab {
    words: Vec<String>,
    freqs: Vec<u64>,
    index: HashMap<String, WordId>,
}

impl Vocab {
    /// Builds a vocabulary from per-word frequencies.
    pub fn from_counts(counts: BTreeMap<String, u64>) -> Self {
        let mut words = Vec::with_capacity(counts.len());
        let mut freqs = Vec::with_capacity(counts.len());
        let mut index = HashMap::with_capacity(counts.len());
        for (i, (w, c)) in counts.into_iter().enumerate() {
            index.insert(w.clone(), WordId::new(i));
            words.push(w);
            freqs.push(c);
        }
        Vocab {
            words,
            freqs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    /// Surface form, with NULL rendered as `-`.
    pub fn word(&self, id: WordId) -> &str {
        if id.is_null() {
            NULL_MARKER
        } else {
            &self.words[id.index()]
        }
    }

    /// Corpus frequency, `e(u)` or `f(v)`. The NULL word has none.
    pub fn freq(&self, id: WordId) -> u64 {
        if id.is_null() {
            0
        } else {
            self.freqs[id.index()]
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = WordId> + '_ {
        (0..self.words.len()).map(WordId::new)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn total_tokens(&self) -> u64 {
        self.freqs.iter().sum()
    }
}
