//! Bitexts, gold-standard link annotations and word-class tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vocab::{Vocab, WordId, NULL_MARKER};

/// One half of a bitext. Also used as the input side of a translation
/// direction: `Side::Src` means source words are translated into target words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Src,
    Tgt,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Src => Side::Tgt,
            Side::Tgt => Side::Src,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Src => "source",
            Side::Tgt => "target",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentPair {
    pub id: String,
    pub src: Vec<WordId>,
    pub tgt: Vec<WordId>,
}

impl SegmentPair {
    pub fn side(&self, side: Side) -> &[WordId] {
        match side {
            Side::Src => &self.src,
            Side::Tgt => &self.tgt,
        }
    }
}

/// Segment-aligned parallel text with both vocabularies.
#[derive(Clone, Debug)]
pub struct Bitext {
    pairs: Vec<SegmentPair>,
    src_vocab: Arc<Vocab>,
    tgt_vocab: Arc<Vocab>,
    by_id: HashMap<String, usize>,
}

impl Bitext {
    /// Builds a bitext from tokenized segments `(id, src, tgt)`.
    pub fn from_segments<I, S>(segments: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<S>, Vec<S>)>,
        S: AsRef<str>,
    {
        let raw: Vec<(String, Vec<S>, Vec<S>)> = segments.into_iter().collect();
        let mut src_counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut tgt_counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut by_id = HashMap::with_capacity(raw.len());
        for (i, (id, src, tgt)) in raw.iter().enumerate() {
            if src.is_empty() {
                return Err(Error::EmptySegment {
                    id: id.clone(),
                    side: Side::Src.name(),
                });
            }
            if tgt.is_empty() {
                return Err(Error::EmptySegment {
                    id: id.clone(),
                    side: Side::Tgt.name(),
                });
            }
            if by_id.insert(id.clone(), i).is_some() {
                return Err(Error::Domain(format!("duplicate segment id {id}")));
            }
            for w in src {
                *src_counts.entry(w.as_ref().to_string()).or_default() += 1;
            }
            for w in tgt {
                *tgt_counts.entry(w.as_ref().to_string()).or_default() += 1;
            }
        }
        let src_vocab = Vocab::from_counts(src_counts);
        let tgt_vocab = Vocab::from_counts(tgt_counts);
        let pairs = raw
            .into_iter()
            .map(|(id, src, tgt)| SegmentPair {
                id,
                src: src
                    .iter()
                    .map(|w| src_vocab.get(w.as_ref()).expect("counted"))
                    .collect(),
                tgt: tgt
                    .iter()
                    .map(|w| tgt_vocab.get(w.as_ref()).expect("counted"))
                    .collect(),
            })
            .collect();
        Ok(Bitext {
            pairs,
            src_vocab: Arc::new(src_vocab),
            tgt_vocab: Arc::new(tgt_vocab),
            by_id,
        })
    }

    pub fn pairs(&self) -> &[SegmentPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn segment(&self, id: &str) -> Option<&SegmentPair> {
        self.by_id.get(id).map(|&i| &self.pairs[i])
    }

    pub fn src_vocab(&self) -> &Arc<Vocab> {
        &self.src_vocab
    }

    pub fn tgt_vocab(&self) -> &Arc<Vocab> {
        &self.tgt_vocab
    }

    pub fn vocab(&self, side: Side) -> &Arc<Vocab> {
        match side {
            Side::Src => &self.src_vocab,
            Side::Tgt => &self.tgt_vocab,
        }
    }

    /// Surface tokens of one side of one segment.
    pub fn words<'a>(&'a self, pair: &'a SegmentPair, side: Side) -> Vec<&'a str> {
        let vocab = self.vocab(side);
        pair.side(side).iter().map(|&w| vocab.word(w)).collect()
    }

    /// The first `n` segments as a bitext of their own (vocabularies recounted).
    pub fn prefix(&self, n: usize) -> Result<Bitext> {
        Bitext::from_segments(self.pairs.iter().take(n).map(|p| {
            (
                p.id.clone(),
                self.words(p, Side::Src),
                self.words(p, Side::Tgt),
            )
        }))
    }

    /// Writes the two halves back out, one segment per line.
    pub fn write(&self, path_src: &Path, path_tgt: &Path) -> Result<()> {
        for (side, path) in [(Side::Src, path_src), (Side::Tgt, path_tgt)] {
            let mut out = String::new();
            for p in &self.pairs {
                out.push_str(&self.words(p, side).join(" "));
                out.push('\n');
            }
            fs::write(path, out).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads a bitext from two line-aligned, whitespace-tokenized files.
/// Segment ids are 1-based line numbers.
pub fn load_bitext(path_src: &Path, path_tgt: &Path) -> Result<Bitext> {
    let src = read_to_string(path_src)?;
    let tgt = read_to_string(path_tgt)?;
    let src_lines: Vec<&str> = src.lines().collect();
    let tgt_lines: Vec<&str> = tgt.lines().collect();
    if src_lines.len() != tgt_lines.len() {
        return Err(Error::LineCountMismatch {
            src: src_lines.len(),
            tgt: tgt_lines.len(),
        });
    }
    Bitext::from_segments(src_lines.iter().zip(&tgt_lines).enumerate().map(
        |(i, (s, t))| {
            (
                (i + 1).to_string(),
                s.split_whitespace().collect::<Vec<_>>(),
                t.split_whitespace().collect::<Vec<_>>(),
            )
        },
    ))
}

/// A link between two token positions of one segment. `None` is the NULL word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenLink {
    pub src: Option<usize>,
    pub tgt: Option<usize>,
}

impl TokenLink {
    pub fn pos(&self, side: Side) -> Option<usize> {
        match side {
            Side::Src => self.src,
            Side::Tgt => self.tgt,
        }
    }
}

/// Hand-annotated links, kept separately per annotator.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GoldStandard {
    annotations: BTreeMap<String, BTreeMap<String, BTreeSet<TokenLink>>>,
}

impl GoldStandard {
    pub fn insert(&mut self, annotator: &str, seg: &str, link: TokenLink) {
        self.annotations
            .entry(annotator.to_string())
            .or_default()
            .entry(seg.to_string())
            .or_default()
            .insert(link);
    }

    pub fn annotators(&self) -> impl Iterator<Item = &str> {
        self.annotations.keys().map(String::as_str)
    }

    pub fn annotation(&self, annotator: &str) -> Option<&BTreeMap<String, BTreeSet<TokenLink>>> {
        self.annotations.get(annotator)
    }

    /// Every segment id named by any annotator.
    pub fn segment_ids(&self) -> BTreeSet<&str> {
        self.annotations
            .values()
            .flat_map(|a| a.keys().map(String::as_str))
            .collect()
    }

    pub fn link_count(&self) -> usize {
        self.annotations
            .values()
            .flat_map(|a| a.values())
            .map(BTreeSet::len)
            .sum()
    }

    /// Keeps only segments present in `bitext`.
    pub fn restricted_to(&self, bitext: &Bitext) -> GoldStandard {
        let annotations = self
            .annotations
            .iter()
            .map(|(who, segs)| {
                let kept = segs
                    .iter()
                    .filter(|(id, _)| bitext.segment(id).is_some())
                    .map(|(id, links)| (id.clone(), links.clone()))
                    .collect();
                (who.clone(), kept)
            })
            .collect();
        GoldStandard { annotations }
    }

    /// Checks every link against the segment lengths of `bitext`.
    pub fn validate(&self, bitext: &Bitext) -> Result<()> {
        for segs in self.annotations.values() {
            for (id, links) in segs {
                let pair = bitext
                    .segment(id)
                    .ok_or_else(|| Error::UnknownSegment(id.clone()))?;
                for link in links {
                    for side in [Side::Src, Side::Tgt] {
                        let len = pair.side(side).len();
                        if let Some(pos) = link.pos(side) {
                            if pos >= len {
                                return Err(Error::GoldPosition {
                                    seg: id.clone(),
                                    pos,
                                    side: side.name(),
                                    len,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes in the same TSV format `load_gold` reads.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (who, segs) in &self.annotations {
            for (id, links) in segs {
                for l in links {
                    out.push_str(&format!(
                        "{who}\t{id}\t{}\t{}\n",
                        render_pos(l.src),
                        render_pos(l.tgt)
                    ));
                }
            }
        }
        out
    }
}

pub(crate) fn render_pos(pos: Option<usize>) -> String {
    pos.map_or_else(|| NULL_MARKER.to_string(), |p| p.to_string())
}

fn parse_pos(field: &str, path: &str, line: usize) -> Result<Option<usize>> {
    if field == NULL_MARKER {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::format(path, line, format!("bad position {field:?}")))
}

/// Annotator name given to records without an annotator column.
pub const MODEL_ANNOTATOR: &str = "model";

/// Parses gold-standard TSV text: `annotator TAB segment TAB srcPos TAB tgtPos`.
pub fn parse_gold(text: &str, origin: &str) -> Result<GoldStandard> {
    let mut gold = GoldStandard::default();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        // Three-field records are model link dumps: one implicit annotator.
        let (annotator, rest) = match fields.len() {
            4 => (fields[0], &fields[1..]),
            3 => (MODEL_ANNOTATOR, &fields[..]),
            n => {
                return Err(Error::format(
                    origin,
                    lineno,
                    format!("expected 4 tab-separated fields, found {n}"),
                ))
            }
        };
        let src = parse_pos(rest[1], origin, lineno)?;
        let tgt = parse_pos(rest[2], origin, lineno)?;
        if src.is_none() && tgt.is_none() {
            return Err(Error::format(origin, lineno, "both positions are NULL"));
        }
        gold.insert(annotator, rest[0], TokenLink { src, tgt });
    }
    Ok(gold)
}

pub fn load_gold(path: &Path) -> Result<GoldStandard> {
    parse_gold(&read_to_string(path)?, &path.display().to_string())
}

/// Word classes used to condition the noise model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordClass {
    /// End-of-sentence punctuation.
    Eos,
    /// End-of-phrase punctuation (commas, colons).
    Eop,
    /// Subordinate clause markers (quotes, brackets).
    Scm,
    Sym,
    /// The NULL word, alone in its class.
    Nu,
    /// Content words.
    C,
    /// Function words.
    F,
}

impl WordClass {
    pub const ALL: [WordClass; 7] = [
        WordClass::Eos,
        WordClass::Eop,
        WordClass::Scm,
        WordClass::Sym,
        WordClass::Nu,
        WordClass::C,
        WordClass::F,
    ];

    pub fn code(self) -> &'static str {
        match self {
            WordClass::Eos => "EOS",
            WordClass::Eop => "EOP",
            WordClass::Scm => "SCM",
            WordClass::Sym => "SYM",
            WordClass::Nu => "NU",
            WordClass::C => "C",
            WordClass::F => "F",
        }
    }
}

impl fmt::Display for WordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for WordClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        WordClass::ALL
            .into_iter()
            .find(|c| c.code() == s)
            .ok_or_else(|| format!("unknown word class {s:?}"))
    }
}

/// Table lookup from word to class. Unlisted words are content words.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordClassMap {
    classes: HashMap<String, WordClass>,
}

impl WordClassMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics if asked to put a word in the NULL class.
    pub fn insert(&mut self, word: impl Into<String>, class: WordClass) {
        assert!(class != WordClass::Nu, "only NULL belongs to class NU");
        self.classes.insert(word.into(), class);
    }

    pub fn class(&self, word: &str) -> WordClass {
        self.classes.get(word).copied().unwrap_or(WordClass::C)
    }

    /// `None` is the NULL word.
    pub fn class_of(&self, word: Option<&str>) -> WordClass {
        word.map_or(WordClass::Nu, |w| self.class(w))
    }

    /// Class of every word in `vocab`, indexed by word id.
    pub fn resolve(&self, vocab: &Vocab) -> ClassIndex {
        ClassIndex(vocab.words().iter().map(|w| self.class(w)).collect())
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// `word TAB class` lines sorted by word, readable by [`parse_classes`].
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(&String, &WordClass)> = self.classes.iter().collect();
        rows.sort();
        rows.iter().map(|(w, c)| format!("{w}\t{c}\n")).collect()
    }
}

/// Word classes of one vocabulary, resolved per word id.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassIndex(Vec<WordClass>);

impl ClassIndex {
    pub fn uniform(len: usize, class: WordClass) -> Self {
        ClassIndex(vec![class; len])
    }

    pub fn get(&self, id: WordId) -> WordClass {
        if id.is_null() {
            WordClass::Nu
        } else {
            self.0[id.index()]
        }
    }
}

/// Parses `word TAB class` records on top of `defaults`.
pub fn parse_classes(text: &str, origin: &str, defaults: &WordClassMap) -> Result<WordClassMap> {
    let mut map = defaults.clone();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(word), Some(code), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::format(origin, lineno, "expected `word TAB class`"));
        };
        let class = match code.trim().parse::<WordClass>() {
            Ok(WordClass::Nu) => {
                return Err(Error::format(origin, lineno, "class NU is reserved for NULL"))
            }
            Ok(c) => c,
            Err(msg) => return Err(Error::format(origin, lineno, msg)),
        };
        map.insert(word.trim(), class);
    }
    Ok(map)
}

pub fn load_classes(path: &Path, defaults: &WordClassMap) -> Result<WordClassMap> {
    parse_classes(
        &read_to_string(path)?,
        &path.display().to_string(),
        defaults,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_pair(dir: &Path, src: &str, tgt: &str) -> (std::path::PathBuf, std::path::PathBuf) {
        let s = dir.join("src.txt");
        let t = dir.join("tgt.txt");
        fs::write(&s, src).unwrap();
        fs::write(&t, tgt).unwrap();
        (s, t)
    }

    #[test]
    fn single_segment() {
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = write_pair(dir.path(), "a b\n", "x y\n");
        let b = load_bitext(&s, &t).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.pairs()[0].id, "1");
        for w in ["a", "b"] {
            assert_eq!(b.src_vocab().freq(b.src_vocab().get(w).unwrap()), 1);
        }
        for w in ["x", "y"] {
            assert_eq!(b.tgt_vocab().freq(b.tgt_vocab().get(w).unwrap()), 1);
        }
    }

    #[test]
    fn line_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = write_pair(dir.path(), "a\nb\n", "x\ny\nz\n");
        match load_bitext(&s, &t) {
            Err(Error::LineCountMismatch { src: 2, tgt: 3 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_line_names_segment() {
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = write_pair(dir.path(), "a\n\nc\n", "x\ny\nz\n");
        match load_bitext(&s, &t) {
            Err(Error::EmptySegment { id, .. }) => assert_eq!(id, "2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn target_frequency_matches_recount() {
        let dir = tempfile::tempdir().unwrap();
        let tgt = "le chat le\nle chien\nmange le le\n";
        let (s, t) = write_pair(dir.path(), "the cat\nthe dog\neats it\n", tgt);
        let b = load_bitext(&s, &t).unwrap();
        let recount = tgt.split_whitespace().filter(|w| *w == "le").count() as u64;
        assert_eq!(recount, 5);
        assert_eq!(b.tgt_vocab().freq(b.tgt_vocab().get("le").unwrap()), recount);
        assert_eq!(b.tgt_vocab().total_tokens(), 8);
    }

    #[test]
    fn vocab_ids_follow_lexicographic_order() {
        let b = Bitext::from_segments([("1".to_string(), vec!["b", "a", "c"], vec!["z", "y"])])
            .unwrap();
        let v = b.src_vocab();
        assert!(v.get("a").unwrap() < v.get("b").unwrap());
        assert!(v.get("c").unwrap() < WordId::NULL);
    }

    #[test]
    fn gold_records() {
        let g = parse_gold("# comment\na1\t7\t0\t2\na1\t7\t3\t-\na1\t7\t0\t2\n", "g").unwrap();
        let segs = g.annotation("a1").unwrap();
        let links: Vec<_> = segs["7"].iter().copied().collect();
        assert_eq!(
            links,
            vec![
                TokenLink {
                    src: Some(0),
                    tgt: Some(2)
                },
                TokenLink {
                    src: Some(3),
                    tgt: None
                },
            ]
        );
    }

    #[test]
    fn three_field_records_are_model_links() {
        let g = parse_gold("4\t1\t-\n", "g").unwrap();
        let segs = g.annotation(MODEL_ANNOTATOR).unwrap();
        assert!(segs["4"].contains(&TokenLink {
            src: Some(1),
            tgt: None
        }));
    }

    #[test]
    fn gold_rejects_double_null_and_bad_fields() {
        assert!(parse_gold("a\t1\t-\t-\n", "g").is_err());
        assert!(parse_gold("a\t1\n", "g").is_err());
        assert!(parse_gold("a\t1\tx\t0\n", "g").is_err());
    }

    #[test]
    fn gold_validation_names_segment_and_position() {
        let b = Bitext::from_segments([("1".to_string(), vec!["a", "b"], vec!["x"])]).unwrap();
        let ok = parse_gold("a1\t1\t1\t0\n", "g").unwrap();
        ok.validate(&b).unwrap();
        let bad = parse_gold("a1\t1\t0\t4\n", "g").unwrap();
        match bad.validate(&b) {
            Err(Error::GoldPosition { seg, pos, .. }) => {
                assert_eq!(seg, "1");
                assert_eq!(pos, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        let unknown = parse_gold("a1\t9\t0\t0\n", "g").unwrap();
        assert!(matches!(unknown.validate(&b), Err(Error::UnknownSegment(_))));
    }

    #[test]
    fn class_table() {
        let empty = parse_classes("", "c", &WordClassMap::new()).unwrap();
        assert_eq!(empty.class("anything"), WordClass::C);
        assert_eq!(empty.class_of(None), WordClass::Nu);

        let m = parse_classes("de\tF\n,\tEOP\n", "c", &WordClassMap::new()).unwrap();
        assert_eq!(m.class("de"), WordClass::F);
        assert_eq!(m.class(","), WordClass::Eop);
        assert_eq!(m.class("maison"), WordClass::C);
    }

    #[test]
    fn class_errors_name_line() {
        let err = parse_classes("de\tF\nle\tXX\n", "c", &WordClassMap::new()).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
        assert!(parse_classes("x\tNU\n", "c", &WordClassMap::new()).is_err());
    }

    #[test]
    fn write_then_reload_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = write_pair(dir.path(), "a b a\nc\n", "x\ny z\n");
        let b = load_bitext(&s, &t).unwrap();
        let (s2, t2) = (dir.path().join("s2"), dir.path().join("t2"));
        b.write(&s2, &t2).unwrap();
        let b2 = load_bitext(&s2, &t2).unwrap();
        assert_eq!(b.pairs(), b2.pairs());
        assert_eq!(b.src_vocab(), b2.src_vocab());
        assert_eq!(b.tgt_vocab(), b2.tgt_vocab());
    }
}
