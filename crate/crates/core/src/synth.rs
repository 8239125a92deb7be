//! Synthetic bitexts generated from a known one-to-one lexicon, with labeled
//! noise and a matching gold standard.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::corpus::{Bitext, GoldStandard, TokenLink, WordClass, WordClassMap};
use crate::error::Result;

/// Annotator name of generated gold standards.
pub const SYNTH_ANNOTATOR: &str = "synth";

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub segments: usize,
    /// Number of content-word translation pairs.
    pub lexicon_size: usize,
    pub zipf_exponent: f64,
    /// Content words per segment, inclusive range.
    pub min_len: usize,
    pub max_len: usize,
    /// Fraction of segments whose target side translates a different,
    /// unrelated source segment.
    pub noise_fraction: f64,
    /// Closed-class words per language.
    pub function_words: usize,
    /// Chance of a function word after each content word.
    pub function_rate: f64,
    /// Chance that a function word has its counterpart on the other side.
    pub function_translate: f64,
    /// Chance that a content word is followed by its fixed collocate, which
    /// creates indirect associations across the bitext.
    pub collocation_rate: f64,
    /// Chance that a content word is left untranslated.
    pub drop_rate: f64,
    /// Chance per content word of a spurious target content word.
    pub insert_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            segments: 1000,
            lexicon_size: 500,
            zipf_exponent: 1.0,
            min_len: 4,
            max_len: 10,
            noise_fraction: 0.1,
            function_words: 10,
            function_rate: 0.3,
            function_translate: 0.7,
            collocation_rate: 0.3,
            drop_rate: 0.05,
            insert_rate: 0.05,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthBitext {
    pub bitext: Bitext,
    /// Gold links for every clean segment.
    pub gold: GoldStandard,
    pub src_classes: WordClassMap,
    pub tgt_classes: WordClassMap,
    /// The true content-word translation pairs `(source, target)`.
    pub lexicon: Vec<(String, String)>,
    /// Per segment, whether its two sides are unrelated.
    pub noisy: Vec<bool>,
}

/// A source word and its translation, if it has one.
struct Token {
    src: String,
    tgt: Option<String>,
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthBitext> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let width = cfg.lexicon_size.max(1).to_string().len();
    let src_words: Vec<String> = (0..cfg.lexicon_size)
        .map(|i| format!("s{i:0width$}"))
        .collect();
    // Shuffle target names so that id order carries no hint of the lexicon.
    let mut tgt_words: Vec<String> = (0..cfg.lexicon_size)
        .map(|i| format!("t{i:0width$}"))
        .collect();
    tgt_words.shuffle(&mut rng);
    let src_fn: Vec<String> = (0..cfg.function_words).map(|i| format!("fs{i}")).collect();
    let tgt_fn: Vec<String> = (0..cfg.function_words).map(|i| format!("ft{i}")).collect();

    let mut src_classes = WordClassMap::new();
    let mut tgt_classes = WordClassMap::new();
    for (s, t) in src_fn.iter().zip(&tgt_fn) {
        src_classes.insert(s.clone(), WordClass::F);
        tgt_classes.insert(t.clone(), WordClass::F);
    }
    // Sentence-final punctuation, translated as itself, with its frequency.
    const EOS: [(&str, f64); 3] = [(".", 0.8), ("?", 0.1), ("!", 0.1)];
    for (p, _) in EOS {
        src_classes.insert(p, WordClass::Eos);
        tgt_classes.insert(p, WordClass::Eos);
    }
    let collocate: Vec<usize> = (0..cfg.lexicon_size)
        .map(|_| rng.random_range(0..cfg.lexicon_size.max(1)))
        .collect();

    let zipf = Zipf::new(cfg.lexicon_size as f64, cfg.zipf_exponent)
        .map_err(|e| crate::error::Error::Usage(format!("bad Zipf parameters: {e}")))?;
    let sentence = |rng: &mut ChaCha8Rng| -> Vec<Token> {
        let len = rng.random_range(cfg.min_len..=cfg.max_len);
        let mut out = Vec::new();
        for _ in 0..len {
            let first = zipf.sample(rng) as usize - 1;
            let mut words = vec![first];
            if rng.random_bool(cfg.collocation_rate) {
                words.push(collocate[first]);
            }
            for i in words {
                let tgt = (!rng.random_bool(cfg.drop_rate)).then(|| tgt_words[i].clone());
                out.push(Token {
                    src: src_words[i].clone(),
                    tgt,
                });
            }
            if cfg.function_words > 0 && rng.random_bool(cfg.function_rate) {
                let f = rng.random_range(0..cfg.function_words);
                let tgt = rng.random_bool(cfg.function_translate).then(|| tgt_fn[f].clone());
                out.push(Token {
                    src: src_fn[f].clone(),
                    tgt,
                });
            }
        }
        out
    };

    let mut segments = Vec::with_capacity(cfg.segments);
    let mut gold = GoldStandard::default();
    let mut noisy = Vec::with_capacity(cfg.segments);
    for n in 0..cfg.segments {
        let id = (n + 1).to_string();
        let is_noise = rng.random_bool(cfg.noise_fraction);
        let mut source = sentence(&mut rng);
        let translated = if is_noise {
            sentence(&mut rng)
        } else {
            source.iter().map(|t| Token { src: t.src.clone(), tgt: t.tgt.clone() }).collect()
        };

        // Target side: translations plus spurious words, in shuffled order.
        let mut tgt: Vec<(String, Option<usize>)> = translated
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.tgt.clone().map(|w| (w, Some(i))))
            .collect();
        for _ in 0..source.len() {
            if rng.random_bool(cfg.insert_rate) {
                let i = zipf.sample(&mut rng) as usize - 1;
                tgt.push((tgt_words[i].clone(), None));
            }
        }
        tgt.shuffle(&mut rng);
        // Both sides end with the same punctuation mark, linked to each other.
        let mut r: f64 = rng.random();
        let eos = EOS
            .iter()
            .find(|(_, p)| {
                r -= p;
                r < 0.0
            })
            .map_or(EOS[0].0, |e| e.0);
        tgt.push((eos.into(), Some(source.len())));
        source.push(Token {
            src: eos.into(),
            tgt: Some(eos.into()),
        });

        if !is_noise {
            let mut linked = vec![false; source.len()];
            for (j, (_, from)) in tgt.iter().enumerate() {
                let link = TokenLink { src: *from, tgt: Some(j) };
                if let Some(i) = from {
                    linked[*i] = true;
                }
                gold.insert(SYNTH_ANNOTATOR, &id, link);
            }
            for (i, _) in linked.iter().enumerate().filter(|(_, l)| !**l) {
                gold.insert(SYNTH_ANNOTATOR, &id, TokenLink { src: Some(i), tgt: None });
            }
        }
        noisy.push(is_noise);
        segments.push((
            id,
            source.into_iter().map(|t| t.src).collect::<Vec<_>>(),
            tgt.into_iter().map(|t| t.0).collect::<Vec<_>>(),
        ));
    }

    let mut lexicon: Vec<(String, String)> = src_words.into_iter().zip(tgt_words).collect();
    lexicon.sort();
    Ok(SynthBitext {
        bitext: Bitext::from_segments(segments)?,
        gold,
        src_classes,
        tgt_classes,
        lexicon,
        noisy,
    })
}
