mod common;

use proptest::prelude::*;
use wordlink::evaluation::{
    evaluate, extract_lexicon, log_log_slope, precision_recall, prob_multi_rare, recall_by_type,
    singleton_fraction, FuzzyLinkSet, Task,
};
use wordlink::synth::{generate, SynthConfig};
use wordlink::{train, Method, TrainConfig};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

fn fuzzy_set() -> impl Strategy<Value = FuzzyLinkSet<u8>> {
    prop::collection::btree_map(0u8..30, 0.01f64..=1.0, 1..20)
        .prop_map(|m| m.into_iter().collect())
}

/// Every outcome of `gamma` Bernoulli trials, summed directly.
fn multi_rare_enumerated(gamma: u32, p: f64) -> f64 {
    (0u32..1 << gamma)
        .filter(|m| m.count_ones() >= 2)
        .map(|m| p.powi(m.count_ones() as i32) * (1.0 - p).powi((gamma - m.count_ones()) as i32))
        .sum()
}

proptest! {
    #[test]
    fn dice_is_the_harmonic_mean(x in fuzzy_set(), y in fuzzy_set()) {
        let s = precision_recall(&x, &y).unwrap();
        let harmonic = if s.precision + s.recall == 0.0 {
            0.0
        } else {
            2.0 * s.precision * s.recall / (s.precision + s.recall)
        };
        prop_assert!((s.dice - harmonic).abs() < 1e-12);
        let t = precision_recall(&y, &x).unwrap();
        prop_assert!((s.dice - t.dice).abs() < 1e-12);
        prop_assert!((s.precision - t.recall).abs() < 1e-12);
    }

    #[test]
    fn crisp_sets_count_elements(a in prop::collection::btree_set(0u8..40, 1..20), b in prop::collection::btree_set(0u8..40, 1..20)) {
        let x: FuzzyLinkSet<u8> = a.iter().map(|&k| (k, 1.0)).collect();
        let y: FuzzyLinkSet<u8> = b.iter().map(|&k| (k, 1.0)).collect();
        let shared = a.intersection(&b).count() as f64;
        let s = precision_recall(&x, &y).unwrap();
        prop_assert!((s.precision - shared / a.len() as f64).abs() < 1e-12);
        prop_assert!((s.recall - shared / b.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn multi_rare_matches_enumeration(gamma in 0u32..=10, p in 0.0f64..=1.0) {
        let x = prob_multi_rare(gamma as u64, p);
        prop_assert!((x - multi_rare_enumerated(gamma, p)).abs() < 1e-12);
    }

    #[test]
    fn multi_rare_is_monotone(gamma in 0u64..50, p in 0.0f64..0.99) {
        prop_assert!(prob_multi_rare(gamma + 1, p) >= prob_multi_rare(gamma, p) - 1e-15);
        prop_assert!(prob_multi_rare(gamma, p + 0.01) >= prob_multi_rare(gamma, p) - 1e-15);
    }
}

#[test]
fn lexicons_nest_under_thresholds() {
    let s = generate(&SynthConfig {
        segments: 200,
        lexicon_size: 100,
        ..SynthConfig::default()
    })
    .unwrap();
    let out = train(&s.bitext, &TrainConfig::new(Method::A), None).unwrap();
    let (src, tgt) = (s.bitext.src_vocab(), s.bitext.tgt_vocab());
    let lex = |t: f64| extract_lexicon(&out.likelihoods, &out.links, &out.cooc, src, tgt, t);
    let mut prev = lex(f64::NEG_INFINITY);
    let mut prev_recall = recall_by_type(&prev, &s.bitext).combined.covered;
    for t in [-10.0, -5.0, -3.0, -2.0, -1.0, 0.0] {
        let cur = lex(t);
        assert!(cur.entries.iter().all(|e| prev.entries.contains(e)));
        let recall = recall_by_type(&cur, &s.bitext).combined.covered;
        assert!(recall <= prev_recall);
        (prev, prev_recall) = (cur, recall);
    }
    assert!(lex(f64::INFINITY).is_empty());
}

#[test]
fn zipf_singletons_fall_along_a_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let zipf = Zipf::new(50_000.0, 1.1).unwrap();
    let tokens: Vec<u64> = (0..200_000).map(|_| zipf.sample(&mut rng) as u64).collect();
    let sizes = [1_000, 2_000, 5_000, 10_000, 20_000, 50_000, 100_000];
    let points = singleton_fraction(&tokens, &sizes, 5, 1, 9).unwrap();
    assert!(points.windows(2).all(|w| w[1].fraction < w[0].fraction));
    let slope = log_log_slope(&points).unwrap();
    assert!(slope < -0.05 && slope > -1.0, "{slope}");
}

#[test]
fn direction_average_is_the_mean_of_directions() {
    let s = generate(&SynthConfig {
        segments: 120,
        lexicon_size: 80,
        ..SynthConfig::default()
    })
    .unwrap();
    let out = train(&s.bitext, &TrainConfig::new(Method::A), None).unwrap();
    for task in [Task::SingleBest, Task::WholeDistribution] {
        let r = evaluate(&out.model, &s.bitext, &s.gold, task, None).unwrap();
        let mean = (r.directions[0].mean.dice + r.directions[1].mean.dice) / 2.0;
        assert!((r.mean.dice - mean).abs() < 1e-12);
    }
}
