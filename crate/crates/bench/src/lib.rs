//! Benchmarks for the wordlink pipeline. Run with `cargo bench -p wordlink-bench`.

use wordlink::synth::{generate, SynthBitext, SynthConfig};

/// The synthetic bitext used by every benchmark, at a given size.
pub fn fixture(segments: usize) -> SynthBitext {
    generate(&SynthConfig {
        segments,
        lexicon_size: segments / 2,
        seed: 7,
        ..SynthConfig::default()
    })
    .expect("synthetic bitext")
}
