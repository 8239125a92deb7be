//! Symmetric word-to-word translation models estimated from sentence-aligned
//! bitexts by competitive linking.

pub mod cooc;
pub mod corpus;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod linking;
pub mod model_io;
pub mod smoothing;
pub mod synth;
pub mod vocab;

pub use cooc::{count_cooc, g2_score, init_likelihoods, sgt_smooth, CoocTable, ContingencyCells};
pub use corpus::{
    load_bitext, load_classes, load_gold, Bitext, ClassIndex, GoldStandard, SegmentPair, Side,
    TokenLink, WordClass, WordClassMap,
};
pub use error::{Error, Result};
pub use estimation::{train, Method, TrainConfig, TrainOutcome, TranslationModel};
pub use model_io::{read_model, write_model, ModelFile, ModelHeader};
pub use linking::{link_bitext, link_segment, Assignment, LikelihoodTable, LinkCounts};
pub use vocab::{Vocab, WordId, WordPair};
