//! Token-level scoring against gold standards, lexicon extraction, and
//! sparse-data measurements.

mod analysis;
mod lexicon;
mod metrics;
mod predict;

pub use analysis::{
    link_ratio_histogram, log_log_slope, singleton_fraction, RatioHistogram, SingletonPoint,
};
pub use lexicon::{
    extract_lexicon, recall_by_type, Coverage, Lexicon, LexiconEntry, Plateau, TypeRecall,
};
pub use metrics::{precision_recall, prob_multi_rare, FuzzyLinkSet, Overlap, Scores};
pub use predict::{
    evaluate, gold_link_set, predict_single_best, predict_whole_distribution, DirectionReport,
    EvalLink, EvalReport, OpenClassFilter, Task,
};
