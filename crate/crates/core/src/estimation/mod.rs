//! Training loops: Methods A, B and C built on competitive linking, and the
//! Model 1 baseline.

mod aux;
mod model;
mod model1;
mod train;

pub use aux::{
    estimate_aux, estimate_aux_by_class, method_b_likelihoods, mixing_weight, AuxFit, AuxModel,
    AuxParams, HillClimb, LinkClassKey, LinkObservations,
};
pub use model::{
    change_between, converged, fuzzy_dice, loglike_from_model, normalize_links, Conditional,
    Method, TranslationModel,
};
pub use model1::{table_change, Model1Direction};
pub use train::{train, ConvergenceReport, IterationLog, TrainConfig, TrainOutcome};
