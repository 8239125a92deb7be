use std::collections::BTreeMap;

use crate::cooc::{count_cooc, init_likelihoods, sgt_smooth, CoocTable};
use crate::corpus::{Bitext, Side, WordClassMap};
use crate::error::{Error, Result};
use crate::linking::{link_bitext, LikelihoodTable, LinkCounts};
use crate::vocab::WordId;

use super::aux::{
    estimate_aux, estimate_aux_by_class, method_b_likelihoods, AuxModel, AuxParams, HillClimb,
    LinkObservations,
};
use super::model::{
    change_between, loglike_from_model, normalize_links, Method, TranslationModel,
};
use super::model1::{table_change, Model1Direction};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub method: Method,
    pub max_iters: usize,
    pub threshold: f64,
    /// Simple Good-Turing smoothing of the counts behind the G² initialization.
    pub smoothing: bool,
    pub hill_climb: HillClimb,
    /// Link classes with less co-occurrence mass than this use the global
    /// noise parameters (Method C).
    pub min_class_mass: f64,
    /// Add a NULL token to every input segment (Model 1).
    pub model1_null: bool,
    /// Route words whose likelihoods are all negative to NULL (Methods B, C).
    pub uncertain_to_null: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            method: Method::A,
            max_iters: 100,
            threshold: 1e-4,
            smoothing: true,
            hill_climb: HillClimb::default(),
            min_class_mass: 100.0,
            model1_null: true,
            uncertain_to_null: true,
        }
    }
}

impl TrainConfig {
    pub fn new(method: Method) -> Self {
        TrainConfig {
            method,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Usage("max-iters must be at least 1".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Usage("convergence threshold must be positive".into()));
        }
        if !(self.hill_climb.grid_step > 0.0 && self.hill_climb.grid_step < 1.0) {
            return Err(Error::Usage("hill-climb grid step must lie in (0,1)".into()));
        }
        if !(self.hill_climb.min_step > 0.0) {
            return Err(Error::Usage("hill-climb minimum step must be positive".into()));
        }
        if !(self.min_class_mass >= 0.0) {
            return Err(Error::Usage("minimum class mass must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    /// `1 - Dice` against the previous iteration's model; `None` on the first.
    pub delta: Option<f64>,
    /// K for the competitive-linking methods.
    pub links_total: Option<f64>,
    /// Noise parameters estimated in this iteration (Methods B, C).
    pub aux: Vec<AuxParams>,
    /// Training log-likelihood per direction after the update (Model 1).
    pub log_likelihood: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub iterations: Vec<IterationLog>,
    pub converged: bool,
}

impl ConvergenceReport {
    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }

    /// Tab-separated log: `iteration delta links_total log_lik_fwd log_lik_bwd`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("iteration\tdelta\tlinks_total\tloglik_src_to_tgt\tloglik_tgt_to_src\n");
        let na = |x: Option<f64>| x.map_or_else(|| "na".to_string(), |x| x.to_string());
        for it in &self.iterations {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                it.iteration,
                na(it.delta),
                na(it.links_total),
                na(it.log_likelihood.map(|l| l.0)),
                na(it.log_likelihood.map(|l| l.1)),
            ));
        }
        out
    }
}

/// Everything a training run produced. For Model 1 only `model` and
/// `report` are meaningful; the other tables are empty.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: TranslationModel,
    /// Likelihoods derived from the final link counts.
    pub likelihoods: LikelihoodTable,
    pub aux: Option<AuxModel>,
    pub cooc: CoocTable,
    pub links: LinkCounts,
    pub report: ConvergenceReport,
}

/// Trains a model. Method C needs `(source, target)` class maps.
pub fn train(
    bitext: &Bitext,
    cfg: &TrainConfig,
    classes: Option<(&WordClassMap, &WordClassMap)>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if bitext.is_empty() {
        return Err(Error::Usage("cannot train on an empty bitext".into()));
    }
    match cfg.method {
        Method::Model1 => train_model1(bitext, cfg),
        Method::C if classes.is_none() => Err(Error::Usage(
            "method C needs word-class maps for both languages".into(),
        )),
        _ => train_linking(bitext, cfg, classes),
    }
}

fn train_linking(
    bitext: &Bitext,
    cfg: &TrainConfig,
    classes: Option<(&WordClassMap, &WordClassMap)>,
) -> Result<TrainOutcome> {
    let cooc = count_cooc(bitext);
    let initial = if cfg.smoothing {
        let smoothed = sgt_smooth(&cooc)?;
        if let Some(reason) = &smoothed.skipped {
            log::warn!("smoothing skipped: {reason}");
        }
        smoothed.table
    } else {
        cooc.clone()
    };
    let mut like = init_likelihoods(&initial);
    let class_index = classes.map(|(src, tgt)| {
        (
            src.resolve(bitext.src_vocab()),
            tgt.resolve(bitext.tgt_vocab()),
        )
    });

    let mut prev: Option<TranslationModel> = None;
    let mut log = Vec::new();
    let mut converged = false;
    let mut aux_model = None;
    let (model, links, final_like) = loop {
        let iteration = log.len() + 1;
        let links = link_bitext(bitext, &like);
        links.check_against(&cooc, bitext.src_vocab(), bitext.tgt_vocab())?;
        let model = normalize_links(
            &links,
            cfg.method,
            iteration,
            bitext.src_vocab().clone(),
            bitext.tgt_vocab().clone(),
        )?;
        let delta = prev.as_ref().map(|p| change_between(p, &model));

        let mut aux_log = Vec::new();
        like = match cfg.method {
            Method::A => loglike_from_model(&model),
            Method::B | Method::C => {
                let aux = match &class_index {
                    Some((src, tgt)) if cfg.method == Method::C => estimate_aux_by_class(
                        &links,
                        &cooc,
                        src.clone(),
                        tgt.clone(),
                        &cfg.hill_climb,
                        cfg.min_class_mass,
                    )?,
                    _ => AuxModel::Global(
                        estimate_aux(
                            &LinkObservations::from_tables(&links, &cooc, |_| true)?,
                            &cfg.hill_climb,
                        )?
                        .params,
                    ),
                };
                aux_log = aux.all_params();
                let mut next = method_b_likelihoods(&links, &cooc, &aux)?;
                if cfg.uncertain_to_null {
                    route_uncertain_to_null(&mut next);
                }
                aux_model = Some(aux);
                next
            }
            Method::Model1 => unreachable!("Model 1 does not use competitive linking"),
        };

        log.push(IterationLog {
            iteration,
            delta,
            links_total: Some(links.total()),
            aux: aux_log,
            log_likelihood: None,
        });
        if delta.is_some_and(|d| d < cfg.threshold) {
            converged = true;
            break (model, links, like);
        }
        if iteration >= cfg.max_iters {
            break (model, links, like);
        }
        prev = Some(model);
    };
    if !converged {
        log::warn!(
            "method {} did not converge within {} iterations",
            cfg.method,
            cfg.max_iters
        );
    }
    Ok(TrainOutcome {
        model,
        likelihoods: final_like,
        aux: aux_model,
        cooc,
        links,
        report: ConvergenceReport {
            iterations: log,
            converged,
        },
    })
}

/// Removes the word-to-word entries of every word whose likelihoods are all
/// negative, so competitive linking sends its tokens to NULL.
fn route_uncertain_to_null(like: &mut LikelihoodTable) {
    let mut best_src: BTreeMap<WordId, f64> = BTreeMap::new();
    let mut best_tgt: BTreeMap<WordId, f64> = BTreeMap::new();
    for ((u, v), x) in like.iter() {
        if !u.is_null() {
            let b = best_src.entry(u).or_insert(f64::NEG_INFINITY);
            *b = b.max(x);
        }
        if !v.is_null() {
            let b = best_tgt.entry(v).or_insert(f64::NEG_INFINITY);
            *b = b.max(x);
        }
    }
    let uncertain = |best: &BTreeMap<WordId, f64>, w: WordId| best.get(&w).is_some_and(|&b| b < 0.0);
    let doomed: Vec<(WordId, WordId)> = like
        .iter()
        .map(|(pair, _)| pair)
        .filter(|&(u, v)| {
            !u.is_null() && !v.is_null() && (uncertain(&best_src, u) || uncertain(&best_tgt, v))
        })
        .collect();
    for (u, v) in doomed {
        like.remove(u, v);
    }
}

fn train_model1(bitext: &Bitext, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let mut forward = Model1Direction::new(bitext, Side::Src, cfg.model1_null);
    let mut backward = Model1Direction::new(bitext, Side::Tgt, cfg.model1_null);
    let mut prev = (forward.table(), backward.table());
    let mut log = Vec::new();
    let mut converged = false;
    for iteration in 1..=cfg.max_iters {
        let ll = (forward.step(), backward.step());
        let curr = (forward.table(), backward.table());
        let delta = table_change(&prev.0, &curr.0).max(table_change(&prev.1, &curr.1));
        log.push(IterationLog {
            iteration,
            delta: Some(delta),
            links_total: None,
            aux: Vec::new(),
            log_likelihood: Some(ll),
        });
        prev = curr;
        if delta < cfg.threshold {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("Model 1 did not converge within {} iterations", cfg.max_iters);
    }
    let model = TranslationModel::from_conditionals(
        Method::Model1,
        log.len(),
        bitext.src_vocab().clone(),
        bitext.tgt_vocab().clone(),
        forward.conditional(),
        backward.conditional(),
    );
    Ok(TrainOutcome {
        model,
        likelihoods: LikelihoodTable::new(),
        aux: None,
        cooc: CoocTable::default(),
        links: LinkCounts::default(),
        report: ConvergenceReport {
            iterations: log,
            converged,
        },
    })
}
