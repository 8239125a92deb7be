//! Two-binomial noise model: `links(u,v)` out of `cooc(u,v)` is drawn from
//! Binomial(λ⁺) for mutual translations and Binomial(λ⁻) otherwise, mixed
//! with weight τ = (K/N − λ⁻) / (λ⁺ − λ⁻).

use std::collections::BTreeMap;
use std::fmt;

use crate::cooc::CoocTable;
use crate::corpus::{ClassIndex, WordClass};
use crate::error::{Error, Result};
use crate::linking::{LikelihoodTable, LinkCounts};
use crate::vocab::{WordId, WordPair};

/// Ordered `(source class, target class)` pair of a link type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkClassKey {
    pub src: WordClass,
    pub tgt: WordClass,
}

impl fmt::Display for LinkClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.src, self.tgt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxParams {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// K/N over the pairs the parameters were fitted to.
    pub lambda: f64,
    pub tau: f64,
    pub link_class: Option<LinkClassKey>,
}

impl AuxParams {
    pub fn new(lambda_plus: f64, lambda_minus: f64, lambda: f64) -> Self {
        AuxParams {
            lambda_plus,
            lambda_minus,
            lambda,
            tau: mixing_weight(lambda_plus, lambda_minus, lambda),
            link_class: None,
        }
    }

    /// `1 > λ⁺ > λ > λ⁻ > 0` and `0 < τ < 1`.
    pub fn is_valid(&self) -> bool {
        in_region(self.lambda_plus, self.lambda_minus, self.lambda)
            && self.tau > 0.0
            && self.tau < 1.0
    }

    /// Log-likelihood ratio of `links` out of `cooc` under the two
    /// binomials. Binomial coefficients cancel.
    pub fn log_ratio(&self, links: f64, cooc: f64) -> f64 {
        links * (self.lambda_plus / self.lambda_minus).ln()
            + (cooc - links) * ((1.0 - self.lambda_plus) / (1.0 - self.lambda_minus)).ln()
    }
}

pub fn mixing_weight(lambda_plus: f64, lambda_minus: f64, lambda: f64) -> f64 {
    (lambda - lambda_minus) / (lambda_plus - lambda_minus)
}

fn in_region(lambda_plus: f64, lambda_minus: f64, lambda: f64) -> bool {
    1.0 > lambda_plus && lambda_plus > lambda && lambda > lambda_minus && lambda_minus > 0.0
}

/// Search schedule for the noise parameters: a coarse grid, then coordinate
/// ascent with step halving.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HillClimb {
    pub grid_step: f64,
    pub min_step: f64,
}

impl Default for HillClimb {
    fn default() -> Self {
        HillClimb {
            grid_step: 0.05,
            min_step: 1e-6,
        }
    }
}

/// Outcome of [`estimate_aux`]. `path` holds the objective after the grid
/// search and after every accepted ascent move.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxFit {
    pub params: AuxParams,
    pub objective: f64,
    pub path: Vec<f64>,
}

/// `(links, cooc)` observations with multiplicities.
#[derive(Clone, Debug, Default)]
pub struct LinkObservations {
    counts: BTreeMap<(u64, u64), f64>,
    links: f64,
    cooc: f64,
}

impl LinkObservations {
    pub fn push(&mut self, links: f64, cooc: f64) {
        *self
            .counts
            .entry((links.to_bits(), cooc.to_bits()))
            .or_default() += 1.0;
        self.links += links;
        self.cooc += cooc;
    }

    /// One observation per co-occurring pair of `cooc`, restricted to `keep`.
    pub fn from_tables(
        links: &LinkCounts,
        cooc: &CoocTable,
        mut keep: impl FnMut(WordPair) -> bool,
    ) -> Result<Self> {
        let mut obs = LinkObservations::default();
        for (pair, n) in cooc.iter() {
            if keep(pair) {
                obs.push(links.get(pair.0, pair.1), n);
            }
        }
        for (pair, k) in links.iter() {
            if keep(pair) && k > cooc.get(pair.0, pair.1) {
                return Err(Error::AuxEstimation(format!(
                    "{k} links for a pair that co-occurs {} times",
                    cooc.get(pair.0, pair.1)
                )));
            }
        }
        Ok(obs)
    }

    /// λ = K/N.
    pub fn lambda(&self) -> f64 {
        self.links / self.cooc
    }

    pub fn cooc_mass(&self) -> f64 {
        self.cooc
    }

    /// `Σ log[τ B(k|n,λ⁺) + (1−τ) B(k|n,λ⁻)]`, binomial coefficients
    /// dropped (they do not depend on the parameters).
    pub fn mixture_log_likelihood(&self, lambda_plus: f64, lambda_minus: f64) -> f64 {
        let tau = mixing_weight(lambda_plus, lambda_minus, self.lambda());
        let (ln_tau, ln_not_tau) = (tau.ln(), (1.0 - tau).ln());
        let (lp, lq) = (lambda_plus.ln(), (1.0 - lambda_plus).ln());
        let (mp, mq) = (lambda_minus.ln(), (1.0 - lambda_minus).ln());
        self.counts
            .iter()
            .map(|(&(k, n), &mult)| {
                let (k, n) = (f64::from_bits(k), f64::from_bits(n));
                let hi = ln_tau + k * lp + (n - k) * lq;
                let lo = ln_not_tau + k * mp + (n - k) * mq;
                mult * log_add_exp(hi, lo)
            })
            .sum()
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Grid points strictly inside `(lo, hi)`: multiples of `step` when at least
/// three fit, otherwise 19 evenly spaced points. Returns the spacing used.
fn grid(lo: f64, hi: f64, step: f64) -> (Vec<f64>, f64) {
    let points: Vec<f64> = (1..)
        .map(|i| i as f64 * step)
        .take_while(|&x| x < 1.0)
        .filter(|&x| x > lo && x < hi)
        .collect();
    if points.len() >= 3 {
        (points, step)
    } else {
        let spacing = (hi - lo) / 20.0;
        ((1..20).map(|i| lo + i as f64 * spacing).collect(), spacing)
    }
}

/// Maximum-likelihood `(λ⁺, λ⁻)` for the link-count distribution.
pub fn estimate_aux(obs: &LinkObservations, schedule: &HillClimb) -> Result<AuxFit> {
    let lambda = obs.lambda();
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::AuxEstimation(format!(
            "no grid point satisfies 1 > λ⁺ > λ > λ⁻ > 0 with λ = K/N = {lambda}"
        )));
    }
    let (plus_grid, mut plus_step) = grid(lambda, 1.0, schedule.grid_step);
    let (minus_grid, mut minus_step) = grid(0.0, lambda, schedule.grid_step);

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &lp in &plus_grid {
        for &lm in &minus_grid {
            let ll = obs.mixture_log_likelihood(lp, lm);
            if ll > best.0 {
                best = (ll, lp, lm);
            }
        }
    }
    let (mut objective, mut lp, mut lm) = best;
    if !objective.is_finite() {
        return Err(Error::AuxEstimation(
            "mixture likelihood is not finite anywhere on the grid".into(),
        ));
    }
    let mut path = vec![objective];

    while plus_step >= schedule.min_step || minus_step >= schedule.min_step {
        let mut moved = false;
        for (dp, dm) in [
            (plus_step, 0.0),
            (-plus_step, 0.0),
            (0.0, minus_step),
            (0.0, -minus_step),
        ] {
            let (cp, cm) = (lp + dp, lm + dm);
            if (dp == 0.0 && dm == 0.0) || !in_region(cp, cm, lambda) {
                continue;
            }
            let ll = obs.mixture_log_likelihood(cp, cm);
            if ll > objective {
                (objective, lp, lm) = (ll, cp, cm);
                path.push(objective);
                moved = true;
            }
        }
        if !moved {
            plus_step /= 2.0;
            minus_step /= 2.0;
        }
    }

    let params = AuxParams::new(lp, lm, lambda);
    if !params.is_valid() {
        return Err(Error::AuxEstimation(format!(
            "estimate left the region of interest: {params:?}"
        )));
    }
    Ok(AuxFit {
        params,
        objective,
        path,
    })
}

/// Noise parameters to apply to each link type.
#[derive(Clone, Debug)]
pub enum AuxModel {
    Global(AuxParams),
    ByClass {
        global: AuxParams,
        classes: BTreeMap<LinkClassKey, AuxParams>,
        src: ClassIndex,
        tgt: ClassIndex,
    },
}

impl AuxModel {
    pub fn params_for(&self, u: WordId, v: WordId) -> &AuxParams {
        match self {
            AuxModel::Global(p) => p,
            AuxModel::ByClass {
                global,
                classes,
                src,
                tgt,
            } => {
                let key = LinkClassKey {
                    src: src.get(u),
                    tgt: tgt.get(v),
                };
                classes.get(&key).unwrap_or(global)
            }
        }
    }

    /// Global parameters first, then any class-specific ones.
    pub fn all_params(&self) -> Vec<AuxParams> {
        match self {
            AuxModel::Global(p) => vec![*p],
            AuxModel::ByClass {
                global, classes, ..
            } => std::iter::once(*global)
                .chain(classes.values().copied())
                .collect(),
        }
    }
}

/// Fits one set of noise parameters per link class whose co-occurrence mass
/// reaches `min_class_mass`; other classes use the global fit.
pub fn estimate_aux_by_class(
    links: &LinkCounts,
    cooc: &CoocTable,
    src: ClassIndex,
    tgt: ClassIndex,
    schedule: &HillClimb,
    min_class_mass: f64,
) -> Result<AuxModel> {
    let global = estimate_aux(&LinkObservations::from_tables(links, cooc, |_| true)?, schedule)?
        .params;
    let mut keys: BTreeMap<LinkClassKey, ()> = BTreeMap::new();
    for ((u, v), _) in cooc.iter() {
        keys.insert(
            LinkClassKey {
                src: src.get(u),
                tgt: tgt.get(v),
            },
            (),
        );
    }
    let mut classes = BTreeMap::new();
    for key in keys.into_keys() {
        let obs = LinkObservations::from_tables(links, cooc, |(u, v)| {
            src.get(u) == key.src && tgt.get(v) == key.tgt
        })?;
        if obs.cooc_mass() < min_class_mass {
            continue;
        }
        match estimate_aux(&obs, schedule) {
            Ok(fit) => {
                let mut params = fit.params;
                params.link_class = Some(key);
                classes.insert(key, params);
            }
            Err(e) => log::debug!("class {key} falls back to global parameters: {e}"),
        }
    }
    Ok(AuxModel::ByClass {
        global,
        classes,
        src,
        tgt,
    })
}

/// `like(u,v) = log B(links|cooc,λ⁺) − log B(links|cooc,λ⁻)` for every
/// co-occurring pair, NULL pairs included.
pub fn method_b_likelihoods(
    links: &LinkCounts,
    cooc: &CoocTable,
    aux: &AuxModel,
) -> Result<LikelihoodTable> {
    let mut like = LikelihoodTable::new();
    for ((u, v), n) in cooc.iter() {
        let k = links.get(u, v);
        if k > n {
            return Err(Error::LinksExceedCooc {
                u: format!("{u:?}"),
                v: format!("{v:?}"),
                links: k,
                cooc: n,
            });
        }
        like.insert(u, v, aux.params_for(u, v).log_ratio(k, n));
    }
    for ((u, v), k) in links.iter() {
        if cooc.get(u, v) == 0.0 {
            return Err(Error::LinksExceedCooc {
                u: format!("{u:?}"),
                v: format!("{v:?}"),
                links: k,
                cooc: 0.0,
            });
        }
    }
    Ok(like)
}
