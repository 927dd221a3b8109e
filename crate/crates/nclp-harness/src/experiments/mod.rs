//! Experiment registry. Each suite runs seeded trials in parallel, collects
//! them in trial order and turns metric maxima into assertions.

mod algebra;
mod calderon;
mod kernels;

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::instances::trial_rng;
use crate::report::{Assertion, Report, Trial};
use crate::Result;

/// Tolerance for exact identities.
pub(crate) const EXACT: f64 = 1e-10;
/// Tolerance for inequalities with an explicit constant.
pub(crate) const SLACK: f64 = 1e-8;

/// Metrics of one trial plus the digest of its inputs.
pub(crate) struct Outcome {
    pub digest: String,
    pub metrics: BTreeMap<String, f64>,
}

impl Outcome {
    pub fn new(digest: String) -> Self {
        Outcome { digest, metrics: BTreeMap::new() }
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.to_string(), v);
    }

    /// Keeps the larger value; NaN wins so failures stay visible.
    pub fn max(&mut self, name: &str, v: f64) {
        let e = self.metrics.entry(name.to_string()).or_insert(f64::NEG_INFINITY);
        *e = worst(*e, v);
    }
}

pub(crate) fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Assertion `name`: the largest value of `metric` over all trials is at most `threshold`.
pub(crate) struct Check {
    pub name: &'static str,
    pub metric: &'static str,
    pub threshold: f64,
}

pub(crate) const fn check(name: &'static str, metric: &'static str, threshold: f64) -> Check {
    Check { name, metric, threshold }
}

pub(crate) fn run_trials<F>(cfg: &ExperimentConfig, trial: F) -> Result<Vec<Outcome>>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Outcome> + Sync,
{
    (0..cfg.trials).into_par_iter().map(|i| trial(i, &mut trial_rng(cfg.seed, i))).collect()
}

pub(crate) fn finish(cfg: &ExperimentConfig, outcomes: Vec<Outcome>, checks: &[Check], extra: Vec<Assertion>) -> Report {
    let trials: Vec<Trial> = outcomes
        .into_iter()
        .enumerate()
        .map(|(id, o)| {
            let pass = checks.iter().all(|c| o.metrics.get(c.metric).is_none_or(|&v| v <= c.threshold));
            Trial { id, inputs_digest: o.digest, metrics: o.metrics, pass }
        })
        .collect();
    let mut assertions: Vec<Assertion> = checks
        .iter()
        .map(|c| {
            let measured = trials.iter().filter_map(|t| t.metrics.get(c.metric)).fold(f64::NEG_INFINITY, |a, &v| worst(a, v));
            // a metric no trial produced is vacuous
            let measured = if measured == f64::NEG_INFINITY { 0.0 } else { measured };
            Assertion::at_most(c.name, measured, c.threshold)
        })
        .collect();
    assertions.extend(extra);
    Report::new(cfg.clone(), trials, assertions)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    use Experiment::*;
    match cfg.experiment {
        Norms => algebra::norms(cfg),
        Cuculescu => algebra::cuculescu(cfg),
        Gundy => algebra::gundy(cfg),
        TransformWeak11 => algebra::transform_weak11(cfg),
        TransformL2 => algebra::transform_l2(cfg),
        Bmo => algebra::bmo(cfg),
        Ergodic => algebra::ergodic(cfg),
        Cross => algebra::cross(cfg),
        Cz => calderon::cz(cfg),
        Zeta => calderon::zeta(cfg),
        ThmB1 => calderon::thm_b1(cfg),
        PseudolocDecay => kernels::decay(cfg),
        Ksk => kernels::ksk(cfg),
        Paraproduct => kernels::paraproduct(cfg),
        Vanish => kernels::vanish(cfg),
        Localization => kernels::localization(cfg),
        NcPseudoloc => kernels::nc_pseudoloc(cfg),
        BmoCzo => kernels::bmo_czo(cfg),
    }
}
