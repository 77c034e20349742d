//! Row-resampling bootstrap of the evidence function.
//!
//! Each replicate draws `n` rows with replacement, evaluates the evidence
//! difference once on that resample and stores the single number. The two
//! models are never bootstrapped separately, so the covariance between their
//! log-likelihoods is carried by the sample.
//!
//! Replicate `b` uses the random stream `(seed, b, attempt)`. A replicate whose
//! fit fails (rank deficient design, zero residual variance) is redrawn with
//! the next attempt counter and counted as rejected. Results are merged by
//! replicate index, so the value vector does not depend on the worker count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{raw_evidence_specified, Mode, Penalty};
use crate::model::{fit_mle, log_likelihood, Dataset, FittedLinearModel, LinearModelSpace, SpecifiedModel};
use crate::rng;

/// Analysis default, 4000 resamples.
pub const DEFAULT_REPLICATES: usize = 4000;
/// Default replicate count inside simulation trials.
pub const SIMULATION_REPLICATES: usize = 1000;
pub const DEFAULT_MAX_REJECT_FRACTION: f64 = 0.05;

// per-replicate redraw cap; hitting it means the data cannot support the fit
const MAX_ATTEMPTS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub mode: Mode,
    pub max_reject_fraction: f64,
}

impl BootstrapConfig {
    pub fn new(mode: Mode, replicates: usize, seed: u64) -> Self {
        Self { replicates, seed, mode, max_reject_fraction: DEFAULT_MAX_REJECT_FRACTION }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("bootstrap replicate count must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.max_reject_fraction) {
            return Err(Error::InvalidConfig(format!(
                "max_reject_fraction {} is outside [0, 1)",
                self.max_reject_fraction
            )));
        }
        Ok(())
    }
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self::new(Mode::Global, DEFAULT_REPLICATES, 0)
    }
}

/// The two models being compared.
#[derive(Debug, Clone)]
pub enum ModelPair {
    Spaces { reference: LinearModelSpace, alternative: LinearModelSpace },
    Specified { reference: SpecifiedModel, alternative: SpecifiedModel },
}

impl ModelPair {
    pub fn spaces(reference: LinearModelSpace, alternative: LinearModelSpace) -> Self {
        ModelPair::Spaces { reference, alternative }
    }

    pub fn specified(reference: SpecifiedModel, alternative: SpecifiedModel) -> Self {
        ModelPair::Specified { reference, alternative }
    }
}

/// Bootstrap replicates of the evidence for one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSample {
    pub values: Vec<f64>,
    pub mode: Mode,
    pub penalty: Penalty,
    pub n: usize,
    pub rejected: usize,
    pub seed: u64,
}

impl EvidenceSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Row indices of resample `replicate`, redraw `attempt`.
pub fn resample_indices(n: usize, seed: u64, replicate: u64, attempt: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed, &[replicate, attempt]);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// `n` rows drawn uniformly with replacement, determined by `(seed, replicate)`.
pub fn resample_rows(data: &Dataset, replicate: u64, seed: u64) -> Dataset {
    data.select(&resample_indices(data.len(), seed, replicate, 0))
}

struct Replicate {
    values: [f64; 2],
    rejected: usize,
}

/// Draw resamples for replicate `b` until `eval` succeeds.
fn run_replicate<F>(data: &Dataset, seed: u64, b: u64, eval: &F) -> Result<Replicate>
where
    F: Fn(&Dataset) -> Result<[f64; 2]> + Sync,
{
    for attempt in 0..MAX_ATTEMPTS {
        let boot = data.select(&resample_indices(data.len(), seed, b, attempt));
        match eval(&boot) {
            Ok(values) => return Ok(Replicate { values, rejected: attempt as usize }),
            Err(e) if e.is_replicate_failure() => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::TooManyRejections { rejected: MAX_ATTEMPTS as usize, accepted: 0, max_fraction: 0.0 })
}

fn run_all<F>(data: &Dataset, cfg: &BootstrapConfig, eval: F) -> Result<(Vec<[f64; 2]>, usize)>
where
    F: Fn(&Dataset) -> Result<[f64; 2]> + Sync,
{
    let results: Vec<Result<Replicate>> =
        (0..cfg.replicates as u64).into_par_iter().map(|b| run_replicate(data, cfg.seed, b, &eval)).collect();
    let mut values = Vec::with_capacity(cfg.replicates);
    let mut rejected = 0;
    for r in results {
        match r {
            Ok(rep) => {
                rejected += rep.rejected;
                values.push(rep.values);
            }
            Err(Error::TooManyRejections { .. }) => {
                return Err(Error::TooManyRejections {
                    rejected: MAX_ATTEMPTS as usize,
                    accepted: values.len(),
                    max_fraction: cfg.max_reject_fraction,
                })
            }
            Err(e) => return Err(e),
        }
    }
    let fraction = rejected as f64 / (cfg.replicates + rejected) as f64;
    if fraction > cfg.max_reject_fraction {
        return Err(Error::TooManyRejections {
            rejected,
            accepted: cfg.replicates,
            max_fraction: cfg.max_reject_fraction,
        });
    }
    Ok((values, rejected))
}

fn evaluate_pair(
    fit_ref: &FittedLinearModel,
    fit_alt: &FittedLinearModel,
    eval: &Dataset,
    penalty_term: f64,
) -> Result<f64> {
    let v = -2.0 * (log_likelihood(fit_alt, eval)? - log_likelihood(fit_ref, eval)?) + penalty_term;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteLikelihood("evidence".into()))
    }
}

fn check_spaces(reference: &LinearModelSpace, alternative: &LinearModelSpace, data: &Dataset) -> Result<()> {
    // the comparison has to make sense on the observed data before resampling it
    fit_mle(reference, data)?;
    fit_mle(alternative, data)?;
    Ok(())
}

/// Bootstrap distribution of the evidence for `cfg.mode`.
///
/// * specified: the fixed models are evaluated on each resample;
/// * global: both spaces are fit on the resample and evaluated on it;
/// * local: both spaces are fit on the resample and evaluated on `data`.
pub fn bootstrap_evidence(
    pair: &ModelPair,
    data: &Dataset,
    cfg: &BootstrapConfig,
    penalty: &Penalty,
) -> Result<EvidenceSample> {
    cfg.validate()?;
    let n = data.len();
    let (values, rejected) = match (pair, cfg.mode) {
        (ModelPair::Specified { reference, alternative }, Mode::Specified) => run_all(data, cfg, |boot| {
            let v = raw_evidence_specified(reference, alternative, boot)?.value;
            Ok([v, v])
        })?,
        (ModelPair::Spaces { reference, alternative }, mode @ (Mode::Global | Mode::Local)) => {
            check_spaces(reference, alternative, data)?;
            let term = penalty.term(n, reference.param_count(), alternative.param_count());
            run_all(data, cfg, |boot| {
                let fit_ref = fit_mle(reference, boot)?;
                let fit_alt = fit_mle(alternative, boot)?;
                let eval = if mode == Mode::Global { boot } else { data };
                let v = evaluate_pair(&fit_ref, &fit_alt, eval, term)?;
                Ok([v, v])
            })?
        }
        (_, mode) => {
            return Err(Error::InvalidConfig(format!(
                "mode `{}` does not apply to this kind of model pair",
                mode.as_str()
            )))
        }
    };
    Ok(EvidenceSample {
        values: values.into_iter().map(|v| v[0]).collect(),
        mode: cfg.mode,
        penalty: *penalty,
        n,
        rejected,
        seed: cfg.seed,
    })
}

/// Global and local samples from one shared set of resamples.
///
/// Each sample is identical to what [`bootstrap_evidence`] returns for the
/// same seed in that mode, at the cost of one set of fits.
pub fn bootstrap_global_local(
    reference: &LinearModelSpace,
    alternative: &LinearModelSpace,
    data: &Dataset,
    replicates: usize,
    seed: u64,
    max_reject_fraction: f64,
    penalty: &Penalty,
) -> Result<(EvidenceSample, EvidenceSample)> {
    let cfg = BootstrapConfig { replicates, seed, mode: Mode::Global, max_reject_fraction };
    cfg.validate()?;
    check_spaces(reference, alternative, data)?;
    let n = data.len();
    let term = penalty.term(n, reference.param_count(), alternative.param_count());
    let (values, rejected) = run_all(data, &cfg, |boot| {
        let fit_ref = fit_mle(reference, boot)?;
        let fit_alt = fit_mle(alternative, boot)?;
        Ok([evaluate_pair(&fit_ref, &fit_alt, boot, term)?, evaluate_pair(&fit_ref, &fit_alt, data, term)?])
    })?;
    let make = |mode: Mode, k: usize| EvidenceSample {
        values: values.iter().map(|v| v[k]).collect(),
        mode,
        penalty: *penalty,
        n,
        rejected,
        seed,
    };
    Ok((make(Mode::Global, 0), make(Mode::Local, 1)))
}
