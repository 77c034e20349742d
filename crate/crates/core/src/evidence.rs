//! Raw evidence: penalized, sample-size-scaled log-likelihood differences.
//!
//! All values are on the ΔSIC scale, `-2 (l_A - l_R) + c_n (p_A - p_R)`, so a
//! positive value supports the reference model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{fit_mle, log_likelihood, Dataset, FittedLinearModel, LinearModelSpace, SpecifiedModel};

/// Complexity penalty `c_n` applied per estimated parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    /// Schwarz: `c_n = log n`.
    Sic,
    /// Akaike: `c_n = 2`. Not consistent; kept for comparison.
    Aic,
    /// A constant `c_n`.
    Fixed(f64),
}

impl Default for Penalty {
    fn default() -> Self {
        Penalty::Sic
    }
}

impl Penalty {
    pub fn c_n(&self, n: usize) -> f64 {
        match *self {
            Penalty::Sic => (n as f64).ln(),
            Penalty::Aic => 2.0,
            Penalty::Fixed(c) => c,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Penalty::Sic => "sic",
            Penalty::Aic => "aic",
            Penalty::Fixed(_) => "fixed",
        }
    }

    /// Whether `log log n < c_n(n) < n`, the growth window that makes the
    /// resulting criterion consistent.
    pub fn is_consistent_at(&self, n: usize) -> bool {
        let nf = n as f64;
        let c = self.c_n(n);
        nf.ln().ln() < c && c < nf
    }

    /// Consistency gate over `n` in `3..=max_n`. Constant penalties fail it
    /// once `log log n` passes them.
    pub fn is_consistent(&self, max_n: usize) -> bool {
        match self {
            Penalty::Sic => (3..=max_n).all(|n| self.is_consistent_at(n)),
            // a constant penalty is eventually below log log n
            Penalty::Aic | Penalty::Fixed(_) => false,
        }
    }

    /// Penalty term `c_n (p_A - p_R)`.
    pub fn term(&self, n: usize, p_reference: usize, p_alternative: usize) -> f64 {
        self.c_n(n) * (p_alternative as f64 - p_reference as f64)
    }
}

impl std::str::FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sic" | "bic" => Ok(Penalty::Sic),
            "aic" => Ok(Penalty::Aic),
            other => Err(Error::InvalidConfig(format!("unknown penalty `{other}` (expected sic or aic)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fully specified models evaluated on each resample.
    Specified,
    /// Fit on the resample, evaluate on the resample.
    Global,
    /// Fit on the resample, evaluate on the original data.
    Local,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Specified => "specified",
            Mode::Global => "global",
            Mode::Local => "local",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidenceValue {
    pub value: f64,
    pub mode: Mode,
    pub n: usize,
    pub penalty_term: f64,
}

fn finite(value: f64, label: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteLikelihood(label.to_owned()))
    }
}

/// Log-likelihood ratio evidence between two fully specified models.
pub fn raw_evidence_specified(
    reference: &SpecifiedModel,
    alternative: &SpecifiedModel,
    data: &Dataset,
) -> Result<EvidenceValue> {
    let l_ref = log_likelihood(reference, data)?;
    let l_alt = log_likelihood(alternative, data)?;
    Ok(EvidenceValue {
        value: finite(-2.0 * (l_alt - l_ref), "evidence")?,
        mode: Mode::Specified,
        n: data.len(),
        penalty_term: 0.0,
    })
}

fn penalized_difference(
    reference: &FittedLinearModel,
    alternative: &FittedLinearModel,
    eval: &Dataset,
    penalty: &Penalty,
    mode: Mode,
) -> Result<EvidenceValue> {
    let n = eval.len();
    let penalty_term = penalty.term(n, reference.space.param_count(), alternative.space.param_count());
    let l_ref = log_likelihood(reference, eval)?;
    let l_alt = log_likelihood(alternative, eval)?;
    Ok(EvidenceValue {
        value: finite(-2.0 * (l_alt - l_ref) + penalty_term, "evidence")?,
        mode,
        n,
        penalty_term,
    })
}

/// Global raw evidence: both spaces fit on `boot_data` and evaluated there.
/// Equal to `sic(alternative) - sic(reference)` on `boot_data`.
pub fn raw_evidence_global(
    reference: &LinearModelSpace,
    alternative: &LinearModelSpace,
    boot_data: &Dataset,
    penalty: &Penalty,
) -> Result<EvidenceValue> {
    let fit_ref = fit_mle(reference, boot_data)?;
    let fit_alt = fit_mle(alternative, boot_data)?;
    penalized_difference(&fit_ref, &fit_alt, boot_data, penalty, Mode::Global)
}

/// Local raw evidence: both spaces fit on `boot_data` and evaluated on
/// `orig_data`. The penalty uses the size of `orig_data`.
pub fn raw_evidence_local(
    reference: &LinearModelSpace,
    alternative: &LinearModelSpace,
    boot_data: &Dataset,
    orig_data: &Dataset,
    penalty: &Penalty,
) -> Result<EvidenceValue> {
    if boot_data.dim() != orig_data.dim() {
        return Err(Error::DimensionMismatch(format!(
            "resample has {} covariates, original data {}",
            boot_data.dim(),
            orig_data.dim()
        )));
    }
    let fit_ref = fit_mle(reference, boot_data)?;
    let fit_alt = fit_mle(alternative, boot_data)?;
    penalized_difference(&fit_ref, &fit_alt, orig_data, penalty, Mode::Local)
}

/// Information criterion `-2 max l + c_n p`.
pub fn sic(space: &LinearModelSpace, data: &Dataset, penalty: &Penalty) -> Result<f64> {
    let fit = fit_mle(space, data)?;
    Ok(-2.0 * log_likelihood(&fit, data)? + penalty.c_n(data.len()) * space.param_count() as f64)
}
