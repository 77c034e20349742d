//! True evidence targets for a known Gaussian linear generator.
//!
//! Divergences are conditional on the fixed design: the Kullback-Leibler
//! divergence of each row's normal law, averaged over rows.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::Penalty;
use crate::model::{least_squares, log_likelihood, Dataset, FittedLinearModel, LinearModelSpace};
use crate::rng;

/// `y = beta_g[0] + beta_g[1..] · x + sigma_g ε` on a fixed design.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLinearGenerator {
    beta_g: Vec<f64>,
    sigma_g: f64,
    // response holds the mean vector
    design: Dataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Global,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetValue {
    pub value: f64,
    pub kind: TargetKind,
}

impl GaussianLinearGenerator {
    /// `beta_g` is the intercept followed by one slope per design column.
    pub fn new(beta_g: Vec<f64>, sigma_g: f64, design: Vec<Vec<f64>>) -> Result<Self> {
        if !(sigma_g > 0.0 && sigma_g.is_finite()) {
            return Err(Error::InvalidConfig(format!("generator sd must be positive, got {sigma_g}")));
        }
        if design.is_empty() {
            return Err(Error::InvalidData("generator design has no rows".into()));
        }
        let d = design[0].len();
        if beta_g.len() != d + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} generator coefficients for {d} covariates plus intercept",
                beta_g.len()
            )));
        }
        let mean = design
            .iter()
            .map(|x| beta_g[0] + beta_g[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>())
            .collect();
        let design = Dataset::new(mean, design)?;
        Ok(Self { beta_g, sigma_g, design })
    }

    /// Generator on `n` rows of independent standard normal covariates drawn
    /// from `seed`.
    pub fn with_normal_design(intercept: f64, slopes: &[f64], sigma_g: f64, n: usize, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(seed, &[u64::MAX]);
        let design = (0..n).map(|_| slopes.iter().map(|_| rng.sample(StandardNormal)).collect()).collect();
        let mut beta = vec![intercept];
        beta.extend_from_slice(slopes);
        Self::new(beta, sigma_g, design)
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta_g
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_g
    }

    pub fn n(&self) -> usize {
        self.design.len()
    }

    pub fn dim(&self) -> usize {
        self.design.dim()
    }

    /// Mean of the response on each design row.
    pub fn mean_vector(&self) -> &[f64] {
        self.design.response()
    }

    /// Design rows with the mean vector as response.
    pub fn design(&self) -> &Dataset {
        &self.design
    }

    /// Response vector drawn on the fixed design from stream `(seed, path)`.
    pub fn sample(&self, seed: u64, path: &[u64]) -> Dataset {
        let mut rng = rng::stream(seed, path);
        let y = self
            .mean_vector()
            .iter()
            .map(|m| m + self.sigma_g * rng.sample::<f64, _>(StandardNormal))
            .collect();
        self.design.with_response(y).expect("response length matches design")
    }

    /// The generator itself as a fitted model on all covariates.
    pub fn as_model(&self) -> FittedLinearModel {
        let space = LinearModelSpace::new((0..self.dim()).collect(), true).expect("distinct covariates");
        FittedLinearModel::new(space, self.beta_g.clone(), self.sigma_g * self.sigma_g).expect("valid generator")
    }
}

/// Member of `space` closest to the generator in average divergence.
pub fn project(g: &GaussianLinearGenerator, space: &LinearModelSpace) -> Result<FittedLinearModel> {
    space.check_dim(g.dim())?;
    let n = g.n();
    let k = space.coefficient_count();
    if n < k {
        return Err(Error::InsufficientData { n, needed: k });
    }
    let mu = g.mean_vector();
    let mut design = space.design(&g.design);
    let beta = least_squares(&mut design, n, k, mu)?;
    let bias2: f64 = g
        .design
        .rows()
        .zip(mu)
        .map(|(r, m)| {
            let e = m - space.linear_predictor(&beta, r.x);
            e * e
        })
        .sum::<f64>()
        / n as f64;
    FittedLinearModel::new(space.clone(), beta, g.sigma_g * g.sigma_g + bias2)
}

/// Row-averaged divergence of `m` from the generator.
pub fn kld_fixed_design(g: &GaussianLinearGenerator, m: &FittedLinearModel) -> f64 {
    let s2g = g.sigma_g * g.sigma_g;
    let log_ratio = 0.5 * (m.sigma2 / s2g).ln();
    let total: f64 = g
        .design
        .rows()
        .map(|r| {
            let d = r.y - m.mean(r.x);
            log_ratio + (s2g + d * d) / (2.0 * m.sigma2) - 0.5
        })
        .sum();
    total / g.n() as f64
}

/// `2n (K_A - K_R)`, the unpenalized part of the global target.
pub fn divergence_difference(g: &GaussianLinearGenerator, reference: &LinearModelSpace, alternative: &LinearModelSpace) -> Result<f64> {
    let k_r = kld_fixed_design(g, &project(g, reference)?);
    let k_a = kld_fixed_design(g, &project(g, alternative)?);
    Ok(2.0 * g.n() as f64 * (k_a - k_r))
}

/// Penalized scaled divergence difference between the two projections.
pub fn global_target(
    g: &GaussianLinearGenerator,
    reference: &LinearModelSpace,
    alternative: &LinearModelSpace,
    penalty: &Penalty,
) -> Result<TargetValue> {
    let term = penalty.term(g.n(), reference.param_count(), alternative.param_count());
    let value = divergence_difference(g, reference, alternative)? + term;
    Ok(TargetValue { value, kind: TargetKind::Global })
}

/// Penalized log-likelihood ratio of the two projections on `data`.
pub fn local_target(
    g: &GaussianLinearGenerator,
    reference: &LinearModelSpace,
    alternative: &LinearModelSpace,
    data: &Dataset,
    penalty: &Penalty,
) -> Result<TargetValue> {
    let m_r = project(g, reference)?;
    let m_a = project(g, alternative)?;
    local_target_from(&m_r, &m_a, data, penalty)
}

/// Local target with the projections already computed.
pub fn local_target_from(
    m_r: &FittedLinearModel,
    m_a: &FittedLinearModel,
    data: &Dataset,
    penalty: &Penalty,
) -> Result<TargetValue> {
    let l_r = log_likelihood(m_r, data)?;
    let l_a = log_likelihood(m_a, data)?;
    let term = penalty.term(data.len(), m_r.space.param_count(), m_a.space.param_count());
    Ok(TargetValue { value: -2.0 * (l_a - l_r) + term, kind: TargetKind::Local })
}
