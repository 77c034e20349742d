//! Profile likelihood with a parametric-bootstrap nuisance adjustment.
//!
//! For an interest parameter γ and nuisance λ, the adjusted profile
//! log-likelihood averages, over samples simulated at (γ, λ̂), the original-data
//! log-likelihood at (γ, λ̂_b(γ)), where λ̂_b(γ) is fit to the simulated sample.
//! Replicate `b` draws from stream `(seed, b)` whatever γ is, so the adjusted
//! curve is smooth in γ.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{least_squares, Dataset, LinearModelSpace};
use crate::rng::{self, StreamRng};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A parametric family with a scalar interest parameter.
pub trait ProfileFamily: Sync {
    type Data: Sync + Send;

    fn data(&self) -> &Self::Data;

    fn nuisance_dim(&self) -> usize;

    /// Joint maximum-likelihood estimate `(γ̂, λ̂)` on the observed data.
    fn mle(&self) -> Result<(f64, Vec<f64>)>;

    /// Nuisance maximizing the likelihood of `data` with γ held fixed.
    fn fit_nuisance(&self, data: &Self::Data, gamma: f64) -> Result<Vec<f64>>;

    fn loglik(&self, data: &Self::Data, gamma: f64, lambda: &[f64]) -> f64;

    /// A sample the size of the observed data drawn at `(gamma, lambda)`.
    fn simulate(&self, gamma: f64, lambda: &[f64], rng: &mut StreamRng) -> Self::Data;
}

pub fn profile_loglik<F: ProfileFamily>(family: &F, gamma: f64) -> Result<f64> {
    let lambda = family.fit_nuisance(family.data(), gamma)?;
    finite(family.loglik(family.data(), gamma, &lambda))
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteLikelihood("profile family".into()))
    }
}

/// Simulation-adjusted profile log-likelihood from `replicates` parametric
/// bootstrap samples.
pub fn adjusted_profile_loglik<F: ProfileFamily>(family: &F, gamma: f64, replicates: usize, seed: u64) -> Result<f64> {
    if replicates == 0 {
        return Err(Error::InvalidConfig("bootstrap replicate count must be at least 1".into()));
    }
    if family.nuisance_dim() == 0 {
        return profile_loglik(family, gamma);
    }
    let (_, lambda_hat) = family.mle()?;
    let terms: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, &[b]);
            let sim = family.simulate(gamma, &lambda_hat, &mut rng);
            let lambda_b = family.fit_nuisance(&sim, gamma)?;
            finite(family.loglik(family.data(), gamma, &lambda_b))
        })
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum::<f64>() / replicates as f64)
}

/// Bias-corrected variant `2 l_p − l_SA`.
pub fn et_adjusted_profile_loglik<F: ProfileFamily>(family: &F, gamma: f64, replicates: usize, seed: u64) -> Result<f64> {
    let lp = profile_loglik(family, gamma)?;
    let lsa = adjusted_profile_loglik(family, gamma, replicates, seed)?;
    Ok(2.0 * lp - lsa)
}

/// Central second difference of the adjusted profile at `gamma`.
pub fn adjusted_curvature<F: ProfileFamily>(family: &F, gamma: f64, step: f64, replicates: usize, seed: u64) -> Result<f64> {
    let up = adjusted_profile_loglik(family, gamma + step, replicates, seed)?;
    let mid = adjusted_profile_loglik(family, gamma, replicates, seed)?;
    let down = adjusted_profile_loglik(family, gamma - step, replicates, seed)?;
    Ok((up - 2.0 * mid + down) / (step * step))
}

/// How the variance nuisance is maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerSolver {
    #[default]
    Analytic,
    /// Bisection on the score in log σ².
    Numeric,
}

/// Normal sample, γ = mean, λ = (σ²).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMean {
    x: Vec<f64>,
    solver: InnerSolver,
}

impl NormalMean {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("normal family needs at least two finite values".into()));
        }
        Ok(Self { x, solver: InnerSolver::Analytic })
    }

    pub fn with_solver(mut self, solver: InnerSolver) -> Self {
        self.solver = solver;
        self
    }

    fn sum_sq(x: &[f64], mu: f64) -> f64 {
        x.iter().map(|v| (v - mu) * (v - mu)).sum()
    }

    /// `Σ(x − x̄)² / σ²_eff`, where `σ²_eff = −n / l''(x̄)` is the variance
    /// implied by the curvature of the chosen likelihood at its maximum.
    pub fn effective_divisor(&self, kind: Adjustment, replicates: usize, seed: u64) -> Result<f64> {
        let (mu, lambda) = self.mle()?;
        let n = self.x.len() as f64;
        let step = 1e-3 * lambda[0].sqrt();
        let curvature = match kind {
            Adjustment::None => profile_curvature(self, mu, step)?,
            Adjustment::Simulation => adjusted_curvature(self, mu, step, replicates, seed)?,
            Adjustment::BiasCorrected => {
                2.0 * profile_curvature(self, mu, step)? - adjusted_curvature(self, mu, step, replicates, seed)?
            }
        };
        if !(curvature < 0.0) {
            return Err(Error::OptimizerFailure(format!("curvature {curvature} at the maximum is not negative")));
        }
        let sigma2_eff = -n / curvature;
        Ok(Self::sum_sq(&self.x, mu) / sigma2_eff)
    }
}

/// Which profile log-likelihood a derived quantity is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjustment {
    /// Plain profile `l_p`.
    None,
    /// Simulation-adjusted `l_SA`.
    Simulation,
    /// Bias-corrected `2 l_p − l_SA`.
    BiasCorrected,
}

/// Central second difference of the plain profile at `gamma`.
pub fn profile_curvature<F: ProfileFamily>(family: &F, gamma: f64, step: f64) -> Result<f64> {
    let up = profile_loglik(family, gamma + step)?;
    let mid = profile_loglik(family, gamma)?;
    let down = profile_loglik(family, gamma - step)?;
    Ok((up - 2.0 * mid + down) / (step * step))
}

/// Root of a decreasing function on `[a, b]` by bisection.
fn bisect_decreasing(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

fn normal_loglik(x: &[f64], mu: f64, sigma2: f64) -> f64 {
    let n = x.len() as f64;
    -0.5 * n * (LN_2PI + sigma2.ln()) - NormalMean::sum_sq(x, mu) / (2.0 * sigma2)
}

impl ProfileFamily for NormalMean {
    type Data = Vec<f64>;

    fn data(&self) -> &Vec<f64> {
        &self.x
    }

    fn nuisance_dim(&self) -> usize {
        1
    }

    fn mle(&self) -> Result<(f64, Vec<f64>)> {
        let mu = self.x.iter().sum::<f64>() / self.x.len() as f64;
        Ok((mu, self.fit_nuisance(&self.x, mu)?))
    }

    fn fit_nuisance(&self, data: &Vec<f64>, gamma: f64) -> Result<Vec<f64>> {
        let n = data.len() as f64;
        let s = Self::sum_sq(data, gamma);
        if !(s > 0.0) {
            return Err(Error::DegenerateVariance { sigma2: s / n });
        }
        let sigma2 = match self.solver {
            InnerSolver::Analytic => s / n,
            InnerSolver::Numeric => {
                // score in v = log σ²
                let scale = s.ln();
                bisect_decreasing(|v| -0.5 * n + s / (2.0 * v.exp()), scale - 40.0, scale + 40.0).exp()
            }
        };
        Ok(vec![sigma2])
    }

    fn loglik(&self, data: &Vec<f64>, gamma: f64, lambda: &[f64]) -> f64 {
        normal_loglik(data, gamma, lambda[0])
    }

    fn simulate(&self, gamma: f64, lambda: &[f64], rng: &mut StreamRng) -> Vec<f64> {
        let sd = lambda[0].sqrt();
        (0..self.x.len()).map(|_| gamma + sd * rng.sample::<f64, _>(StandardNormal)).collect()
    }
}

/// Normal sample with known variance: γ = mean and no nuisance.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalKnownVariance {
    x: Vec<f64>,
    sigma2: f64,
}

impl NormalKnownVariance {
    pub fn new(x: Vec<f64>, sigma2: f64) -> Result<Self> {
        if x.is_empty() || !(sigma2 > 0.0) {
            return Err(Error::InvalidData("known-variance family needs data and a positive variance".into()));
        }
        Ok(Self { x, sigma2 })
    }
}

impl ProfileFamily for NormalKnownVariance {
    type Data = Vec<f64>;

    fn data(&self) -> &Vec<f64> {
        &self.x
    }

    fn nuisance_dim(&self) -> usize {
        0
    }

    fn mle(&self) -> Result<(f64, Vec<f64>)> {
        Ok((self.x.iter().sum::<f64>() / self.x.len() as f64, Vec::new()))
    }

    fn fit_nuisance(&self, _data: &Vec<f64>, _gamma: f64) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }

    fn loglik(&self, data: &Vec<f64>, gamma: f64, _lambda: &[f64]) -> f64 {
        normal_loglik(data, gamma, self.sigma2)
    }

    fn simulate(&self, gamma: f64, _lambda: &[f64], rng: &mut StreamRng) -> Vec<f64> {
        let sd = self.sigma2.sqrt();
        (0..self.x.len()).map(|_| gamma + sd * rng.sample::<f64, _>(StandardNormal)).collect()
    }
}

/// Gaussian linear regression with γ the slope of one covariate and λ the
/// remaining coefficients followed by σ².
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSlope {
    data: Dataset,
    target: usize,
    others: Vec<usize>,
    intercept: bool,
}

impl RegressionSlope {
    /// `space` must contain covariate `target`.
    pub fn new(data: Dataset, space: &LinearModelSpace, target: usize) -> Result<Self> {
        space.check_dim(data.dim())?;
        if !space.contains_covariate(target) {
            return Err(Error::InvalidModelSpace(format!("interest covariate x{} is not in {space}", target + 1)));
        }
        let others: Vec<usize> = space.covariates().iter().copied().filter(|&j| j != target).collect();
        let k = others.len() + space.has_intercept() as usize + 1;
        if data.len() <= k {
            return Err(Error::InsufficientData { n: data.len(), needed: k });
        }
        Ok(Self { data, target, others, intercept: space.has_intercept() })
    }

    fn nuisance_mean(&self, lambda: &[f64], x: &[f64]) -> f64 {
        let (offset, start) = if self.intercept { (lambda[0], 1) } else { (0.0, 0) };
        offset + self.others.iter().zip(&lambda[start..]).map(|(&j, b)| b * x[j]).sum::<f64>()
    }

    fn coefficient_count(&self) -> usize {
        self.others.len() + self.intercept as usize
    }
}

impl ProfileFamily for RegressionSlope {
    type Data = Dataset;

    fn data(&self) -> &Dataset {
        &self.data
    }

    fn nuisance_dim(&self) -> usize {
        self.coefficient_count() + 1
    }

    fn mle(&self) -> Result<(f64, Vec<f64>)> {
        let mut covariates = self.others.clone();
        covariates.insert(0, self.target);
        let space = LinearModelSpace::new(covariates, self.intercept)?;
        let fit = crate::model::fit_mle(&space, &self.data)?;
        let k0 = self.intercept as usize;
        let gamma = fit.beta[k0];
        let mut lambda: Vec<f64> = fit.beta[..k0].to_vec();
        lambda.extend_from_slice(&fit.beta[k0 + 1..]);
        lambda.push(fit.sigma2);
        Ok((gamma, lambda))
    }

    fn fit_nuisance(&self, data: &Dataset, gamma: f64) -> Result<Vec<f64>> {
        let n = data.len();
        let k = self.coefficient_count();
        let y: Vec<f64> = data.rows().map(|r| r.y - gamma * r.x[self.target]).collect();
        let mut beta = Vec::new();
        if k > 0 {
            let mut design = Vec::with_capacity(n * k);
            if self.intercept {
                design.resize(n, 1.0);
            }
            for &j in &self.others {
                design.extend(data.rows().map(|r| r.x[j]));
            }
            beta = least_squares(&mut design, n, k, &y)?;
        }
        let rss: f64 = data
            .rows()
            .zip(&y)
            .map(|(r, yi)| {
                let e = yi - self.nuisance_mean(&beta, r.x);
                e * e
            })
            .sum();
        if !(rss > 0.0) {
            return Err(Error::DegenerateVariance { sigma2: rss / n as f64 });
        }
        beta.push(rss / n as f64);
        Ok(beta)
    }

    fn loglik(&self, data: &Dataset, gamma: f64, lambda: &[f64]) -> f64 {
        let sigma2 = lambda[lambda.len() - 1];
        let rss: f64 = data
            .rows()
            .map(|r| {
                let e = r.y - gamma * r.x[self.target] - self.nuisance_mean(lambda, r.x);
                e * e
            })
            .sum();
        -0.5 * data.len() as f64 * (LN_2PI + sigma2.ln()) - rss / (2.0 * sigma2)
    }

    fn simulate(&self, gamma: f64, lambda: &[f64], rng: &mut StreamRng) -> Dataset {
        let sd = lambda[lambda.len() - 1].sqrt();
        let y = self
            .data
            .rows()
            .map(|r| gamma * r.x[self.target] + self.nuisance_mean(lambda, r.x) + sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        self.data.with_response(y).expect("same row count")
    }
}
