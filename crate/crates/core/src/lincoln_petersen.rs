//! Lincoln-Petersen abundance with parametric bootstrap intervals under three
//! levels of conditioning.
//!
//! * `both_fixed`: marked count and second-visit count fixed, recaptures
//!   hypergeometric.
//! * `m_fixed`: marked count fixed, second-visit count binomial.
//! * `none_fixed`: both counts binomial.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{smooth, DensityOptions, Interval, Smoothed};
use crate::error::{Error, Result};
use crate::rng;

/// Fewest finite estimates an interval is computed from.
pub const MIN_ESTIMATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpData {
    /// Animals marked on the first visit.
    pub m: u64,
    /// Animals caught on the second visit.
    pub n2: u64,
    /// Marked animals among the second catch.
    pub x: u64,
}

impl LpData {
    pub fn new(m: u64, n2: u64, x: u64) -> Result<Self> {
        if x > m.min(n2) {
            return Err(Error::InvalidData(format!("recaptures {x} exceed min(m = {m}, n2 = {n2})")));
        }
        Ok(Self { m, n2, x })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpScheme {
    BothFixed,
    MFixed,
    NoneFixed,
}

impl LpScheme {
    pub const ALL: [LpScheme; 3] = [LpScheme::BothFixed, LpScheme::MFixed, LpScheme::NoneFixed];

    pub fn as_str(self) -> &'static str {
        match self {
            LpScheme::BothFixed => "both_fixed",
            LpScheme::MFixed => "m_fixed",
            LpScheme::NoneFixed => "none_fixed",
        }
    }
}

impl fmt::Display for LpScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LpScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both_fixed" => Ok(LpScheme::BothFixed),
            "m_fixed" => Ok(LpScheme::MFixed),
            "none_fixed" => Ok(LpScheme::NoneFixed),
            other => Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpBootstrapSample {
    pub scheme: LpScheme,
    /// Unfloored estimates from draws with at least one recapture.
    pub estimates: Vec<f64>,
    /// Draws with zero recaptures.
    pub discarded: usize,
}

/// `floor(n2 m / x)`.
pub fn lp_estimate(d: &LpData) -> Result<u64> {
    if d.x == 0 {
        return Err(Error::ZeroRecaptures);
    }
    Ok(d.n2 * d.m / d.x)
}

/// Second-visit capture probability `n2 / estimate`.
pub fn lp_capture_prob(d: &LpData) -> Result<f64> {
    let t = lp_estimate(d)?;
    Ok(d.n2 as f64 / t as f64)
}

fn binomial(rng: &mut impl Rng, n: u64, p: f64) -> u64 {
    Binomial::new(n, p).expect("probability in [0, 1]").sample(rng)
}

/// One replicate: `(marked, caught, recaptured)`.
pub fn lp_draw(total: u64, phi: f64, m: u64, n2: u64, scheme: LpScheme, rng: &mut impl Rng) -> (u64, u64, u64) {
    let p_mark = m as f64 / total as f64;
    match scheme {
        LpScheme::BothFixed => {
            let x = Hypergeometric::new(total, m, n2).expect("valid hypergeometric").sample(rng);
            (m, n2, x)
        }
        LpScheme::MFixed => {
            let caught = binomial(rng, total, phi);
            let x = binomial(rng, m.min(caught), p_mark);
            (m, caught, x)
        }
        LpScheme::NoneFixed => {
            let marked = binomial(rng, total, phi);
            let caught = binomial(rng, total, phi);
            let x = binomial(rng, marked.min(caught), marked as f64 / total as f64);
            (marked, caught, x)
        }
    }
}

/// `replicates` simulated estimates for a population of `total` animals.
/// Draw `b` uses stream `(seed, b)`.
pub fn lp_bootstrap(
    total: u64,
    phi: f64,
    m: u64,
    n2: u64,
    scheme: LpScheme,
    replicates: usize,
    seed: u64,
) -> Result<LpBootstrapSample> {
    if total < m || total < n2 || total == 0 {
        return Err(Error::InvalidConfig(format!("population {total} is smaller than m = {m} or n2 = {n2}")));
    }
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::InvalidConfig(format!("capture probability {phi} is outside (0, 1]")));
    }
    if replicates == 0 {
        return Err(Error::InvalidConfig("bootstrap replicate count must be at least 1".into()));
    }
    let draws: Vec<Option<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, &[b]);
            let (marked, caught, x) = lp_draw(total, phi, m, n2, scheme, &mut rng);
            (x > 0).then(|| marked as f64 * caught as f64 / x as f64)
        })
        .collect();
    let discarded = draws.iter().filter(|d| d.is_none()).count();
    Ok(LpBootstrapSample { scheme, estimates: draws.into_iter().flatten().collect(), discarded })
}

/// Smoothed density of the estimates.
pub fn lp_smoothed(sample: &LpBootstrapSample, opts: &DensityOptions) -> Result<Smoothed> {
    if sample.estimates.len() < MIN_ESTIMATES {
        return Err(Error::InsufficientSample { have: sample.estimates.len(), need: MIN_ESTIMATES });
    }
    smooth(&sample.estimates, opts)
}

/// Equal-tailed smoothed interval of the estimates.
pub fn lp_interval(sample: &LpBootstrapSample, level: f64, opts: &DensityOptions) -> Result<Interval> {
    lp_smoothed(sample, opts)?.interval(level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn survey() -> LpData {
        LpData::new(221, 131, 116).unwrap()
    }

    #[test]
    fn point_estimate_and_capture_probability() {
        assert_eq!(lp_estimate(&survey()).unwrap(), 249);
        assert_abs_diff_eq!(lp_capture_prob(&survey()).unwrap(), 0.526_104_4, epsilon = 5e-7);
        let full = LpData::new(80, 80, 80).unwrap();
        assert_eq!(lp_estimate(&full).unwrap(), 80);
        assert_eq!(lp_capture_prob(&full).unwrap(), 1.0);
        let even = LpData::new(100, 50, 25).unwrap();
        assert_eq!(lp_estimate(&even).unwrap(), 200);
        assert_eq!(lp_capture_prob(&even).unwrap(), 0.25);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(lp_estimate(&LpData::new(10, 10, 0).unwrap()), Err(Error::ZeroRecaptures));
        assert!(LpData::new(10, 5, 6).is_err());
        assert!(lp_bootstrap(100, 0.5, 221, 131, LpScheme::BothFixed, 10, 0).is_err());
        assert!(lp_bootstrap(300, 1.5, 221, 131, LpScheme::MFixed, 10, 0).is_err());
        assert!("neither".parse::<LpScheme>().is_err());
        assert_eq!("m_fixed".parse::<LpScheme>().unwrap(), LpScheme::MFixed);
    }

    #[test]
    fn everything_marked_gives_m_every_time() {
        let s = lp_bootstrap(221, 0.5, 221, 131, LpScheme::BothFixed, 500, 1).unwrap();
        assert_eq!(s.discarded, 0);
        assert!(s.estimates.iter().all(|&e| e == 221.0));
        let iv = lp_interval(&s, 0.95, &DensityOptions::default()).unwrap();
        assert_eq!((iv.lower, iv.upper), (221.0, 221.0));
    }

    #[test]
    fn too_few_estimates() {
        let s = lp_bootstrap(249, 0.526, 221, 131, LpScheme::BothFixed, 50, 1).unwrap();
        assert!(matches!(lp_interval(&s, 0.95, &DensityOptions::default()), Err(Error::InsufficientSample { .. })));
    }

    fn moments(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn draws_have_the_right_moments() {
        let (t, m, n2) = (249u64, 221u64, 131u64);
        let phi = n2 as f64 / t as f64;
        let draws = 100_000;
        let mut hyper = Vec::new();
        let mut caught = Vec::new();
        let mut marked = Vec::new();
        for b in 0..draws {
            let mut rng = rng::stream(5, &[b]);
            hyper.push(lp_draw(t, phi, m, n2, LpScheme::BothFixed, &mut rng).2 as f64);
            let mut rng = rng::stream(6, &[b]);
            caught.push(lp_draw(t, phi, m, n2, LpScheme::MFixed, &mut rng).1 as f64);
            let mut rng = rng::stream(7, &[b]);
            marked.push(lp_draw(t, phi, m, n2, LpScheme::NoneFixed, &mut rng).0 as f64);
        }
        let (tf, mf, nf) = (t as f64, m as f64, n2 as f64);
        let hyper_mean = nf * mf / tf;
        let hyper_var = nf * (mf / tf) * (1.0 - mf / tf) * (tf - nf) / (tf - 1.0);
        let (hm, hv) = moments(&hyper);
        assert!((hm - hyper_mean).abs() < 3.0 * (hyper_var / draws as f64).sqrt());
        assert!((hv / hyper_var - 1.0).abs() < 0.03);
        for v in [&caught, &marked] {
            let (bm, bv) = moments(v);
            let var = tf * phi * (1.0 - phi);
            assert!((bm - tf * phi).abs() < 3.0 * (var / draws as f64).sqrt());
            assert!((bv / var - 1.0).abs() < 0.03);
        }
    }

    #[test]
    fn both_fixed_mean_is_near_the_estimate() {
        let s = lp_bootstrap(249, 131.0 / 249.0, 221, 131, LpScheme::BothFixed, 10_000, 3).unwrap();
        let (mean, var) = moments(&s.estimates);
        // the plug-in ratio estimator is slightly biased upward
        assert!((mean - 249.0).abs() < 3.0 * (var / s.estimates.len() as f64).sqrt() + 1.0, "{mean}");
        assert!(s.discarded as f64 / 10_000.0 < 0.001);
    }

    #[test]
    fn conditioning_narrows_the_interval() {
        let phi = lp_capture_prob(&survey()).unwrap();
        let opts = DensityOptions::default();
        let ivs: Vec<Interval> = LpScheme::ALL
            .iter()
            .map(|&s| lp_interval(&lp_bootstrap(249, phi, 221, 131, s, 10_000, 4).unwrap(), 0.95, &opts).unwrap())
            .collect();
        assert!(ivs[0].length() < ivs[1].length() && ivs[1].length() < ivs[2].length(), "{ivs:?}");
        let s = lp_bootstrap(249, phi, 221, 131, LpScheme::MFixed, 2000, 4).unwrap();
        let wide = lp_interval(&s, 0.95, &opts).unwrap();
        let narrow = lp_interval(&s, 0.80, &opts).unwrap();
        assert!(wide.lower < narrow.lower && wide.upper > narrow.upper);
    }
}
