//! Smoothing of bootstrap samples into a grid density.
//!
//! The point estimate of evidence is the mean of the smoothed density and the
//! interval bounds are its quantiles. Two estimators share the grid machinery:
//! a Gaussian kernel estimator with Silverman's bandwidth (the default) and a
//! local log-quadratic likelihood estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 512;
/// Grid margin past the sample extremes, in bandwidths.
pub const GRID_MARGIN: f64 = 3.0;
/// Smallest sample the estimators accept.
pub const MIN_SAMPLE: usize = 10;
/// Spread below which a sample is a point mass.
pub const DEGENERATE_SPREAD: f64 = 1e-12;

// kernel contributions beyond this many bandwidths are below 1e-14
const KERNEL_CUTOFF: f64 = 8.0;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Gaussian kernel density estimate.
    #[default]
    GaussianKde,
    /// Local likelihood with a log-quadratic local model and Gaussian weights.
    /// Adapts to steep edges such as a hard bound on the support.
    LocalLogQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    pub estimator: Estimator,
    pub grid_points: usize,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self { estimator: Estimator::GaussianKde, grid_points: DEFAULT_GRID_POINTS }
    }
}

/// Density tabulated on a strictly increasing grid, with its trapezoid cdf.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedDensity {
    grid: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
    bandwidth: f64,
}

/// A smoothed sample: a grid density or, for zero-spread samples, a point mass.
#[derive(Debug, Clone, PartialEq)]
pub enum Smoothed {
    Density(SmoothedDensity),
    PointMass(f64),
}

/// Equal-tailed interval and smoothed-mean point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub point: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Linear-interpolation sample quantile (type 7) of sorted data.
pub fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Silverman's rule of thumb, `0.9 min(sd, IQR/1.34) n^(-1/5)`. Falls back to
/// the standard deviation when the IQR is zero.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = (sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    let iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

impl SmoothedDensity {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    pub fn mean(&self) -> f64 {
        let weighted: Vec<f64> = self.grid.iter().zip(&self.density).map(|(t, f)| t * f).collect();
        trapezoid(&self.grid, &weighted)
    }

    /// Inverse of the tabulated cdf with linear interpolation between grid
    /// points; exact at grid points.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::QOutOfRange(q));
        }
        let i = self.cdf.partition_point(|&c| c < q);
        let i = i.clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (g0, g1) = (self.grid[i - 1], self.grid[i]);
        if c1 <= c0 {
            return Ok(g1);
        }
        Ok(g0 + (q - c0) / (c1 - c0) * (g1 - g0))
    }

    fn from_raw(grid: Vec<f64>, mut density: Vec<f64>, bandwidth: f64) -> Self {
        for f in density.iter_mut() {
            if !f.is_finite() || *f < 0.0 {
                *f = 0.0;
            }
        }
        let total = trapezoid(&grid, &density);
        density.iter_mut().for_each(|f| *f /= total);
        let mut cdf = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..grid.len() {
            acc += 0.5 * (grid[i] - grid[i - 1]) * (density[i] + density[i - 1]);
            cdf.push(acc);
        }
        let last = acc;
        cdf.iter_mut().for_each(|c| *c /= last);
        Self { grid, density, cdf, bandwidth }
    }
}

impl Smoothed {
    pub fn mean(&self) -> f64 {
        match self {
            Smoothed::Density(d) => d.mean(),
            Smoothed::PointMass(c) => *c,
        }
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        match self {
            Smoothed::Density(d) => d.quantile(q),
            Smoothed::PointMass(c) if q > 0.0 && q < 1.0 => Ok(*c),
            Smoothed::PointMass(_) => Err(Error::QOutOfRange(q)),
        }
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self, Smoothed::PointMass(_))
    }

    /// Equal-tailed interval at `level` with the smoothed mean as the point.
    pub fn interval(&self, level: f64) -> Result<Interval> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::QOutOfRange(level));
        }
        let tail = (1.0 - level) / 2.0;
        Ok(Interval { level, lower: self.quantile(tail)?, upper: self.quantile(1.0 - tail)?, point: self.mean() })
    }
}

/// Sums `K(u)`, `K(u) u`, `K(u) u^2` with `u = (x_i - t) / h` over the
/// sorted sample, for each grid point `t`.
fn kernel_moments(sorted: &[f64], grid: &[f64], h: f64, order: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(grid.len());
    let mut start = 0;
    for &t in grid {
        while start < sorted.len() && sorted[start] < t - KERNEL_CUTOFF * h {
            start += 1;
        }
        let mut m = [0.0; 3];
        for &x in &sorted[start..] {
            let u = (x - t) / h;
            if u > KERNEL_CUTOFF {
                break;
            }
            let k = INV_SQRT_2PI * (-0.5 * u * u).exp();
            m[0] += k;
            if order > 0 {
                m[1] += k * u;
                m[2] += k * u * u;
            }
        }
        out.push(m);
    }
    out
}

/// Local likelihood fit of `exp(a0 + a1 u + a2 u²)` against Gaussian kernel
/// weights, given the kernel moments `S_k = Σ K(u_i) u_i^k`. With a Gaussian
/// kernel the fitted local density is itself Gaussian in `u`, so matching
/// the three moments has the closed form `exp(a0) = S_0 v^(-1/2) exp(-m²/2v)`
/// with `m` and `v` the kernel-weighted mean and variance of `u`.
fn local_log_quadratic(s: [f64; 3]) -> Option<f64> {
    if !(s[0] > 0.0) {
        return None;
    }
    let m = s[1] / s[0];
    let v = s[2] / s[0] - m * m;
    if !(v > 1e-12) {
        return None;
    }
    Some(s[0] / v.sqrt() * (-0.5 * m * m / v).exp())
}

/// Smoothed density of `values` on a grid spanning three bandwidths past the
/// sample extremes. Zero-spread samples give [`Error::DegenerateSample`].
pub fn estimate_density(values: &[f64], opts: &DensityOptions) -> Result<SmoothedDensity> {
    if values.len() < MIN_SAMPLE {
        return Err(Error::InsufficientSample { have: values.len(), need: MIN_SAMPLE });
    }
    if opts.grid_points < 3 {
        return Err(Error::InvalidConfig("density grid needs at least 3 points".into()));
    }
    let mut sorted = values.to_vec();
    if sorted.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("sample contains non-finite values".into()));
    }
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if hi - lo <= DEGENERATE_SPREAD * (1.0 + lo.abs().max(hi.abs())) {
        return Err(Error::DegenerateSample { location: sorted[sorted.len() / 2] });
    }
    let h = silverman_bandwidth(&sorted);
    let (a, b) = (lo - GRID_MARGIN * h, hi + GRID_MARGIN * h);
    let m = opts.grid_points;
    let step = (b - a) / (m - 1) as f64;
    let grid: Vec<f64> = (0..m).map(|i| if i == m - 1 { b } else { a + step * i as f64 }).collect();
    let nh = sorted.len() as f64 * h;

    let density = match opts.estimator {
        Estimator::GaussianKde => {
            kernel_moments(&sorted, &grid, h, 0).into_iter().map(|s| s[0] / nh).collect()
        }
        Estimator::LocalLogQuadratic => kernel_moments(&sorted, &grid, h, 2)
            .into_iter()
            .map(|s| local_log_quadratic(s).map_or(0.0, |f| f / nh))
            .collect(),
    };
    Ok(SmoothedDensity::from_raw(grid, density, h))
}

/// Density estimate, with zero-spread samples mapped to a point mass.
pub fn smooth(values: &[f64], opts: &DensityOptions) -> Result<Smoothed> {
    match estimate_density(values, opts) {
        Ok(d) => Ok(Smoothed::Density(d)),
        Err(Error::DegenerateSample { location }) => Ok(Smoothed::PointMass(location)),
        Err(e) => Err(e),
    }
}

/// Mean of the smoothed density.
pub fn smoothed_mean(d: &Smoothed) -> f64 {
    d.mean()
}

/// Quantile of the smoothed density, `q` in (0, 1).
pub fn smoothed_quantile(d: &Smoothed, q: f64) -> Result<f64> {
    d.quantile(q)
}

/// Equal-tailed smoothed interval of a sample at `level`.
pub fn interval(values: &[f64], level: f64, opts: &DensityOptions) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::QOutOfRange(level));
    }
    smooth(values, opts)?.interval(level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normal_draws(n: usize, mu: f64, sd: f64, seed: u64) -> Vec<f64> {
        let mut rng = crate::rng::stream(seed, &[]);
        (0..n).map(|_| mu + sd * rng.sample::<f64, _>(StandardNormal)).collect()
    }

    fn symmetric(seed: u64, m: f64) -> Vec<f64> {
        let half = normal_draws(500, 0.0, 1.5, seed);
        half.iter().map(|v| m + v).chain(half.iter().map(|v| m - v)).collect()
    }

    fn density_at(d: &SmoothedDensity, t: f64) -> f64 {
        let i = d.grid().partition_point(|&g| g < t);
        let (g0, g1) = (d.grid()[i - 1], d.grid()[i]);
        let w = (t - g0) / (g1 - g0);
        d.density()[i - 1] * (1.0 - w) + d.density()[i] * w
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let err = estimate_density(&[3.5; 50], &DensityOptions::default()).unwrap_err();
        assert_eq!(err, Error::DegenerateSample { location: 3.5 });
        let s = smooth(&[3.5; 50], &DensityOptions::default()).unwrap();
        assert_eq!(s.mean(), 3.5);
        let iv = s.interval(0.9).unwrap();
        assert_eq!((iv.lower, iv.upper, iv.point), (3.5, 3.5, 3.5));
    }

    #[test]
    fn standard_normal_density_at_zero() {
        let d = estimate_density(&normal_draws(100_000, 0.0, 1.0, 1), &DensityOptions::default()).unwrap();
        assert!((density_at(&d, 0.0) - 0.398_94).abs() < 0.02);
        let q = smoothed_quantile(&Smoothed::Density(d), 0.05).unwrap();
        assert!((q + 1.645).abs() < 0.03, "q05 = {q}");
    }

    #[test]
    fn symmetric_sample_gives_symmetric_density() {
        for est in [Estimator::GaussianKde, Estimator::LocalLogQuadratic] {
            let opts = DensityOptions { estimator: est, ..Default::default() };
            let d = estimate_density(&symmetric(2, 4.0), &opts).unwrap();
            let f = d.density();
            let m = f.len();
            for i in 0..m {
                assert!((f[i] - f[m - 1 - i]).abs() < 1e-6);
            }
            let s = Smoothed::Density(d);
            assert_abs_diff_eq!(s.mean(), 4.0, epsilon = 1e-6);
            assert_abs_diff_eq!(s.quantile(0.5).unwrap(), 4.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn smoothed_mean_tracks_sample_mean() {
        let v = normal_draws(20_000, 3.0, 2.0, 3);
        let sample_mean = v.iter().sum::<f64>() / v.len() as f64;
        let s = smooth(&v, &DensityOptions::default()).unwrap();
        assert!((s.mean() - sample_mean).abs() < 3.0 * 2.0 / (v.len() as f64).sqrt());
    }

    #[test]
    fn normal_interval_matches_known_quantiles() {
        let v = normal_draws(100_000, 10.0, 2.0, 4);
        let iv = interval(&v, 0.9, &DensityOptions::default()).unwrap();
        assert!((iv.lower - 6.71).abs() < 0.1, "{iv:?}");
        assert!((iv.upper - 13.29).abs() < 0.1, "{iv:?}");
        let wide = interval(&v, 0.95, &DensityOptions::default()).unwrap();
        assert!(wide.lower <= iv.lower && wide.upper >= iv.upper);
    }

    #[test]
    fn log_quadratic_estimator_agrees_on_normal_data() {
        let v = normal_draws(20_000, 0.0, 1.0, 5);
        let opts = DensityOptions { estimator: Estimator::LocalLogQuadratic, ..Default::default() };
        let d = estimate_density(&v, &opts).unwrap();
        assert!((density_at(&d, 0.0) - 0.398_94).abs() < 0.02);
        let s = Smoothed::Density(d);
        assert!((s.quantile(0.975).unwrap() - 1.96).abs() < 0.05);
    }

    #[test]
    fn bad_quantile_levels() {
        let s = smooth(&normal_draws(100, 0.0, 1.0, 6), &DensityOptions::default()).unwrap();
        assert_eq!(s.quantile(0.0), Err(Error::QOutOfRange(0.0)));
        assert_eq!(s.quantile(1.0), Err(Error::QOutOfRange(1.0)));
        assert!(interval(&[1.0; 20], 1.5, &DensityOptions::default()).is_err());
        assert!(matches!(
            estimate_density(&[1.0, 2.0], &DensityOptions::default()),
            Err(Error::InsufficientSample { .. })
        ));
    }

    #[test]
    fn raw_and_smoothed_quantiles_are_close() {
        let v = normal_draws(4000, 5.0, 3.0, 7);
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        let s = smooth(&v, &DensityOptions::default()).unwrap();
        let tol = 2.0 * 3.0 / (4000f64).sqrt();
        for q in [0.025, 0.05, 0.5, 0.95, 0.975] {
            assert!((s.quantile(q).unwrap() - sorted_quantile(&sorted, q)).abs() < tol);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn density_is_a_valid_distribution(
            values in prop::collection::vec(-50.0f64..50.0, 10..300),
            q1 in 0.01f64..0.99,
            q2 in 0.01f64..0.99,
        ) {
            let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - values.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assume!(spread > 1e-6);
            let d = estimate_density(&values, &DensityOptions::default()).unwrap();
            prop_assert!(d.density().iter().all(|&f| f >= 0.0));
            prop_assert!((d.integral() - 1.0).abs() < 1e-6);
            prop_assert!(d.grid().windows(2).all(|w| w[0] < w[1]));
            prop_assert!(d.cdf().windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(d.cdf()[0].abs() < 1e-9);
            prop_assert!((d.cdf()[d.cdf().len() - 1] - 1.0).abs() < 1e-9);
            // exact inverse at interior grid points
            for i in [1usize, 100, 255, 400, 510] {
                let c = d.cdf()[i];
                if c > 0.0 && c < 1.0 && d.cdf()[i - 1] < c {
                    prop_assert!((d.quantile(c).unwrap() - d.grid()[i]).abs() < 1e-9 * (1.0 + d.grid()[i].abs()));
                }
            }
            let (lo, hi) = if q1 < q2 { (q1, q2) } else { (q2, q1) };
            prop_assume!(hi - lo > 1e-6);
            prop_assert!(d.quantile(lo).unwrap() <= d.quantile(hi).unwrap());
        }
    }
}
