//! Coverage, interval-length and security studies on simulated regressions.
//!
//! Every study fixes one design of standard normal covariates per run, drawn
//! from the run seed, and redraws only the responses. Trial `t` of case `c`
//! uses the streams `(seed, c, t, 0)` for its data and `(seed, c, t, 1)` for
//! its bootstrap, so any single trial can be replayed on its own.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_global_local, DEFAULT_MAX_REJECT_FRACTION, SIMULATION_REPLICATES};
use crate::classify::{simulation_category, SecurityCategory, Thresholds, SIMULATION_CATEGORIES};
use crate::density::{smooth, sorted_quantile, DensityOptions, Interval};
use crate::error::{Error, Result};
use crate::evidence::Penalty;
use crate::model::LinearModelSpace;
use crate::rng;
use crate::targets::{divergence_difference, global_target, local_target_from, project, GaussianLinearGenerator, TargetKind};

pub const INTERCEPT: f64 = 2.0;
pub const ERROR_SD: f64 = 1.0;
pub const TABLE_N: usize = 100;
pub const FULL_TRIALS: usize = 1000;
pub const DESK_TRIALS: usize = 300;
pub const COVERAGE_LEVELS: [f64; 2] = [0.95, 0.90];
pub const SECURITY_LEVEL: f64 = 0.90;

// (slopes, reference bits, alternative bits, asymptotic law)
const TABLE: [([f64; 3], &str, &str, &str); 14] = [
    ([0.00, 0.00, 0.15], "001", "011", "chisquare"),
    ([0.00, 0.30, 0.15], "001", "011", "non-central chisquare"),
    ([0.00, 0.30, 0.00], "110", "011", "weighted sum of chisquare"),
    ([0.60, 0.30, 0.00], "110", "011", "normal"),
    ([0.00, 0.30, 0.15], "110", "011", "normal"),
    ([0.60, 0.30, 0.00], "110", "001", "normal"),
    ([0.00, 0.00, 0.15], "110", "001", "normal"),
    ([0.05, 0.05, 0.15], "001", "011", "weighted sum of chisquare"),
    ([0.05, 0.30, 0.15], "001", "011", "normal"),
    ([0.05, 0.30, 0.05], "110", "011", "weighted sum of chisquare"),
    ([0.60, 0.30, 0.05], "110", "011", "normal"),
    ([0.05, 0.30, 0.15], "110", "011", "normal"),
    ([0.60, 0.30, 0.05], "110", "001", "normal"),
    ([0.05, 0.05, 0.15], "110", "001", "normal"),
];

/// One generator/model-space configuration over covariates x1, x2, x3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyCase {
    pub case_id: u32,
    pub slopes: [f64; 3],
    pub reference: LinearModelSpace,
    pub alternative: LinearModelSpace,
    pub asymptotic: String,
}

impl TopologyCase {
    /// Cases 1 to 14 of the topology table. Case 0 compares the case 4
    /// reference space with itself.
    pub fn get(case_id: u32) -> Result<Self> {
        if case_id == 0 {
            let mut c = Self::get(4)?;
            c.case_id = 0;
            c.alternative = c.reference.clone();
            c.asymptotic = "point mass at 0".into();
            return Ok(c);
        }
        let (slopes, r, a, law) = *TABLE
            .get((case_id as usize).wrapping_sub(1))
            .ok_or_else(|| Error::InvalidConfig(format!("case must be 1..14, got {case_id}")))?;
        Ok(Self {
            case_id,
            slopes,
            reference: LinearModelSpace::from_bits(r)?,
            alternative: LinearModelSpace::from_bits(a)?,
            asymptotic: law.into(),
        })
    }

    pub fn all() -> Vec<Self> {
        (1..=14).map(|c| Self::get(c).expect("table case")).collect()
    }

    pub fn generator(&self, n: usize, seed: u64) -> Result<GaussianLinearGenerator> {
        GaussianLinearGenerator::with_normal_design(INTERCEPT, &self.slopes, ERROR_SD, n, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub trials: usize,
    pub replicates: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    pub penalty: Penalty,
    pub density: DensityOptions,
    pub max_reject_fraction: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n: TABLE_N,
            trials: DESK_TRIALS,
            replicates: SIMULATION_REPLICATES,
            seed: 0,
            levels: COVERAGE_LEVELS.to_vec(),
            penalty: Penalty::Sic,
            density: DensityOptions::default(),
            max_reject_fraction: DEFAULT_MAX_REJECT_FRACTION,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("bootstrap replicate count must be at least 1".into()));
        }
        if self.n < 5 {
            return Err(Error::InvalidConfig(format!("sample size {} is too small", self.n)));
        }
        if self.levels.is_empty() || self.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(Error::InvalidConfig("levels must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Intervals of one trial, one per configured level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub global_target: f64,
    pub local_target: f64,
    pub global: Vec<Interval>,
    pub local: Vec<Interval>,
    pub rejected: usize,
}

/// Summary for one (level, kind) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub case_id: u32,
    pub n: usize,
    pub trials: usize,
    pub level: f64,
    pub kind: TargetKind,
    pub coverage: f64,
    /// Binomial standard error at the nominal level.
    pub se: f64,
    pub mean_length: f64,
    pub sd_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub case_id: u32,
    pub n: usize,
    pub trials: usize,
    pub replicates: usize,
    pub seed: u64,
    pub global_target: f64,
    pub rows: Vec<CoverageRow>,
    pub rejected: usize,
}

impl CoverageResult {
    pub fn row(&self, level: f64, kind: TargetKind) -> Option<&CoverageRow> {
        self.rows.iter().find(|r| r.kind == kind && (r.level - level).abs() < 1e-12)
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One trial: fresh responses, shared-resample global and local bootstraps,
/// smoothed intervals at each level and both targets.
pub fn run_trial(case: &TopologyCase, g: &GaussianLinearGenerator, cfg: &SimulationConfig, trial: usize) -> Result<TrialResult> {
    let (m_r, m_a) = (project(g, &case.reference)?, project(g, &case.alternative)?);
    let global_target = global_target(g, &case.reference, &case.alternative, &cfg.penalty)?.value;
    let path = [case.case_id as u64, trial as u64];
    let data = g.sample(cfg.seed, &[path[0], path[1], 0]);
    let local_target = local_target_from(&m_r, &m_a, &data, &cfg.penalty)?.value;
    let boot_seed = rng::derive_seed(cfg.seed, &[path[0], path[1], 1]);
    let (gs, ls) = bootstrap_global_local(
        &case.reference,
        &case.alternative,
        &data,
        cfg.replicates,
        boot_seed,
        cfg.max_reject_fraction,
        &cfg.penalty,
    )?;
    let gd = smooth(&gs.values, &cfg.density)?;
    let ld = smooth(&ls.values, &cfg.density)?;
    let global = cfg.levels.iter().map(|&l| gd.interval(l)).collect::<Result<Vec<_>>>()?;
    let local = cfg.levels.iter().map(|&l| ld.interval(l)).collect::<Result<Vec<_>>>()?;
    Ok(TrialResult { trial, global_target, local_target, global, local, rejected: gs.rejected })
}

/// All trials of a case, in trial order.
pub fn run_trials(case: &TopologyCase, cfg: &SimulationConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let g = case.generator(cfg.n, cfg.seed)?;
    (0..cfg.trials).into_par_iter().map(|t| run_trial(case, &g, cfg, t)).collect()
}

pub fn summarize_coverage(case: &TopologyCase, cfg: &SimulationConfig, trials: &[TrialResult]) -> CoverageResult {
    let mut rows = Vec::new();
    for (li, &level) in cfg.levels.iter().enumerate() {
        for kind in [TargetKind::Global, TargetKind::Local] {
            let mut covered = 0usize;
            let lengths: Vec<f64> = trials
                .iter()
                .map(|t| {
                    let (iv, target) = match kind {
                        TargetKind::Global => (t.global[li], t.global_target),
                        TargetKind::Local => (t.local[li], t.local_target),
                    };
                    covered += iv.contains(target) as usize;
                    iv.length()
                })
                .collect();
            let (mean_length, sd_length) = mean_sd(&lengths);
            let m = trials.len() as f64;
            rows.push(CoverageRow {
                case_id: case.case_id,
                n: cfg.n,
                trials: trials.len(),
                level,
                kind,
                coverage: covered as f64 / m,
                se: (level * (1.0 - level) / m).sqrt(),
                mean_length,
                sd_length,
            });
        }
    }
    CoverageResult {
        case_id: case.case_id,
        n: cfg.n,
        trials: trials.len(),
        replicates: cfg.replicates,
        seed: cfg.seed,
        global_target: trials.first().map_or(f64::NAN, |t| t.global_target),
        rows,
        rejected: trials.iter().map(|t| t.rejected).sum(),
    }
}

/// Coverage of global and local intervals for their respective targets.
pub fn run_coverage(case: &TopologyCase, cfg: &SimulationConfig) -> Result<CoverageResult> {
    let trials = run_trials(case, cfg)?;
    Ok(summarize_coverage(case, cfg, &trials))
}

/// Distribution of per-trial local/global interval length ratios at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub n: usize,
    pub ratios: Vec<f64>,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Local over global interval length at the first configured level, for each
/// sample size. Trials with a zero-length global interval have no ratio; a
/// sample size with no ratios produces no row.
pub fn length_ratio_sweep(case: &TopologyCase, n_values: &[usize], cfg: &SimulationConfig) -> Result<Vec<RatioRow>> {
    let mut out = Vec::new();
    for &n in n_values {
        let cfg_n = SimulationConfig { n, levels: vec![cfg.levels[0]], ..cfg.clone() };
        let trials = run_trials(case, &cfg_n)?;
        let mut ratios: Vec<f64> = trials
            .iter()
            .filter(|t| t.global[0].length() > 0.0)
            .map(|t| t.local[0].length() / t.global[0].length())
            .collect();
        if ratios.is_empty() {
            continue;
        }
        let mut sorted = ratios.clone();
        sorted.sort_by(f64::total_cmp);
        out.push(RatioRow {
            n,
            median: sorted_quantile(&sorted, 0.5),
            q25: sorted_quantile(&sorted, 0.25),
            q75: sorted_quantile(&sorted, 0.75),
            ratios: std::mem::take(&mut ratios),
        });
    }
    Ok(out)
}

/// Category proportions for one interval kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityRow {
    pub kind: TargetKind,
    pub trials: usize,
    pub proportions: BTreeMap<SecurityCategory, f64>,
    pub reliability: f64,
}

impl SecurityRow {
    pub fn proportion(&self, c: SecurityCategory) -> f64 {
        self.proportions.get(&c.tabulated()).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityTable {
    pub label: String,
    pub n: usize,
    pub true_sign: i8,
    pub divergence_difference: f64,
    pub rows: Vec<SecurityRow>,
}

/// Regression stand-ins for the four structural-equation comparisons of the
/// security study: correct and strong, correct and weakened, mildly and badly
/// misspecified. Covariates x1, x2, x3; reference {x1, x2} against {x2, x3}.
pub fn security_preset(label: &str) -> Result<TopologyCase> {
    let (slopes, r, a) = match label {
        "A" | "a" => ([0.30, 0.30, 0.00], "110", "011"),
        "B" | "b" => ([0.20, 0.30, 0.00], "110", "011"),
        "C" | "c" => ([0.30, 0.30, 0.05], "110", "011"),
        "D" | "d" => ([0.40, 0.30, 0.30], "110", "011"),
        other => return Err(Error::InvalidConfig(format!("security preset must be A, B, C or D, got {other}"))),
    };
    Ok(TopologyCase {
        case_id: 100 + (label.to_ascii_uppercase().as_bytes()[0] - b'A') as u32,
        slopes,
        reference: LinearModelSpace::from_bits(r)?,
        alternative: LinearModelSpace::from_bits(a)?,
        asymptotic: "normal".into(),
    })
}

// relative size under which the two projections count as equally divergent
const EQUIDISTANT_TOLERANCE: f64 = 1e-9;

/// Security categories of smoothed-mean evidence with intervals at
/// `cfg.levels[0]`, against the sign of the true divergence difference.
pub fn run_security_tabulation(case: &TopologyCase, cfg: &SimulationConfig, t: &Thresholds) -> Result<SecurityTable> {
    t.validate()?;
    let g = case.generator(cfg.n, cfg.seed)?;
    let dd = divergence_difference(&g, &case.reference, &case.alternative)?;
    if dd.abs() <= EQUIDISTANT_TOLERANCE * cfg.n as f64 {
        return Err(Error::EquidistantModels);
    }
    let true_sign: i8 = if dd > 0.0 { 1 } else { -1 };
    let cfg = SimulationConfig { levels: vec![cfg.levels[0]], ..cfg.clone() };
    cfg.validate()?;
    let trials: Vec<TrialResult> =
        (0..cfg.trials).into_par_iter().map(|i| run_trial(case, &g, &cfg, i)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for kind in [TargetKind::Global, TargetKind::Local] {
        let mut counts: BTreeMap<SecurityCategory, usize> = SIMULATION_CATEGORIES.iter().map(|c| (*c, 0)).collect();
        let mut correct = 0usize;
        for tr in &trials {
            let iv = match kind {
                TargetKind::Global => tr.global[0],
                TargetKind::Local => tr.local[0],
            };
            let c = simulation_category(iv.point, iv.lower, iv.upper, true_sign, t)?.tabulated();
            *counts.get_mut(&c).expect("tabulated category") += 1;
            correct += ((iv.point > 0.0) == (true_sign > 0) && iv.point != 0.0) as usize;
        }
        let m = trials.len() as f64;
        rows.push(SecurityRow {
            kind,
            trials: trials.len(),
            proportions: counts.into_iter().map(|(c, k)| (c, k as f64 / m)).collect(),
            reliability: correct as f64 / m,
        });
    }
    Ok(SecurityTable { label: case.case_id.to_string(), n: cfg.n, true_sign, divergence_difference: dd, rows })
}
