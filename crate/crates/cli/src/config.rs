//! Run configurations. Each struct is both the clap argument set of its
//! subcommand and the `config` object embedded in every JSON report, so a
//! report can be replayed with `evident replay`.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use evident_core::{DensityOptions, Estimator, Penalty, Thresholds};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Global,
    Local,
    Both,
}

impl ModeArg {
    pub fn global(self) -> bool {
        matches!(self, ModeArg::Global | ModeArg::Both)
    }

    pub fn local(self) -> bool {
        matches!(self, ModeArg::Local | ModeArg::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyArg {
    Sic,
    Aic,
}

impl From<PenaltyArg> for Penalty {
    fn from(p: PenaltyArg) -> Self {
        match p {
            PenaltyArg::Sic => Penalty::Sic,
            PenaltyArg::Aic => Penalty::Aic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorArg {
    /// Gaussian kernel, Silverman bandwidth.
    Kde,
    /// Local log-quadratic likelihood.
    LogQuadratic,
}

impl EstimatorArg {
    pub fn options(self) -> DensityOptions {
        let estimator = match self {
            EstimatorArg::Kde => Estimator::GaussianKde,
            EstimatorArg::LogQuadratic => Estimator::LocalLogQuadratic,
        };
        DensityOptions { estimator, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    /// Normal sample; interest is the mean.
    Normal,
    /// Linear regression; interest is one slope.
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeArg {
    BothFixed,
    MFixed,
    NoneFixed,
}

impl From<SchemeArg> for evident_core::LpScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::BothFixed => evident_core::LpScheme::BothFixed,
            SchemeArg::MFixed => evident_core::LpScheme::MFixed,
            SchemeArg::NoneFixed => evident_core::LpScheme::NoneFixed,
        }
    }
}

fn check_levels(levels: &[f64]) -> CliResult<()> {
    if levels.is_empty() {
        return Err(CliError::config("at least one --level is required"));
    }
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(CliError::config(format!("level {l} is outside (0, 1)")));
    }
    Ok(())
}

fn thresholds(k_p: f64, k_s: f64) -> CliResult<Thresholds> {
    Ok(Thresholds::new(k_p, k_s)?)
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the response column; every other column is a covariate.
    #[arg(long)]
    pub response: String,
    /// Reference covariates, comma separated ("" for intercept only).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true, num_args = 1)]
    pub reference: Vec<String>,
    /// Alternative covariates, comma separated ("" for intercept only).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true, num_args = 1)]
    pub alternative: Vec<String>,
    /// Bootstrap replicates.
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 4000)]
    pub replicates: usize,
    /// Interval level; repeat for several.
    #[arg(long = "level", default_values_t = [0.95])]
    pub levels: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = PenaltyArg::Sic)]
    pub penalty: PenaltyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Prognostic evidence threshold.
    #[arg(long = "k-p", default_value_t = 4.0)]
    pub k_p: f64,
    /// Strong evidence threshold.
    #[arg(long = "k-s", default_value_t = 7.0)]
    pub k_s: f64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Kde)]
    pub estimator: EstimatorArg,
    /// Largest tolerated fraction of rejected resamples.
    #[arg(long, default_value_t = 0.05)]
    pub max_reject_fraction: f64,
}

impl AnalyzeConfig {
    pub fn validate(&self) -> CliResult<Thresholds> {
        if self.replicates < 100 {
            return Err(CliError::config(format!("--B must be at least 100, got {}", self.replicates)));
        }
        check_levels(&self.levels)?;
        thresholds(self.k_p, self.k_s)
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    /// Topology case, 1..14; repeat for several.
    #[arg(long = "case", required = true)]
    pub cases: Vec<u32>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 300)]
    pub trials: usize,
    /// Bootstrap replicates per trial.
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long = "level", default_values_t = [0.95, 0.90])]
    pub levels: Vec<f64>,
    #[arg(long, value_enum, default_value_t = PenaltyArg::Sic)]
    pub penalty: PenaltyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Kde)]
    pub estimator: EstimatorArg,
    #[arg(long, default_value_t = 0.05)]
    pub max_reject_fraction: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSweepConfig {
    #[arg(long = "case", default_value_t = 4)]
    pub case: u32,
    /// Sample size; repeat for several.
    #[arg(long = "n", default_values_t = [25, 50, 100, 200, 400])]
    pub n_values: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, value_enum, default_value_t = PenaltyArg::Sic)]
    pub penalty: PenaltyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Kde)]
    pub estimator: EstimatorArg,
    #[arg(long, default_value_t = 0.05)]
    pub max_reject_fraction: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityConfig {
    /// Preset A..D; repeat for several.
    #[arg(long = "preset", default_values_t = ["A".to_string(), "B".to_string(), "C".to_string(), "D".to_string()])]
    pub presets: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 300)]
    pub trials: usize,
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.90)]
    pub level: f64,
    #[arg(long = "k-p", default_value_t = 4.0)]
    pub k_p: f64,
    #[arg(long = "k-s", default_value_t = 7.0)]
    pub k_s: f64,
    #[arg(long, value_enum, default_value_t = PenaltyArg::Sic)]
    pub penalty: PenaltyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Kde)]
    pub estimator: EstimatorArg,
    #[arg(long, default_value_t = 0.05)]
    pub max_reject_fraction: f64,
}

impl SecurityConfig {
    pub fn validate(&self) -> CliResult<Thresholds> {
        check_levels(&[self.level])?;
        thresholds(self.k_p, self.k_s)
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpConfig {
    /// Animals marked on the first visit.
    #[arg(long)]
    pub m: u64,
    /// Animals caught on the second visit.
    #[arg(long)]
    pub n2: u64,
    /// Marked animals among the second catch.
    #[arg(long)]
    pub x: u64,
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 10_000)]
    pub replicates: usize,
    #[arg(long = "level", default_values_t = [0.95])]
    pub levels: Vec<f64>,
    /// Sampling scheme; repeat for several. Defaults to all three.
    #[arg(long = "scheme", value_enum, default_values_t = [SchemeArg::BothFixed, SchemeArg::MFixed, SchemeArg::NoneFixed])]
    pub schemes: Vec<SchemeArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Kde)]
    pub estimator: EstimatorArg,
}

impl LpConfig {
    pub fn validate(&self) -> CliResult<()> {
        check_levels(&self.levels)
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub input: PathBuf,
    /// Sample column (normal) or response column (regression).
    #[arg(long)]
    pub response: String,
    /// Regression covariates, comma separated; must include --target.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Regression covariate whose slope is the interest parameter.
    #[arg(long)]
    pub target: Option<String>,
    /// Interest values to evaluate; repeat for several. Defaults to a grid of
    /// --points values spanning three standard errors around the estimate.
    #[arg(long = "gamma", allow_hyphen_values = true)]
    pub gammas: Vec<f64>,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 2000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Analyze(AnalyzeConfig),
    Simulate(SimulateConfig),
    RatioSweep(RatioSweepConfig),
    Security(SecurityConfig),
    Lp(LpConfig),
    Profile(ProfileConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Analyze(_) => "analyze",
            RunConfig::Simulate(_) => "simulate",
            RunConfig::RatioSweep(_) => "ratio-sweep",
            RunConfig::Security(_) => "security",
            RunConfig::Lp(_) => "lp",
            RunConfig::Profile(_) => "profile",
        }
    }
}
