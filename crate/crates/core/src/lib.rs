//! Bootstrap uncertainty for statistical evidence between model spaces.
//!
//! Evidence is the penalized log-likelihood ratio (ΔSIC scale) of a reference
//! model space against an alternative. The crate estimates its sampling
//! distribution by row resampling, both globally (models refit and evaluated
//! on each resample) and locally (refit on the resample, evaluated on the
//! observed data), smooths it, and reports a point estimate, equal-tailed
//! intervals and evidence/security categories.

pub mod bootstrap;
pub mod classify;
pub mod density;
pub mod error;
pub mod evidence;
pub mod lincoln_petersen;
pub mod model;
pub mod profile;
pub mod rng;
pub mod simulation;
pub mod targets;

pub use error::{Error, Result};
pub use evidence::{raw_evidence_global, raw_evidence_local, raw_evidence_specified, sic, EvidenceValue, Mode, Penalty};
pub use model::{fit_mle, log_likelihood, param_count, Dataset, FittedLinearModel, Likelihood, LinearModelSpace, Row, SpecifiedModel};
pub use bootstrap::{bootstrap_evidence, bootstrap_global_local, BootstrapConfig, EvidenceSample, ModelPair};
pub use density::{estimate_density, interval, smooth, smoothed_mean, smoothed_quantile, DensityOptions, Estimator, Interval, Smoothed, SmoothedDensity};
pub use classify::{evidence_category, security_category, simulation_category, EvidenceCategory, SecurityCategory, Thresholds};
pub use targets::{global_target, kld_fixed_design, local_target, project, GaussianLinearGenerator, TargetKind, TargetValue};
pub use simulation::{length_ratio_sweep, run_coverage, run_security_tabulation, CoverageResult, SimulationConfig, TopologyCase};
pub use lincoln_petersen::{lp_bootstrap, lp_capture_prob, lp_estimate, lp_interval, LpBootstrapSample, LpData, LpScheme};
pub use profile::{adjusted_profile_loglik, Adjustment, et_adjusted_profile_loglik, profile_loglik, ProfileFamily};
