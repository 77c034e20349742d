use std::fs::File;
use std::path::Path;

use evident_core::bootstrap::{bootstrap_evidence, bootstrap_global_local, BootstrapConfig, EvidenceSample};
use evident_core::classify::SIMULATION_CATEGORIES;
use evident_core::lincoln_petersen::lp_smoothed;
use evident_core::profile::{profile_curvature, NormalMean, RegressionSlope};
use evident_core::simulation::{security_preset, RatioRow, SecurityTable};
use evident_core::{
    adjusted_profile_loglik, evidence_category, length_ratio_sweep, lp_bootstrap, lp_capture_prob, lp_estimate,
    profile_loglik, raw_evidence_global, run_coverage, run_security_tabulation, security_category, smooth, Adjustment,
    CoverageResult, Dataset, EvidenceCategory, LinearModelSpace, LpData, LpScheme, Mode, ModelPair, Penalty,
    ProfileFamily, SecurityCategory, SimulationConfig, Smoothed, TargetKind, Thresholds, TopologyCase,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    AnalyzeConfig, FamilyArg, LpConfig, ProfileConfig, RatioSweepConfig, RunConfig, SecurityConfig, SimulateConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{Report, Table};

pub struct Outcome {
    pub report: Report,
    pub table: Table,
    /// Only `lp` has one: the smoothed sampling densities.
    pub grid: Option<Table>,
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut warnings = Vec::new();
    let (result, table, grid) = match cfg {
        RunConfig::Analyze(c) => {
            let (r, t) = analyze(c, &mut warnings)?;
            (r, t, None)
        }
        RunConfig::Simulate(c) => {
            let (r, t) = simulate(c)?;
            (r, t, None)
        }
        RunConfig::RatioSweep(c) => {
            let (r, t) = ratio_sweep(c)?;
            (r, t, None)
        }
        RunConfig::Security(c) => {
            let (r, t) = security(c)?;
            (r, t, None)
        }
        RunConfig::Lp(c) => {
            let (r, t, g) = lp(c)?;
            (r, t, Some(g))
        }
        RunConfig::Profile(c) => {
            let (r, t) = profile(c)?;
            (r, t, None)
        }
    };
    Ok(Outcome { report: Report::new(cfg.clone(), warnings, result), table, grid })
}

fn num(v: f64) -> String {
    v.to_string()
}

fn kind_str(k: TargetKind) -> &'static str {
    match k {
        TargetKind::Global => "global",
        TargetKind::Local => "local",
    }
}

fn to_json<T: Serialize>(v: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(v)?)
}

fn read_csv(path: &Path, response: &str) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::config(format!("cannot open {}: {e}", path.display())))?;
    Ok(Dataset::from_csv(file, response)?)
}

fn column(data: &Dataset, name: &str) -> CliResult<usize> {
    data.column_index(name).ok_or_else(|| {
        if name == data.response_name() {
            CliError::config(format!("column `{name}` is the response and cannot be a covariate"))
        } else {
            CliError::config(format!("column `{name}` not found"))
        }
    })
}

fn space(data: &Dataset, names: &[String]) -> CliResult<LinearModelSpace> {
    let mut idx = names.iter().filter(|s| !s.is_empty()).map(|s| column(data, s)).collect::<CliResult<Vec<_>>>()?;
    idx.sort_unstable();
    idx.dedup();
    Ok(LinearModelSpace::new(idx, true)?)
}

fn covariate_names(data: &Dataset, s: &LinearModelSpace) -> Vec<String> {
    s.covariates().iter().map(|&j| data.column_names()[j].clone()).collect()
}

#[derive(Serialize)]
struct IntervalOut {
    level: f64,
    lower: f64,
    upper: f64,
    length: f64,
    security_category: SecurityCategory,
}

#[derive(Serialize)]
struct KindOut {
    kind: TargetKind,
    point: f64,
    evidence_category: EvidenceCategory,
    replicates: usize,
    rejected: usize,
    point_mass: bool,
    intervals: Vec<IntervalOut>,
}

fn summarize(kind: TargetKind, s: &EvidenceSample, cfg: &AnalyzeConfig, t: &Thresholds) -> CliResult<KindOut> {
    let smoothed = smooth(&s.values, &cfg.estimator.options())?;
    let point = smoothed.mean();
    let intervals = cfg
        .levels
        .iter()
        .map(|&level| {
            let iv = smoothed.interval(level)?;
            Ok(IntervalOut {
                level,
                lower: iv.lower,
                upper: iv.upper,
                length: iv.length(),
                security_category: security_category(iv.point, iv.lower, iv.upper, t)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(KindOut {
        kind,
        point,
        evidence_category: evidence_category(point, t),
        replicates: s.len(),
        rejected: s.rejected,
        point_mass: smoothed.is_point_mass(),
        intervals,
    })
}

fn analyze(cfg: &AnalyzeConfig, warnings: &mut Vec<String>) -> CliResult<(Value, Table)> {
    let t = cfg.validate()?;
    let data = read_csv(&cfg.input, &cfg.response)?;
    let reference = space(&data, &cfg.reference)?;
    let alternative = space(&data, &cfg.alternative)?;
    let penalty: Penalty = cfg.penalty.into();
    if reference == alternative {
        warnings.push("reference and alternative are the same model space; the evidence is identically 0".into());
    }
    if penalty == Penalty::Aic {
        warnings.push("the aic penalty is not consistent; evidence for the better model does not grow with n".into());
    }
    let observed = raw_evidence_global(&reference, &alternative, &data, &penalty)?;

    let mut samples = Vec::new();
    if cfg.mode.global() && cfg.mode.local() {
        let (g, l) = bootstrap_global_local(
            &reference,
            &alternative,
            &data,
            cfg.replicates,
            cfg.seed,
            cfg.max_reject_fraction,
            &penalty,
        )?;
        samples.push((TargetKind::Global, g));
        samples.push((TargetKind::Local, l));
    } else {
        let (kind, mode) = if cfg.mode.global() { (TargetKind::Global, Mode::Global) } else { (TargetKind::Local, Mode::Local) };
        let boot = BootstrapConfig { replicates: cfg.replicates, seed: cfg.seed, mode, max_reject_fraction: cfg.max_reject_fraction };
        let pair = ModelPair::spaces(reference.clone(), alternative.clone());
        samples.push((kind, bootstrap_evidence(&pair, &data, &boot, &penalty)?));
    }
    let kinds = samples.iter().map(|(k, s)| summarize(*k, s, cfg, &t)).collect::<CliResult<Vec<_>>>()?;

    let mut table = Table::new(&["kind", "level", "point", "lower", "upper", "length", "evidence_category", "security_category"]);
    for k in &kinds {
        for iv in &k.intervals {
            table.push(vec![
                kind_str(k.kind).into(),
                num(iv.level),
                num(k.point),
                num(iv.lower),
                num(iv.upper),
                num(iv.length),
                format!("{:?}", k.evidence_category),
                iv.security_category.code().into(),
            ]);
        }
    }
    let result = json!({
        "n": data.len(),
        "response": data.response_name(),
        "reference": { "covariates": covariate_names(&data, &reference), "params": reference.param_count() },
        "alternative": { "covariates": covariate_names(&data, &alternative), "params": alternative.param_count() },
        "penalty": penalty.name(),
        "penalty_term": observed.penalty_term,
        "observed_evidence": observed.value,
        "observed_category": evidence_category(observed.value, &t),
        "kinds": to_json(&kinds)?,
    });
    Ok((result, table))
}

fn sim_config(
    n: usize,
    trials: usize,
    replicates: usize,
    seed: u64,
    levels: Vec<f64>,
    penalty: Penalty,
    est: crate::config::EstimatorArg,
    max_reject_fraction: f64,
) -> CliResult<SimulationConfig> {
    let cfg = SimulationConfig { n, trials, replicates, seed, levels, penalty, density: est.options(), max_reject_fraction };
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(cfg: &SimulateConfig) -> CliResult<(Value, Table)> {
    let cases = cfg.cases.iter().map(|&c| TopologyCase::get(c)).collect::<Result<Vec<_>, _>>()?;
    let sim = sim_config(
        cfg.n,
        cfg.trials,
        cfg.replicates,
        cfg.seed,
        cfg.levels.clone(),
        cfg.penalty.into(),
        cfg.estimator,
        cfg.max_reject_fraction,
    )?;
    let results: Vec<(TopologyCase, CoverageResult)> =
        cases.into_iter().map(|c| run_coverage(&c, &sim).map(|r| (c, r))).collect::<Result<_, _>>()?;

    let mut table = Table::new(&[
        "case_id", "n", "trials", "replicates", "level", "kind", "coverage", "se", "mean_length", "sd_length",
        "global_target", "rejected",
    ]);
    for (_, r) in &results {
        for row in &r.rows {
            table.push(vec![
                row.case_id.to_string(),
                row.n.to_string(),
                row.trials.to_string(),
                r.replicates.to_string(),
                num(row.level),
                kind_str(row.kind).into(),
                num(row.coverage),
                num(row.se),
                num(row.mean_length),
                num(row.sd_length),
                num(r.global_target),
                r.rejected.to_string(),
            ]);
        }
    }
    let cases: Vec<Value> = results
        .iter()
        .map(|(c, r)| Ok(json!({ "case": to_json(c)?, "coverage": to_json(r)? })))
        .collect::<CliResult<_>>()?;
    Ok((json!({ "cases": cases }), table))
}

fn ratio_sweep(cfg: &RatioSweepConfig) -> CliResult<(Value, Table)> {
    let case = TopologyCase::get(cfg.case)?;
    if cfg.n_values.is_empty() {
        return Err(CliError::config("at least one --n is required"));
    }
    let sim = sim_config(
        cfg.n_values[0],
        cfg.trials,
        cfg.replicates,
        cfg.seed,
        vec![cfg.level],
        cfg.penalty.into(),
        cfg.estimator,
        cfg.max_reject_fraction,
    )?;
    for &n in &cfg.n_values {
        SimulationConfig { n, ..sim.clone() }.validate()?;
    }
    let rows: Vec<RatioRow> = length_ratio_sweep(&case, &cfg.n_values, &sim)?;
    let mut table = Table::new(&["case_id", "n", "ratios", "median", "q25", "q75"]);
    for r in &rows {
        table.push(vec![
            case.case_id.to_string(),
            r.n.to_string(),
            r.ratios.len().to_string(),
            num(r.median),
            num(r.q25),
            num(r.q75),
        ]);
    }
    Ok((json!({ "case": to_json(&case)?, "level": cfg.level, "rows": to_json(&rows)? }), table))
}

fn security(cfg: &SecurityConfig) -> CliResult<(Value, Table)> {
    let t = cfg.validate()?;
    let presets = cfg.presets.iter().map(|p| Ok((p.to_ascii_uppercase(), security_preset(p)?))).collect::<CliResult<Vec<_>>>()?;
    let sim = sim_config(
        cfg.n,
        cfg.trials,
        cfg.replicates,
        cfg.seed,
        vec![cfg.level],
        cfg.penalty.into(),
        cfg.estimator,
        cfg.max_reject_fraction,
    )?;
    let mut tables: Vec<SecurityTable> = Vec::new();
    for (label, case) in &presets {
        let mut table = run_security_tabulation(case, &sim, &t)?;
        table.label = label.clone();
        tables.push(table);
    }
    let mut header = vec!["preset", "kind", "trials", "reliability"];
    header.extend(SIMULATION_CATEGORIES.iter().map(|c| c.code()));
    let mut table = Table::new(&header);
    for st in &tables {
        for row in &st.rows {
            let mut cells = vec![st.label.clone(), kind_str(row.kind).into(), row.trials.to_string(), num(row.reliability)];
            cells.extend(SIMULATION_CATEGORIES.iter().map(|&c| num(row.proportion(c))));
            table.push(cells);
        }
    }
    let cases: Vec<Value> = presets
        .iter()
        .zip(&tables)
        .map(|((_, c), st)| Ok(json!({ "case": to_json(c)?, "table": to_json(st)? })))
        .collect::<CliResult<_>>()?;
    Ok((json!({ "level": cfg.level, "presets": cases }), table))
}

fn lp(cfg: &LpConfig) -> CliResult<(Value, Table, Table)> {
    cfg.validate()?;
    let d = LpData::new(cfg.m, cfg.n2, cfg.x)?;
    let total = lp_estimate(&d)?;
    let phi = lp_capture_prob(&d)?;
    let opts = cfg.estimator.options();
    let mut table = Table::new(&["scheme", "level", "lower", "upper", "point", "length"]);
    let mut grid = Table::new(&["scheme", "x", "density", "cdf"]);
    let mut schemes = Vec::new();
    for &s in &cfg.schemes {
        let scheme: LpScheme = s.into();
        let sample = lp_bootstrap(total, phi, cfg.m, cfg.n2, scheme, cfg.replicates, cfg.seed)?;
        let smoothed = lp_smoothed(&sample, &opts)?;
        let mut intervals = Vec::new();
        for &level in &cfg.levels {
            let iv = smoothed.interval(level)?;
            table.push(vec![scheme.to_string(), num(level), num(iv.lower), num(iv.upper), num(iv.point), num(iv.length())]);
            intervals.push(json!({ "level": level, "lower": iv.lower, "upper": iv.upper, "length": iv.length() }));
        }
        if let Smoothed::Density(dens) = &smoothed {
            for ((x, f), c) in dens.grid().iter().zip(dens.density()).zip(dens.cdf()) {
                grid.push(vec![scheme.to_string(), num(*x), num(*f), num(*c)]);
            }
        }
        schemes.push(json!({
            "scheme": scheme,
            "estimates": sample.estimates.len(),
            "discarded": sample.discarded,
            "mean": smoothed.mean(),
            "point_mass": smoothed.is_point_mass(),
            "intervals": intervals,
        }));
    }
    let result = json!({ "estimate": total, "capture_prob": phi, "schemes": schemes });
    Ok((result, table, grid))
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

fn profile_table<F: ProfileFamily>(family: &F, cfg: &ProfileConfig) -> CliResult<(Value, Table)> {
    if cfg.replicates == 0 {
        return Err(CliError::config("--B must be at least 1"));
    }
    let (gamma_hat, _) = family.mle()?;
    let step = 1e-3 * (1.0 + gamma_hat.abs());
    let curvature = profile_curvature(family, gamma_hat, step)?;
    if !(curvature < 0.0) {
        return Err(CliError::Statistical(format!("profile curvature {curvature} at the estimate is not negative")));
    }
    let se = (-1.0 / curvature).sqrt();
    let gammas = if cfg.gammas.is_empty() {
        if cfg.points < 2 {
            return Err(CliError::config("--points must be at least 2"));
        }
        linspace(gamma_hat - 3.0 * se, gamma_hat + 3.0 * se, cfg.points)
    } else {
        cfg.gammas.clone()
    };
    let mut table = Table::new(&["gamma", "profile", "adjusted", "bias_corrected"]);
    let mut rows = Vec::new();
    for &g in &gammas {
        let lp = profile_loglik(family, g)?;
        let lsa = adjusted_profile_loglik(family, g, cfg.replicates, cfg.seed)?;
        let la = 2.0 * lp - lsa;
        table.push(vec![num(g), num(lp), num(lsa), num(la)]);
        rows.push(json!({ "gamma": g, "profile": lp, "adjusted": lsa, "bias_corrected": la }));
    }
    Ok((json!({ "estimate": gamma_hat, "se": se, "rows": rows }), table))
}

fn profile(cfg: &ProfileConfig) -> CliResult<(Value, Table)> {
    let data = read_csv(&cfg.input, &cfg.response)?;
    match cfg.family {
        FamilyArg::Normal => {
            let family = NormalMean::new(data.response().to_vec())?;
            let (mut result, table) = profile_table(&family, cfg)?;
            let divisor = |kind| family.effective_divisor(kind, cfg.replicates, cfg.seed);
            result["effective_divisor"] = json!({
                "profile": divisor(Adjustment::None)?,
                "adjusted": divisor(Adjustment::Simulation)?,
                "bias_corrected": divisor(Adjustment::BiasCorrected)?,
            });
            Ok((result, table))
        }
        FamilyArg::Regression => {
            let target_name = cfg.target.as_deref().ok_or_else(|| CliError::config("--target is required for the regression family"))?;
            let target = column(&data, target_name)?;
            let mut names = cfg.covariates.clone();
            if !names.iter().any(|n| n == target_name) {
                names.push(target_name.to_owned());
            }
            let space = space(&data, &names)?;
            let family = RegressionSlope::new(data, &space, target)?;
            profile_table(&family, cfg)
        }
    }
}
