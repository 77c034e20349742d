//! Datasets, Gaussian linear model spaces and their maximum-likelihood fits.

use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Relative threshold below which the ML error variance counts as zero.
pub const DEGENERATE_VARIANCE_RATIO: f64 = 1e-12;

/// Relative pivot size below which a design column counts as collinear.
const RANK_TOLERANCE: f64 = 1e-10;

/// I.i.d. observation rows: a response and `dim` covariates per row.
///
/// Rows are the unit of resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    response: Vec<f64>,
    // row-major, len = n * dim
    covariates: Vec<f64>,
    dim: usize,
    response_name: String,
    column_names: Vec<String>,
}

/// Borrowed view of one observation.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    pub y: f64,
    pub x: &'a [f64],
}

impl Dataset {
    /// Build from a response vector and row-major covariate rows.
    pub fn new(response: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if response.len() != rows.len() {
            return Err(Error::InvalidData(format!(
                "{} responses but {} covariate rows",
                response.len(),
                rows.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::InvalidData(format!(
                "row {i} has {} covariates, expected {dim}",
                rows[i].len()
            )));
        }
        let covariates = rows.into_iter().flatten().collect();
        Self::from_parts(response, covariates, dim)
    }

    /// Build from a response vector and covariate columns.
    pub fn from_columns(response: Vec<f64>, columns: &[Vec<f64>]) -> Result<Self> {
        let n = response.len();
        if let Some(j) = columns.iter().position(|c| c.len() != n) {
            return Err(Error::InvalidData(format!(
                "covariate column {j} has {} values, expected {n}",
                columns[j].len()
            )));
        }
        let dim = columns.len();
        let mut covariates = Vec::with_capacity(n * dim);
        for i in 0..n {
            covariates.extend(columns.iter().map(|c| c[i]));
        }
        Self::from_parts(response, covariates, dim)
    }

    fn from_parts(response: Vec<f64>, covariates: Vec<f64>, dim: usize) -> Result<Self> {
        if response.is_empty() {
            return Err(Error::InvalidData("dataset has no rows".into()));
        }
        if response.iter().chain(&covariates).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("dataset contains non-finite values".into()));
        }
        Ok(Self {
            response,
            covariates,
            dim,
            response_name: "y".into(),
            column_names: (1..=dim).map(|j| format!("x{j}")).collect(),
        })
    }

    /// Replace the default `y`, `x1..xd` names.
    pub fn with_names(mut self, response: impl Into<String>, columns: Vec<String>) -> Result<Self> {
        if columns.len() != self.dim {
            return Err(Error::InvalidData(format!(
                "{} column names for {} covariates",
                columns.len(),
                self.dim
            )));
        }
        self.response_name = response.into();
        self.column_names = columns;
        Ok(self)
    }

    /// Read a headed CSV; `response` names the response column and every other
    /// column becomes a covariate in header order. Empty or non-numeric cells
    /// are errors.
    pub fn from_csv<R: Read>(reader: R, response: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let response_idx = headers
            .iter()
            .position(|h| h == response)
            .ok_or_else(|| Error::InvalidData(format!("response column `{response}` not found")))?;
        let column_names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != response_idx)
            .map(|(_, h)| h.clone())
            .collect();

        let mut ys = Vec::new();
        let mut xs = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(Error::InvalidData(format!(
                    "record {} has {} fields, header has {}",
                    line + 1,
                    record.len(),
                    headers.len()
                )));
            }
            for (j, field) in record.iter().enumerate() {
                if field.is_empty() {
                    return Err(Error::InvalidData(format!(
                        "missing value in column `{}` of record {}",
                        headers[j],
                        line + 1
                    )));
                }
                let value: f64 = field.parse().map_err(|_| {
                    Error::InvalidData(format!(
                        "non-numeric value `{field}` in column `{}` of record {}",
                        headers[j],
                        line + 1
                    ))
                })?;
                if j == response_idx {
                    ys.push(value);
                } else {
                    xs.push(value);
                }
            }
        }
        let dim = column_names.len();
        Self::from_parts(ys, xs, dim)?.with_names(response, column_names)
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    /// Covariate dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Zero-based index of a covariate column by name.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        Row { y: self.response[i], x: &self.covariates[i * self.dim..(i + 1) * self.dim] }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r.x[j]).collect()
    }

    /// New dataset made of the given rows (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut response = Vec::with_capacity(indices.len());
        let mut covariates = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            response.push(self.response[i]);
            covariates.extend_from_slice(&self.covariates[i * self.dim..(i + 1) * self.dim]);
        }
        Dataset {
            response,
            covariates,
            dim: self.dim,
            response_name: self.response_name.clone(),
            column_names: self.column_names.clone(),
        }
    }

    /// Same covariates, new responses.
    pub fn with_response(&self, response: Vec<f64>) -> Result<Dataset> {
        if response.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} responses for {} rows",
                response.len(),
                self.len()
            )));
        }
        let mut out = self.clone();
        out.response = response;
        Ok(out)
    }

    /// Population variance of the response.
    pub fn response_variance(&self) -> f64 {
        let n = self.len() as f64;
        let mean = self.response.iter().sum::<f64>() / n;
        self.response.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n
    }
}

/// A Gaussian linear model space: which covariates enter, with or without
/// intercept. The error variance is always estimated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearModelSpace {
    covariates: Vec<usize>,
    intercept: bool,
}

impl LinearModelSpace {
    /// `covariates` are zero-based column indices.
    pub fn new(covariates: Vec<usize>, intercept: bool) -> Result<Self> {
        let mut seen = covariates.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModelSpace(format!("repeated covariate in {covariates:?}")));
        }
        if covariates.is_empty() && !intercept {
            return Err(Error::InvalidModelSpace("model has no mean terms".into()));
        }
        Ok(Self { covariates, intercept })
    }

    pub fn intercept_only() -> Self {
        Self { covariates: Vec::new(), intercept: true }
    }

    /// Intercept model from an inclusion bit string, `"011"` = {x2, x3}.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let mut covariates = Vec::new();
        for (j, c) in bits.chars().enumerate() {
            match c {
                '1' => covariates.push(j),
                '0' => {}
                other => {
                    return Err(Error::InvalidModelSpace(format!("bad inclusion bit `{other}` in `{bits}`")))
                }
            }
        }
        Self::new(covariates, true)
    }

    pub fn covariates(&self) -> &[usize] {
        &self.covariates
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    /// Number of mean coefficients (intercept + slopes).
    pub fn coefficient_count(&self) -> usize {
        self.covariates.len() + usize::from(self.intercept)
    }

    /// Estimated parameters, counting the error variance.
    pub fn param_count(&self) -> usize {
        self.coefficient_count() + 1
    }

    pub fn contains_covariate(&self, j: usize) -> bool {
        self.covariates.contains(&j)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        match self.covariates.iter().find(|&&j| j >= dim) {
            Some(j) => Err(Error::DimensionMismatch(format!(
                "model uses covariate {} but data has {dim}",
                j + 1
            ))),
            None => Ok(()),
        }
    }

    /// Column-major design matrix for `data`.
    pub(crate) fn design(&self, data: &Dataset) -> Vec<f64> {
        let n = data.len();
        let mut out = Vec::with_capacity(n * self.coefficient_count());
        if self.intercept {
            out.resize(n, 1.0);
        }
        for &j in &self.covariates {
            out.extend(data.rows().map(|r| r.x[j]));
        }
        out
    }

    /// Mean of the response at covariates `x` under coefficients `beta`.
    pub(crate) fn linear_predictor(&self, beta: &[f64], x: &[f64]) -> f64 {
        let (offset, start) = if self.intercept { (beta[0], 1) } else { (0.0, 0) };
        offset + self.covariates.iter().zip(&beta[start..]).map(|(&j, b)| b * x[j]).sum::<f64>()
    }
}

impl fmt::Display for LinearModelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        if self.intercept {
            terms.push("1".into());
        }
        terms.extend(self.covariates.iter().map(|j| format!("x{}", j + 1)));
        write!(f, "{{{}}}", terms.join(", "))
    }
}

/// Least-squares coefficients of `y` on the column-major `n x k` matrix
/// `design`, by Householder QR. `design` is overwritten.
pub(crate) fn least_squares(design: &mut [f64], n: usize, k: usize, y: &[f64]) -> Result<Vec<f64>> {
    debug_assert_eq!(design.len(), n * k);
    let mut qty = y.to_vec();
    let mut diag = vec![0.0; k];
    for j in 0..k {
        let (_, tail) = design.split_at_mut(j * n);
        let (col, rest) = tail.split_at_mut(n);
        // reflections preserve the full column norm
        let col_norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let norm = col[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if col_norm == 0.0 || norm <= RANK_TOLERANCE * col_norm {
            return Err(Error::RankDeficient { term: j });
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        // Householder vector v = x - alpha e1, stored in col[j..]
        col[j] -= alpha;
        let vnorm2 = col[j..].iter().map(|v| v * v).sum::<f64>();
        diag[j] = alpha;
        for c in rest.chunks_exact_mut(n) {
            reflect(&col[j..], &mut c[j..], vnorm2);
        }
        reflect(&col[j..], &mut qty[j..], vnorm2);
    }
    // R has `diag` on the diagonal and design[i + j*n] above it
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = qty[i];
        for j in i + 1..k {
            acc -= design[j * n + i] * beta[j];
        }
        beta[i] = acc / diag[i];
    }
    Ok(beta)
}

fn reflect(v: &[f64], target: &mut [f64], vnorm2: f64) {
    let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
    let s = 2.0 * dot / vnorm2;
    for (t, vi) in target.iter_mut().zip(v) {
        *t -= s * vi;
    }
}

/// A Gaussian linear model with fixed coefficients and error variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedLinearModel {
    pub space: LinearModelSpace,
    /// Intercept first (when present), then slopes in `space.covariates()` order.
    pub beta: Vec<f64>,
    pub sigma2: f64,
}

impl FittedLinearModel {
    pub fn new(space: LinearModelSpace, beta: Vec<f64>, sigma2: f64) -> Result<Self> {
        if beta.len() != space.coefficient_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a model with {} terms",
                beta.len(),
                space.coefficient_count()
            )));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::DegenerateVariance { sigma2 });
        }
        Ok(Self { space, beta, sigma2 })
    }

    pub fn mean(&self, x: &[f64]) -> f64 {
        self.space.linear_predictor(&self.beta, x)
    }

    pub fn residual_sum_of_squares(&self, data: &Dataset) -> Result<f64> {
        self.space.check_dim(data.dim())?;
        Ok(data
            .rows()
            .map(|r| {
                let e = r.y - self.mean(r.x);
                e * e
            })
            .sum())
    }

    pub fn log_density(&self, row: Row<'_>) -> f64 {
        let e = row.y - self.mean(row.x);
        -0.5 * (LN_2PI + self.sigma2.ln()) - e * e / (2.0 * self.sigma2)
    }
}

/// Maximum-likelihood fit: OLS coefficients and error variance RSS / n.
pub fn fit_mle(space: &LinearModelSpace, data: &Dataset) -> Result<FittedLinearModel> {
    space.check_dim(data.dim())?;
    let n = data.len();
    let k = space.coefficient_count();
    if n <= k {
        return Err(Error::InsufficientData { n, needed: k });
    }
    let mut design = space.design(data);
    let beta = least_squares(&mut design, n, k, data.response())?;
    let rss: f64 = data
        .rows()
        .map(|r| {
            let e = r.y - space.linear_predictor(&beta, r.x);
            e * e
        })
        .sum();
    let sigma2 = rss / n as f64;
    if sigma2 <= DEGENERATE_VARIANCE_RATIO * data.response_variance() {
        return Err(Error::DegenerateVariance { sigma2 });
    }
    Ok(FittedLinearModel { space: space.clone(), beta, sigma2 })
}

/// Number of estimated parameters in `space` (slopes, intercept, variance).
pub fn param_count(space: &LinearModelSpace) -> usize {
    space.param_count()
}

type LogDensityFn = dyn Fn(Row<'_>) -> f64 + Send + Sync;

/// A fully specified model: a log-density over observation rows.
#[derive(Clone)]
pub struct SpecifiedModel {
    label: String,
    log_density: Arc<LogDensityFn>,
}

impl SpecifiedModel {
    pub fn new(label: impl Into<String>, log_density: impl Fn(Row<'_>) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), log_density: Arc::new(log_density) }
    }

    /// `N(mean, sd^2)` on the response, ignoring covariates.
    pub fn normal(mean: f64, sd: f64) -> Self {
        let var = sd * sd;
        Self::new(format!("N({mean}, {sd}^2)"), move |row| {
            let e = row.y - mean;
            -0.5 * (2.0 * PI * var).ln() - e * e / (2.0 * var)
        })
    }

    pub fn from_fit(model: FittedLinearModel) -> Self {
        let label = format!("{} fixed", model.space);
        Self::new(label, move |row| model.log_density(row))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn log_density(&self, row: Row<'_>) -> f64 {
        (self.log_density)(row)
    }
}

impl fmt::Debug for SpecifiedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpecifiedModel").field("label", &self.label).finish()
    }
}

/// Models whose log-likelihood can be evaluated on a dataset.
pub trait Likelihood {
    fn log_likelihood(&self, data: &Dataset) -> Result<f64>;
}

impl Likelihood for FittedLinearModel {
    fn log_likelihood(&self, data: &Dataset) -> Result<f64> {
        let rss = self.residual_sum_of_squares(data)?;
        let n = data.len() as f64;
        Ok(-0.5 * n * (LN_2PI + self.sigma2.ln()) - rss / (2.0 * self.sigma2))
    }
}

impl Likelihood for SpecifiedModel {
    fn log_likelihood(&self, data: &Dataset) -> Result<f64> {
        let total: f64 = data.rows().map(|r| self.log_density(r)).sum();
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::NonFiniteLikelihood(self.label.clone()))
        }
    }
}

/// Sum of log densities of the rows of `data` under `model`.
pub fn log_likelihood<M: Likelihood + ?Sized>(model: &M, data: &Dataset) -> Result<f64> {
    model.log_likelihood(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn xy(y: &[f64], x1: &[f64]) -> Dataset {
        Dataset::from_columns(y.to_vec(), &[x1.to_vec()]).unwrap()
    }

    // pseudo-inverse solution, independent of the QR path
    fn pinv_beta(space: &LinearModelSpace, data: &Dataset) -> Vec<f64> {
        let n = data.len();
        let k = space.coefficient_count();
        let x = DMatrix::from_column_slice(n, k, &space.design(data));
        let y = DVector::from_column_slice(data.response());
        let pinv = x.pseudo_inverse(1e-12).unwrap();
        (pinv * y).iter().copied().collect()
    }

    #[test]
    fn intercept_only_mean_and_ml_variance() {
        let d = xy(&[1.0, 3.0], &[0.0, 0.0]);
        let fit = fit_mle(&LinearModelSpace::intercept_only(), &d).unwrap();
        assert_abs_diff_eq!(fit.beta[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.sigma2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_response_is_degenerate() {
        let d = xy(&[5.0; 4], &[1.0, 2.0, 3.0, 4.0]);
        let err = fit_mle(&LinearModelSpace::intercept_only(), &d).unwrap_err();
        assert!(matches!(err, Error::DegenerateVariance { .. }));
    }

    #[test]
    fn simple_regression_matches_hand_solution() {
        // X'X = [[4, 6], [6, 14]], X'y = [8, 15] -> beta = (1.1, 0.6)
        let d = xy(&[1.0, 2.0, 2.0, 3.0], &[0.0, 1.0, 2.0, 3.0]);
        let space = LinearModelSpace::new(vec![0], true).unwrap();
        let fit = fit_mle(&space, &d).unwrap();
        assert_abs_diff_eq!(fit.beta[0], 1.1, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.beta[1], 0.6, epsilon = 1e-12);
        let oracle = pinv_beta(&space, &d);
        assert_abs_diff_eq!(fit.beta[0], oracle[0], epsilon = 1e-10);
        assert_abs_diff_eq!(fit.beta[1], oracle[1], epsilon = 1e-10);
        // RSS = 0.1^2 + 0.3^2 + 0.3^2 + 0.1^2 = 0.2 -> sigma2 = 0.05
        assert_abs_diff_eq!(fit.sigma2, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn collinear_design_is_rank_deficient() {
        let d = Dataset::from_columns(
            vec![1.0, 2.0, 4.0, 3.0],
            &[vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0]],
        )
        .unwrap();
        let space = LinearModelSpace::new(vec![0, 1], true).unwrap();
        assert!(matches!(fit_mle(&space, &d), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn standard_normal_density_at_zero() {
        let d = xy(&[0.0], &[0.0]);
        let m = FittedLinearModel::new(LinearModelSpace::intercept_only(), vec![0.0], 1.0).unwrap();
        assert_abs_diff_eq!(log_likelihood(&m, &d).unwrap(), -0.918_938_533_204_672_7, epsilon = 1e-12);
    }

    #[test]
    fn plug_in_identity_at_the_mle() {
        let d = xy(&[1.0, 2.0, 2.0, 3.0, 7.0], &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let space = LinearModelSpace::new(vec![0], true).unwrap();
        let fit = fit_mle(&space, &d).unwrap();
        let rss = fit.residual_sum_of_squares(&d).unwrap();
        let n = d.len() as f64;
        let expected = -(n / 2.0) * ((2.0 * PI * rss / n).ln() + 1.0);
        assert_abs_diff_eq!(log_likelihood(&fit, &d).unwrap(), expected, epsilon = 1e-10);
    }

    #[test]
    fn log_likelihood_matches_rowwise_density_sum() {
        let x1: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin()).collect();
        let y: Vec<f64> = (0..10).map(|i| 1.0 + 0.5 * x1[i] + ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let d = xy(&y, &x1);
        let fit = fit_mle(&LinearModelSpace::new(vec![0], true).unwrap(), &d).unwrap();
        let mut oracle = 0.0;
        for i in 0..10 {
            let mu = fit.beta[0] + fit.beta[1] * x1[i];
            let z = (y[i] - mu) / fit.sigma2.sqrt();
            oracle += -0.5 * z * z - 0.5 * (2.0 * PI).ln() - 0.5 * fit.sigma2.ln();
        }
        assert_abs_diff_eq!(log_likelihood(&fit, &d).unwrap(), oracle, epsilon = 1e-10);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let d = xy(&[1.0, 2.0, 3.0], &[0.0, 1.0, 0.5]);
        let m = FittedLinearModel::new(LinearModelSpace::new(vec![2], true).unwrap(), vec![0.0, 1.0], 1.0).unwrap();
        assert!(matches!(log_likelihood(&m, &d), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(param_count(&LinearModelSpace::intercept_only()), 2);
        assert_eq!(param_count(&LinearModelSpace::new(vec![0, 1], true).unwrap()), 4);
        assert_eq!(param_count(&LinearModelSpace::new(vec![0], false).unwrap()), 2);
    }

    #[test]
    fn bits_map_to_covariates() {
        let m = LinearModelSpace::from_bits("011").unwrap();
        assert_eq!(m.covariates(), &[1, 2]);
        assert!(m.has_intercept());
        assert!(LinearModelSpace::from_bits("01x").is_err());
        assert!(LinearModelSpace::new(vec![1, 1], true).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let text = "x1,y,x2\n1,2,3\n4,5,6\n";
        let d = Dataset::from_csv(text.as_bytes(), "y").unwrap();
        assert_eq!(d.response(), &[2.0, 5.0]);
        assert_eq!(d.column_names(), &["x1".to_string(), "x2".to_string()]);
        assert_eq!(d.row(1).x, &[4.0, 6.0]);

        let missing = "x1,y\n1,\n";
        assert!(matches!(Dataset::from_csv(missing.as_bytes(), "y"), Err(Error::InvalidData(_))));
        let err = Dataset::from_csv(text.as_bytes(), "z").unwrap_err();
        assert!(err.to_string().contains("`z`"));
    }

    fn random_dataset() -> impl Strategy<Value = Dataset> {
        (8usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(-3.0f64..3.0, n),
                prop::collection::vec(-3.0f64..3.0, n * 3),
            )
                .prop_map(move |(noise, xs)| {
                    let rows: Vec<Vec<f64>> = xs.chunks(3).map(<[f64]>::to_vec).collect();
                    let y = rows.iter().zip(&noise).map(|(r, e)| 1.0 + r[0] - 0.5 * r[2] + e).collect();
                    Dataset::new(y, rows).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn residuals_are_orthogonal_to_design(d in random_dataset(), bits in 0u8..8) {
            let covs: Vec<usize> = (0..3).filter(|j| bits & (1 << j) != 0).collect();
            let space = LinearModelSpace::new(covs, true).unwrap();
            let fit = fit_mle(&space, &d).unwrap();
            let n = d.len();
            let design = space.design(&d);
            for col in design.chunks(n) {
                let dot: f64 = d.rows().zip(col).map(|(r, c)| (r.y - fit.mean(r.x)) * c).sum();
                prop_assert!(dot.abs() < 1e-8 * n as f64);
            }
        }

        #[test]
        fn mle_beats_perturbations(d in random_dataset(), db in -0.5f64..0.5, ds in 0.5f64..2.0) {
            let space = LinearModelSpace::new(vec![0, 2], true).unwrap();
            let fit = fit_mle(&space, &d).unwrap();
            let best = log_likelihood(&fit, &d).unwrap();
            let mut beta = fit.beta.clone();
            beta[1] += db;
            let other = FittedLinearModel::new(space, beta, fit.sigma2 * ds).unwrap();
            prop_assert!(best >= log_likelihood(&other, &d).unwrap() - 1e-9);
        }

        #[test]
        fn nested_spaces_never_lose_likelihood(d in random_dataset()) {
            let small = LinearModelSpace::new(vec![0], true).unwrap();
            let big = LinearModelSpace::new(vec![0, 1], true).unwrap();
            let ls = log_likelihood(&fit_mle(&small, &d).unwrap(), &d).unwrap();
            let lb = log_likelihood(&fit_mle(&big, &d).unwrap(), &d).unwrap();
            prop_assert!(lb >= ls - 1e-9);
        }
    }
}
