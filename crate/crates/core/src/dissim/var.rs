use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::ingest::WindowView;
use crate::ols::{lag_design, least_squares};

/// VAR(p) on demeaned returns: `r_t = B_1 r_{t-1} + ... + B_p r_{t-p} + u_t`.
///
/// `coefficients[l][(i, j)]` is the effect of series `j` at lag `l + 1` on
/// series `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    pub lag_order: usize,
    pub coefficients: Vec<DMatrix<f64>>,
    /// Zero when fitted on demeaned data.
    pub intercept: DVector<f64>,
    pub residual_covariance: DMatrix<f64>,
    pub n_obs: usize,
    /// Same layout as `coefficients`; `None` for ridge fits.
    pub std_errors: Option<Vec<DMatrix<f64>>>,
    pub ridge_lambda: f64,
}

impl VarModel {
    pub fn dim(&self) -> usize {
        self.residual_covariance.nrows()
    }

    /// A model with given parameters, for analysis without estimation.
    pub fn from_parts(coefficients: Vec<DMatrix<f64>>, residual_covariance: DMatrix<f64>) -> Self {
        let n = residual_covariance.nrows();
        VarModel {
            lag_order: coefficients.len(),
            coefficients,
            intercept: DVector::zeros(n),
            residual_covariance,
            n_obs: 0,
            std_errors: None,
            ridge_lambda: 0.0,
        }
    }
}

/// How the ridge penalty for per-window VAR estimation is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RidgeMode {
    #[default]
    Off,
    Fixed(f64),
    /// `1e-4` times the mean sample variance of the window's columns.
    Auto,
}

impl RidgeMode {
    pub fn resolve(self, window: &WindowView<'_>, _lag: usize) -> f64 {
        match self {
            RidgeMode::Off => 0.0,
            RidgeMode::Fixed(v) => v,
            RidgeMode::Auto => ridge_auto(window),
        }
    }
}

impl fmt::Display for RidgeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RidgeMode::Off => f.write_str("off"),
            RidgeMode::Auto => f.write_str("auto"),
            RidgeMode::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for RidgeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(RidgeMode::Off),
            "auto" => Ok(RidgeMode::Auto),
            _ => match s.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.is_finite() => Ok(if v == 0.0 {
                    RidgeMode::Off
                } else {
                    RidgeMode::Fixed(v)
                }),
                _ => Err(invalid(format!(
                    "ridge must be `off`, `auto` or a nonnegative number, got `{s}`"
                ))),
            },
        }
    }
}

pub fn ridge_auto(window: &WindowView<'_>) -> f64 {
    let m = window.n_obs() as f64;
    let n = window.n_assets();
    let mean_var = (0..n)
        .map(|c| {
            let col = window.data.column(c);
            let mean = col.sum() / m;
            col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
        })
        .sum::<f64>()
        / n as f64;
    1e-4 * mean_var
}

/// Least-squares VAR(p) on the window's demeaned columns.
///
/// With `ridge_lambda > 0` the objective gains `ridge_lambda · T_eff · ||b||²`
/// per equation and standard errors are not reported.
pub fn fit_var(window: &WindowView<'_>, p: usize, ridge_lambda: f64) -> Result<VarModel> {
    if p < 1 {
        return Err(invalid("VAR lag order must be >= 1"));
    }
    if !(ridge_lambda >= 0.0) || !ridge_lambda.is_finite() {
        return Err(invalid("ridge_lambda must be finite and nonnegative"));
    }
    let m = window.n_obs();
    let n = window.n_assets();
    if m <= p {
        return Err(Error::TooFewRows {
            module: "dissim",
            need: p + 1,
            got: m,
        });
    }
    let t_eff = m - p;
    if ridge_lambda == 0.0 && t_eff <= n * p {
        return Err(Error::InsufficientObservations {
            module: "dissim",
            obs: t_eff,
            regressors: n * p,
        });
    }

    let mut demeaned = window.data.clone_owned();
    for mut col in demeaned.column_iter_mut() {
        let mean = col.sum() / m as f64;
        col.add_scalar_mut(-mean);
    }
    let design = lag_design(&demeaned.rows(0, m), p, p, false);
    let fit = least_squares(&design.x, &design.y, ridge_lambda, "dissim")?;

    let sigma = fit.residuals.transpose() * &fit.residuals / t_eff as f64;
    let sigma = (&sigma + sigma.transpose()) * 0.5;

    let coefficients = unstack(&fit.coef, n, p, 0);
    let std_errors = (ridge_lambda == 0.0).then(|| {
        let dof = (t_eff - n * p) as f64;
        let stacked = DMatrix::from_fn(n * p, n, |k, eq| {
            let s2 = fit.residuals.column(eq).norm_squared() / dof;
            (s2 * fit.gram_inv[(k, k)]).sqrt()
        });
        unstack(&stacked, n, p, 0)
    });

    Ok(VarModel {
        lag_order: p,
        coefficients,
        intercept: DVector::zeros(n),
        residual_covariance: sigma,
        n_obs: t_eff,
        std_errors,
        ridge_lambda,
    })
}

/// Splits a stacked `(offset + n·p) × n` coefficient block into per-lag
/// `n × n` matrices indexed `[equation, regressor]`.
pub(crate) fn unstack(
    stacked: &DMatrix<f64>,
    n: usize,
    p: usize,
    offset: usize,
) -> Vec<DMatrix<f64>> {
    (0..p)
        .map(|l| DMatrix::from_fn(n, n, |i, j| stacked[(offset + l * n + j, i)]))
        .collect()
}

/// Moving-average matrices `Θ_0 .. Θ_{K-1}` of the VAR:
/// `Θ_0 = I`, `Θ_k = Σ_{j=1}^{min(k,p)} B_j Θ_{k-j}`.
pub fn ma_coefficients(model: &VarModel, horizon: usize) -> Result<Vec<DMatrix<f64>>> {
    if horizon < 1 {
        return Err(invalid("horizon must be >= 1"));
    }
    let n = model.dim();
    let mut theta: Vec<DMatrix<f64>> = Vec::with_capacity(horizon);
    theta.push(DMatrix::identity(n, n));
    for k in 1..horizon {
        let mut next = DMatrix::zeros(n, n);
        for j in 1..=k.min(model.lag_order) {
            next += &model.coefficients[j - 1] * &theta[k - j];
        }
        theta.push(next);
    }
    Ok(theta)
}
