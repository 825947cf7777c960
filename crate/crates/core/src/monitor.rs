//! Control-chart monitoring of tree-distance series and the VAR fitted to
//! the joint monitoring series.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde_json::{json, Value};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Error, Result};
use crate::numfmt::json_f64;
use crate::ols::{lag_design, least_squares};

pub const DEFAULT_K: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    pub label: String,
    pub timestamps: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl DistanceSeries {
    pub fn new(
        label: impl Into<String>,
        timestamps: Vec<NaiveDate>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(invalid("timestamps and values differ in length"));
        }
        if timestamps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("series timestamps must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite {
                module: "monitor",
                what: "distance series (values must be finite and nonnegative)",
            });
        }
        Ok(DistanceSeries {
            label: label.into(),
            timestamps,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (denominator `n - 1`).
fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    /// `mean + k·sd`
    #[default]
    MeanPlusKSd,
    /// `k·sd`
    KSd,
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMode::MeanPlusKSd => "mean+ksd",
            ThresholdMode::KSd => "ksd",
        })
    }
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean+ksd" => Ok(ThresholdMode::MeanPlusKSd),
            "ksd" => Ok(ThresholdMode::KSd),
            _ => Err(invalid(format!(
                "threshold mode must be `mean+ksd` or `ksd`, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartConfig {
    pub k: f64,
    pub mode: ThresholdMode,
    /// Inclusive date range whose points define mean and SD; the whole
    /// series when absent.
    pub baseline: Option<(NaiveDate, NaiveDate)>,
}

impl Default for ChartConfig {
    fn default() -> Self {
        ChartConfig {
            k: DEFAULT_K,
            mode: ThresholdMode::MeanPlusKSd,
            baseline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlChartReport {
    pub label: String,
    pub mean: f64,
    pub sd: f64,
    pub k: f64,
    pub mode: ThresholdMode,
    pub threshold: f64,
    /// Points strictly above the threshold.
    pub alarms: Vec<(NaiveDate, f64)>,
    pub alarm_count: usize,
}

impl ControlChartReport {
    pub fn is_alarm(&self, value: f64) -> bool {
        value > self.threshold
    }
}

/// Shewhart chart with the alarm line at `mean + k·sd` over the full series.
pub fn shewhart(series: &DistanceSeries, k: f64) -> Result<ControlChartReport> {
    shewhart_with(
        series,
        &ChartConfig {
            k,
            ..ChartConfig::default()
        },
    )
}

pub fn shewhart_with(series: &DistanceSeries, cfg: &ChartConfig) -> Result<ControlChartReport> {
    if !(cfg.k > 0.0) || !cfg.k.is_finite() {
        return Err(invalid(format!(
            "control-chart multiplier k must be > 0, got {}",
            cfg.k
        )));
    }
    let baseline: Vec<f64> = match cfg.baseline {
        None => series.values.clone(),
        Some((from, to)) => series
            .timestamps
            .iter()
            .zip(&series.values)
            .filter(|(d, _)| **d >= from && **d <= to)
            .map(|(_, v)| *v)
            .collect(),
    };
    if baseline.len() < 2 {
        return Err(Error::TooFewRows {
            module: "monitor",
            need: 2,
            got: baseline.len(),
        });
    }
    let mean = mean(&baseline);
    let sd = sample_sd(&baseline);
    let threshold = match cfg.mode {
        ThresholdMode::MeanPlusKSd => mean + cfg.k * sd,
        ThresholdMode::KSd => cfg.k * sd,
    };
    let alarms: Vec<(NaiveDate, f64)> = series
        .timestamps
        .iter()
        .zip(&series.values)
        .filter(|(_, v)| **v > threshold)
        .map(|(d, v)| (*d, *v))
        .collect();
    Ok(ControlChartReport {
        label: series.label.clone(),
        mean,
        sd,
        k: cfg.k,
        mode: cfg.mode,
        threshold,
        alarm_count: alarms.len(),
        alarms,
    })
}

/// Significance code for a two-sided p-value.
pub fn significance_code(p_value: f64) -> &'static str {
    if p_value <= 0.001 {
        "***"
    } else if p_value <= 0.01 {
        "**"
    } else if p_value <= 0.05 {
        "*"
    } else if p_value <= 0.1 {
        "."
    } else {
        ""
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

impl Estimate {
    pub fn code(&self) -> &'static str {
        significance_code(self.p_value)
    }

    fn to_json(self) -> Value {
        json!({
            "estimate": json_f64(self.estimate),
            "std_error": json_f64(self.std_error),
            "t_stat": json_f64(self.t_stat),
            "p_value": json_f64(self.p_value),
            "code": self.code(),
        })
    }
}

/// VAR(p) with intercept fitted by per-equation OLS, with inference.
#[derive(Debug, Clone, PartialEq)]
pub struct VarFitReport {
    pub names: Vec<String>,
    pub lag_order: usize,
    /// `coefficients[lag][equation][regressor]`
    pub coefficients: Vec<Vec<Vec<Estimate>>>,
    pub intercept: Vec<Estimate>,
    pub residual_covariance: DMatrix<f64>,
    pub n_obs: usize,
    pub dof: usize,
    pub hq_values: BTreeMap<usize, f64>,
}

impl VarFitReport {
    pub fn coefficient_matrix(&self, lag: usize) -> DMatrix<f64> {
        let n = self.names.len();
        DMatrix::from_fn(n, n, |i, j| self.coefficients[lag][i][j].estimate)
    }

    pub fn to_json(&self) -> Value {
        let matrix = |m: &DMatrix<f64>| -> Value {
            Value::Array(
                m.row_iter()
                    .map(|r| Value::Array(r.iter().map(|v| json_f64(*v)).collect()))
                    .collect(),
            )
        };
        json!({
            "variables": self.names,
            "lag_order": self.lag_order,
            "n_obs": self.n_obs,
            "dof": self.dof,
            "intercept": self.intercept.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
            "coefficients": self.coefficients.iter().map(|lag| {
                lag.iter()
                    .map(|eq| eq.iter().map(|e| e.to_json()).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "residual_covariance": matrix(&self.residual_covariance),
            "hq": self.hq_values.iter().map(|(p, v)| json!({"lag": p, "value": json_f64(*v)})).collect::<Vec<_>>(),
        })
    }
}

fn check_series(data: &DMatrix<f64>) -> Result<()> {
    if data.ncols() == 0 {
        return Err(invalid("monitoring series has no variables"));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            module: "monitor",
            what: "monitoring series",
        });
    }
    Ok(())
}

/// Hannan–Quinn criterion for each lag `1..=p_max` on the sample aligned to
/// `p_max`: `ln det Σ̂_p + 2 ln ln T / T · p n²`, with `Σ̂_p` the ML residual
/// covariance.
pub fn hq_criteria(data: &DMatrix<f64>, p_max: usize) -> Result<BTreeMap<usize, f64>> {
    check_series(data)?;
    let (t, n) = data.shape();
    if p_max < 1 {
        return Err(invalid("p_max must be >= 1"));
    }
    if t <= p_max * n + p_max {
        return Err(Error::TooFewRows {
            module: "monitor",
            need: p_max * n + p_max + 1,
            got: t,
        });
    }
    let t_eff = t - p_max;
    let tf = t_eff as f64;
    let view = data.rows(0, t);
    let mut out = BTreeMap::new();
    for p in 1..=p_max {
        let design = lag_design(&view, p, p_max, true);
        let fit = least_squares(&design.x, &design.y, 0.0, "monitor")?;
        let sigma = fit.residuals.transpose() * &fit.residuals / tf;
        let chol = sigma.cholesky().ok_or(Error::Singular {
            module: "monitor",
            what: "residual covariance (det <= 0)",
        })?;
        let log_det: f64 = 2.0
            * chol
                .l_dirty()
                .diagonal()
                .iter()
                .map(|d| d.ln())
                .sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::Singular {
                module: "monitor",
                what: "residual covariance (det <= 0)",
            });
        }
        let penalty = 2.0 * tf.ln().ln() / tf * (p * n * n) as f64;
        out.insert(p, log_det + penalty);
    }
    Ok(out)
}

/// Lag minimizing the Hannan–Quinn criterion; ties go to the smaller lag.
pub fn hq_order_select(data: &DMatrix<f64>, p_max: usize) -> Result<usize> {
    let hq = hq_criteria(data, p_max)?;
    Ok(best_lag(&hq))
}

fn best_lag(hq: &BTreeMap<usize, f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (&p, &v) in hq {
        if v < best.1 {
            best = (p, v);
        }
    }
    best.0
}

/// Per-equation OLS of a VAR(p) with intercept. Standard errors come from
/// `σ̂_i² (X'X)^{-1}`, p-values from Student-t with `T_eff - n·p - 1`
/// degrees of freedom, which is also the residual covariance denominator.
pub fn fit_var_report(data: &DMatrix<f64>, names: &[String], p: usize) -> Result<VarFitReport> {
    check_series(data)?;
    let (t, n) = data.shape();
    if names.len() != n {
        return Err(invalid("one name per monitoring variable required"));
    }
    if p < 1 {
        return Err(invalid("VAR lag order must be >= 1"));
    }
    if t <= p || t - p <= n * p + 1 {
        return Err(Error::InsufficientObservations {
            module: "monitor",
            obs: t.saturating_sub(p),
            regressors: n * p + 1,
        });
    }
    let t_eff = t - p;
    let dof = t_eff - n * p - 1;
    let design = lag_design(&data.rows(0, t), p, p, true);
    let fit = least_squares(&design.x, &design.y, 0.0, "monitor")?;
    let sigma = fit.residuals.transpose() * &fit.residuals / dof as f64;
    let sigma = (&sigma + sigma.transpose()) * 0.5;

    let student =
        StudentsT::new(0.0, 1.0, dof as f64).map_err(|_| invalid("invalid degrees of freedom"))?;
    let estimate = |k: usize, eq: usize| -> Estimate {
        let b = fit.coef[(k, eq)];
        let se = (sigma[(eq, eq)] * fit.gram_inv[(k, k)]).sqrt();
        let t_stat = b / se;
        let p_value = if t_stat.is_finite() {
            2.0 * (1.0 - student.cdf(t_stat.abs()))
        } else {
            0.0
        };
        Estimate {
            estimate: b,
            std_error: se,
            t_stat,
            p_value: p_value.clamp(0.0, 1.0),
        }
    };
    let intercept = (0..n).map(|eq| estimate(0, eq)).collect();
    let coefficients = (0..p)
        .map(|l| {
            (0..n)
                .map(|eq| (0..n).map(|j| estimate(1 + l * n + j, eq)).collect())
                .collect()
        })
        .collect();

    Ok(VarFitReport {
        names: names.to_vec(),
        lag_order: p,
        coefficients,
        intercept,
        residual_covariance: sigma,
        n_obs: t_eff,
        dof,
        hq_values: BTreeMap::new(),
    })
}

/// Selects the lag by Hannan–Quinn up to `p_max` and fits it.
pub fn select_and_fit(data: &DMatrix<f64>, names: &[String], p_max: usize) -> Result<VarFitReport> {
    let hq = hq_criteria(data, p_max)?;
    let mut report = fit_var_report(data, names, best_lag(&hq))?;
    report.hq_values = hq;
    Ok(report)
}

/// Lag matrices of a fitted report, `[lag](equation, regressor)`.
pub fn report_coefficients(report: &VarFitReport) -> Vec<DMatrix<f64>> {
    (0..report.lag_order)
        .map(|l| report.coefficient_matrix(l))
        .collect()
}
