//! Per-window dissimilarity matrices.
//!
//! Two measures are provided: PCCD, built from sample Pearson correlations,
//! and GVDD, built from the generalized forecast-error variance
//! decomposition of a VAR fitted to the window. Both map a similarity `s`
//! in `[-1, 1]` (resp. `[0, 1]`) to the distance `sqrt(2(1 - s))`.

mod gvd;
mod pccd;
mod var;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::ingest::WindowView;

pub use gvd::{gvd_shares, gvdd, GvdShareMatrix};
pub use pccd::pccd;
pub use var::{fit_var, ma_coefficients, ridge_auto, RidgeMode, VarModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    Pccd,
    Gvdd,
}

impl Measure {
    pub fn label(self) -> &'static str {
        match self {
            Measure::Pccd => "PCCD",
            Measure::Gvdd => "GVDD",
        }
    }

    pub fn is_symmetric(self) -> bool {
        matches!(self, Measure::Pccd)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pccd" => Ok(Measure::Pccd),
            "gvdd" => Ok(Measure::Gvdd),
            _ => Err(invalid(format!("unknown measure `{s}`"))),
        }
    }
}

/// Identifies the window a matrix was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowMeta {
    pub index: usize,
    pub end_date: NaiveDate,
}

impl WindowView<'_> {
    pub fn meta(&self) -> WindowMeta {
        WindowMeta {
            index: self.index,
            end_date: self.end_date,
        }
    }
}

/// Nonnegative N×N edge-weight matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    pub kind: Measure,
    pub labels: Vec<String>,
    pub values: DMatrix<f64>,
    pub window_index: usize,
    pub window_end_date: NaiveDate,
}

impl DissimilarityMatrix {
    pub fn new(
        kind: Measure,
        labels: Vec<String>,
        values: DMatrix<f64>,
        meta: WindowMeta,
    ) -> Result<Self> {
        if !values.is_square() || values.nrows() != labels.len() {
            return Err(invalid(
                "dissimilarity matrix must be square and match its labels",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                module: "dissim",
                what: "dissimilarity matrix",
            });
        }
        for c in 0..values.ncols() {
            for r in 0..values.nrows() {
                if values[(r, c)] < 0.0 {
                    return Err(Error::NegativeWeight {
                        row: r,
                        col: c,
                        weight: values[(r, c)],
                    });
                }
            }
        }
        Ok(DissimilarityMatrix {
            kind,
            labels,
            values,
            window_index: meta.index,
            window_end_date: meta.end_date,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn meta(&self) -> WindowMeta {
        WindowMeta {
            index: self.window_index,
            end_date: self.window_end_date,
        }
    }
}

/// `sqrt(2(1 - s))` with `s` clamped to `[-1, 1]`.
pub(crate) fn similarity_to_distance(s: f64) -> f64 {
    (2.0 * (1.0 - s.clamp(-1.0, 1.0))).sqrt()
}

/// Dissimilarity matrix for one window under the chosen measure.
pub fn window_dissimilarity(
    window: &WindowView<'_>,
    measure: Measure,
    var_lag: usize,
    horizon: usize,
    ridge: RidgeMode,
) -> Result<DissimilarityMatrix> {
    match measure {
        Measure::Pccd => pccd(window),
        Measure::Gvdd => {
            let lambda = ridge.resolve(window, var_lag);
            let model = fit_var(window, var_lag, lambda)?;
            let shares = gvd_shares(&model, horizon)?;
            gvdd(&shares, window.tickers.to_vec(), window.meta())
        }
    }
}
