//! Multivariate least squares on lagged designs, shared by the per-window
//! return VAR and the monitoring VAR.

use nalgebra::{DMatrix, DMatrixView};

use crate::error::{Error, Result};

/// Stacked regression `Y = X·C + U` for a VAR(p).
///
/// Columns of `x` are `[1 (optional), y_{t-1}', ..., y_{t-p}']`; row `r`
/// corresponds to observation `first + r` of the source series.
#[derive(Debug, Clone)]
pub(crate) struct LagDesign {
    pub y: DMatrix<f64>,
    pub x: DMatrix<f64>,
}

pub(crate) fn lag_design(
    data: &DMatrixView<'_, f64>,
    p: usize,
    first: usize,
    intercept: bool,
) -> LagDesign {
    debug_assert!(first >= p);
    let n = data.ncols();
    let rows = data.nrows() - first;
    let offset = usize::from(intercept);
    let y = DMatrix::from_fn(rows, n, |r, c| data[(first + r, c)]);
    let x = DMatrix::from_fn(rows, offset + n * p, |r, c| {
        if c < offset {
            1.0
        } else {
            let lag = (c - offset) / n + 1;
            let var = (c - offset) % n;
            data[(first + r - lag, var)]
        }
    });
    LagDesign { y, x }
}

#[derive(Debug, Clone)]
pub(crate) struct LsFit {
    /// k × n, column i holds equation i.
    pub coef: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
    /// (X'X + penalty)^{-1}
    pub gram_inv: DMatrix<f64>,
}

/// Smallest admissible squared pivot of the Jacobi-scaled Gram matrix.
const PIVOT_FLOOR: f64 = 1e-12;

/// Solves the (optionally ridge-penalised) normal equations. The penalty
/// adds `ridge · rows` to the Gram diagonal, so `ridge` is on the scale of
/// the regressors' second moments.
pub(crate) fn least_squares(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    ridge: f64,
    module: &'static str,
) -> Result<LsFit> {
    let rows = x.nrows() as f64;
    let mut gram = x.transpose() * x;
    if ridge > 0.0 {
        for i in 0..gram.nrows() {
            gram[(i, i)] += ridge * rows;
        }
    }
    let gram_inv = spd_inverse(&gram, module, "regressor cross-product")?;
    let coef = &gram_inv * (x.transpose() * y);
    let residuals = y - x * &coef;
    if coef.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            module,
            what: "regression coefficients",
        });
    }
    Ok(LsFit {
        coef,
        residuals,
        gram_inv,
    })
}

/// Inverse of a symmetric positive definite matrix via Jacobi-scaled
/// Cholesky; fails when the scaled matrix is numerically singular.
pub(crate) fn spd_inverse(
    m: &DMatrix<f64>,
    module: &'static str,
    what: &'static str,
) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let singular = Error::Singular { module, what };
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let d = m[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return Err(singular);
        }
        scale.push(d.sqrt());
    }
    let scaled = DMatrix::from_fn(n, n, |r, c| m[(r, c)] / (scale[r] * scale[c]));
    let chol = scaled.cholesky().ok_or(Error::Singular { module, what })?;
    if chol
        .l_dirty()
        .diagonal()
        .iter()
        .any(|&l| l * l < PIVOT_FLOOR)
    {
        return Err(singular);
    }
    let inv = chol.inverse();
    Ok(DMatrix::from_fn(n, n, |r, c| {
        inv[(r, c)] / (scale[r] * scale[c])
    }))
}
