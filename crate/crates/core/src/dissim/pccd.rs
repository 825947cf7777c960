use nalgebra::DMatrix;

use super::{similarity_to_distance, DissimilarityMatrix, Measure};
use crate::error::{Error, Result};
use crate::ingest::WindowView;

/// Pearson-correlation dissimilarity `sqrt(2(1 - rho))` over the window's
/// observations, using the window sample means.
pub fn pccd(window: &WindowView<'_>) -> Result<DissimilarityMatrix> {
    let m = window.n_obs();
    if m < 3 {
        return Err(Error::TooFewRows {
            module: "dissim",
            need: 3,
            got: m,
        });
    }
    let n = window.n_assets();
    let mut centered = DMatrix::<f64>::zeros(m, n);
    let mut ss = vec![0.0; n];
    for c in 0..n {
        let col = window.data.column(c);
        let mean = col.sum() / m as f64;
        let mut raw = 0.0;
        for r in 0..m {
            let x = col[r] - mean;
            centered[(r, c)] = x;
            ss[c] += x * x;
            raw += col[r] * col[r];
        }
        // a constant column leaves only rounding noise after centering
        if ss[c] <= 1e-20 * raw || ss[c] == 0.0 {
            return Err(Error::ZeroVariance(window.tickers[c].clone()));
        }
    }

    let cross = centered.transpose() * &centered;
    let mut values = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let rho = cross[(i, j)] / (ss[i] * ss[j]).sqrt();
            let h = similarity_to_distance(rho);
            values[(i, j)] = h;
            values[(j, i)] = h;
        }
    }
    DissimilarityMatrix::new(
        Measure::Pccd,
        window.tickers.to_vec(),
        values,
        window.meta(),
    )
}
