use nalgebra::DMatrix;

use super::var::{ma_coefficients, VarModel};
use super::{similarity_to_distance, DissimilarityMatrix, Measure, WindowMeta};
use crate::error::{invalid, Error, Result};

/// Row-normalized generalized variance-decomposition shares.
///
/// `values[(i, j)]` is the share of the `horizon`-step forecast-error
/// variance of series `i` attributed to shocks in series `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GvdShareMatrix {
    pub values: DMatrix<f64>,
    pub horizon: usize,
}

/// Generalized (order-invariant) forecast-error variance decomposition:
///
/// ```text
/// nu_ij = sigma_jj^-1 Σ_k (e_i' Θ_k Σ e_j)²  /  Σ_k e_i' Θ_k Σ Θ_k' e_i
/// h_ij  = nu_ij / Σ_j nu_ij
/// ```
/// with `k` running over `0..horizon`.
pub fn gvd_shares(model: &VarModel, horizon: usize) -> Result<GvdShareMatrix> {
    let sigma = &model.residual_covariance;
    let n = sigma.nrows();
    for j in 0..n {
        if !(sigma[(j, j)] > 0.0) {
            return Err(Error::NonPositiveVariance(format!("series {j}")));
        }
    }
    let theta = ma_coefficients(model, horizon)?;

    let mut num = DMatrix::<f64>::zeros(n, n);
    let mut den = vec![0.0; n];
    for t in &theta {
        let ts = t * sigma;
        let tst = &ts * t.transpose();
        for i in 0..n {
            den[i] += tst[(i, i)];
            for j in 0..n {
                num[(i, j)] += ts[(i, j)].powi(2);
            }
        }
    }

    let mut values = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        if !(den[i] > 0.0) {
            return Err(Error::Singular {
                module: "dissim",
                what: "forecast-error variance",
            });
        }
        let nu: Vec<f64> = (0..n)
            .map(|j| num[(i, j)] / sigma[(j, j)] / den[i])
            .collect();
        let total: f64 = nu.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NonFinite {
                module: "dissim",
                what: "variance shares",
            });
        }
        for j in 0..n {
            values[(i, j)] = nu[j] / total;
        }
    }
    Ok(GvdShareMatrix { values, horizon })
}

/// GVDD: off-diagonal `sqrt(2(1 - h_ij))`, diagonal fixed at 0. Generally
/// asymmetric.
pub fn gvdd(
    shares: &GvdShareMatrix,
    labels: Vec<String>,
    meta: WindowMeta,
) -> Result<DissimilarityMatrix> {
    let n = shares.values.nrows();
    if labels.len() != n {
        return Err(invalid("label count does not match share matrix"));
    }
    let values = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            similarity_to_distance(shares.values[(i, j)])
        }
    });
    DissimilarityMatrix::new(Measure::Gvdd, labels, values, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn meta() -> WindowMeta {
        WindowMeta {
            index: 0,
            end_date: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
        }
    }

    #[test]
    fn orthogonal_white_noise_is_identity() {
        let model = VarModel::from_parts(vec![DMatrix::zeros(3, 3)], DMatrix::identity(3, 3));
        for k in [1, 5, 10] {
            let h = gvd_shares(&model, k).unwrap();
            assert_eq!(h.values, DMatrix::identity(3, 3));
        }
    }

    #[test]
    fn correlated_pair_closed_form() {
        let rho = 0.5;
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        let model = VarModel::from_parts(vec![DMatrix::zeros(2, 2)], sigma);
        let h = gvd_shares(&model, 1).unwrap();
        assert!((h.values[(0, 0)] - 0.8).abs() < 1e-12);
        assert!((h.values[(0, 1)] - 0.2).abs() < 1e-12);
        assert!((h.values[(1, 0)] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rows_sum_to_one() {
        let b = DMatrix::from_row_slice(3, 3, &[0.3, 0.1, 0.0, -0.2, 0.4, 0.1, 0.05, 0.0, 0.2]);
        let sigma = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5]);
        let h = gvd_shares(&VarModel::from_parts(vec![b], sigma), 10).unwrap();
        for row in h.values.row_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn nonpositive_variance_rejected() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let model = VarModel::from_parts(vec![DMatrix::zeros(2, 2)], sigma);
        assert!(matches!(
            gvd_shares(&model, 1),
            Err(Error::NonPositiveVariance(_))
        ));
    }

    #[test]
    fn distance_conversion() {
        let labels = vec!["A".to_string(), "B".to_string()];
        let eye = GvdShareMatrix {
            values: DMatrix::identity(2, 2),
            horizon: 1,
        };
        let d = gvdd(&eye, labels.clone(), meta()).unwrap();
        assert_eq!(d.values[(0, 0)], 0.0);
        assert!((d.values[(0, 1)] - 2f64.sqrt()).abs() < 1e-15);

        let shares = GvdShareMatrix {
            values: DMatrix::from_row_slice(2, 2, &[0.8, 0.2, 0.0, 1.0]),
            horizon: 1,
        };
        let d = gvdd(&shares, labels.clone(), meta()).unwrap();
        assert!((d.values[(0, 1)] - 1.2649111).abs() < 1e-7);

        let full = GvdShareMatrix {
            values: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.5]),
            horizon: 1,
        };
        let d = gvdd(&full, labels, meta()).unwrap();
        assert_eq!(d.values[(0, 1)], 0.0);
        assert_eq!(d.kind, Measure::Gvdd);
    }
}
