mod common;

use nalgebra::{DMatrix, DVector};
use netmon::dissim::{gvd_shares, ma_coefficients, pccd, VarModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pccd_is_a_metric(seed in any::<u64>(), m in 5usize..80, n in 3usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // a common factor keeps correlations away from zero
        let f = gaussian_matrix(&mut rng, m, 1);
        let data = DMatrix::from_fn(m, n, |i, j| f[(i, 0)] * (j as f64 / n as f64) + normal(&mut rng));
        let panel = return_panel(data);
        let d = pccd(&panel.as_window()).unwrap().values;
        for i in 0..n {
            prop_assert_eq!(d[(i, i)], 0.0);
            for j in 0..n {
                prop_assert!((0.0..=2.0).contains(&d[(i, j)]));
                prop_assert_eq!(d[(i, j)], d[(j, i)]);
                for k in 0..n {
                    prop_assert!(d[(i, k)] <= d[(i, j)] + d[(j, k)] + 1e-9);
                }
            }
        }
    }

    #[test]
    fn pccd_positive_affine_invariance(seed in any::<u64>(), a in -5.0f64..5.0, b in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = gaussian_matrix(&mut rng, 40, 5);
        let col = rng.random_range(0..5);
        let mut moved = data.clone();
        for r in 0..40 {
            moved[(r, col)] = a + b * data[(r, col)];
        }
        let d1 = pccd(&return_panel(data).as_window()).unwrap().values;
        let d2 = pccd(&return_panel(moved).as_window()).unwrap().values;
        prop_assert!((d1 - d2).amax() < 1e-10);
    }

    #[test]
    fn gvd_rows_sum_to_one(seed in any::<u64>(), n in 1usize..7, p in 1usize..4, k in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = VarModel::from_parts(random_stable_lags(&mut rng, n, p), random_spd(&mut rng, n));
        let h = gvd_shares(&model, k).unwrap().values;
        for i in 0..n {
            prop_assert!((h.row(i).sum() - 1.0).abs() < 1e-10);
            for j in 0..n {
                prop_assert!(h[(i, j)] >= 0.0);
            }
        }
    }

    #[test]
    fn gvd_order_invariance(seed in any::<u64>(), n in 2usize..7, p in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lags = random_stable_lags(&mut rng, n, p);
        let sigma = random_spd(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);

        let h = gvd_shares(&VarModel::from_parts(lags.clone(), sigma.clone()), 10).unwrap().values;
        let permuted = VarModel::from_parts(
            lags.iter().map(|b| permute(b, &perm)).collect(),
            permute(&sigma, &perm),
        );
        let hp = gvd_shares(&permuted, 10).unwrap().values;
        prop_assert!((hp - permute(&h, &perm)).amax() < 1e-10);
    }
}

// Feeding one shock through the VAR recursion traces Θ_k times the shock.
#[test]
fn ma_matches_simulated_impulse_response() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, p) in [(1, 1), (2, 2), (3, 1), (3, 3)] {
        let lags = random_stable_lags(&mut rng, n, p);
        let sigma = random_spd(&mut rng, n);
        let root = sigma.clone().cholesky().unwrap().l();
        let theta = ma_coefficients(&VarModel::from_parts(lags.clone(), sigma), 6).unwrap();
        for shock in 0..n {
            let mut path: Vec<DVector<f64>> = Vec::new();
            for t in 0..6 {
                let mut y = if t == 0 {
                    root.column(shock).into_owned()
                } else {
                    DVector::zeros(n)
                };
                for (j, b) in lags.iter().enumerate() {
                    if t > j {
                        y += b * &path[t - j - 1];
                    }
                }
                path.push(y);
            }
            for k in 0..6 {
                let expected = &theta[k] * root.column(shock);
                assert!((&path[k] - expected).amax() < 1e-8, "n={n} p={p} k={k}");
            }
        }
    }
}
