//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use chrono::{Days, NaiveDate};
use nalgebra::DMatrix;
use netmon::hclust::{Dendrogram, Merge};
use netmon::ingest::ReturnPanel;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i}")).collect()
}

pub fn dates(n: usize) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    (0..n).map(|i| start + Days::new(i as u64)).collect()
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| normal(rng))
}

pub fn return_panel(data: DMatrix<f64>) -> ReturnPanel {
    let (m, n) = data.shape();
    ReturnPanel::new(dates(m), labels(n), data).unwrap()
}

/// Random symmetric dissimilarity with zero diagonal. Small integer
/// entries when `ties` is set, to force equal merge heights.
pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize, ties: bool) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if ties {
                rng.random_range(1..4) as f64
            } else {
                rng.random::<f64>()
            };
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Textbook single linkage: recompute every inter-cluster distance from
/// the leaves at each step. Ties go to the smallest (lower id, higher id).
pub fn naive_single_linkage(d: &DMatrix<f64>) -> Vec<Merge> {
    let n = d.nrows();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let mut h = f64::INFINITY;
                for &x in &clusters[a].1 {
                    for &y in &clusters[b].1 {
                        h = h.min(d[(x, y)]);
                    }
                }
                let (ia, ib) = (clusters[a].0, clusters[b].0);
                let cand = (h, ia.min(ib), ia.max(ib), a, b);
                if best.is_none_or(|c| (cand.0, cand.1, cand.2) < (c.0, c.1, c.2)) {
                    best = Some(cand);
                }
            }
        }
        let (h, lo, hi, a, b) = best.unwrap();
        let mut joined = clusters[a].1.clone();
        joined.extend_from_slice(&clusters[b].1);
        let id = n + step;
        clusters.remove(b);
        clusters[a] = (id, joined);
        merges.push(Merge {
            left: lo,
            right: hi,
            height: h,
            id,
        });
    }
    merges
}

/// Random binary rooted tree: merge two uniformly chosen clusters per step.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Dendrogram {
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::new();
    for step in 0..n - 1 {
        active.shuffle(rng);
        let a = active.pop().unwrap();
        let b = active.pop().unwrap();
        let id = n + step;
        merges.push(Merge {
            left: a.min(b),
            right: a.max(b),
            height: (step + 1) as f64,
            id,
        });
        active.push(id);
    }
    Dendrogram::new(labels(n), merges).unwrap()
}

pub type LabelSplit = BTreeSet<String>;

/// Nontrivial bipartitions as label sets, each stored as the side without
/// the smallest label.
pub fn brute_splits(t: &Dendrogram) -> BTreeSet<LabelSplit> {
    let all: BTreeSet<String> = t.leaves().iter().cloned().collect();
    let anchor = all.iter().next().unwrap().clone();
    let mut out = BTreeSet::new();
    for members in t.cluster_members() {
        let side: LabelSplit = members.iter().map(|&i| t.leaves()[i].clone()).collect();
        let other: LabelSplit = all.difference(&side).cloned().collect();
        if side.len() < 2 || other.len() < 2 {
            continue;
        }
        out.insert(if side.contains(&anchor) { other } else { side });
    }
    out
}

pub fn brute_rf(t1: &Dendrogram, t2: &Dendrogram) -> f64 {
    let (a, b) = (brute_splits(t1), brute_splits(t2));
    a.symmetric_difference(&b).count() as f64 / 2.0
}

/// Mutual information in bits between two bipartitions, read off the joint
/// membership table of the leaves.
pub fn table_mutual_info(a: &LabelSplit, b: &LabelSplit, all: &BTreeSet<String>) -> f64 {
    let n = all.len() as f64;
    let mut joint = [[0.0f64; 2]; 2];
    for leaf in all {
        joint[usize::from(a.contains(leaf))][usize::from(b.contains(leaf))] += 1.0 / n;
    }
    let px = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    let py = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
    let mut mi = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            if joint[i][j] > 0.0 {
                mi += joint[i][j] * (joint[i][j] / (px[i] * py[j])).log2();
            }
        }
    }
    mi
}

pub fn table_entropy(a: &LabelSplit, n: usize) -> f64 {
    let p = a.len() as f64 / n as f64;
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Best one-to-one matching by enumerating every injection of the smaller
/// side into the larger.
pub fn brute_matching(scores: &DMatrix<f64>) -> f64 {
    let s = if scores.nrows() <= scores.ncols() {
        scores.clone()
    } else {
        scores.transpose()
    };
    fn go(s: &DMatrix<f64>, row: usize, used: &mut Vec<bool>) -> f64 {
        if row == s.nrows() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for c in 0..s.ncols() {
            if !used[c] {
                used[c] = true;
                best = best.max(s[(row, c)] + go(s, row + 1, used));
                used[c] = false;
            }
        }
        best
    }
    if s.nrows() == 0 {
        return 0.0;
    }
    go(&s, 0, &mut vec![false; s.ncols()])
}

/// Brute-force clustering information distance from the label splits.
pub fn brute_cid(t1: &Dendrogram, t2: &Dendrogram) -> f64 {
    let all: BTreeSet<String> = t1.leaves().iter().cloned().collect();
    let n = all.len();
    let a: Vec<_> = brute_splits(t1).into_iter().collect();
    let b: Vec<_> = brute_splits(t2).into_iter().collect();
    let h1: f64 = a.iter().map(|s| table_entropy(s, n)).sum();
    let h2: f64 = b.iter().map(|s| table_entropy(s, n)).sum();
    let scores = DMatrix::from_fn(a.len(), b.len(), |i, j| {
        table_mutual_info(&a[i], &b[j], &all)
    });
    h1 + h2 - 2.0 * brute_matching(&scores)
}

/// Simulate `y_t = c + sum_j B_j y_{t-j} + e_t`, `e_t ~ N(0, sigma)`,
/// discarding `burn` initial rows.
pub fn simulate_var<R: Rng>(
    rng: &mut R,
    intercept: &[f64],
    lags: &[DMatrix<f64>],
    sigma: &DMatrix<f64>,
    t: usize,
    burn: usize,
) -> DMatrix<f64> {
    let n = sigma.nrows();
    let l = sigma
        .clone()
        .cholesky()
        .expect("sigma must be positive definite")
        .l();
    let total = t + burn;
    let mut y = DMatrix::zeros(total, n);
    for row in 0..total {
        let z = nalgebra::DVector::from_fn(n, |_, _| normal(rng));
        let e = &l * z;
        for i in 0..n {
            let mut v = intercept[i] + e[i];
            for (j, b) in lags.iter().enumerate() {
                if row > j {
                    for k in 0..n {
                        v += b[(i, k)] * y[(row - j - 1, k)];
                    }
                }
            }
            y[(row, i)] = v;
        }
    }
    y.rows(burn, t).into_owned()
}

/// Lag matrices with spectral norm summing below one, hence stable.
pub fn random_stable_lags<R: Rng>(rng: &mut R, n: usize, p: usize) -> Vec<DMatrix<f64>> {
    (0..p)
        .map(|_| {
            let m = gaussian_matrix(rng, n, n);
            let norm = m.norm().max(1e-12);
            m * (0.9 / (p as f64 * norm))
        })
        .collect()
}

pub fn random_spd<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = gaussian_matrix(rng, n, n);
    &a * a.transpose() + DMatrix::identity(n, n) * 0.1
}

pub fn permute(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(perm[i], perm[j])])
}

/// The VAR(2) reported for (PCCD, GVDD, index) tree-distance series.
pub fn reference_var2() -> (Vec<f64>, Vec<DMatrix<f64>>, DMatrix<f64>) {
    let c = vec![1.72767, 5.03862, 0.00146];
    let b1 = DMatrix::from_row_slice(
        3,
        3,
        &[
            0.20913, 0.04571, -10.91973, //
            0.19580, 0.31478, -25.64787, //
            0.00009, -0.00011, -0.04697,
        ],
    );
    let b2 = DMatrix::from_row_slice(
        3,
        3,
        &[
            0.22751, 0.01034, 3.84118, //
            0.14021, 0.00758, 11.12222, //
            0.00014, -0.00011, -0.01427,
        ],
    );
    let sigma = DMatrix::from_row_slice(
        3,
        3,
        &[
            4.26874, 1.21287, -0.00024, //
            1.21287, 11.87265, -0.00321, //
            -0.00024, -0.00321, 0.00014,
        ],
    );
    (c, vec![b1, b2], sigma)
}
