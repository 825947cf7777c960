//! Distances between dendrograms over a shared leaf set: Robinson-Foulds
//! and the clustering information distance.
//!
//! Both reduce a rooted dendrogram to the set of nontrivial bipartitions
//! ("splits") its edges induce, so root placement carries no information.
//! Information quantities are in bits.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::assignment::max_weight_assignment;
use crate::error::{invalid, Error, Result};
use crate::hclust::Dendrogram;
use crate::monitor::DistanceSeries;

/// Bipartition of `n` leaves, stored as the bitmask of the side that does
/// not contain leaf 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Split {
    bits: Vec<u64>,
    n: usize,
}

impl Split {
    /// Canonical split with `members` on one side; `None` when trivial
    /// (either side has fewer than two leaves).
    pub fn from_members(members: &[usize], n: usize) -> Option<Split> {
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; words];
        for &m in members {
            debug_assert!(m < n);
            bits[m / 64] |= 1 << (m % 64);
        }
        if bits[0] & 1 == 1 {
            for (w, word) in bits.iter_mut().enumerate() {
                *word = !*word;
                let valid = n.saturating_sub(w * 64).min(64);
                if valid < 64 {
                    *word &= (1u64 << valid) - 1;
                }
            }
        }
        let split = Split { bits, n };
        let size = split.side_size();
        (size >= 2 && n - size >= 2).then_some(split)
    }

    pub fn n_leaves(&self) -> usize {
        self.n
    }

    /// Size of the canonical side.
    pub fn side_size(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn contains(&self, leaf: usize) -> bool {
        self.bits[leaf / 64] >> (leaf % 64) & 1 == 1
    }

    fn overlap(&self, other: &Split) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Entropy (bits) of the two-cluster partition.
    pub fn entropy(&self) -> f64 {
        let n = self.n as f64;
        let a = self.side_size() as f64 / n;
        -plogp(a) - plogp(1.0 - a)
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSet {
    pub splits: BTreeSet<Split>,
    pub n_leaves: usize,
}

impl SplitSet {
    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    /// Sum of the split entropies.
    pub fn entropy(&self) -> f64 {
        self.splits.iter().map(Split::entropy).sum()
    }
}

/// Nontrivial splits of every internal cluster below the root, over the
/// tree's own leaf order.
pub fn extract_splits(t: &Dendrogram) -> SplitSet {
    let n = t.n_leaves();
    let members = t.cluster_members();
    let splits = members[n..members.len() - 1]
        .iter()
        .filter_map(|m| Split::from_members(m, n))
        .collect();
    SplitSet {
        splits,
        n_leaves: n,
    }
}

/// `t2` relabelled onto `t1`'s leaf order.
fn align(t1: &Dendrogram, t2: &Dendrogram) -> Result<Dendrogram> {
    let a: HashSet<&String> = t1.leaves().iter().collect();
    let b: HashSet<&String> = t2.leaves().iter().collect();
    if a != b || a.len() != t1.n_leaves() || b.len() != t2.n_leaves() {
        return Err(Error::LeafSetMismatch);
    }
    t2.reorder_leaves(t1.leaves())
}

fn split_sets(t1: &Dendrogram, t2: &Dendrogram) -> Result<(SplitSet, SplitSet)> {
    let t2 = align(t1, t2)?;
    Ok((extract_splits(t1), extract_splits(&t2)))
}

/// Half the size of the symmetric difference of the two split sets.
pub fn rf_distance(t1: &Dendrogram, t2: &Dendrogram) -> Result<f64> {
    let (s1, s2) = split_sets(t1, t2)?;
    let diff = s1.splits.symmetric_difference(&s2.splits).count();
    Ok(diff as f64 / 2.0)
}

/// Mutual clustering information (bits) between two splits of the same
/// `n` leaves: `Σ π_{X∩Y} log2(π_{X∩Y} / (π_X π_Y))` over the four pairs of
/// sides, with empty intersections contributing 0.
pub fn mutual_clustering_info(s1: &Split, s2: &Split, n: usize) -> f64 {
    let nf = n as f64;
    let a = s1.side_size();
    let b = n - a;
    let a2 = s2.side_size();
    let b2 = n - a2;
    let aa = s1.overlap(s2);
    let ab = a - aa;
    let ba = a2 - aa;
    let bb = b - ba;
    let j = |inter: usize, x: usize, y: usize| -> f64 {
        if inter == 0 {
            return 0.0;
        }
        let p = inter as f64 / nf;
        p * (p / ((x as f64 / nf) * (y as f64 / nf))).log2()
    };
    let i = j(aa, a, a2) + j(ab, a, b2) + j(ba, b, a2) + j(bb, b, b2);
    i.max(0.0)
}

/// Mutual clustering information between every pair of splits.
pub fn pairing_scores(s1: &SplitSet, s2: &SplitSet) -> DMatrix<f64> {
    let a: Vec<&Split> = s1.splits.iter().collect();
    let b: Vec<&Split> = s2.splits.iter().collect();
    DMatrix::from_fn(a.len(), b.len(), |i, j| {
        mutual_clustering_info(a[i], b[j], s1.n_leaves)
    })
}

/// Score of the optimal matching (each split used at most once).
pub fn optimal_matching_score(scores: &DMatrix<f64>) -> f64 {
    max_weight_assignment(scores).1
}

/// `H(t1) + H(t2) - 2·S` where `S` is the optimal matching score and `H`
/// sums split entropies.
pub fn clustering_info_distance(t1: &Dendrogram, t2: &Dendrogram) -> Result<f64> {
    let (s1, s2) = split_sets(t1, t2)?;
    let score = optimal_matching_score(&pairing_scores(&s1, &s2));
    Ok((s1.entropy() + s2.entropy() - 2.0 * score).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TreeMetric {
    Rf,
    #[default]
    Cid,
}

impl TreeMetric {
    pub fn distance(self, t1: &Dendrogram, t2: &Dendrogram) -> Result<f64> {
        match self {
            TreeMetric::Rf => rf_distance(t1, t2),
            TreeMetric::Cid => clustering_info_distance(t1, t2),
        }
    }
}

impl fmt::Display for TreeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeMetric::Rf => "rf",
            TreeMetric::Cid => "cid",
        })
    }
}

impl FromStr for TreeMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rf" => Ok(TreeMetric::Rf),
            "cid" => Ok(TreeMetric::Cid),
            _ => Err(invalid(format!("metric must be `rf` or `cid`, got `{s}`"))),
        }
    }
}

/// Distances between consecutive trees, stamped with the later tree's date.
pub fn tree_distance_series(
    trees: &[(NaiveDate, Dendrogram)],
    metric: TreeMetric,
    label: &str,
) -> Result<DistanceSeries> {
    if trees.len() < 2 {
        return Err(invalid("a tree-distance series needs at least two trees"));
    }
    let mut timestamps = Vec::with_capacity(trees.len() - 1);
    let mut values = Vec::with_capacity(trees.len() - 1);
    for pair in trees.windows(2) {
        values.push(metric.distance(&pair[0].1, &pair[1].1)?);
        timestamps.push(pair[1].0);
    }
    DistanceSeries::new(label, timestamps, values)
}
