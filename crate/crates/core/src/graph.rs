//! Dissimilarity matrices as complete weighted graphs: shortest paths,
//! eccentricities and graph centers.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};

use crate::dissim::DissimilarityMatrix;
use crate::error::{invalid, Error, Result};

/// Tolerance used for eccentricity ties and symmetry checks.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub labels: Vec<String>,
    pub adjacency: DMatrix<f64>,
    pub directed: bool,
}

impl WeightedGraph {
    pub fn new(labels: Vec<String>, adjacency: DMatrix<f64>, directed: bool) -> Result<Self> {
        let n = labels.len();
        if adjacency.nrows() != n || adjacency.ncols() != n {
            return Err(invalid("adjacency must be square and match labels"));
        }
        for i in 0..n {
            for j in 0..n {
                let w = adjacency[(i, j)];
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::NegativeWeight {
                        row: i,
                        col: j,
                        weight: w,
                    });
                }
                if i == j && w != 0.0 {
                    return Err(invalid(format!("nonzero diagonal weight at vertex {i}")));
                }
                if !directed && (w - adjacency[(j, i)]).abs() > TIE_TOLERANCE {
                    return Err(invalid(format!(
                        "undirected graph has asymmetric weights at ({i},{j})"
                    )));
                }
            }
        }
        Ok(WeightedGraph {
            labels,
            adjacency,
            directed,
        })
    }

    /// PCCD matrices become undirected graphs, GVDD matrices directed ones.
    pub fn from_dissimilarity(d: &DissimilarityMatrix) -> Result<Self> {
        WeightedGraph::new(d.labels.clone(), d.values.clone(), !d.kind.is_symmetric())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Which distances define a vertex's eccentricity in a directed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Eccentricity {
    /// Distances from the vertex (row maxima).
    #[default]
    Out,
    /// Distances to the vertex (column maxima).
    In,
}

impl FromStr for Eccentricity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "out" => Ok(Eccentricity::Out),
            "in" => Ok(Eccentricity::In),
            _ => Err(invalid(format!(
                "eccentricity must be `in` or `out`, got `{s}`"
            ))),
        }
    }
}

impl std::fmt::Display for Eccentricity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Eccentricity::Out => "out",
            Eccentricity::In => "in",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDistanceMatrix {
    pub labels: Vec<String>,
    pub distances: DMatrix<f64>,
    pub eccentricity: DVector<f64>,
}

impl GraphDistanceMatrix {
    /// Recomputes the eccentricity vector under another convention.
    pub fn with_eccentricity(mut self, mode: Eccentricity) -> Self {
        self.eccentricity = eccentricities(&self.distances, mode);
        self
    }
}

fn eccentricities(d: &DMatrix<f64>, mode: Eccentricity) -> DVector<f64> {
    let n = d.nrows();
    DVector::from_fn(n, |i, _| {
        (0..n)
            .filter(|&j| j != i)
            .map(|j| match mode {
                Eccentricity::Out => d[(i, j)],
                Eccentricity::In => d[(j, i)],
            })
            .fold(0.0, f64::max)
    })
}

/// All-pairs shortest paths (Floyd–Warshall) with out-eccentricities.
pub fn shortest_path_matrix(graph: &WeightedGraph) -> GraphDistanceMatrix {
    let n = graph.len();
    let mut d = graph.adjacency.clone();
    for k in 0..n {
        for i in 0..n {
            let dik = d[(i, k)];
            for j in 0..n {
                let via = dik + d[(k, j)];
                if via < d[(i, j)] {
                    d[(i, j)] = via;
                }
            }
        }
    }
    let eccentricity = eccentricities(&d, Eccentricity::Out);
    GraphDistanceMatrix {
        labels: graph.labels.clone(),
        distances: d,
        eccentricity,
    }
}

/// Indices of all vertices whose eccentricity is within
/// [`TIE_TOLERANCE`] of the minimum.
pub fn center_indices(dm: &GraphDistanceMatrix) -> Vec<usize> {
    let min = dm
        .eccentricity
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    (0..dm.eccentricity.len())
        .filter(|&i| dm.eccentricity[i] <= min + TIE_TOLERANCE)
        .collect()
}

/// The graph center as a set of labels (ties included).
pub fn center(dm: &GraphDistanceMatrix) -> BTreeSet<String> {
    center_indices(dm)
        .into_iter()
        .map(|i| dm.labels[i].clone())
        .collect()
}

/// Centers of each window plus how often each ticker was a center.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterReport {
    pub per_window: Vec<(NaiveDate, BTreeSet<String>)>,
    /// Sorted by descending count, ties alphabetical.
    pub aggregate: Vec<(String, usize)>,
}

impl CenterReport {
    pub fn new(per_window: Vec<(NaiveDate, BTreeSet<String>)>) -> Result<Self> {
        let sets: Vec<BTreeSet<String>> = per_window.iter().map(|(_, s)| s.clone()).collect();
        let aggregate = center_frequency(&sets)?;
        Ok(CenterReport {
            per_window,
            aggregate,
        })
    }
}

/// Counts each ticker once per window whose center set contains it.
pub fn center_frequency(per_window: &[BTreeSet<String>]) -> Result<Vec<(String, usize)>> {
    if per_window.is_empty() {
        return Err(invalid("center frequency needs at least one window"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for set in per_window {
        for t in set {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut out: Vec<(String, usize)> =
        counts.into_iter().map(|(t, c)| (t.to_owned(), c)).collect();
    // BTreeMap order is alphabetical; a stable sort keeps it within equal counts
    out.sort_by_key(|e| std::cmp::Reverse(e.1));
    Ok(out)
}
