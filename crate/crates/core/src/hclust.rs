//! Single-linkage agglomerative clustering and Newick serialization.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::numfmt::fmt_f64;

/// One agglomeration step. Cluster ids `0..N` are leaves, `N..2N-1` are
/// internal nodes in merge order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    leaves: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn new(leaves: Vec<String>, merges: Vec<Merge>) -> Result<Self> {
        let n = leaves.len();
        if n < 2 {
            return Err(invalid("a dendrogram needs at least two leaves"));
        }
        if merges.len() != n - 1 {
            return Err(invalid(format!(
                "expected {} merges, got {}",
                n - 1,
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut last = 0.0;
        for (k, m) in merges.iter().enumerate() {
            if m.id != n + k {
                return Err(invalid(format!(
                    "merge {k} creates id {}, expected {}",
                    m.id,
                    n + k
                )));
            }
            for child in [m.left, m.right] {
                if child >= m.id || used[child] {
                    return Err(invalid(format!("cluster {child} reused or out of order")));
                }
                used[child] = true;
            }
            if !(m.height >= last) {
                return Err(invalid("merge heights must be non-decreasing"));
            }
            last = m.height;
        }
        Ok(Dendrogram { leaves, merges })
    }

    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> usize {
        2 * self.leaves.len() - 2
    }

    /// Height of any cluster id; leaves sit at 0.
    pub fn height(&self, id: usize) -> f64 {
        let n = self.n_leaves();
        if id < n {
            0.0
        } else {
            self.merges[id - n].height
        }
    }

    pub fn children(&self, id: usize) -> Option<(usize, usize)> {
        let n = self.n_leaves();
        (id >= n).then(|| {
            let m = &self.merges[id - n];
            (m.left, m.right)
        })
    }

    /// Leaf indices below every cluster id.
    pub fn cluster_members(&self) -> Vec<Vec<usize>> {
        let n = self.n_leaves();
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for m in &self.merges {
            let mut joined = members[m.left].clone();
            joined.extend_from_slice(&members[m.right]);
            joined.sort_unstable();
            members.push(joined);
        }
        members
    }

    /// Internal clusters as (leaf labels, height), for order-free comparison.
    pub fn labeled_clusters(&self) -> Vec<(BTreeSet<String>, f64)> {
        let n = self.n_leaves();
        let members = self.cluster_members();
        let mut out: Vec<(BTreeSet<String>, f64)> = members[n..]
            .iter()
            .zip(&self.merges)
            .map(|(m, merge)| {
                (
                    m.iter().map(|&i| self.leaves[i].clone()).collect(),
                    merge.height,
                )
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Cophenetic distances: height of the lowest common ancestor.
    pub fn cophenetic(&self) -> DMatrix<f64> {
        let n = self.n_leaves();
        let members = self.cluster_members();
        let mut c = DMatrix::zeros(n, n);
        for m in &self.merges {
            for &a in &members[m.left] {
                for &b in &members[m.right] {
                    c[(a, b)] = m.height;
                    c[(b, a)] = m.height;
                }
            }
        }
        c
    }

    /// Same tree with leaves listed in `order` (a permutation of the
    /// current labels); cluster ids are renumbered accordingly.
    pub fn reorder_leaves(&self, order: &[String]) -> Result<Dendrogram> {
        let n = self.n_leaves();
        if order.len() != n {
            return Err(Error::LeafSetMismatch);
        }
        // internal ids keep their numbers
        let mut map: Vec<usize> = (0..2 * n - 1).collect();
        for (old, label) in self.leaves.iter().enumerate() {
            map[old] = order
                .iter()
                .position(|o| o == label)
                .ok_or(Error::LeafSetMismatch)?;
        }
        let merges = self
            .merges
            .iter()
            .map(|m| Merge {
                left: map[m.left],
                right: map[m.right],
                ..*m
            })
            .collect();
        Dendrogram::new(order.to_vec(), merges)
    }
}

/// `out[i][j] = max(d[i][j], d[j][i])`.
pub fn symmetrize_max(d: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(d.nrows(), d.ncols(), |i, j| {
        if i == j {
            d[(i, i)]
        } else {
            d[(i, j)].max(d[(j, i)])
        }
    })
}

/// Single-linkage clustering of a symmetric dissimilarity matrix.
///
/// At each step the pair of active clusters with the smallest dissimilarity
/// is merged; equal dissimilarities are resolved by the lexicographically
/// smallest `(lower id, higher id)` pair. The merged cluster's distance to
/// every other cluster is the minimum of its parts' distances.
pub fn single_linkage(d: &DMatrix<f64>, labels: Vec<String>) -> Result<Dendrogram> {
    let n = d.nrows();
    if !d.is_square() || labels.len() != n {
        return Err(invalid(
            "dissimilarity matrix must be square and match labels",
        ));
    }
    if n < 2 {
        return Err(invalid("single linkage needs at least two items"));
    }
    for i in 0..n {
        for j in 0..n {
            if d[(i, j)].is_nan() {
                return Err(Error::NonFinite {
                    module: "hclust",
                    what: "dissimilarity matrix",
                });
            }
            if d[(i, j)] != d[(j, i)] {
                return Err(Error::NotSymmetric(i, j));
            }
        }
    }

    // slot s holds cluster ids[s]; dist is indexed by slot
    let mut dist = d.clone();
    let mut ids: Vec<usize> = (0..n).collect();
    let mut alive = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..n {
            if !alive[a] {
                continue;
            }
            for b in (a + 1)..n {
                if !alive[b] {
                    continue;
                }
                let (lo, hi) = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                let cand = (dist[(a, b)], lo, hi, a, b);
                let better = match best {
                    None => true,
                    Some(cur) => (cand.0, cand.1, cand.2) < (cur.0, cur.1, cur.2),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        let (height, lo, hi, a, b) = best.expect("at least two active clusters");
        let id = n + step;
        merges.push(Merge {
            left: lo,
            right: hi,
            height,
            id,
        });
        for c in 0..n {
            if alive[c] && c != a && c != b {
                let v = dist[(a, c)].min(dist[(b, c)]);
                dist[(a, c)] = v;
                dist[(c, a)] = v;
            }
        }
        ids[a] = id;
        alive[b] = false;
    }
    Dendrogram::new(labels, merges)
}

fn needs_quotes(label: &str) -> bool {
    label.is_empty()
        || label
            .chars()
            .any(|c| c.is_whitespace() || "()[]':;,".contains(c))
}

fn write_label(out: &mut String, label: &str) {
    if needs_quotes(label) {
        out.push('\'');
        out.push_str(&label.replace('\'', "''"));
        out.push('\'');
    } else {
        out.push_str(label);
    }
}

/// Newick string with branch lengths `parent height - child height`.
/// Children are ordered by their smallest leaf label.
pub fn to_newick(t: &Dendrogram) -> String {
    let n = t.n_leaves();
    let mut min_label: Vec<&str> = t.leaves.iter().map(String::as_str).collect();
    for m in &t.merges {
        let v = min_label[m.left].min(min_label[m.right]);
        min_label.push(v);
    }

    fn write_node(t: &Dendrogram, id: usize, min_label: &[&str], out: &mut String) {
        match t.children(id) {
            None => write_label(out, &t.leaves[id]),
            Some((l, r)) => {
                let (first, second) = if min_label[l] <= min_label[r] {
                    (l, r)
                } else {
                    (r, l)
                };
                out.push('(');
                for (k, child) in [first, second].into_iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    write_node(t, child, min_label, out);
                    let _ = write!(out, ":{}", fmt_f64(t.height(id) - t.height(child)));
                }
                out.push(')');
            }
        }
    }

    let mut out = String::new();
    write_node(t, 2 * n - 2, &min_label, &mut out);
    out.push(';');
    out
}

#[derive(Debug)]
struct Node {
    label: Option<String>,
    length: f64,
    children: Vec<usize>,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nodes: Vec<Node>,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Newick {
            pos: self.pos,
            msg: msg.to_owned(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn label(&mut self) -> Result<Option<String>> {
        match self.peek() {
            Some(b'\'') => {
                self.pos += 1;
                let mut bytes = Vec::new();
                loop {
                    match self.src.get(self.pos) {
                        None => return Err(self.err("unterminated quoted label")),
                        Some(b'\'') if self.src.get(self.pos + 1) == Some(&b'\'') => {
                            bytes.push(b'\'');
                            self.pos += 2;
                        }
                        Some(b'\'') => {
                            self.pos += 1;
                            break;
                        }
                        Some(&c) => {
                            bytes.push(c);
                            self.pos += 1;
                        }
                    }
                }
                String::from_utf8(bytes)
                    .map(Some)
                    .map_err(|_| self.err("label is not UTF-8"))
            }
            _ => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && !b"(),:;".contains(&self.src[self.pos])
                    && !self.src[self.pos].is_ascii_whitespace()
                {
                    self.pos += 1;
                }
                if start == self.pos {
                    Ok(None)
                } else {
                    Ok(Some(
                        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned(),
                    ))
                }
            }
        }
    }

    fn length(&mut self) -> Result<f64> {
        if self.peek() != Some(b':') {
            return Ok(0.0);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && !b"(),:;".contains(&self.src[self.pos]) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap_or("")
            .trim();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
            _ => Err(self.err("invalid branch length")),
        }
    }

    fn subtree(&mut self) -> Result<usize> {
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                children.push(self.subtree()?);
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected `,` or `)`")),
                }
            }
        }
        let label = self.label()?;
        if children.is_empty() && label.is_none() {
            return Err(self.err("leaf without label"));
        }
        let length = self.length()?;
        self.nodes.push(Node {
            label: if children.is_empty() { label } else { None },
            length,
            children,
        });
        Ok(self.nodes.len() - 1)
    }
}

/// Parses one Newick tree into a dendrogram. Node heights are recovered
/// as the maximum over children of `child height + branch length`;
/// multifurcations become successive binary merges at the same height.
pub fn parse_newick(s: &str) -> Result<Dendrogram> {
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
        nodes: Vec::new(),
    };
    p.subtree()?;
    if p.peek() != Some(b';') {
        return Err(p.err("expected `;`"));
    }
    p.pos += 1;
    if p.peek().is_some() {
        return Err(p.err("trailing input after `;`"));
    }
    let nodes = p.nodes;

    // nodes are stored in post-order: children precede parents
    let mut height = vec![0.0; nodes.len()];
    for (i, node) in nodes.iter().enumerate() {
        height[i] = node
            .children
            .iter()
            .map(|&c| height[c] + nodes[c].length)
            .fold(0.0, f64::max);
    }

    let mut leaves = Vec::new();
    let mut cluster = vec![usize::MAX; nodes.len()];
    for (i, node) in nodes.iter().enumerate() {
        if let Some(label) = &node.label {
            cluster[i] = leaves.len();
            leaves.push(label.clone());
        }
    }
    let n = leaves.len();
    let mut internal: Vec<usize> = (0..nodes.len())
        .filter(|&i| !nodes[i].children.is_empty())
        .collect();
    internal.sort_by(|&a, &b| height[a].total_cmp(&height[b]).then(a.cmp(&b)));

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for i in internal {
        let kids = &nodes[i].children;
        let mut acc = cluster[kids[0]];
        if kids.len() == 1 {
            cluster[i] = acc;
            continue;
        }
        for &k in &kids[1..] {
            let other = cluster[k];
            let id = n + merges.len();
            merges.push(Merge {
                left: acc.min(other),
                right: acc.max(other),
                height: height[i],
                id,
            });
            acc = id;
        }
        cluster[i] = acc;
    }
    Dendrogram::new(leaves, merges)
}
