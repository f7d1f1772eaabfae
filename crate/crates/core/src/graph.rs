//! Signed similarity graphs and their Laplacians.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{SparseSym, SymBuilder, SymMatrix};

/// N samples with Q features each, plus the diagonal feature metric and the
/// kernel bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    n: usize,
    q: usize,
    data: Vec<f64>,
    weights: Vec<f64>,
    bandwidth: f64,
}

impl FeatureSet {
    /// `rows` must be rectangular; `weights` has one entry per column.
    pub fn new(rows: Vec<Vec<f64>>, weights: Vec<f64>, bandwidth: f64) -> Result<Self> {
        let n = rows.len();
        let q = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * q);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != q {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} features, expected {q}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::from_flat(n, q, data, weights, bandwidth)
    }

    /// Same as [`FeatureSet::new`] with unit feature weights.
    pub fn unweighted(rows: Vec<Vec<f64>>, bandwidth: f64) -> Result<Self> {
        let q = rows.first().map_or(0, Vec::len);
        Self::new(rows, vec![1.0; q], bandwidth)
    }

    /// Row-major `n × q` data.
    pub fn from_flat(
        n: usize,
        q: usize,
        data: Vec<f64>,
        weights: Vec<f64>,
        bandwidth: f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n}")));
        }
        if q == 0 {
            return Err(Error::InvalidParameter("need at least one feature".into()));
        }
        if data.len() != n * q {
            return Err(Error::DimensionMismatch {
                expected: n * q,
                got: data.len(),
            });
        }
        if weights.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                got: weights.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("features must be finite".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "feature weights must be finite and non-negative".into(),
            ));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(Self {
            n,
            q,
            data,
            weights,
            bandwidth,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.q
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.q..(i + 1) * self.q]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn with_bandwidth(mut self, bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        self.bandwidth = bandwidth;
        Ok(self)
    }

    pub fn with_weights(self, weights: Vec<f64>) -> Result<Self> {
        Self::from_flat(self.n, self.q, self.data, weights, self.bandwidth)
    }

    /// `(h_i - h_j)ᵀ Ξ (h_i - h_j)`
    pub fn sq_distance(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .zip(&self.weights)
            .map(|((a, b), w)| w * (a - b) * (a - b))
            .sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.sq_distance(i, j).sqrt()
    }

    /// Gaussian kernel weight between samples `i` and `j`.
    pub fn kernel(&self, i: usize, j: usize) -> f64 {
        (-self.sq_distance(i, j) / (self.bandwidth * self.bandwidth)).exp()
    }

    /// Subset of rows, in the given order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(idx.len() * self.q);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self::from_flat(idx.len(), self.q, data, self.weights.clone(), self.bandwidth)
    }
}

/// Undirected graph with nonzero, possibly negative edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    n: usize,
    edges: BTreeMap<(usize, usize), f64>,
}

impl SignedGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeMap::new(),
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(i, j, w) in edges {
            if g.weight(i, j).is_some() {
                return Err(Error::InvalidEdge {
                    i,
                    j,
                    reason: "duplicate edge".into(),
                });
            }
            g.set_edge(i, j, w)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Inserts or overwrites the edge `{i, j}`.
    pub fn set_edge(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        let reason = if i == j {
            Some("self-loops are not allowed".to_string())
        } else if i >= self.n || j >= self.n {
            Some(format!("node id out of range for {} nodes", self.n))
        } else if !w.is_finite() || w == 0.0 {
            Some(format!("weight must be finite and nonzero, got {w}"))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidEdge { i, j, reason });
        }
        self.edges.insert((i.min(j), i.max(j)), w);
        Ok(())
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    /// Edges as `(i, j, w)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn positive_edge_count(&self) -> usize {
        self.edges.values().filter(|w| **w > 0.0).count()
    }

    pub fn negative_edge_count(&self) -> usize {
        self.edges.values().filter(|w| **w < 0.0).count()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.keys().filter(|&&(a, b)| a == i || b == i).count()
    }

    /// The subgraph of positive edges only.
    pub fn positive_part(&self) -> SignedGraph {
        SignedGraph {
            n: self.n,
            edges: self
                .edges
                .iter()
                .filter(|(_, w)| **w > 0.0)
                .map(|(k, w)| (*k, *w))
                .collect(),
        }
    }

    /// Dense weight matrix, mainly for tests and small examples.
    pub fn weight_matrix(&self) -> nalgebra::DMatrix<f64> {
        let mut w = nalgebra::DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.edges() {
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
        w
    }

    /// Writes `i j w` lines after a `# nodes N` header.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# nodes {}", self.n)?;
        for (i, j, w) in self.edges() {
            writeln!(out, "{i} {j} {w}")?;
        }
        Ok(())
    }

    /// Reads the edge-list format. Without a `# nodes N` header the node
    /// count is one past the largest id.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut n_hint = None;
        let mut edges = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = k + 1;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix('#') {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() == 2 && toks[0] == "nodes" {
                    n_hint = Some(toks[1].parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid node count `{}`", toks[1]),
                    })?);
                }
                continue;
            }
            let toks: Vec<&str> = t.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `i j w`, found {} fields", toks.len()),
                });
            }
            let parse_id = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid node id `{s}`"),
                })
            };
            let i = parse_id(toks[0])?;
            let j = parse_id(toks[1])?;
            let w = toks[2].parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid weight `{}`", toks[2]),
            })?;
            edges.push((i, j, w));
        }
        let n = n_hint.unwrap_or_else(|| edges.iter().map(|e| e.0.max(e.1) + 1).max().unwrap_or(0));
        Self::from_edges(n, &edges)
    }
}

/// Observed labels on a subset of nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialLabels {
    n: usize,
    observed: Vec<(usize, i8)>,
    noise_rate: Option<f64>,
}

impl PartialLabels {
    pub fn new(n: usize, observed: Vec<(usize, i8)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(observed.len());
        for &(i, y) in &observed {
            if i >= n {
                return Err(Error::InvalidParameter(format!(
                    "label index {i} out of range for {n} nodes"
                )));
            }
            if y != 1 && y != -1 {
                return Err(Error::InvalidParameter(format!(
                    "label for node {i} must be -1 or +1, got {y}"
                )));
            }
            if !seen.insert(i) {
                return Err(Error::InvalidParameter(format!("node {i} labeled twice")));
            }
        }
        Ok(Self {
            n,
            observed,
            noise_rate: None,
        })
    }

    pub fn with_noise_rate(mut self, p: f64) -> Self {
        self.noise_rate = Some(p);
        self
    }

    pub fn noise_rate(&self) -> Option<f64> {
        self.noise_rate
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// K, the number of observed labels.
    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn observed(&self) -> &[(usize, i8)] {
        &self.observed
    }

    pub fn indices(&self) -> Vec<usize> {
        self.observed.iter().map(|o| o.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observed.iter().map(|o| f64::from(o.1)).collect()
    }

    /// `Hᵀ y`: labels scattered into an N-vector, zeros elsewhere.
    pub fn scatter(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for &(i, y) in &self.observed {
            x[i] = f64::from(y);
        }
        x
    }

    /// Dense `K × N` sampling matrix.
    pub fn sampling_matrix(&self) -> nalgebra::DMatrix<f64> {
        let mut h = nalgebra::DMatrix::zeros(self.observed.len(), self.n);
        for (row, &(i, _)) in self.observed.iter().enumerate() {
            h[(row, i)] = 1.0;
        }
        h
    }
}

/// The four Laplacians of a signed graph.
#[derive(Debug, Clone)]
pub struct LaplacianBundle {
    /// `D - W` with signed degrees.
    pub l: SparseSym,
    /// Laplacian of the positive-weight edges.
    pub lpos: SparseSym,
    /// Laplacian of the negative-weight edges.
    pub lneg: SparseSym,
    /// `Dˢ - W` with absolute-value degrees.
    pub lsigned: SparseSym,
}

impl LaplacianBundle {
    pub fn dim(&self) -> usize {
        use crate::sparse::SymOperator;
        self.l.dim()
    }
}

pub fn build_laplacian(graph: &SignedGraph) -> LaplacianBundle {
    let n = graph.node_count();
    let mut l = SymBuilder::new(n);
    let mut lpos = SymBuilder::new(n);
    let mut lneg = SymBuilder::new(n);
    let mut ls = SymBuilder::new(n);
    for (i, j, w) in graph.edges() {
        let part = if w > 0.0 { &mut lpos } else { &mut lneg };
        for b in [&mut l, part] {
            b.push(i, i, w).push(j, j, w).push(i, j, -w);
        }
        ls.push(i, i, w.abs()).push(j, j, w.abs()).push(i, j, -w);
    }
    LaplacianBundle {
        l: l.build(),
        lpos: lpos.build(),
        lneg: lneg.build(),
        lsigned: ls.build(),
    }
}

/// Symmetrized union of each node's `omega` nearest neighbours, weighted by
/// the Gaussian kernel. Ties in distance go to the lower node id.
pub fn build_knn_graph(features: &FeatureSet, omega: usize) -> Result<SignedGraph> {
    let n = features.len();
    if omega == 0 || omega >= n {
        return Err(Error::InvalidParameter(format!(
            "omega must be in [1, {}), got {omega}",
            n
        )));
    }
    let mut g = SignedGraph::new(n);
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        cand.clear();
        cand.extend((0..n).filter(|&j| j != i).map(|j| (features.sq_distance(i, j), j)));
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in cand.iter().take(omega) {
            // keep far edges too; the kernel can underflow to zero
            let w = features.kernel(i, j).max(f64::MIN_POSITIVE);
            g.set_edge(i, j, w)?;
        }
    }
    Ok(g)
}

fn split_classes(labels: &[(usize, i8)], n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut neg = Vec::new();
    let mut pos = Vec::new();
    for &(i, y) in labels {
        if i >= n {
            return Err(Error::InvalidParameter(format!(
                "label index {i} out of range for {n} nodes"
            )));
        }
        match y {
            1 => pos.push(i),
            -1 => neg.push(i),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "label for node {i} must be -1 or +1, got {other}"
                )))
            }
        }
    }
    if neg.is_empty() || pos.is_empty() {
        return Err(Error::DegenerateClustering(format!(
            "need both classes, got {} negative and {} positive labels",
            neg.len(),
            pos.len()
        )));
    }
    neg.sort_unstable();
    pos.sort_unstable();
    Ok((neg, pos))
}

fn medoid(features: &FeatureSet, members: &[usize]) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for &i in members {
        let s: f64 = members.iter().map(|&j| features.distance(i, j)).sum();
        if s < best.0 {
            best = (s, i);
        }
    }
    best.1
}

/// Medoids of the two classes as `(class -1, class +1)`.
pub fn find_centroid_pair(features: &FeatureSet, labels: &[(usize, i8)]) -> Result<(usize, usize)> {
    let (neg, pos) = split_classes(labels, features.len())?;
    Ok((medoid(features, &neg), medoid(features, &pos)))
}

/// Up to `max_pairs` disjoint cross-class pairs `(class -1, class +1)`.
///
/// Pairs are taken greedily in ascending distance, so each chosen pair is
/// mutually nearest among the nodes not yet matched.
pub fn find_boundary_pairs(
    features: &FeatureSet,
    labels: &[(usize, i8)],
    max_pairs: usize,
) -> Result<Vec<(usize, usize)>> {
    let (neg, pos) = split_classes(labels, features.len())?;
    let mut cand = Vec::with_capacity(neg.len() * pos.len());
    for &a in &neg {
        for &b in &pos {
            cand.push((features.sq_distance(a, b), a.min(b), a.max(b), a, b));
        }
    }
    cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used = BTreeSet::new();
    let mut out = Vec::new();
    for (_, _, _, a, b) in cand {
        if out.len() == max_pairs {
            break;
        }
        if used.contains(&a) || used.contains(&b) {
            continue;
        }
        used.insert(a);
        used.insert(b);
        out.push((a, b));
    }
    Ok(out)
}

/// How pair distances map onto negative weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightConvention {
    /// Magnitude proportional to distance: the farthest pair gets `w_min`.
    #[default]
    Proportional,
    /// Reversed: the closest pair gets `w_min`.
    Inverse,
}

impl std::str::FromStr for WeightConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proportional" => Ok(Self::Proportional),
            "inverse" => Ok(Self::Inverse),
            _ => Err(Error::InvalidParameter(format!("unknown weight convention `{s}`"))),
        }
    }
}

/// Inserts a negative edge per pair, overwriting existing edges.
pub fn add_negative_edges(
    graph: &SignedGraph,
    pairs: &[(usize, usize)],
    features: &FeatureSet,
    w_min: f64,
    convention: WeightConvention,
) -> Result<SignedGraph> {
    if !(w_min.is_finite() && w_min < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "negative weight range needs w_min < 0, got {w_min}"
        )));
    }
    if features.len() != graph.node_count() {
        return Err(Error::DimensionMismatch {
            expected: graph.node_count(),
            got: features.len(),
        });
    }
    for &(i, j) in pairs {
        if i == j || i >= graph.node_count() || j >= graph.node_count() {
            return Err(Error::InvalidEdge {
                i,
                j,
                reason: "negative edge needs two distinct valid nodes".into(),
            });
        }
    }
    let dists: Vec<f64> = pairs.iter().map(|&(i, j)| features.distance(i, j)).collect();
    let d_max = dists.iter().copied().fold(0.0, f64::max);
    let d_min = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let mut g = graph.clone();
    for (&(i, j), &d) in pairs.iter().zip(&dists) {
        let frac = if d_max > 0.0 {
            match convention {
                WeightConvention::Proportional => d / d_max,
                WeightConvention::Inverse => (d_max + d_min - d) / d_max,
            }
        } else {
            1.0
        };
        // a zero-distance pair would map to weight 0, which is not an edge
        let w = (w_min * frac).min(w_min * 1e-12);
        g.set_edge(i, j, w)?;
    }
    Ok(g)
}

/// `β·a + (1-β)·b`
pub fn combine_laplacians(a: &SymMatrix, b: &SymMatrix, beta: f64) -> Result<SymMatrix> {
    use crate::sparse::SymOperator;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("beta must be in [0, 1], got {beta}")));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if beta == 1.0 {
        return Ok(a.clone());
    }
    if beta == 0.0 {
        return Ok(b.clone());
    }
    a.linear_combination(beta, b, 1.0 - beta)
}
