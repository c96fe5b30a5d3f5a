//! Weighted digraphs and the matrices derived from them.
//!
//! A [`DiGraph`] stores its arcs as an edge list; dense matrices are built on
//! demand. Vertex `i` with an arc `i -> j` of weight `w` gives `A[i][j] = w`.

use std::collections::HashSet;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Row-major dense real matrix.
pub type DenseMatrix = DMatrix<f64>;

/// Tolerance under which a matrix counts as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

const POWER_ITERATION_CAP: usize = 100_000;
const STATIONARY_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Weighted directed graph with non-negative weights, no self-loops and at
/// most one arc per ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DiGraph {
    n: usize,
    edges: Vec<Edge>,
    labels: Option<Vec<String>>,
    weakly_connected: bool,
}

impl DiGraph {
    /// Builds a digraph from `(src, dst, weight)` triples.
    ///
    /// Zero-weight arcs are accepted but not stored, since they contribute
    /// nothing to any derived matrix.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut stored = Vec::new();
        for (src, dst, weight) in edges {
            for index in [src, dst] {
                if index >= n {
                    return Err(Error::VertexOutOfRange { index, n });
                }
            }
            if src == dst {
                return Err(Error::SelfLoop(src));
            }
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidWeight { src, dst, weight });
            }
            if !seen.insert((src, dst)) {
                return Err(Error::DuplicateEdge { src, dst });
            }
            if weight > 0.0 {
                stored.push(Edge { src, dst, weight });
            }
        }
        let weakly_connected = weakly_connected(n, &stored);
        Ok(Self { n, edges: stored, labels: None, weakly_connected })
    }

    /// Builds the digraph with an arc in both directions for every undirected edge.
    pub fn from_undirected(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut arcs = Vec::new();
        for (u, v, w) in edges {
            arcs.push((u, v, w));
            arcs.push((v, u, w));
        }
        Self::new(n, arcs)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of vertex `i`, falling back to its index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    pub fn is_weakly_connected(&self) -> bool {
        self.weakly_connected
    }

    /// Returns `Err(NotWeaklyConnected)` unless the graph is weakly connected.
    pub fn require_weakly_connected(&self) -> Result<()> {
        if self.weakly_connected {
            Ok(())
        } else {
            Err(Error::NotWeaklyConnected)
        }
    }

    /// Strong connectivity via forward and reverse reachability from vertex 0.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut fwd = vec![Vec::new(); self.n];
        let mut rev = vec![Vec::new(); self.n];
        for e in &self.edges {
            fwd[e.src].push(e.dst);
            rev[e.dst].push(e.src);
        }
        reaches_all(&fwd) && reaches_all(&rev)
    }

    pub fn out_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.src] += e.weight;
        }
        d
    }

    /// Underlying undirected graph, with an arc in each direction weighted by
    /// `max(A_ij, A_ji)`.
    pub fn symmetrized(&self) -> DiGraph {
        let au = underlying_undirected_adjacency(self);
        let mut arcs = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if au[(i, j)] > 0.0 {
                    arcs.push((i, j, au[(i, j)]));
                }
            }
        }
        let mut g = DiGraph::new(self.n, arcs).expect("symmetrization of a valid graph is valid");
        g.labels = self.labels.clone();
        g
    }

    /// Same vertex set with every arc reversed.
    pub fn reversed(&self) -> DiGraph {
        let mut g = DiGraph::new(self.n, self.edges.iter().map(|e| (e.dst, e.src, e.weight)))
            .expect("reversal of a valid graph is valid");
        g.labels = self.labels.clone();
        g
    }
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn weakly_connected(n: usize, edges: &[Edge]) -> bool {
    if n == 0 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.src].push(e.dst);
        adj[e.dst].push(e.src);
    }
    reaches_all(&adj)
}

/// Real signal indexed by the vertices of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal {
    values: Vec<f64>,
}

impl GraphSignal {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Wraps `values` after checking it has one entry per vertex of `g`.
    pub fn for_graph(g: &DiGraph, values: Vec<f64>) -> Result<Self> {
        check_len(g.n(), values.len())?;
        Ok(Self { values })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl Deref for GraphSignal {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl From<Vec<f64>> for GraphSignal {
    fn from(values: Vec<f64>) -> Self {
        Self { values }
    }
}

impl From<DVector<f64>> for GraphSignal {
    fn from(v: DVector<f64>) -> Self {
        Self { values: v.iter().copied().collect() }
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Largest `|M_ij - M_ji|`; infinite for non-square input.
pub fn max_asymmetry(m: &DenseMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn is_symmetric(m: &DenseMatrix) -> bool {
    max_asymmetry(m) <= SYMMETRY_TOL
}

pub fn adjacency(g: &DiGraph) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(g.n, g.n);
    for e in &g.edges {
        a[(e.src, e.dst)] = e.weight;
    }
    a
}

/// `A^u` with `A^u_ij = A^u_ji = max(A_ij, A_ji)`.
pub fn underlying_undirected_adjacency(g: &DiGraph) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(g.n, g.n);
    for e in &g.edges {
        let w = a[(e.src, e.dst)].max(e.weight);
        a[(e.src, e.dst)] = w;
        a[(e.dst, e.src)] = w;
    }
    a
}

/// Combinatorial Laplacian `D - A^u` of the underlying undirected graph.
pub fn underlying_undirected_laplacian(g: &DiGraph) -> DenseMatrix {
    let mut l = -underlying_undirected_adjacency(g);
    for i in 0..g.n {
        let deg: f64 = (0..g.n).filter(|&j| j != i).map(|j| -l[(i, j)]).sum();
        l[(i, i)] = deg;
    }
    l
}

/// Stationary distribution of the random walk `P = D_out^{-1} A`.
///
/// Power iteration runs on the lazy chain `(I + P) / 2`, which has the same
/// stationary vector but is aperiodic, so periodic digraphs such as directed
/// cycles converge too. Starts from the uniform vector.
pub fn stationary_distribution(g: &DiGraph) -> Result<Vec<f64>> {
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let n = g.n;
    let dout = g.out_degrees();
    let mut pi = vec![1.0 / n as f64; n];
    let mut step = vec![0.0; n];
    for _ in 0..POWER_ITERATION_CAP {
        // step = P^T pi
        step.iter_mut().for_each(|s| *s = 0.0);
        for e in &g.edges {
            step[e.dst] += pi[e.src] * e.weight / dout[e.src];
        }
        let residual: f64 = step.iter().zip(&pi).map(|(s, p)| (s - p).abs()).sum();
        if residual <= STATIONARY_RESIDUAL {
            return Ok(pi);
        }
        let mut total = 0.0;
        for (p, s) in pi.iter_mut().zip(&step) {
            *p = 0.5 * (*p + s);
            total += *p;
        }
        pi.iter_mut().for_each(|p| *p /= total);
    }
    Err(Error::PowerIterationDiverged(POWER_ITERATION_CAP))
}

/// Chung's directed combinatorial Laplacian `Pi - (Pi P + P^T Pi) / 2`.
pub fn chung_directed_laplacian(g: &DiGraph) -> Result<DenseMatrix> {
    let pi = stationary_distribution(g)?;
    let dout = g.out_degrees();
    let n = g.n;
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = pi[i];
    }
    for e in &g.edges {
        // (Pi P)_ij = pi_i P_ij, symmetrized entry by entry so L is exactly symmetric.
        let half = 0.5 * pi[e.src] * e.weight / dout[e.src];
        l[(e.src, e.dst)] -= half;
        l[(e.dst, e.src)] -= half;
    }
    Ok(l)
}

/// Directs every undirected edge from its lower-coordinate endpoint to its
/// higher-coordinate endpoint. Exact ties point from the lower index to the
/// higher index.
pub fn orient_by_coordinate(
    n: usize,
    undirected_edges: &[(usize, usize, f64)],
    coord: &[f64],
) -> Result<DiGraph> {
    for i in 0..n {
        if coord.get(i).is_none_or(|c| c.is_nan()) {
            return Err(Error::MissingCoordinate(i.to_string()));
        }
    }
    let mut seen = HashSet::new();
    let mut arcs = Vec::with_capacity(undirected_edges.len());
    for &(u, v, w) in undirected_edges {
        for index in [u, v] {
            if index >= n {
                return Err(Error::VertexOutOfRange { index, n });
            }
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::DuplicateEdge { src: u, dst: v });
        }
        let forward = match coord[u].partial_cmp(&coord[v]) {
            Some(std::cmp::Ordering::Less) => true,
            Some(std::cmp::Ordering::Greater) => false,
            _ => u < v,
        };
        arcs.push(if forward { (u, v, w) } else { (v, u, w) });
    }
    DiGraph::new(n, arcs)
}

/// Number of edges whose endpoints share a coordinate exactly.
pub fn coordinate_ties(undirected_edges: &[(usize, usize, f64)], coord: &[f64]) -> usize {
    undirected_edges.iter().filter(|&&(u, v, _)| coord[u] == coord[v]).count()
}
