//! Symmetric eigendecomposition and maximum-frequency results.
//!
//! The largest directed variation a unit-norm signal can reach, `f_max`, has
//! closed forms for three digraph families:
//!
//! * dipaths and directed cycles: twice the heaviest arc weight, reached by
//!   `±1/√2` on the endpoints of that arc;
//! * unidirectional bipartite graphs (every arc leaves a source-only vertex and
//!   enters a sink-only vertex): the spectral radius of the underlying
//!   undirected Laplacian.
//!
//! For any digraph that spectral radius is an upper bound, and the best signed
//! Laplacian eigenvector reaches at least half of `f_max`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    chung_directed_laplacian, max_asymmetry, underlying_undirected_laplacian, DenseMatrix, DiGraph, SYMMETRY_TOL,
};
use crate::stiefel::OrthonormalBasis;
use crate::variation::dv;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_SWEEPS: usize = 10_000;
const SIGN_TOL: f64 = 1e-9;

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
///
/// Each eigenvector is signed so its first entry with magnitude above `1e-9`
/// is positive.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
    pub source_dim: usize,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Backed by nalgebra's tridiagonalization + implicit QR; this wrapper pins
/// ordering, sign and error reporting.
pub fn symmetric_eigen(m: &DenseMatrix) -> Result<EigenDecomposition> {
    let asym = max_asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_SWEEPS).ok_or(Error::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).into_owned();
        if let Some(first) = col.iter().find(|v| v.abs() > SIGN_TOL) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        vectors.set_column(k, &col);
    }
    Ok(EigenDecomposition { eigenvalues: values, eigenvectors: vectors, source_dim: n })
}

/// Eigendecomposition of the underlying undirected Laplacian of `g`.
pub fn laplacian_eigen(g: &DiGraph) -> Result<EigenDecomposition> {
    symmetric_eigen(&underlying_undirected_laplacian(g))
}

/// Eigenbasis of the underlying undirected Laplacian, with cached directed
/// variations.
pub fn laplacian_basis(g: &DiGraph) -> Result<OrthonormalBasis> {
    OrthonormalBasis::new(laplacian_eigen(g)?.eigenvectors, "laplacian")?.with_frequencies(g)
}

/// Eigenbasis of the Chung directed Laplacian. Requires strong
/// connectivity.
pub fn chung_basis(g: &DiGraph) -> Result<OrthonormalBasis> {
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let eig = symmetric_eigen(&chung_directed_laplacian(g)?)?;
    OrthonormalBasis::new(eig.eigenvectors, "chung")?.with_frequencies(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FmaxKind {
    Analytic,
    Approximation,
    UpperBound,
    Numerical,
}

impl FmaxKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FmaxKind::Analytic => "analytic",
            FmaxKind::Approximation => "approximation",
            FmaxKind::UpperBound => "upper_bound",
            FmaxKind::Numerical => "numerical",
        }
    }
}

/// A maximum-frequency value, with the unit-norm signal reaching it when known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmaxResult {
    pub value: f64,
    pub argvector: Option<Vec<f64>>,
    pub kind: FmaxKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Dipath,
    DirectedCycle,
    UnidirectionalBipartite,
}

/// Structural family detection. Returns `None` for anything not clearly one
/// of the closed-form families.
pub fn detect_family(g: &DiGraph) -> Option<Family> {
    let n = g.n();
    if n < 2 || !g.is_weakly_connected() {
        return None;
    }
    let mut indeg = vec![0usize; n];
    let mut outdeg = vec![0usize; n];
    for e in g.edges() {
        outdeg[e.src] += 1;
        indeg[e.dst] += 1;
    }
    let m = g.edges().len();
    let at_most_one = (0..n).all(|v| indeg[v] <= 1 && outdeg[v] <= 1);
    if m == n - 1 && at_most_one {
        return Some(Family::Dipath);
    }
    if m == n && (0..n).all(|v| indeg[v] == 1 && outdeg[v] == 1) {
        return Some(Family::DirectedCycle);
    }
    if (0..n).all(|v| indeg[v] == 0 || outdeg[v] == 0) {
        return Some(Family::UnidirectionalBipartite);
    }
    None
}

/// Closed-form `f_max` for dipaths, directed cycles and unidirectional
/// bipartite graphs.
pub fn fmax_analytic(g: &DiGraph) -> Result<FmaxResult> {
    match detect_family(g).ok_or(Error::UnrecognizedFamily)? {
        Family::Dipath | Family::DirectedCycle => {
            // heaviest arc; ties go to the lowest source index
            let heaviest = g
                .edges()
                .iter()
                .min_by(|a, b| b.weight.total_cmp(&a.weight).then(a.src.cmp(&b.src)))
                .expect("connected graph with n >= 2 has arcs");
            let mut witness = vec![0.0; g.n()];
            witness[heaviest.src] = FRAC_1_SQRT_2;
            witness[heaviest.dst] = -FRAC_1_SQRT_2;
            Ok(FmaxResult { value: 2.0 * heaviest.weight, argvector: Some(witness), kind: FmaxKind::Analytic })
        }
        Family::UnidirectionalBipartite => {
            let eig = laplacian_eigen(g)?;
            let mut witness = eig.eigenvector(g.n() - 1);
            // sources carry the non-negative half
            let src = g.edges()[0].src;
            if witness[src] < 0.0 {
                witness.iter_mut().for_each(|v| *v = -*v);
            }
            Ok(FmaxResult { value: eig.lambda_max(), argvector: Some(witness), kind: FmaxKind::Analytic })
        }
    }
}

/// Spectral radius of the underlying undirected Laplacian.
pub fn fmax_upper_bound(g: &DiGraph) -> Result<FmaxResult> {
    let eig = laplacian_eigen(g)?;
    Ok(FmaxResult { value: eig.lambda_max(), argvector: None, kind: FmaxKind::UpperBound })
}

/// Best directed variation over every Laplacian eigenvector and its negation.
pub fn fmax_half_approximation(g: &DiGraph) -> Result<FmaxResult> {
    let eig = laplacian_eigen(g)?;
    let (value, witness) = best_signed_eigenvector(g, &eig, 0..g.n());
    Ok(FmaxResult { value, argvector: Some(witness), kind: FmaxKind::Approximation })
}

/// Scans `indices` of `eig` in order, `+u` before `-u`, and keeps the first
/// maximizer of DV.
pub(crate) fn best_signed_eigenvector(
    g: &DiGraph,
    eig: &EigenDecomposition,
    indices: impl Iterator<Item = usize>,
) -> (f64, Vec<f64>) {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for k in indices {
        let mut u = eig.eigenvector(k);
        for _ in 0..2 {
            let v = dv(g, &u);
            if v > best.0 {
                best = (v, u.clone());
            }
            u.iter_mut().for_each(|x| *x = -*x);
        }
    }
    best
}

/// Signed eigen-index form of [`best_signed_eigenvector`].
pub(crate) fn best_signed_index(g: &DiGraph, eig: &EigenDecomposition, indices: impl Iterator<Item = usize>) -> (usize, f64, f64) {
    let mut best = (0, 1.0, f64::NEG_INFINITY);
    for k in indices {
        let u = eig.eigenvector(k);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        for (sign, v) in [(1.0, dv(g, &u)), (-1.0, dv(g, &neg))] {
            if v > best.2 {
                best = (k, sign, v);
            }
        }
    }
    best
}
