//! Greedy basis selection over signed Laplacian eigenvectors.
//!
//! Flipping the sign of an eigenvector of the underlying undirected
//! Laplacian keeps the basis orthonormal but changes its directed
//! variation, so every interior eigenvector offers a pair of candidate
//! frequencies `{f_i, f̄_i}`. Picking one per pair is a basis of a partition
//! matroid. The set dispersion `δ(S)` (with `0` and `f̃_max` as fixed
//! endpoints) is supermodular, so `δ̃(S) = f̃_max² - δ(S)` is submodular and
//! non-negative, and the greedy pick is within a factor two of the best
//! `δ̃`.
//!
//! Eigen-indices are zero-based positions in ascending eigenvalue order;
//! index `0` is the constant vector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DiGraph;
use crate::spectral::{best_signed_index, laplacian_eigen, EigenDecomposition};
use crate::stiefel::OrthonormalBasis;
use crate::variation::{dv, padded_dispersion};

/// Largest number of pairs [`exhaustive_select`] will enumerate.
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 22;

/// Relative threshold under which the second Laplacian eigenvalue counts as
/// zero.
const ZERO_EIGEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateFrequency {
    pub eig_index: usize,
    /// `+1` or `-1`.
    pub sign: i8,
    /// Directed variation of `sign × eigenvector`.
    pub value: f64,
}

/// Both signed frequencies of one eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidatePair {
    pub eig_index: usize,
    pub plus: f64,
    pub minus: f64,
}

impl CandidatePair {
    pub fn get(&self, sign: i8) -> CandidateFrequency {
        let value = if sign > 0 { self.plus } else { self.minus };
        CandidateFrequency { eig_index: self.eig_index, sign, value }
    }
}

/// Output of [`build_candidates`].
#[derive(Debug, Clone)]
pub struct Candidates {
    /// One pair per interior eigenvector, in index order.
    pub pairs: Vec<CandidatePair>,
    pub f_tilde_max: f64,
    pub endpoint: CandidateFrequency,
    pub endpoint_vector: Vec<f64>,
    pub u_min: Vec<f64>,
    pub eigen: EigenDecomposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedySelection {
    /// One element per pair, in index order.
    pub chosen: Vec<CandidateFrequency>,
    pub f_tilde_max: f64,
    pub endpoint: CandidateFrequency,
    pub endpoint_vector: Vec<f64>,
    /// Set dispersion of the chosen values over `[0, f_tilde_max]`.
    pub delta: f64,
    pub delta_tilde: f64,
}

/// Eigendecomposes the underlying Laplacian, takes the signed eigenvector
/// of largest DV as the high endpoint and turns every other non-constant
/// eigenvector into a candidate pair.
pub fn build_candidates(g: &DiGraph) -> Result<Candidates> {
    let n = g.n();
    if n < 2 {
        return Err(Error::EmptyGraph);
    }
    if !g.is_weakly_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let eigen = laplacian_eigen(g)?;
    if eigen.eigenvalues[1] <= ZERO_EIGEN_TOL * eigen.lambda_max().max(1.0) {
        return Err(Error::DisconnectedGraph);
    }
    let (k, sign, f_tilde_max) = best_signed_index(g, &eigen, 1..n);
    let endpoint = CandidateFrequency { eig_index: k, sign: if sign > 0.0 { 1 } else { -1 }, value: f_tilde_max };
    let endpoint_vector: Vec<f64> = eigen.eigenvector(k).iter().map(|v| sign * v).collect();
    let pairs = (1..n)
        .filter(|&i| i != k)
        .map(|i| {
            let mut u = eigen.eigenvector(i);
            let plus = dv(g, &u);
            u.iter_mut().for_each(|v| *v = -*v);
            CandidatePair { eig_index: i, plus, minus: dv(g, &u) }
        })
        .collect();
    let u_min = eigen.eigenvector(0);
    Ok(Candidates { pairs, f_tilde_max, endpoint, endpoint_vector, u_min, eigen })
}

/// Increase of `δ̃` when `e` is inserted into the sorted set `s`: with `l`
/// and `r` the neighbours of `e` (padding `0` and `f_ceiling`),
/// `(r - l)² - (e - l)² - (r - e)² = 2 (r - e)(e - l)`.
pub fn marginal_gain(sorted: &[f64], e: f64, f_ceiling: f64) -> f64 {
    let pos = sorted.partition_point(|&v| v < e);
    let l = if pos == 0 { 0.0 } else { sorted[pos - 1] };
    let r = if pos == sorted.len() { f_ceiling } else { sorted[pos] };
    2.0 * (r - e) * (e - l)
}

fn selection(c: &Candidates, mut chosen: Vec<CandidateFrequency>) -> GreedySelection {
    chosen.sort_by_key(|x| x.eig_index);
    let mut values: Vec<f64> = chosen.iter().map(|x| x.value).collect();
    values.sort_by(f64::total_cmp);
    let delta = padded_dispersion(&values, c.f_tilde_max);
    GreedySelection {
        chosen,
        f_tilde_max: c.f_tilde_max,
        endpoint: c.endpoint,
        endpoint_vector: c.endpoint_vector.clone(),
        delta,
        delta_tilde: c.f_tilde_max * c.f_tilde_max - delta,
    }
}

/// Repeatedly adds the candidate with the largest marginal gain in `δ̃` and
/// retires its pair. Ties go to the lower eigen-index, then `+` before `-`.
pub fn greedy_select(c: &Candidates) -> GreedySelection {
    let f = c.f_tilde_max;
    let mut open: Vec<bool> = vec![true; c.pairs.len()];
    let mut sorted: Vec<f64> = Vec::with_capacity(c.pairs.len());
    let mut chosen = Vec::with_capacity(c.pairs.len());
    for _ in 0..c.pairs.len() {
        let mut best: Option<(usize, i8, f64)> = None;
        for (p, pair) in c.pairs.iter().enumerate() {
            if !open[p] {
                continue;
            }
            for sign in [1i8, -1] {
                let gain = marginal_gain(&sorted, pair.get(sign).value, f);
                if best.is_none_or(|(_, _, b)| gain > b) {
                    best = Some((p, sign, gain));
                }
            }
        }
        let (p, sign, _) = best.expect("an open pair remains");
        open[p] = false;
        let cand = c.pairs[p].get(sign);
        let pos = sorted.partition_point(|&v| v < cand.value);
        sorted.insert(pos, cand.value);
        chosen.push(cand);
    }
    selection(c, chosen)
}

/// Minimum of `δ` over every sign choice. Ties go to the lexicographically
/// smallest sign vector with `+` before `-`.
pub fn exhaustive_select(c: &Candidates) -> Result<GreedySelection> {
    let m = c.pairs.len();
    if m > EXHAUSTIVE_PAIR_LIMIT {
        return Err(Error::TooManyPairs { pairs: m, limit: EXHAUSTIVE_PAIR_LIMIT });
    }
    // bit (m - 1 - p) of a mask set means pair p takes its minus sign, so
    // numeric mask order is lexicographic sign order
    let sign_of = |mask: u32, p: usize| if mask >> (m - 1 - p) & 1 == 1 { -1i8 } else { 1 };
    let eval = |mask: u32, buf: &mut Vec<f64>| {
        buf.clear();
        buf.extend(c.pairs.iter().enumerate().map(|(p, pair)| pair.get(sign_of(mask, p)).value));
        buf.sort_by(f64::total_cmp);
        padded_dispersion(buf, c.f_tilde_max)
    };
    let better = |a: (f64, u32), b: (f64, u32)| if a.0 < b.0 || (a.0 == b.0 && a.1 < b.1) { a } else { b };
    let total: u32 = 1 << m;
    let chunk = 1u32 << 12;
    let (_, mask) = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|ci| {
            let mut buf = Vec::with_capacity(m);
            let lo = ci * chunk;
            let hi = (lo + chunk).min(total);
            (lo..hi).map(|mask| (eval(mask, &mut buf), mask)).fold((f64::INFINITY, u32::MAX), better)
        })
        .reduce(|| (f64::INFINITY, u32::MAX), better);
    let chosen = c.pairs.iter().enumerate().map(|(p, pair)| pair.get(sign_of(mask, p))).collect();
    Ok(selection(c, chosen))
}

/// Orthonormal basis `[u_min, interior columns by ascending chosen
/// frequency, endpoint]` from signed eigenvectors.
pub fn assemble_basis(sel: &GreedySelection, eig: &EigenDecomposition) -> Result<OrthonormalBasis> {
    let n = eig.eigenvectors.ncols();
    let bad = |m: String| Err(Error::InconsistentSelection(m));
    if sel.chosen.len() + 2 != n {
        return bad(format!("{} choices for {} eigenvectors", sel.chosen.len(), n));
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    for idx in sel.chosen.iter().map(|c| c.eig_index).chain([sel.endpoint.eig_index]) {
        if idx == 0 || idx >= n || seen[idx] {
            return bad(format!("eigen-index {idx} invalid or repeated"));
        }
        seen[idx] = true;
    }
    if sel.chosen.iter().chain([&sel.endpoint]).any(|c| c.sign != 1 && c.sign != -1) {
        return bad("sign must be +1 or -1".into());
    }
    let ep = eig.eigenvectors.column(sel.endpoint.eig_index);
    let sign = f64::from(sel.endpoint.sign);
    if sel.endpoint_vector.len() != n || ep.iter().zip(&sel.endpoint_vector).any(|(a, b)| (sign * a - b).abs() > 1e-12) {
        return bad("endpoint vector does not match its eigenvector".into());
    }

    let mut interior = sel.chosen.clone();
    interior.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.eig_index.cmp(&b.eig_index)));
    let order = std::iter::once((0, 1i8)).chain(interior.iter().map(|c| (c.eig_index, c.sign))).chain([(sel.endpoint.eig_index, sel.endpoint.sign)]);
    let mut columns = eig.eigenvectors.clone();
    for (j, (k, s)) in order.enumerate() {
        columns.set_column(j, &(eig.eigenvectors.column(k) * f64::from(s)));
    }
    OrthonormalBasis::new(columns, "greedy")
}

/// Candidates, selection (greedy, or exhaustive when `exact`) and assembled
/// basis with cached frequencies.
pub fn greedy_basis(g: &DiGraph, exact: bool) -> Result<(OrthonormalBasis, GreedySelection)> {
    let c = build_candidates(g)?;
    let sel = if exact { exhaustive_select(&c)? } else { greedy_select(&c) };
    let basis = assemble_basis(&sel, &c.eigen)?.with_frequencies(g)?;
    Ok((basis, sel))
}
