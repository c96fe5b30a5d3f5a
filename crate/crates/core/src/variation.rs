//! Variation measures on digraphs and the dispersion objectives built on them.
//!
//! The directed variation of a signal `x` is
//!
//! ```text
//! DV(x) = sum_ij A_ij * max(0, x_i - x_j)^2
//! ```
//!
//! An arc `i -> j` only contributes when the signal decreases along it. On a
//! graph with arcs in both directions of every edge, DV equals the quadratic
//! form `x^T L x` of the undirected Laplacian.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_len, DenseMatrix, DiGraph};

pub fn directed_variation(g: &DiGraph, x: &[f64]) -> Result<f64> {
    check_len(g.n(), x.len())?;
    Ok(dv(g, x))
}

/// Directed variation without the length check.
#[inline]
pub(crate) fn dv(g: &DiGraph, x: &[f64]) -> f64 {
    g.edges()
        .iter()
        .map(|e| {
            let d = x[e.src] - x[e.dst];
            if d > 0.0 {
                e.weight * d * d
            } else {
                0.0
            }
        })
        .sum()
}

/// `x^T L x` for a symmetric Laplacian `L`.
pub fn total_variation(l: &DenseMatrix, x: &[f64]) -> Result<f64> {
    check_len(l.nrows(), x.len())?;
    check_len(l.ncols(), x.len())?;
    let mut acc = 0.0;
    for i in 0..x.len() {
        let mut row = 0.0;
        for j in 0..x.len() {
            row += l[(i, j)] * x[j];
        }
        acc += x[i] * row;
    }
    Ok(acc)
}

/// Lovász-extension variation `sum_ij A_ij * max(0, x_i - x_j)`.
///
/// Kept as a diagnostic: unlike DV it is not smooth, and orthonormal bases can
/// drive it to zero on every column.
pub fn lovasz_variation(g: &DiGraph, x: &[f64]) -> Result<f64> {
    check_len(g.n(), x.len())?;
    Ok(g.edges().iter().map(|e| e.weight * (x[e.src] - x[e.dst]).max(0.0)).sum())
}

/// Gradient of [`directed_variation`] with respect to `x`.
///
/// Entry `i` is `2 (A_i. [x_i 1 - x]_+ - A_.i^T [x - x_i 1]_+)`: outgoing arcs
/// along which the signal drops push `x_i` up, incoming ones push it down.
pub fn dv_gradient(g: &DiGraph, x: &[f64]) -> Result<Vec<f64>> {
    check_len(g.n(), x.len())?;
    let mut grad = vec![0.0; x.len()];
    dv_gradient_into(g, x, &mut grad);
    Ok(grad)
}

pub(crate) fn dv_gradient_into(g: &DiGraph, x: &[f64], grad: &mut [f64]) {
    grad.iter_mut().for_each(|v| *v = 0.0);
    for e in g.edges() {
        let d = x[e.src] - x[e.dst];
        if d > 0.0 {
            let s = 2.0 * e.weight * d;
            grad[e.src] += s;
            grad[e.dst] -= s;
        }
    }
}

/// Frequencies of a set of basis columns together with their spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyProfile {
    /// Directed variation of each column, in column order.
    pub freqs: Vec<f64>,
    /// Top of the spectral range (the largest frequency).
    pub f_ceiling: f64,
    /// Sum of squared gaps between consecutive columns, in column order.
    pub dispersion_raw: f64,
    /// Sum of squared gaps after sorting and dividing by the largest frequency.
    pub dispersion_rescaled: f64,
}

impl FrequencyProfile {
    pub fn from_freqs(freqs: Vec<f64>) -> Self {
        let f_ceiling = freqs.iter().copied().fold(0.0, f64::max);
        Self {
            dispersion_raw: dispersion(&freqs),
            dispersion_rescaled: rescaled_dispersion(&freqs),
            f_ceiling,
            freqs,
        }
    }

    /// Frequencies sorted ascending and divided by the largest one.
    pub fn rescaled_sorted(&self) -> Vec<f64> {
        let mut s = self.freqs.clone();
        s.sort_by(f64::total_cmp);
        if self.f_ceiling > 0.0 {
            s.iter_mut().for_each(|f| *f /= self.f_ceiling);
        }
        s
    }
}

/// Sum of squared consecutive differences, in the order given.
pub fn dispersion(freqs: &[f64]) -> f64 {
    freqs.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
}

/// [`dispersion`] of the sorted frequencies mapped onto `[0, 1]` by dividing
/// by the maximum. Zero when every frequency is zero.
pub fn rescaled_dispersion(freqs: &[f64]) -> f64 {
    let max = freqs.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0.0;
    }
    let mut s: Vec<f64> = freqs.iter().map(|f| f / max).collect();
    s.sort_by(f64::total_cmp);
    dispersion(&s)
}

/// Directed variation of every column of `u`.
pub fn column_frequencies(g: &DiGraph, u: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_len(g.n(), u.nrows())?;
    Ok(u.column_iter().map(|c| dv(g, c.as_slice())).collect())
}

pub fn spectral_dispersion(g: &DiGraph, u: &DMatrix<f64>) -> Result<FrequencyProfile> {
    check_len(g.n(), u.ncols())?;
    Ok(FrequencyProfile::from_freqs(column_frequencies(g, u)?))
}

/// Dispersion of a frequency set over `[0, f_ceiling]`: with the elements
/// sorted and padded by `0` and `f_ceiling`, the sum of squared gaps.
pub fn set_dispersion(s: &[f64], f_ceiling: f64) -> Result<f64> {
    for &v in s {
        if !(0.0..=f_ceiling).contains(&v) {
            return Err(Error::ElementOutOfRange { value: v, ceiling: f_ceiling });
        }
    }
    let mut sorted = s.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(padded_dispersion(&sorted, f_ceiling))
}

/// Set dispersion of an already sorted, in-range slice.
pub(crate) fn padded_dispersion(sorted: &[f64], f_ceiling: f64) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for &v in sorted {
        acc += (v - prev) * (v - prev);
        prev = v;
    }
    acc + (f_ceiling - prev) * (f_ceiling - prev)
}

/// `mod 2π` into `[0, 2π)`; exact multiples of 2π map to 0.
fn mod_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Weighted mean of phase drops along arcs, for complex signals.
///
/// With `ω_j` the phase of `x_j` in `[0, 2π)`, returns
/// `(sum A_jk)^{-1} sum A_jk mod_2π(ω_j - ω_k)`. On the unweighted directed
/// `N`-cycle the `r`-th DFT vector evaluates to `2πr/N`.
pub fn dv_dft(g: &DiGraph, x: &[Complex64]) -> Result<f64> {
    check_len(g.n(), x.len())?;
    if g.edges().is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut phase = Vec::with_capacity(x.len());
    for (i, z) in x.iter().enumerate() {
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::ZeroEntryPhaseUndefined(i));
        }
        phase.push(mod_tau(z.arg()));
    }
    let total: f64 = g.edges().iter().map(|e| e.weight).sum();
    let acc: f64 = g
        .edges()
        .iter()
        .map(|e| e.weight * mod_tau(phase[e.src] - phase[e.dst]))
        .sum();
    Ok(acc / total)
}
