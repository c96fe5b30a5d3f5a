//! Feasible descent on the Stiefel manifold.
//!
//! Iterates move along the Cayley curve
//!
//! ```text
//! U(τ) = (I + τ/2 B)^{-1} (I - τ/2 B) U,    B = G Uᵀ - U Gᵀ
//! ```
//!
//! which keeps `UᵀU = I` for every `τ`, and `τ` is picked by an Armijo-Wolfe
//! curvilinear search. The slope of the objective along the curve at `τ = 0`
//! is `-½‖B‖²_F`. Two solvers are built on top: directed-variation
//! maximization over the unit sphere, and spectral-dispersion minimization
//! over square orthonormal matrices with penalized endpoint columns.

mod cayley;
mod search;
mod solvers;

pub use cayley::{cayley_step, cayley_step_low_rank, skew_norm_sq};
pub use search::{curvilinear_search, SearchOutcome, SearchParams};
pub use solvers::{
    dispersion_gradient, dispersion_objective, feasible_basis, maximize_dv, minimize_dispersion,
    minimize_dispersion_observed, random_orthonormal, random_unit_vector, IterRecord, RestartTrace,
    SolverTrace, StepEvent, Termination,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_len, DiGraph};
use crate::variation::{column_frequencies, FrequencyProfile};

/// Tolerance on `‖UᵀU - I‖_F` for a matrix to count as orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// How the dispersion solver initializes each restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    /// Orthonormal factor of a seeded Gaussian matrix.
    #[default]
    Random,
    /// First and last columns set to the endpoint targets, the rest a random
    /// orthonormal completion.
    SeedEndpoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Endpoint penalty weight.
    pub lambda: f64,
    /// Stop once `‖U_k - U_{k-1}‖_F <= eps`.
    pub eps: f64,
    /// Armijo constant.
    pub rho1: f64,
    /// Wolfe curvature constant.
    pub rho2: f64,
    /// First trial step; later iterations start from the last accepted step.
    pub tau0: f64,
    pub max_iters: usize,
    /// Trial budget of one curvilinear search.
    pub max_halvings: usize,
    pub restarts: usize,
    pub seed: u64,
    #[serde(default)]
    pub init: InitPolicy,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            lambda: 1e3,
            eps: 1e-6,
            rho1: 1e-4,
            rho2: 0.9,
            tau0: 1e-2,
            max_iters: 5000,
            max_halvings: 30,
            restarts: 100,
            seed: 0,
            init: InitPolicy::Random,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(0.0 < self.rho1 && self.rho1 < self.rho2 && self.rho2 < 1.0) {
            return bad("need 0 < rho1 < rho2 < 1");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(self.lambda >= 0.0) {
            return bad("lambda must be non-negative");
        }
        if !(self.tau0 > 0.0) || !self.tau0.is_finite() {
            return bad("tau0 must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn search_params(&self) -> SearchParams {
        SearchParams { rho1: self.rho1, rho2: self.rho2, max_trials: self.max_halvings }
    }
}

/// `‖UᵀU - I‖_F`.
pub fn orthonormality_error(u: &DMatrix<f64>) -> f64 {
    let p = u.ncols();
    (u.transpose() * u - DMatrix::identity(p, p)).norm()
}

/// Square matrix with orthonormal columns, tagged with the method that
/// produced it and optionally carrying per-column frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    columns: DMatrix<f64>,
    method_tag: String,
    freqs: Option<Vec<f64>>,
}

impl OrthonormalBasis {
    pub fn new(columns: DMatrix<f64>, method_tag: impl Into<String>) -> Result<Self> {
        check_len(columns.nrows(), columns.ncols())?;
        let err = orthonormality_error(&columns);
        if !(err <= ORTHONORMAL_TOL) {
            return Err(Error::NotOrthonormal(err));
        }
        Ok(Self { columns, method_tag: method_tag.into(), freqs: None })
    }

    /// Caches the directed variation of every column on `g`.
    pub fn with_frequencies(mut self, g: &DiGraph) -> Result<Self> {
        self.freqs = Some(column_frequencies(g, &self.columns)?);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.columns.column(k).iter().copied().collect()
    }

    pub fn method_tag(&self) -> &str {
        &self.method_tag
    }

    pub fn freqs(&self) -> Option<&[f64]> {
        self.freqs.as_deref()
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.columns)
    }

    pub fn profile(&self, g: &DiGraph) -> Result<FrequencyProfile> {
        let freqs = match &self.freqs {
            Some(f) => f.clone(),
            None => column_frequencies(g, &self.columns)?,
        };
        Ok(FrequencyProfile::from_freqs(freqs))
    }

    /// Copy with columns reordered by ascending cached frequency (stable, so
    /// ties keep column order). Without cached frequencies the order is kept.
    pub fn sorted_by_frequency(&self) -> OrthonormalBasis {
        let Some(freqs) = &self.freqs else {
            return self.clone();
        };
        let mut order: Vec<usize> = (0..freqs.len()).collect();
        order.sort_by(|&a, &b| freqs[a].total_cmp(&freqs[b]));
        let columns = DMatrix::from_fn(self.n(), self.n(), |i, j| self.columns[(i, order[j])]);
        OrthonormalBasis {
            columns,
            method_tag: self.method_tag.clone(),
            freqs: Some(order.iter().map(|&k| freqs[k]).collect()),
        }
    }

    pub fn into_columns(self) -> DMatrix<f64> {
        self.columns
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let mut c = OptimizerConfig::default();
        c.rho1 = 0.95;
        assert!(c.validate().is_err());
        let mut c = OptimizerConfig::default();
        c.eps = 0.0;
        assert!(c.validate().is_err());
        let mut c = OptimizerConfig::default();
        c.lambda = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn basis_rejects_non_orthonormal() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(OrthonormalBasis::new(m, "x"), Err(Error::NotOrthonormal(_))));
        assert!(OrthonormalBasis::new(DMatrix::zeros(2, 3), "x").is_err());
    }

    #[test]
    fn sorting_by_frequency() {
        let g = DiGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // columns: (1,-1)/√2 has DV 2, (1,1)/√2 has DV 0
        let m = DMatrix::from_row_slice(2, 2, &[s, s, -s, s]);
        let b = OrthonormalBasis::new(m, "t").unwrap().with_frequencies(&g).unwrap();
        let sorted = b.sorted_by_frequency();
        let f = sorted.freqs().unwrap();
        assert!(f[0].abs() < 1e-15 && (f[1] - 2.0).abs() < 1e-12);
        assert_eq!(sorted.column(0), b.column(1));
    }
}
