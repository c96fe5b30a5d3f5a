use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Step used for the central difference that estimates `φ'(τ)`.
pub const SLOPE_FD_STEP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub rho1: f64,
    pub rho2: f64,
    /// Budget of trial steps for the bracketing phase and, separately, for
    /// the increasing fallback ladder.
    pub max_trials: usize,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub tau: f64,
    pub point: DMatrix<f64>,
    pub value: f64,
    /// False when only the Armijo condition could be met.
    pub wolfe: bool,
    pub trials: usize,
}

/// Armijo-Wolfe search along a curve `τ ↦ (Y(τ), φ(Y(τ)))`.
///
/// `phi0` and `slope0` are the value and (negative) slope at `τ = 0`. The
/// search starts at `tau_init`, bisects a bracket when Armijo fails, and
/// doubles while Armijo holds but the curvature condition does not. The
/// curvature condition `φ'(τ) >= rho2 φ'(0)` uses a central difference of
/// the curve. If no trial satisfies both, the largest Armijo step seen is
/// returned with `wolfe = false`. If none satisfies Armijo, an increasing
/// ladder from `tau_init` is tried before giving up.
pub fn curvilinear_search<F>(
    mut curve: F,
    phi0: f64,
    slope0: f64,
    tau_init: f64,
    params: SearchParams,
) -> Result<SearchOutcome>
where
    F: FnMut(f64) -> Result<(DMatrix<f64>, f64)>,
{
    if !(slope0 < 0.0) || !phi0.is_finite() {
        return Err(Error::LineSearchFailed);
    }
    let armijo = |tau: f64, phi: f64| phi <= phi0 + params.rho1 * tau * slope0;
    let mut trials = 0;
    let mut lo = 0.0;
    let mut hi = f64::INFINITY;
    let mut tau = tau_init;
    let mut best: Option<SearchOutcome> = None;

    while trials < params.max_trials {
        trials += 1;
        let Ok((point, value)) = curve(tau) else {
            hi = tau;
            tau = 0.5 * (lo + hi);
            continue;
        };
        if !value.is_finite() || !armijo(tau, value) {
            hi = tau;
        } else {
            let h = SLOPE_FD_STEP * tau.max(1.0);
            let slope = match (curve(tau + h), curve(tau - h)) {
                (Ok((_, a)), Ok((_, b))) => (a - b) / (2.0 * h),
                _ => f64::NAN,
            };
            let outcome = SearchOutcome { tau, point, value, wolfe: false, trials };
            if slope >= params.rho2 * slope0 {
                return Ok(SearchOutcome { wolfe: true, ..outcome });
            }
            lo = tau;
            best = Some(outcome);
        }
        tau = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * tau };
        if hi.is_finite() && hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    if let Some(b) = best {
        return Ok(SearchOutcome { trials, ..b });
    }

    let mut tau = tau_init;
    for _ in 0..params.max_trials {
        tau *= 2.0;
        trials += 1;
        if let Ok((point, value)) = curve(tau) {
            if value.is_finite() && armijo(tau, value) {
                return Ok(SearchOutcome { tau, point, value, wolfe: false, trials });
            }
        }
    }
    Err(Error::LineSearchFailed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SearchParams {
        SearchParams { rho1: 1e-4, rho2: 0.9, max_trials: 40 }
    }

    fn scalar(tau: f64, f: impl Fn(f64) -> f64) -> Result<(DMatrix<f64>, f64)> {
        Ok((DMatrix::from_element(1, 1, tau), f(tau)))
    }

    #[test]
    fn quadratic_satisfies_both_conditions() {
        // φ(τ) = (τ - 1)², φ(0) = 1, φ'(0) = -2
        let f = |t: f64| (t - 1.0) * (t - 1.0);
        for &start in &[1e-3, 0.5, 1.0, 5.0, 100.0] {
            let out = curvilinear_search(|t| scalar(t, f), 1.0, -2.0, start, params()).unwrap();
            assert!(out.wolfe, "start={start}");
            assert!(out.value <= 1.0 + 1e-4 * out.tau * -2.0);
            let slope = 2.0 * (out.tau - 1.0);
            assert!(slope >= 0.9 * -2.0 - 1e-6);
        }
    }

    #[test]
    fn rejects_ascent_direction() {
        let r = curvilinear_search(|t| scalar(t, |t| t), 0.0, 1.0, 0.1, params());
        assert_eq!(r.unwrap_err(), Error::LineSearchFailed);
    }

    #[test]
    fn fails_when_nothing_decreases() {
        // claims a descent slope but the function only increases
        let r = curvilinear_search(|t| scalar(t, |t| t * t + 1e-3), 0.0, -1.0, 0.1, params());
        assert_eq!(r.unwrap_err(), Error::LineSearchFailed);
    }

    #[test]
    fn increasing_ladder_recovers() {
        // decrease only for τ > 1 (no Armijo step below)
        let f = |t: f64| if t > 1.0 { -t } else { 1.0 };
        let p = SearchParams { max_trials: 8, ..params() };
        let out = curvilinear_search(|t| scalar(t, f), 0.0, -1.0, 0.01, p).unwrap();
        assert!(out.tau > 1.0 && !out.wolfe);
    }
}
