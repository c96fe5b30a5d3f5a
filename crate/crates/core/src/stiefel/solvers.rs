use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cayley::{cayley_step, cayley_step_low_rank, skew_norm_sq};
use super::search::curvilinear_search;
use super::{orthonormality_error, InitPolicy, OptimizerConfig, OrthonormalBasis};
use crate::error::{Error, Result};
use crate::graph::{check_len, DiGraph};
use crate::spectral::{FmaxKind, FmaxResult};
use crate::text::format_float;
use crate::variation::{dispersion, dv, dv_gradient_into};

/// Endpoint violations at or below this count as satisfied when choosing
/// among restarts.
pub const ENDPOINT_TOL: f64 = 1e-3;

/// Largest `‖YᵀY - I‖_F` accepted for a trial point of the line search.
const TRIAL_ORTHONORMAL_TOL: f64 = 1e-10;

/// Random streams for the two solvers never overlap.
const DISPERSION_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Step norm fell below `eps`.
    Converged,
    MaxIters,
    /// The Riemannian gradient vanished to working precision.
    Stationary,
    /// The search found no Armijo step after progress had been made; the
    /// last accepted iterate is kept.
    LineSearchStalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iteration: usize,
    pub objective: f64,
    pub tau: f64,
    pub step_norm: f64,
    pub wolfe: bool,
    pub violation_min: Option<f64>,
    pub violation_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub initial_objective: f64,
    pub records: Vec<IterRecord>,
    pub final_objective: Option<f64>,
    /// Raw dispersion of the final iterate (dispersion solver only).
    pub final_dispersion: Option<f64>,
    pub termination: Option<Termination>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub restarts: Vec<RestartTrace>,
    pub selected: Option<usize>,
}

impl SolverTrace {
    pub fn failed_restarts(&self) -> usize {
        self.restarts.iter().filter(|r| r.error.is_some()).count()
    }

    /// One row per accepted iteration.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        let mut out = String::from("restart,iteration,objective,tau,step_norm,wolfe,violation_min,violation_max\n");
        for r in &self.restarts {
            for it in &r.records {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.restart,
                    it.iteration,
                    format_float(it.objective),
                    format_float(it.tau),
                    format_float(it.step_norm),
                    it.wolfe,
                    opt(it.violation_min),
                    opt(it.violation_max)
                ));
            }
        }
        out
    }
}

/// One accepted step, as seen by an observer.
#[derive(Debug)]
pub struct StepEvent<'a> {
    pub restart: usize,
    pub iteration: usize,
    pub prev: &'a DMatrix<f64>,
    pub next: &'a DMatrix<f64>,
    pub tau: f64,
    pub phi_prev: f64,
    pub phi_next: f64,
    /// Slope of the objective along the curve at `τ = 0`.
    pub slope0: f64,
}

type Observer<'o> = Option<&'o mut dyn FnMut(&StepEvent)>;

fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniformly distributed point on the unit sphere in `R^n`.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let v = DMatrix::from_fn(n, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Orthogonal factor of a Gaussian matrix, with column signs fixed by the
/// triangular factor so the result is Haar distributed.
pub fn random_orthonormal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random orthonormal completion with fixed first and last columns, which
/// must be orthonormal to each other.
fn completion_with_endpoints<R: Rng + ?Sized>(first: &[f64], last: &[f64], rng: &mut R) -> DMatrix<f64> {
    let n = first.len();
    let mut m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    m.column_mut(0).copy_from_slice(first);
    if n > 1 {
        m.column_mut(1).copy_from_slice(last);
    }
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n.min(2) {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if n > 2 {
        q.swap_columns(1, n - 1);
    }
    q
}

struct Problem<'a> {
    value: &'a (dyn Fn(&DMatrix<f64>) -> f64 + Sync),
    value_grad: &'a (dyn Fn(&DMatrix<f64>) -> (f64, DMatrix<f64>) + Sync),
    violations: Option<&'a (dyn Fn(&DMatrix<f64>) -> (f64, f64) + Sync)>,
    low_rank: bool,
}

struct RunOutcome {
    point: DMatrix<f64>,
    value: f64,
    records: Vec<IterRecord>,
    termination: Termination,
}

fn descend(
    p: &Problem,
    u0: DMatrix<f64>,
    cfg: &OptimizerConfig,
    restart: usize,
    mut observer: Observer,
) -> Result<RunOutcome> {
    let params = cfg.search_params();
    let mut u = u0;
    let (mut phi, mut grad) = (p.value_grad)(&u);
    let mut tau_init = cfg.tau0;
    let mut records = Vec::new();
    let mut termination = Termination::MaxIters;

    for iteration in 1..=cfg.max_iters {
        let skew = skew_norm_sq(&u, &grad);
        if skew.sqrt() <= 1e-14 * grad.norm().max(1.0) {
            termination = Termination::Stationary;
            break;
        }
        let slope0 = -0.5 * skew;
        let curve = |tau: f64| {
            let y = if p.low_rank { cayley_step_low_rank(&u, &grad, tau)? } else { cayley_step(&u, &grad, tau)? };
            // very long steps lose orthonormality to cancellation; treat
            // them like a rejected trial so the search backs off
            if orthonormality_error(&y) > TRIAL_ORTHONORMAL_TOL {
                return Err(Error::SingularSystem);
            }
            let v = (p.value)(&y);
            Ok((y, v))
        };
        let out = match curvilinear_search(curve, phi, slope0, tau_init, params) {
            Ok(out) => out,
            Err(e) if records.is_empty() => return Err(e),
            Err(_) => {
                termination = Termination::LineSearchStalled;
                break;
            }
        };
        if let Some(obs) = observer.as_mut() {
            obs(&StepEvent {
                restart,
                iteration,
                prev: &u,
                next: &out.point,
                tau: out.tau,
                phi_prev: phi,
                phi_next: out.value,
                slope0,
            });
        }
        let step_norm = (&out.point - &u).norm();
        u = out.point;
        (phi, grad) = (p.value_grad)(&u);
        let (vmin, vmax) = match p.violations {
            Some(f) => {
                let (a, b) = f(&u);
                (Some(a), Some(b))
            }
            None => (None, None),
        };
        records.push(IterRecord {
            iteration,
            objective: phi,
            tau: out.tau,
            step_norm,
            wolfe: out.wolfe,
            violation_min: vmin,
            violation_max: vmax,
        });
        tau_init = out.tau;
        if step_norm <= cfg.eps {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(RunOutcome { point: u, value: phi, records, termination })
}

fn trace_entry(restart: usize, initial: f64, run: &Result<RunOutcome>) -> RestartTrace {
    match run {
        Ok(r) => RestartTrace {
            restart,
            initial_objective: initial,
            records: r.records.clone(),
            final_objective: Some(r.value),
            final_dispersion: None,
            termination: Some(r.termination),
            error: None,
        },
        Err(e) => RestartTrace {
            restart,
            initial_objective: initial,
            records: Vec::new(),
            final_objective: None,
            final_dispersion: None,
            termination: None,
            error: Some(e.to_string()),
        },
    }
}

/// Largest directed variation over unit vectors, by feasible ascent from
/// `cfg.restarts` random starts. The best restart wins; ties go to the
/// lowest restart index.
pub fn maximize_dv(g: &DiGraph, cfg: &OptimizerConfig) -> Result<(FmaxResult, SolverTrace)> {
    cfg.validate()?;
    if g.edges().is_empty() {
        return Err(Error::EmptyGraph);
    }
    let n = g.n();
    let value = |u: &DMatrix<f64>| -dv(g, u.as_slice());
    let value_grad = |u: &DMatrix<f64>| {
        let mut grad = DMatrix::zeros(n, 1);
        dv_gradient_into(g, u.as_slice(), grad.as_mut_slice());
        (-dv(g, u.as_slice()), -grad)
    };
    let problem = Problem { value: &value, value_grad: &value_grad, violations: None, low_rank: true };

    let runs: Vec<(f64, Result<RunOutcome>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let u0 = random_unit_vector(n, &mut restart_rng(cfg.seed, r as u64));
            let initial = value(&u0);
            (initial, descend(&problem, u0, cfg, r, None))
        })
        .collect();

    let mut trace = SolverTrace::default();
    let mut best: Option<(usize, f64, &DMatrix<f64>)> = None;
    for (r, (initial, run)) in runs.iter().enumerate() {
        trace.restarts.push(trace_entry(r, *initial, run));
        if let Ok(out) = run {
            let f = -out.value;
            if best.is_none_or(|(_, b, _)| f > b) {
                best = Some((r, f, &out.point));
            }
        }
    }
    let (idx, value, point) = best.ok_or(Error::AllRestartsFailed(cfg.restarts))?;
    trace.selected = Some(idx);
    let result = FmaxResult { value, argvector: Some(point.as_slice().to_vec()), kind: FmaxKind::Numerical };
    Ok((result, trace))
}

/// Penalized dispersion objective
/// `Σ (f_{i+1} - f_i)² + λ/2 (‖u_1 - u_min‖² + ‖u_N - u_max‖²)`.
pub fn dispersion_objective(g: &DiGraph, u: &DMatrix<f64>, u_min: &[f64], u_max: &[f64], lambda: f64) -> Result<f64> {
    check_dispersion_shapes(g, u, u_min, u_max)?;
    Ok(dispersion_value(g, u, u_min, u_max, lambda))
}

/// Objective value together with its Euclidean gradient.
pub fn dispersion_gradient(
    g: &DiGraph,
    u: &DMatrix<f64>,
    u_min: &[f64],
    u_max: &[f64],
    lambda: f64,
) -> Result<(f64, DMatrix<f64>)> {
    check_dispersion_shapes(g, u, u_min, u_max)?;
    Ok(dispersion_value_grad(g, u, u_min, u_max, lambda))
}

fn check_dispersion_shapes(g: &DiGraph, u: &DMatrix<f64>, u_min: &[f64], u_max: &[f64]) -> Result<()> {
    let n = g.n();
    check_len(n, u.nrows())?;
    check_len(n, u.ncols())?;
    check_len(n, u_min.len())?;
    check_len(n, u_max.len())
}

fn column_freqs(g: &DiGraph, u: &DMatrix<f64>) -> Vec<f64> {
    let n = u.nrows();
    u.as_slice().chunks(n).map(|c| dv(g, c)).collect()
}

fn endpoint_gaps(u: &DMatrix<f64>, u_min: &[f64], u_max: &[f64]) -> (f64, f64) {
    let n = u.nrows();
    let gap = |col: &[f64], target: &[f64]| col.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let data = u.as_slice();
    (gap(&data[..n], u_min), gap(&data[(n - 1) * n..], u_max))
}

fn dispersion_value(g: &DiGraph, u: &DMatrix<f64>, u_min: &[f64], u_max: &[f64], lambda: f64) -> f64 {
    let (a, b) = endpoint_gaps(u, u_min, u_max);
    dispersion(&column_freqs(g, u)) + 0.5 * lambda * (a * a + b * b)
}

fn dispersion_value_grad(
    g: &DiGraph,
    u: &DMatrix<f64>,
    u_min: &[f64],
    u_max: &[f64],
    lambda: f64,
) -> (f64, DMatrix<f64>) {
    let n = u.nrows();
    let f = column_freqs(g, u);
    let value = dispersion_value(g, u, u_min, u_max, lambda);
    let mut grad = DMatrix::zeros(n, n);
    let data = u.as_slice();
    let out = grad.as_mut_slice();
    let mut dvg = vec![0.0; n];
    for i in 0..n {
        // ∂δ/∂f_i
        let mut w = 0.0;
        if i > 0 {
            w += 2.0 * (f[i] - f[i - 1]);
        }
        if i + 1 < n {
            w -= 2.0 * (f[i + 1] - f[i]);
        }
        let col = &data[i * n..(i + 1) * n];
        let gcol = &mut out[i * n..(i + 1) * n];
        if w != 0.0 {
            dv_gradient_into(g, col, &mut dvg);
            for (o, d) in gcol.iter_mut().zip(&dvg) {
                *o = w * d;
            }
        }
        if i == 0 {
            for ((o, c), t) in gcol.iter_mut().zip(col).zip(u_min) {
                *o += lambda * (c - t);
            }
        }
        if i == n - 1 {
            for ((o, c), t) in gcol.iter_mut().zip(col).zip(u_max) {
                *o += lambda * (c - t);
            }
        }
    }
    (value, grad)
}

/// Runs the dispersion solver against explicit endpoint targets and returns
/// the selected basis. `u_max` must be a unit vector; the low endpoint is
/// the normalized constant vector.
pub fn minimize_dispersion(g: &DiGraph, u_max: &[f64], cfg: &OptimizerConfig) -> Result<(OrthonormalBasis, SolverTrace)> {
    run_dispersion(g, u_max, cfg, None)
}

/// Sequential variant of [`minimize_dispersion`] that reports every
/// accepted step to `observer`.
pub fn minimize_dispersion_observed(
    g: &DiGraph,
    u_max: &[f64],
    cfg: &OptimizerConfig,
    observer: &mut dyn FnMut(&StepEvent),
) -> Result<(OrthonormalBasis, SolverTrace)> {
    run_dispersion(g, u_max, cfg, Some(observer))
}

/// Numerical `f_max` followed by dispersion minimization: the complete
/// feasible pipeline. The trace is that of the dispersion stage.
pub fn feasible_basis(g: &DiGraph, cfg: &OptimizerConfig) -> Result<(OrthonormalBasis, SolverTrace)> {
    let (fmax, _) = maximize_dv(g, cfg)?;
    let u_max = fmax.argvector.expect("numerical maximizer carries its argument");
    minimize_dispersion(g, &u_max, cfg)
}

fn run_dispersion(
    g: &DiGraph,
    u_max: &[f64],
    cfg: &OptimizerConfig,
    observer: Observer,
) -> Result<(OrthonormalBasis, SolverTrace)> {
    cfg.validate()?;
    g.require_weakly_connected()?;
    let n = g.n();
    check_len(n, u_max.len())?;
    if n < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: n });
    }
    let u_min = vec![1.0 / (n as f64).sqrt(); n];
    let lambda = cfg.lambda;
    let value = |u: &DMatrix<f64>| dispersion_value(g, u, &u_min, u_max, lambda);
    let value_grad = |u: &DMatrix<f64>| dispersion_value_grad(g, u, &u_min, u_max, lambda);
    let violations = |u: &DMatrix<f64>| endpoint_gaps(u, &u_min, u_max);
    let problem = Problem { value: &value, value_grad: &value_grad, violations: Some(&violations), low_rank: false };

    let start = |r: usize| {
        let mut rng = restart_rng(cfg.seed, DISPERSION_STREAM_BASE + r as u64);
        match cfg.init {
            InitPolicy::Random => random_orthonormal(n, &mut rng),
            InitPolicy::SeedEndpoints => completion_with_endpoints(&u_min, u_max, &mut rng),
        }
    };
    let runs: Vec<(f64, Result<RunOutcome>)> = match observer {
        None => (0..cfg.restarts)
            .into_par_iter()
            .map(|r| {
                let u0 = start(r);
                (value(&u0), descend(&problem, u0, cfg, r, None))
            })
            .collect(),
        Some(obs) => (0..cfg.restarts)
            .map(|r| {
                let u0 = start(r);
                (value(&u0), descend(&problem, u0, cfg, r, Some(&mut *obs)))
            })
            .collect(),
    };

    // Prefer the lowest dispersion among restarts that meet both endpoint
    // targets; otherwise fall back to the lowest penalized objective.
    let mut trace = SolverTrace::default();
    let mut best_feasible: Option<(usize, f64)> = None;
    let mut best_any: Option<(usize, f64)> = None;
    for (r, (initial, run)) in runs.iter().enumerate() {
        let mut entry = trace_entry(r, *initial, run);
        if let Ok(out) = run {
            let delta = dispersion(&column_freqs(g, &out.point));
            entry.final_dispersion = Some(delta);
            let (a, b) = endpoint_gaps(&out.point, &u_min, u_max);
            if a <= ENDPOINT_TOL && b <= ENDPOINT_TOL && best_feasible.is_none_or(|(_, d)| delta < d) {
                best_feasible = Some((r, delta));
            }
            if best_any.is_none_or(|(_, v)| out.value < v) {
                best_any = Some((r, out.value));
            }
        }
        trace.restarts.push(entry);
    }
    let (idx, _) = best_feasible.or(best_any).ok_or(Error::AllRestartsFailed(cfg.restarts))?;
    trace.selected = Some(idx);
    let point = runs[idx].1.as_ref().expect("selected run succeeded").point.clone();
    let basis = OrthonormalBasis::new(point, "feasible")?.with_frequencies(g)?;
    Ok((basis, trace))
}
