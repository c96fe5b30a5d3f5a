use dgft::generators::{paw, weakly_connected};
use dgft::graph::underlying_undirected_laplacian;
use dgft::greedy::{build_candidates, exhaustive_select, greedy_select, marginal_gain};
use dgft::spectral::laplacian_basis;
use dgft::stiefel::{cayley_step, cayley_step_low_rank, feasible_basis, orthonormality_error, random_orthonormal};
use dgft::transform::{apply_filter, dgft, idgft};
use dgft::variation::{directed_variation, set_dispersion, total_variation};
use dgft::{DiGraph, FilterSpec, GraphSignal, OptimizerConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph(n: usize, seed: u64) -> DiGraph {
    weakly_connected(n, 0.3, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn signal(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

fn graph_and_signal() -> impl Strategy<Value = (DiGraph, Vec<f64>)> {
    (2usize..12, any::<u64>()).prop_flat_map(|(n, seed)| (Just(graph(n, seed)), signal(n)))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn dv_ignores_constant_shift((g, x) in graph_and_signal(), c in -100.0..100.0f64) {
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let (a, b) = (directed_variation(&g, &x).unwrap(), directed_variation(&g, &shifted).unwrap());
        prop_assert!(close(a, b, 1e-9), "{a} vs {b}");
    }

    #[test]
    fn dv_scales_quadratically_for_positive_factors((g, x) in graph_and_signal(), s in 0.01..100.0f64) {
        let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
        let (a, b) = (directed_variation(&g, &x).unwrap(), directed_variation(&g, &scaled).unwrap());
        prop_assert!(close(s * s * a, b, 1e-12));
    }

    #[test]
    fn dv_equals_tv_on_undirected_graphs((g, x) in graph_and_signal()) {
        let u = g.symmetrized();
        let tv = total_variation(&underlying_undirected_laplacian(&u), &x).unwrap();
        prop_assert!(close(directed_variation(&u, &x).unwrap(), tv, 1e-10));
    }

    #[test]
    fn reversing_arcs_equals_negating_the_signal((g, x) in graph_and_signal()) {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let (a, b) = (directed_variation(&g.reversed(), &x).unwrap(), directed_variation(&g, &neg).unwrap());
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn dv_of_signal_plus_negation_is_squared_variation((g, x) in graph_and_signal()) {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let both = directed_variation(&g, &x).unwrap() + directed_variation(&g, &neg).unwrap();
        let squared: f64 = g.edges().iter().map(|e| e.weight * (x[e.src] - x[e.dst]).powi(2)).sum();
        prop_assert!(close(both, squared, 1e-10));
    }

    #[test]
    fn cayley_steps_stay_orthonormal(n in 2usize..10, seed in any::<u64>(), tau in -50.0..50.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_orthonormal(n, &mut rng);
        let g = random_orthonormal(n, &mut rng) * 3.0;
        let dense = cayley_step(&u, &g, tau).unwrap();
        prop_assert!(orthonormality_error(&dense) < 1e-10);
        if let Ok(low) = cayley_step_low_rank(&u, &g, tau) {
            prop_assert!((low - &dense).norm() < 1e-8);
        }
    }

    #[test]
    fn marginal_gain_is_the_drop_in_dispersion(
        mut s in prop::collection::vec(0.0..5.0f64, 0..10),
        e in 0.0..5.0f64,
    ) {
        s.sort_by(f64::total_cmp);
        let mut with = s.clone();
        with.push(e);
        let drop = set_dispersion(&s, 5.0).unwrap() - set_dispersion(&with, 5.0).unwrap();
        prop_assert!((marginal_gain(&s, e, 5.0) - drop).abs() < 1e-10);
    }

    #[test]
    fn greedy_is_within_half_of_exhaustive(n in 3usize..10, seed in any::<u64>()) {
        let c = build_candidates(&graph(n, seed)).unwrap();
        let greedy = greedy_select(&c);
        let best = exhaustive_select(&c).unwrap();
        prop_assert!(best.delta <= greedy.delta + 1e-12);
        prop_assert!(greedy.delta_tilde >= 0.5 * best.delta_tilde - 1e-12);
    }

    #[test]
    fn transform_round_trip_and_parseval((g, x) in graph_and_signal()) {
        let u = laplacian_basis(&g).unwrap();
        let c = dgft(&u, &GraphSignal::new(x.clone())).unwrap();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(close(c.norm(), norm, 1e-10));
        let back = idgft(&u, &c).unwrap();
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn low_pass_filter_is_idempotent((g, x) in graph_and_signal(), w in 0usize..12) {
        let u = laplacian_basis(&g).unwrap();
        let spec = FilterSpec::Window(w.min(g.n()));
        let once = apply_filter(&u, &spec, &GraphSignal::new(x)).unwrap();
        let twice = apply_filter(&u, &spec, &once).unwrap();
        for (a, b) in once.iter().zip(twice.iter()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

/// On unit-weight graphs the endpoint penalty pins both ends once λ ≥ 1e2.
#[test]
fn penalty_pins_endpoints_on_unit_weight_graphs() {
    let cycle = DiGraph::new(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0))).unwrap();
    let path = DiGraph::new(4, (0..3).map(|i| (i, i + 1, 1.0))).unwrap();
    for g in [paw(), cycle, path] {
        for lambda in [1e2, 1e3] {
            let cfg = OptimizerConfig { restarts: 10, lambda, ..Default::default() };
            let (_, trace) = feasible_basis(&g, &cfg).unwrap();
            let sel = &trace.restarts[trace.selected.unwrap()];
            let last = sel.records.last().unwrap();
            let worst = last.violation_min.unwrap().max(last.violation_max.unwrap());
            assert!(worst <= 1e-2, "λ = {lambda}: violation {worst}");
        }
    }
}
