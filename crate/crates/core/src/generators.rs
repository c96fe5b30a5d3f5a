//! Seeded random graph families used by tests, benchmarks and examples.
//!
//! Weights are drawn uniformly from [`WEIGHT_RANGE`] unless noted.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{orient_by_coordinate, DiGraph};

pub const WEIGHT_RANGE: (f64, f64) = (0.1, 5.0);

fn weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(WEIGHT_RANGE.0..=WEIGHT_RANGE.1)
}

fn shuffled<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Dipath through all `n` vertices in random order.
pub fn dipath<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DiGraph {
    let p = shuffled(n, rng);
    let arcs: Vec<_> = p.windows(2).map(|w| (w[0], w[1], weight(rng))).collect();
    DiGraph::new(n, arcs).expect("valid dipath")
}

/// Directed cycle through all `n >= 2` vertices in random order.
pub fn directed_cycle<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DiGraph {
    let p = shuffled(n, rng);
    let arcs: Vec<_> = (0..n).map(|i| (p[i], p[(i + 1) % n], weight(rng))).collect();
    DiGraph::new(n, arcs).expect("valid cycle")
}

/// Connected bipartite graph with `sources` vertices that only emit arcs and
/// `sinks` vertices that only receive them. Beyond a random spanning tree,
/// each source-sink pair is joined with probability `p`.
pub fn unidirectional_bipartite<R: Rng + ?Sized>(sources: usize, sinks: usize, p: f64, rng: &mut R) -> DiGraph {
    let n = sources + sinks;
    let pairs = bipartite_pairs(sources, sinks, p, rng);
    let arcs: Vec<_> = pairs.into_iter().map(|(s, t)| (s, t, weight(rng))).collect();
    let mut g = DiGraph::new(n, arcs).expect("valid bipartite digraph");
    debug_assert!(g.is_weakly_connected());
    g = g.with_labels((0..n).map(|i| if i < sources { format!("s{i}") } else { format!("t{}", i - sources) }).collect()).unwrap();
    g
}

/// Undirected connected bipartite graph (arcs both ways) on parts
/// `0..left` and `left..left + right`.
pub fn undirected_bipartite<R: Rng + ?Sized>(left: usize, right: usize, p: f64, rng: &mut R) -> DiGraph {
    let pairs = bipartite_pairs(left, right, p, rng);
    let edges: Vec<_> = pairs.into_iter().map(|(s, t)| (s, t, weight(rng))).collect();
    DiGraph::from_undirected(left + right, edges).expect("valid bipartite graph")
}

/// Pairs `(a, b)` with `a < left <= b` forming a connected bipartite graph.
fn bipartite_pairs<R: Rng + ?Sized>(left: usize, right: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    assert!(left >= 1 && right >= 1, "both parts must be non-empty");
    let n = left + right;
    let mut linked = vec![vec![false; n]; n];
    let mut pairs = Vec::new();
    // grow a spanning tree that alternates sides
    let order = shuffled(n, rng);
    let (mut in_l, mut in_r): (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
    let first_l = *order.iter().find(|&&v| v < left).unwrap();
    let first_r = *order.iter().find(|&&v| v >= left).unwrap();
    pairs.push((first_l, first_r));
    linked[first_l][first_r] = true;
    in_l.push(first_l);
    in_r.push(first_r);
    for &v in &order {
        if v == first_l || v == first_r {
            continue;
        }
        if v < left {
            let u = *in_r.choose(rng).unwrap();
            pairs.push((v, u));
            linked[v][u] = true;
            in_l.push(v);
        } else {
            let u = *in_l.choose(rng).unwrap();
            pairs.push((u, v));
            linked[u][v] = true;
            in_r.push(v);
        }
    }
    for a in 0..left {
        for b in left..n {
            if !linked[a][b] && rng.gen_bool(p) {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Weakly connected digraph: a randomly oriented spanning tree plus every
/// other ordered pair with probability `p`.
pub fn weakly_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> DiGraph {
    let mut present = vec![vec![false; n]; n];
    let mut arcs = Vec::new();
    let order = shuffled(n, rng);
    for i in 1..n {
        let a = order[i];
        let b = order[rng.gen_range(0..i)];
        let (s, t) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        present[s][t] = true;
        arcs.push((s, t, weight(rng)));
    }
    for s in 0..n {
        for t in 0..n {
            if s != t && !present[s][t] && rng.gen_bool(p) {
                arcs.push((s, t, weight(rng)));
            }
        }
    }
    DiGraph::new(n, arcs).expect("valid digraph")
}

/// Triangle `0-1-2` with a pendant vertex `3` attached to `2`, unit
/// weights, arcs in both directions.
pub fn paw() -> DiGraph {
    DiGraph::from_undirected(4, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0)]).unwrap()
}

/// Points scattered in the unit square, joined to their `k` nearest
/// neighbours (plus bridges between components), with each edge directed
/// from south to north.
///
/// Weights are `exp(-d² / d̄²)` with `d̄` the mean edge length. Returns the
/// digraph and the `(x, y)` positions.
pub fn geometric_south_north<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> (DiGraph, Vec<(f64, f64)>) {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let dist = |a: usize, b: usize| ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| dist(i, a).total_cmp(&dist(i, b)));
        for &j in others.iter().take(k) {
            adj[i][j] = true;
            adj[j][i] = true;
        }
    }
    // bridge components by their closest pair until connected
    loop {
        let comp = components(&adj);
        if comp.iter().all(|&c| c == 0) {
            break;
        }
        let (mut best, mut pair) = (f64::INFINITY, (0, 0));
        for a in (0..n).filter(|&a| comp[a] == 0) {
            for b in (0..n).filter(|&b| comp[b] != 0) {
                if dist(a, b) < best {
                    best = dist(a, b);
                    pair = (a, b);
                }
            }
        }
        adj[pair.0][pair.1] = true;
        adj[pair.1][pair.0] = true;
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if adj[i][j] {
                pairs.push((i, j));
            }
        }
    }
    let mean = pairs.iter().map(|&(i, j)| dist(i, j)).sum::<f64>() / pairs.len().max(1) as f64;
    let edges: Vec<_> = pairs.iter().map(|&(i, j)| (i, j, (-(dist(i, j) / mean).powi(2)).exp())).collect();
    let lat: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let g = orient_by_coordinate(n, &edges, &lat).expect("coordinates for every vertex");
    (g, pts)
}

fn components(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = next;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if adj[v][w] && comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{detect_family, Family};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn families_are_recognized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..12 {
            assert_eq!(detect_family(&dipath(n, &mut rng)), Some(Family::Dipath));
            assert_eq!(detect_family(&directed_cycle(n.max(3), &mut rng)), Some(Family::DirectedCycle));
            let b = unidirectional_bipartite(n / 2 + 1, n / 2 + 1, 0.3, &mut rng);
            assert_eq!(detect_family(&b), Some(Family::UnidirectionalBipartite));
        }
    }

    #[test]
    fn random_graphs_are_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 2..20 {
            assert!(weakly_connected(n, 0.2, &mut rng).is_weakly_connected());
            assert!(undirected_bipartite(n, 3, 0.3, &mut rng).is_weakly_connected());
        }
        let (g, pts) = geometric_south_north(48, 3, &mut rng);
        assert!(g.is_weakly_connected());
        assert!(g.edges().iter().all(|e| pts[e.src].1 <= pts[e.dst].1));
    }

    #[test]
    fn weights_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = weakly_connected(10, 0.5, &mut rng);
        assert!(g.edges().iter().all(|e| (0.1..=5.0).contains(&e.weight)));
    }
}
