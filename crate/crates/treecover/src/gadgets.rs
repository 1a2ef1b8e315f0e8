//! Adversarial input generators: cycle metrics, metric composition, its
//! iterated powers, and the recursive N-cycle graph with its composition
//! embedding check.
//!
//! These are the hard instances for Ramsey covers: the k-fold composition
//! of a cycle forces distortion on any k-tree Ramsey cover, and the
//! recursive cycle graph realizes (a constant-distortion copy of) that
//! metric as a series-parallel graph with small doubling constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{metric_from_graph, FiniteMetric, WeightedGraph};

/// Default cap on generated instance sizes (points or vertices).
pub const DEFAULT_SIZE_CAP: usize = 20_000;

/// Shortest-path metric of the unweighted N-point cycle:
/// `d(i,j) = min(|i-j|, N - |i-j|)`.
pub fn cycle_metric(n: usize) -> Result<FiniteMetric> {
    if n < 3 {
        return Err(Error::Parameter(format!(
            "cycle metric needs N >= 3, got {n}"
        )));
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let gap = i.abs_diff(j);
            dist[i * n + j] = gap.min(n - gap) as f64;
        }
    }
    FiniteMetric::new(n, dist)
}

/// Inputs of a beta-composition `Z = S_beta[T]`.
pub struct CompositionSpec<'a> {
    pub s: &'a FiniteMetric,
    pub t: &'a FiniteMetric,
    pub beta: f64,
}

impl CompositionSpec<'_> {
    /// gamma = (max pairwise distance of T) / (min pairwise distance of S).
    pub fn gamma(&self) -> f64 {
        if self.t.len() < 2 {
            0.0
        } else {
            self.t.d_max() / self.s.d_min()
        }
    }
}

/// Replace each point of S by a copy of T: points of the same copy are at
/// distance `d_T / (beta * gamma)`, points of different copies at the
/// distance of their S-representatives. The 1/(beta*gamma) factor is what
/// makes the result a metric; the triangle inequality is checked for
/// instances up to 300 points.
pub fn beta_composition(spec: &CompositionSpec<'_>) -> Result<FiniteMetric> {
    let (s, t, beta) = (spec.s, spec.t, spec.beta);
    if s.len() < 2 {
        return Err(Error::Parameter("composition needs |S| >= 2".into()));
    }
    if beta < 0.5 {
        return Err(Error::Parameter(format!(
            "composition needs beta >= 1/2, got {beta}"
        )));
    }
    let (ns, nt) = (s.len(), t.len());
    let n = ns * nt;
    let gamma = spec.gamma();
    let scale = if nt < 2 { 0.0 } else { 1.0 / (beta * gamma) };
    let mut dist = vec![0.0; n * n];
    let id = |u: usize, i: usize| u * nt + i;
    for u in 0..ns {
        for i in 0..nt {
            for v in 0..ns {
                for j in 0..nt {
                    let d = if u == v {
                        t.dist(i, j) * scale
                    } else {
                        s.dist(u, v)
                    };
                    dist[id(u, i) * n + id(v, j)] = d;
                }
            }
        }
    }
    let z = FiniteMetric::new(n, dist)?;
    if n <= 300 {
        z.validate_triangle()?;
    }
    Ok(z)
}

/// `Z_k(N)`: the k-fold beta-composition of the N-cycle with itself,
/// built as `Z_k = (C_N)_beta[Z_(k-1)]`. Structurally, N copies of
/// `Z_(k-1)` scaled down, with cross-copy distances from the cycle.
pub fn composition_power(n: usize, k: usize, beta: f64, cap: usize) -> Result<FiniteMetric> {
    if n < 3 || k < 1 {
        return Err(Error::Parameter(format!(
            "composition power needs N >= 3 and k >= 1, got N = {n}, k = {k}"
        )));
    }
    let total = n.checked_pow(k as u32).unwrap_or(usize::MAX);
    if total > cap {
        return Err(Error::SizeCap {
            requested: total,
            cap,
        });
    }
    let base = cycle_metric(n)?;
    let mut z = base.clone();
    for _ in 1..k {
        z = beta_composition(&CompositionSpec {
            s: &base,
            t: &z,
            beta,
        })?;
    }
    Ok(z)
}

/// A recursive N-cycle graph together with the bookkeeping the embedding
/// check needs: the two side vertices and, for every composition tuple,
/// the inner vertex that represents it.
#[derive(Debug, Clone)]
pub struct RecursiveCycle {
    pub graph: WeightedGraph,
    pub s: usize,
    pub t: usize,
    /// `point_map[idx]` is the inner vertex representing composition point
    /// `idx`, where idx is written base-2N with the most significant digit
    /// selecting the outermost copy.
    pub point_map: Vec<usize>,
    pub levels: usize,
    pub half: usize,
}

/// Structural counts of the recursion: vertices and edges of G_k.
pub fn recursive_cycle_counts(n: usize, k: usize) -> (usize, usize) {
    // E_1 = 2N + 2; E_k = 2N * E_(k-1) + 2.
    // V_1 = 2N + 2; V_k = 2N * (V_(k-1) - 2) + 2N + 2.
    let two_n = 2 * n;
    let mut e = two_n + 2;
    let mut v = two_n + 2;
    for _ in 1..k {
        e = two_n * e + 2;
        v = two_n * (v - 2) + two_n + 2;
    }
    (v, e)
}

/// Build G_k: G_1 is a cycle of length 2N with side vertices s,t attached
/// to antipodals 0 and N by edges of weight N; G_k replaces every cycle
/// edge of G_1 with a copy of G_(k-1) (identifying the copy's s,t with the
/// edge endpoints) and gives the side edges weight N*(3N)^(k-1).
pub fn recursive_cycle_graph(n: usize, k: usize, cap: usize) -> Result<RecursiveCycle> {
    if n < 2 || k < 1 {
        return Err(Error::Parameter(format!(
            "recursive cycle needs N >= 2 and k >= 1, got N = {n}, k = {k}"
        )));
    }
    let (v_count, _) = recursive_cycle_counts(n, k);
    if v_count > cap {
        return Err(Error::SizeCap {
            requested: v_count,
            cap,
        });
    }
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    // Side vertices first, so s = 0 and t = 1 at every size.
    let (s, t) = (0usize, 1usize);
    let mut next_vertex = 2usize;
    let point_map = build_level(n, k, &mut edges, &mut next_vertex, (s, t));
    let mut graph = WeightedGraph::new(next_vertex, edges)?;
    graph.planarity_hint = true;
    Ok(RecursiveCycle {
        graph,
        s,
        t,
        point_map,
        levels: k,
        half: n,
    })
}

/// Recursively emit the edges of G_k, identifying this copy's s,t with
/// `endpoints`. Returns the inner-vertex map for composition tuples of
/// this level.
fn build_level(
    n: usize,
    k: usize,
    edges: &mut Vec<(usize, usize, f64)>,
    next_vertex: &mut usize,
    endpoints: (usize, usize),
) -> Vec<usize> {
    let two_n = 2 * n;
    // Cycle vertices of this level's frame.
    let cycle: Vec<usize> = (0..two_n)
        .map(|_| {
            let v = *next_vertex;
            *next_vertex += 1;
            v
        })
        .collect();
    let (s, t) = endpoints;
    let side_weight = n as f64 * (3.0 * n as f64).powi(k as i32 - 1);
    edges.push((s, cycle[0], side_weight));
    edges.push((t, cycle[n], side_weight));
    if k == 1 {
        for i in 0..two_n {
            edges.push((cycle[i], cycle[(i + 1) % two_n], 1.0));
        }
        return cycle;
    }
    // Replace every cycle edge (i, i+1) with a copy of G_(k-1).
    let mut point_map = Vec::with_capacity(two_n.pow(k as u32));
    for i in 0..two_n {
        let a = cycle[i];
        let b = cycle[(i + 1) % two_n];
        let sub = build_level(n, k - 1, edges, next_vertex, (a, b));
        point_map.extend(sub);
    }
    point_map
}

/// Result of the composition-to-graph embedding measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingMeasurement {
    pub expansion: f64,
    pub contraction: f64,
    /// Bi-Lipschitz distortion: expansion * contraction.
    pub distortion: f64,
    pub gamma_scale: f64,
    pub num_points: usize,
}

/// Map `[C_2N]_3^k` onto the inner vertices of `gamma_k * G_k`
/// (gamma_k = (3N)^(1-k)) by the recursive copy correspondence, and
/// measure the bi-Lipschitz distortion of the mapping exhaustively.
pub fn embed_composition_in_cycle_graph(
    n: usize,
    k: usize,
    cap: usize,
) -> Result<(Vec<usize>, EmbeddingMeasurement)> {
    let rc = recursive_cycle_graph(n, k, cap)?;
    let comp = composition_power(2 * n, k, 3.0, cap)?;
    let graph_metric = metric_from_graph(&rc.graph)?;
    let gamma = (3.0 * n as f64).powi(1 - (k as i32));
    let mapping = rc.point_map.clone();
    assert_eq!(mapping.len(), comp.len());
    let mut expansion = 0.0f64;
    let mut contraction = 0.0f64;
    for i in 0..comp.len() {
        for j in 0..i {
            let dz = comp.dist(i, j);
            let dg = graph_metric.dist(mapping[i], mapping[j]) * gamma;
            expansion = expansion.max(dg / dz);
            contraction = contraction.max(dz / dg);
        }
    }
    let measurement = EmbeddingMeasurement {
        expansion,
        contraction,
        distortion: expansion * contraction,
        gamma_scale: gamma,
        num_points: comp.len(),
    };
    Ok((mapping, measurement))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_metric_small_cases() {
        let c3 = cycle_metric(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(c3.dist(i, j), 1.0);
                }
            }
        }
        let c6 = cycle_metric(6).unwrap();
        assert_eq!(c6.dist(0, 3), 3.0);
        assert_eq!(c6.dist(0, 2), 2.0);
        let c8 = cycle_metric(8).unwrap();
        assert_eq!(c8.d_max(), 4.0);
    }

    #[test]
    fn cycle_metric_rejects_tiny() {
        assert!(cycle_metric(2).is_err());
    }

    #[test]
    fn composition_c4_with_itself() {
        // S = T = C_4, beta = 1/2: gamma = 2/1 = 2, so same-copy distances
        // keep the C_4 scale (factor 1) and cross-copy distances equal d_S.
        let c4 = cycle_metric(4).unwrap();
        let z = beta_composition(&CompositionSpec {
            s: &c4,
            t: &c4,
            beta: 0.5,
        })
        .unwrap();
        assert_eq!(z.len(), 16);
        assert_eq!(z.dist(0, 1), 1.0); // same copy, d_T(0,1) * 1
        assert_eq!(z.dist(0, 2), 2.0); // same copy, d_T(0,2) * 1
        assert_eq!(z.dist(0, 4), 1.0); // copies 0 and 1: d_S(0,1)
        assert_eq!(z.dist(0, 8), 2.0); // copies 0 and 2: d_S(0,2)
        z.validate_triangle().unwrap();
    }

    #[test]
    fn composition_scaling_factor() {
        // S = T = C_8, beta = 3: gamma = 4, same-copy scale 1/12.
        let c8 = cycle_metric(8).unwrap();
        let z = beta_composition(&CompositionSpec {
            s: &c8,
            t: &c8,
            beta: 3.0,
        })
        .unwrap();
        assert!((z.dist(0, 1) - 1.0 / 12.0).abs() < 1e-12);
        z.validate_triangle().unwrap();
    }

    #[test]
    fn composition_power_base_is_cycle() {
        let z1 = composition_power(5, 1, 0.5, DEFAULT_SIZE_CAP).unwrap();
        let c5 = cycle_metric(5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(z1.dist(i, j), c5.dist(i, j));
            }
        }
    }

    #[test]
    fn composition_power_n4_k2_cross_copy_distances() {
        let z = composition_power(4, 2, 0.5, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(z.len(), 16);
        let c4 = cycle_metric(4).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                if u == v {
                    continue;
                }
                // Any representatives of copies u and v.
                for i in 0..4 {
                    for j in 0..4 {
                        assert_eq!(z.dist(u * 4 + i, v * 4 + j), c4.dist(u, v));
                    }
                }
            }
        }
    }

    #[test]
    fn composition_power_diameter_equals_cycle_diameter() {
        // Cross-copy distances dominate: diameter = floor(N/2). Checked by
        // enumeration for a couple of (N, k).
        for (n, k) in [(4, 2), (6, 2), (5, 3)] {
            let z = composition_power(n, k, 0.5, DEFAULT_SIZE_CAP).unwrap();
            assert_eq!(z.d_max(), (n / 2) as f64, "N = {n}, k = {k}");
        }
    }

    #[test]
    fn composition_size_cap_enforced() {
        assert!(matches!(
            composition_power(10, 6, 0.5, DEFAULT_SIZE_CAP),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn recursive_cycle_counts_match_structure() {
        for (n, k) in [(2, 1), (2, 2), (3, 1), (3, 2), (2, 3)] {
            let rc = recursive_cycle_graph(n, k, DEFAULT_SIZE_CAP).unwrap();
            let (v, e) = recursive_cycle_counts(n, k);
            assert_eq!(rc.graph.len(), v, "vertices for N = {n}, k = {k}");
            assert_eq!(rc.graph.edges().len(), e, "edges for N = {n}, k = {k}");
        }
    }

    #[test]
    fn recursive_cycle_is_planar() {
        for (n, k) in [(2, 2), (3, 2), (2, 3)] {
            let rc = recursive_cycle_graph(n, k, DEFAULT_SIZE_CAP).unwrap();
            let undirected: Vec<(usize, usize)> =
                rc.graph.edges().iter().map(|&(u, v, _)| (u, v)).collect();
            assert!(
                crate::planar::embedding::is_planar(rc.graph.len(), &undirected),
                "N = {n}, k = {k} failed the planarity test"
            );
        }
    }

    #[test]
    fn composition_with_singleton_copy_is_isometric_to_s() {
        let c5 = cycle_metric(5).unwrap();
        let singleton = FiniteMetric::singleton();
        let z = beta_composition(&CompositionSpec {
            s: &c5,
            t: &singleton,
            beta: 1.0,
        })
        .unwrap();
        assert_eq!(z.len(), 5);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(z.dist(i, j), c5.dist(i, j));
            }
        }
    }

    #[test]
    fn recursive_cycle_diameter_is_power() {
        // Diameter (3N)^k, realized by the s-t distance; checked by APSP.
        for (n, k) in [(2, 1), (2, 2), (3, 1), (3, 2), (2, 3)] {
            let rc = recursive_cycle_graph(n, k, DEFAULT_SIZE_CAP).unwrap();
            let m = metric_from_graph(&rc.graph).unwrap();
            let want = (3.0 * n as f64).powi(k as i32);
            assert_eq!(m.d_max(), want, "diameter for N = {n}, k = {k}");
            assert_eq!(m.dist(rc.s, rc.t), want, "s-t distance for N = {n}, k = {k}");
        }
    }

    #[test]
    fn recursive_cycle_n3_inner_metric_doubling_at_most_six() {
        // The k = 1 inner metric is the unit 6-cycle; its exact doubling
        // constant is at most 6 by brute force.
        let rc = recursive_cycle_graph(3, 1, DEFAULT_SIZE_CAP).unwrap();
        let m = metric_from_graph(&rc.graph).unwrap();
        let inner: Vec<usize> = rc.point_map.clone();
        assert_eq!(inner.len(), 6);
        let sub = restrict(&m, &inner);
        assert!(crate::metric::doubling_constant_exact(&sub) <= 6);
    }

    #[test]
    fn embedding_identity_at_level_one() {
        let (_, meas) = embed_composition_in_cycle_graph(2, 1, DEFAULT_SIZE_CAP).unwrap();
        assert!((meas.distortion - 1.0).abs() < 1e-12, "got {}", meas.distortion);
        assert_eq!(meas.gamma_scale, 1.0);
    }

    #[test]
    fn embedding_cross_copy_lower_bound_n2_k2() {
        // Inner points of copies i and j are at graph distance at least
        // 2 * C * N * (3N)^(k-2), C the cycle distance of i, j.
        let (n, k) = (2usize, 2usize);
        let rc = recursive_cycle_graph(n, k, DEFAULT_SIZE_CAP).unwrap();
        let m = metric_from_graph(&rc.graph).unwrap();
        let two_n = 2 * n;
        let copy_size = rc.point_map.len() / two_n;
        for ci in 0..two_n {
            for cj in 0..ci {
                let gap = ci.abs_diff(cj);
                let c = gap.min(two_n - gap) as f64;
                let bound = 2.0 * c * n as f64 * (3.0 * n as f64).powi(k as i32 - 2);
                for a in 0..copy_size {
                    for b in 0..copy_size {
                        let va = rc.point_map[ci * copy_size + a];
                        let vb = rc.point_map[cj * copy_size + b];
                        assert!(
                            m.dist(va, vb) >= bound - 1e-9,
                            "copies ({ci},{cj}): {} < {bound}",
                            m.dist(va, vb)
                        );
                    }
                }
            }
        }
    }

    fn restrict(m: &FiniteMetric, points: &[usize]) -> FiniteMetric {
        let k = points.len();
        let mut dist = vec![0.0; k * k];
        for (a, &x) in points.iter().enumerate() {
            for (b, &y) in points.iter().enumerate() {
                dist[a * k + b] = m.dist(x, y);
            }
        }
        FiniteMetric::new(k, dist).unwrap()
    }
}
