//! Finite metric spaces and weighted graphs.
//!
//! The universal input representation is a symmetric distance matrix over
//! `n` labeled points ([`FiniteMetric`]). Weighted graphs are kept as edge
//! lists and converted to metrics by all-pairs shortest paths
//! ([`metric_from_graph`]). Structural statistics live here too: aspect
//! ratio and a greedy upper estimate of the doubling constant.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A finite metric on `n` points, stored as a dense symmetric matrix.
///
/// Invariants, enforced at construction: zero diagonal, symmetry, strictly
/// positive off-diagonal entries. The triangle inequality is checked by
/// [`FiniteMetric::validate_triangle`] (cubic, so callers opt in; all
/// generators and the text-format reader run it at desk scale).
#[derive(Debug, Clone)]
pub struct FiniteMetric {
    n: usize,
    dist: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl FiniteMetric {
    /// Build from a flattened row-major `n x n` matrix.
    pub fn new(n: usize, dist: Vec<f64>) -> Result<Self> {
        if dist.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::InvalidMetric(format!(
                    "dist[{i}][{i}] = {} is not zero",
                    dist[i * n + i]
                )));
            }
            for j in 0..i {
                let d = dist[i * n + j];
                if !d.is_finite() || d <= 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "dist[{i}][{j}] = {d} is not a positive finite real"
                    )));
                }
                if d != dist[j * n + i] {
                    return Err(Error::InvalidMetric(format!(
                        "dist[{i}][{j}] = {d} differs from dist[{j}][{i}] = {}",
                        dist[j * n + i]
                    )));
                }
            }
        }
        Ok(Self {
            n,
            dist,
            labels: None,
        })
    }

    /// Build from explicit rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::InvalidMetric(format!(
                    "row has {} entries, expected {n}",
                    row.len()
                )));
            }
            dist.extend_from_slice(row);
        }
        Self::new(n, dist)
    }

    /// The single-point metric.
    pub fn singleton() -> Self {
        Self {
            n: 1,
            dist: vec![0.0],
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidMetric(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Maximum pairwise distance; 0 for a single point.
    pub fn d_max(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                m = m.max(self.dist(i, j));
            }
        }
        m
    }

    /// Minimum positive pairwise distance; +inf for a single point.
    pub fn d_min(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.n {
            for j in 0..i {
                m = m.min(self.dist(i, j));
            }
        }
        m
    }

    /// Aspect ratio `d_max / d_min`.
    pub fn aspect_ratio(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::DegenerateMetric {
                needed: 2,
                got: self.n,
            });
        }
        Ok(self.d_max() / self.d_min())
    }

    /// Check the triangle inequality over all triples.
    pub fn validate_triangle(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dij = self.dist(i, j);
                for k in 0..n {
                    let slack = self.dist(i, k) + self.dist(k, j) - dij;
                    if slack < -crate::REL_TOL * dij {
                        return Err(Error::InvalidMetric(format!(
                            "triangle violated: d({i},{j}) = {dij} > d({i},{k}) + d({k},{j}) = {}",
                            self.dist(i, k) + self.dist(k, j)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Render in the distance-matrix text format: first line `n`, then `n`
    /// whitespace-separated rows.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{}", self.dist(i, j));
            }
            out.push('\n');
        }
        out
    }

    /// Parse the distance-matrix text format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty input".into()))?;
        let n: usize = first
            .trim()
            .parse()
            .map_err(|e| parse_err(1, format!("bad point count: {e}")))?;
        let mut dist = Vec::with_capacity(n * n);
        let mut row = 0;
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if row == n {
                return Err(parse_err(idx + 1, format!("more than {n} matrix rows")));
            }
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|e| parse_err(idx + 1, format!("bad distance '{tok}': {e}")))?;
                dist.push(v);
            }
            row += 1;
        }
        if row != n {
            return Err(parse_err(0, format!("{row} matrix rows, expected {n}")));
        }
        let m = Self::new(n, dist)?;
        if n <= 200 {
            m.validate_triangle()?;
        }
        Ok(m)
    }
}

fn parse_err(line: usize, msg: String) -> Error {
    Error::Parse { line, msg }
}

/// An undirected, connected graph with positive edge weights.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    /// Set by generators that construct planar graphs; advisory only, the
    /// planarity test is what the separator trusts.
    pub planarity_hint: bool,
}

impl WeightedGraph {
    /// Validate and ingest an edge list: no self-loops, no duplicate
    /// undirected edges, positive weights, connected.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u},{v}) references a vertex >= {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u},{v}) has non-positive weight {w}"
                )));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u},{v})")));
            }
        }
        let g = Self {
            n,
            edges,
            planarity_hint: false,
        };
        if let Some(v) = g.unreachable_vertex() {
            return Err(Error::Disconnected(v));
        }
        Ok(g)
    }

    /// Construct without connectivity/duplicate validation. For internal
    /// use by generators that guarantee validity, and by tests that need
    /// invalid instances to exercise error paths.
    #[doc(hidden)]
    pub fn from_parts_unchecked(n: usize, edges: Vec<(usize, usize, f64)>) -> Self {
        Self {
            n,
            edges,
            planarity_hint: false,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Adjacency lists, each sorted by neighbor index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, w) in &self.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for a in &mut adj {
            a.sort_by_key(|&(v, _)| v);
        }
        adj
    }

    fn unreachable_vertex(&self) -> Option<usize> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// Single-source shortest path lengths by the label-setting
    /// (priority-queue) algorithm. Unreachable vertices get `+inf`.
    pub fn sssp(&self, src: usize) -> Vec<f64> {
        sssp_adj(&self.adjacency(), src)
    }

    /// Render in the graph text format: first line `n m`, then `m` lines
    /// `u v w` with 0-based vertex ids.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for &(u, v, w) in &self.edges {
            let _ = writeln!(out, "{u} {v} {w}");
        }
        out
    }

    /// Parse the graph text format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty input".into()))?;
        let head: Vec<&str> = first.split_whitespace().collect();
        if head.len() != 2 {
            return Err(parse_err(1, "expected header 'n m'".into()));
        }
        let n: usize = head[0]
            .parse()
            .map_err(|e| parse_err(1, format!("bad vertex count: {e}")))?;
        let m: usize = head[1]
            .parse()
            .map_err(|e| parse_err(1, format!("bad edge count: {e}")))?;
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(parse_err(idx + 1, "expected 'u v w'".into()));
            }
            let u: usize = toks[0]
                .parse()
                .map_err(|e| parse_err(idx + 1, format!("bad vertex id: {e}")))?;
            let v: usize = toks[1]
                .parse()
                .map_err(|e| parse_err(idx + 1, format!("bad vertex id: {e}")))?;
            let w: f64 = toks[2]
                .parse()
                .map_err(|e| parse_err(idx + 1, format!("bad weight: {e}")))?;
            edges.push((u, v, w));
        }
        if edges.len() != m {
            return Err(parse_err(0, format!("{} edges, expected {m}", edges.len())));
        }
        Self::new(n, edges)
    }
}

fn sssp_adj(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap: BinaryHeap<Reverse<(OrdF64, usize)>> = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((OrdF64(0.0), src)));
    while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((OrdF64(nd), v)));
            }
        }
    }
    dist
}

/// Total order on finite non-NaN distances for the heap.
#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).expect("distances are never NaN")
    }
}

/// Shortest-path metric of a connected weighted graph.
///
/// All-pairs distances are computed per source in parallel; the merge is
/// deterministic because sources are independent.
pub fn metric_from_graph(g: &WeightedGraph) -> Result<FiniteMetric> {
    let n = g.len();
    let adj = g.adjacency();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|src| sssp_adj(&adj, src))
        .collect();
    for (src, row) in rows.iter().enumerate() {
        if let Some(v) = row.iter().position(|d| !d.is_finite()) {
            let _ = src;
            return Err(Error::Disconnected(v));
        }
    }
    let mut dist = Vec::with_capacity(n * n);
    for row in &rows {
        dist.extend_from_slice(row);
    }
    // Symmetrize: Dijkstra from u and from v can round differently along
    // equal-length paths, and FiniteMetric demands exact symmetry.
    for i in 0..n {
        for j in 0..i {
            let d = dist[i * n + j].min(dist[j * n + i]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    FiniteMetric::new(n, dist)
}

/// Greedy upper estimate of the doubling constant.
///
/// For each center `x` and each radius `2r` drawn from the set of pairwise
/// distances, the ball `B(x, 2r)` is covered greedily by balls of radius
/// `r` centered at points of the metric; the estimate is the maximum count
/// over all `(x, 2r)`. Greedy covering never uses fewer balls than the
/// optimum, so the result upper-bounds the true doubling constant.
///
/// Only radii from x's own distance row matter for the maximum: shrinking
/// `2r` to the largest in-ball distance from x keeps the ball intact while
/// making the radius-r covering no easier.
pub fn doubling_constant_estimate(m: &FiniteMetric) -> usize {
    let n = m.len();
    if n <= 1 {
        return 1;
    }
    let mut best = 1usize;
    let mut covered = vec![0u32; n];
    let mut stamp = 0u32;
    for x in 0..n {
        let mut row: Vec<f64> = (0..n).filter(|&y| y != x).map(|y| m.dist(x, y)).collect();
        row.sort_by(|a, b| a.partial_cmp(b).unwrap());
        row.dedup();
        let mut ball: Vec<usize> = Vec::with_capacity(n);
        for &two_r in &row {
            let r = two_r / 2.0;
            ball.clear();
            ball.extend((0..n).filter(|&y| m.dist(x, y) <= two_r));
            // Greedy: the first uncovered ball point becomes a center.
            stamp += 1;
            let mut count = 0;
            for k in 0..ball.len() {
                if covered[ball[k]] == stamp {
                    continue;
                }
                let y = ball[k];
                count += 1;
                for &z in &ball[k..] {
                    if covered[z] != stamp && m.dist(y, z) <= r {
                        covered[z] = stamp;
                    }
                }
            }
            best = best.max(count);
        }
    }
    best
}

/// Exact doubling constant by brute force over all center subsets.
/// Exponential; intended for instances with at most ~16 points.
pub fn doubling_constant_exact(m: &FiniteMetric) -> usize {
    let n = m.len();
    assert!(n <= 16, "exact doubling constant is exponential in n");
    if n <= 1 {
        return 1;
    }
    let radii = pairwise_distances(m);
    let mut best = 1usize;
    for x in 0..n {
        for &two_r in &radii {
            let r = two_r / 2.0;
            let ball: Vec<usize> = (0..n).filter(|&y| m.dist(x, y) <= two_r).collect();
            best = best.max(min_cover_count(m, &ball, r));
        }
    }
    best
}

fn pairwise_distances(m: &FiniteMetric) -> Vec<f64> {
    let n = m.len();
    let mut radii: Vec<f64> = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| m.dist(i, j))
        .collect();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup();
    radii
}

fn min_cover_count(m: &FiniteMetric, ball: &[usize], r: f64) -> usize {
    let n = m.len();
    // Bitmask of ball points covered by each candidate center.
    let masks: Vec<u32> = (0..n)
        .map(|z| {
            ball.iter()
                .enumerate()
                .filter(|&(_, &y)| m.dist(z, y) <= r)
                .fold(0u32, |acc, (k, _)| acc | (1 << k))
        })
        .collect();
    let full: u32 = if ball.len() == 32 {
        u32::MAX
    } else {
        (1 << ball.len()) - 1
    };
    for size in 1..=ball.len() {
        if cover_with(&masks, full, 0, size, 0) {
            return size;
        }
    }
    ball.len()
}

fn cover_with(masks: &[u32], target: u32, covered: u32, left: usize, from: usize) -> bool {
    if covered & target == target {
        return true;
    }
    if left == 0 {
        return false;
    }
    for (z, &mask) in masks.iter().enumerate().skip(from) {
        if mask & target & !covered != 0 && cover_with(masks, target, covered | mask, left - 1, z + 1)
        {
            return true;
        }
    }
    false
}

/// Generators used across the test suites and the CLI.
pub mod shapes {
    use super::{metric_from_graph, FiniteMetric, WeightedGraph};

    /// Unit-weight path graph on `n` vertices.
    pub fn path_graph(n: usize) -> WeightedGraph {
        let edges = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        WeightedGraph::new(n, edges).expect("path graph is valid")
    }

    /// Unit-weight cycle graph on `n >= 3` vertices.
    pub fn cycle_graph(n: usize) -> WeightedGraph {
        let mut edges: Vec<(usize, usize, f64)> =
            (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        edges.push((n - 1, 0, 1.0));
        WeightedGraph::new(n, edges).expect("cycle graph is valid")
    }

    /// Unit-weight `rows x cols` grid graph.
    pub fn grid_graph(rows: usize, cols: usize) -> WeightedGraph {
        let id = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((id(r, c), id(r, c + 1), 1.0));
                }
                if r + 1 < rows {
                    edges.push((id(r, c), id(r + 1, c), 1.0));
                }
            }
        }
        let mut g = WeightedGraph::new(rows * cols, edges).expect("grid graph is valid");
        g.planarity_hint = true;
        g
    }

    /// Metric of `n` equally spaced points on a line with the given spacing.
    pub fn line_metric(n: usize, spacing: f64) -> FiniteMetric {
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = (i as f64 - j as f64).abs() * spacing;
            }
        }
        FiniteMetric::new(n, dist).expect("line metric is valid")
    }

    /// Uniform metric: all pairs at distance `d`.
    pub fn uniform_metric(n: usize, d: f64) -> FiniteMetric {
        let mut dist = vec![d; n * n];
        for i in 0..n {
            dist[i * n + i] = 0.0;
        }
        FiniteMetric::new(n, dist).expect("uniform metric is valid")
    }

    /// Shortest-path metric of the unit cycle.
    pub fn cycle_metric_graph(n: usize) -> FiniteMetric {
        metric_from_graph(&cycle_graph(n)).expect("cycle graph is connected")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use shapes::*;

    #[test]
    fn single_edge_graph_distance() {
        let g = WeightedGraph::new(2, vec![(0, 1, 5.0)]).unwrap();
        let m = metric_from_graph(&g).unwrap();
        assert_eq!(m.dist(0, 1), 5.0);
    }

    #[test]
    fn unit_four_cycle_distances_match_path_enumeration() {
        // Oracle: brute-force enumeration of simple paths on C_4.
        let g = cycle_graph(4);
        let m = metric_from_graph(&g).unwrap();
        let brute = brute_force_shortest(&g);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.dist(i, j), brute[i][j], "pair ({i},{j})");
            }
        }
        assert_eq!(m.dist(0, 2), 2.0);
        assert_eq!(m.dist(0, 1), 1.0);
    }

    #[test]
    fn unit_path_p5_endpoints() {
        let m = metric_from_graph(&path_graph(5)).unwrap();
        assert_eq!(m.dist(0, 4), 4.0);
    }

    #[test]
    fn disconnected_graph_names_a_vertex() {
        let g = WeightedGraph::from_parts_unchecked(4, vec![(0, 1, 1.0), (2, 3, 1.0)]);
        match metric_from_graph(&g) {
            Err(Error::Disconnected(v)) => assert!(v == 2 || v == 3),
            other => panic!("expected Disconnected, got {other:?}"),
        }
        match WeightedGraph::new(4, vec![(0, 1, 1.0), (2, 3, 1.0)]) {
            Err(Error::Disconnected(_)) => {}
            other => panic!("expected Disconnected, got {other:?}"),
        }
    }

    #[test]
    fn graph_ingestion_rejects_invalid_edges() {
        assert!(WeightedGraph::new(2, vec![(0, 0, 1.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 1, 0.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 1, -3.0)]).is_err());
    }

    #[test]
    fn metric_from_graph_satisfies_triangle_inequality() {
        for g in [path_graph(7), cycle_graph(9), grid_graph(4, 5)] {
            let m = metric_from_graph(&g).unwrap();
            m.validate_triangle().unwrap();
        }
    }

    #[test]
    fn aspect_ratio_uniform_is_one() {
        let m = uniform_metric(4, 1.0);
        assert_eq!(m.aspect_ratio().unwrap(), 1.0);
    }

    #[test]
    fn aspect_ratio_unit_path_p5() {
        let m = metric_from_graph(&path_graph(5)).unwrap();
        assert_eq!(m.aspect_ratio().unwrap(), 4.0);
    }

    #[test]
    fn aspect_ratio_unit_six_cycle() {
        // Oracle: enumerate distances on C_6 — max 3, min 1.
        let m = cycle_metric_graph(6);
        let mut dmax = 0.0f64;
        let mut dmin = f64::INFINITY;
        for i in 0..6 {
            for j in 0..i {
                dmax = dmax.max(m.dist(i, j));
                dmin = dmin.min(m.dist(i, j));
            }
        }
        assert_eq!((dmax, dmin), (3.0, 1.0));
        assert_eq!(m.aspect_ratio().unwrap(), 3.0);
    }

    #[test]
    fn aspect_ratio_rejects_single_point() {
        let m = FiniteMetric::singleton();
        assert!(matches!(
            m.aspect_ratio(),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn aspect_ratio_is_scale_invariant() {
        let m = cycle_metric_graph(7);
        let base = m.aspect_ratio().unwrap();
        for c in [0.5, 3.0, 1e-3, 1e6] {
            let scaled = FiniteMetric::new(
                m.len(),
                (0..m.len() * m.len())
                    .map(|k| m.dist(k / m.len(), k % m.len()) * c)
                    .collect(),
            )
            .unwrap();
            let r = scaled.aspect_ratio().unwrap();
            assert!((r - base).abs() <= 1e-9 * base, "c = {c}: {r} vs {base}");
        }
    }

    #[test]
    fn doubling_single_point_is_one() {
        assert_eq!(doubling_constant_estimate(&FiniteMetric::singleton()), 1);
    }

    #[test]
    fn doubling_uniform_n4_is_four() {
        // Exhaustive check over the two distinct radii: with 2r = 1 the ball
        // around any point is everything while radius-1/2 balls are
        // singletons, so four balls are needed.
        let m = uniform_metric(4, 1.0);
        assert_eq!(doubling_constant_estimate(&m), 4);
        assert_eq!(doubling_constant_exact(&m), 4);
    }

    #[test]
    fn doubling_unit_eight_cycle_at_most_six() {
        let m = cycle_metric_graph(8);
        let exact = doubling_constant_exact(&m);
        assert!(exact <= 6, "exact doubling constant {exact} > 6");
        assert!(doubling_constant_estimate(&m) >= exact);
    }

    #[test]
    fn doubling_estimate_upper_bounds_exact() {
        for m in [
            cycle_metric_graph(5),
            cycle_metric_graph(8),
            line_metric(9, 1.0),
            uniform_metric(6, 2.0),
            metric_from_graph(&grid_graph(3, 4)).unwrap(),
        ] {
            assert!(m.len() <= 12);
            assert!(doubling_constant_estimate(&m) >= doubling_constant_exact(&m));
        }
    }

    #[test]
    fn metric_text_roundtrip() {
        let m = cycle_metric_graph(5);
        let text = m.to_text();
        let back = FiniteMetric::from_text(&text).unwrap();
        assert_eq!(back.len(), m.len());
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(back.dist(i, j), m.dist(i, j));
            }
        }
    }

    #[test]
    fn graph_text_roundtrip() {
        let g = grid_graph(3, 3);
        let back = WeightedGraph::from_text(&g.to_text()).unwrap();
        assert_eq!(back.len(), g.len());
        assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn metric_rejects_asymmetry_and_zero_offdiagonal() {
        assert!(FiniteMetric::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(FiniteMetric::new(2, vec![0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(FiniteMetric::new(2, vec![0.5, 1.0, 1.0, 0.0]).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_connected_graph() -> impl Strategy<Value = WeightedGraph> {
            // A random spanning tree plus random extra edges, weights in
            // (0, 10]; always connected and simple.
            (2usize..24)
                .prop_flat_map(|n| {
                    let tree = proptest::collection::vec(
                        (0.0f64..1.0, 0.01f64..10.0),
                        n - 1,
                    );
                    let extras = proptest::collection::vec(
                        (0usize..n * n, 0.01f64..10.0),
                        0..2 * n,
                    );
                    (Just(n), tree, extras)
                })
                .prop_map(|(n, tree, extras)| {
                    let mut seen = std::collections::HashSet::new();
                    let mut edges = Vec::new();
                    for (v, (frac, w)) in tree.into_iter().enumerate() {
                        let v = v + 1;
                        let parent = ((frac * v as f64) as usize).min(v - 1);
                        seen.insert((parent, v));
                        edges.push((parent, v, w));
                    }
                    for (code, w) in extras {
                        let (u, v) = (code / n, code % n);
                        if u != v && seen.insert((u.min(v), u.max(v))) {
                            edges.push((u.min(v), u.max(v), w));
                        }
                    }
                    WeightedGraph::new(n, edges).expect("constructed connected")
                })
        }

        proptest! {
            #[test]
            fn shortest_path_metric_satisfies_triangle_inequality(g in arb_connected_graph()) {
                let m = metric_from_graph(&g).unwrap();
                m.validate_triangle().unwrap();
            }

            #[test]
            fn aspect_ratio_scale_invariance(g in arb_connected_graph(), c in 0.001f64..1000.0) {
                let m = metric_from_graph(&g).unwrap();
                let base = m.aspect_ratio().unwrap();
                let n = m.len();
                let scaled = FiniteMetric::new(
                    n,
                    (0..n * n).map(|k| m.dist(k / n, k % n) * c).collect(),
                )
                .unwrap();
                let r = scaled.aspect_ratio().unwrap();
                prop_assert!((r - base).abs() <= 1e-9 * base);
            }
        }
    }

    fn brute_force_shortest(g: &WeightedGraph) -> Vec<Vec<f64>> {
        // Exponential DFS over simple paths; fine for tiny oracles.
        let n = g.len();
        let adj = g.adjacency();
        let mut out = vec![vec![f64::INFINITY; n]; n];
        for s in 0..n {
            let mut visited = vec![false; n];
            visited[s] = true;
            dfs(s, s, 0.0, &adj, &mut visited, &mut out);
            out[s][s] = 0.0;
        }
        out
    }

    fn dfs(
        s: usize,
        u: usize,
        len: f64,
        adj: &[Vec<(usize, f64)>],
        visited: &mut [bool],
        out: &mut [Vec<f64>],
    ) {
        for &(v, w) in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                if len + w < out[s][v] {
                    out[s][v] = len + w;
                }
                dfs(s, v, len + w, adj, visited, out);
                visited[v] = false;
            }
        }
    }
}
