//! Per-vertex landmark sets on a shortest path.
//!
//! For a shortest path P and a vertex x, the landmark set L_x starts at
//! the path vertex nearest to x and walks P in both directions, admitting
//! the next vertex z exactly when
//!
//! ```text
//! d_G(x, z) < (d_G(x, last) + d_P(last, z)) / (1 + eps)
//! ```
//!
//! relative to the last admitted landmark. A geometric argument caps the
//! set size at 8/eps, and for every pair x, y whose shortest path meets P
//! some landmark pair routes x -> u -> v -> y within a (1+eps) factor.

use crate::error::{Error, Result};
use crate::metric::WeightedGraph;
use crate::REL_TOL;

/// Landmark sets for every vertex of the graph, over one separator path.
#[derive(Debug, Clone)]
pub struct LandmarkSets {
    /// Landmarks per vertex, as indices into the path's vertex sequence.
    pub sets: Vec<Vec<usize>>,
    /// Position (index into the path) of the nearest path vertex, per vertex.
    pub nearest: Vec<usize>,
    /// Distances from every path vertex to every vertex: `dist[k][x]` is
    /// `d_G(path[k], x)` in the graph the path was extracted from.
    pub dist: Vec<Vec<f64>>,
    /// Prefix lengths along the path.
    pub prefix: Vec<f64>,
}

impl LandmarkSets {
    pub fn max_size(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// d_P between two positions on the path.
    pub fn path_distance(&self, a: usize, b: usize) -> f64 {
        (self.prefix[a] - self.prefix[b]).abs()
    }
}

/// Verify that `path` is a shortest path of `g` and compute landmark sets
/// for every vertex. `0 < eps < 1`.
pub fn landmarks(g: &WeightedGraph, path: &[usize], eps: f64) -> Result<LandmarkSets> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!(
            "landmarks need 0 < eps < 1, got {eps}"
        )));
    }
    if path.is_empty() {
        return Err(Error::InvalidSeparatorPath("empty path".into()));
    }
    let n = g.len();
    let adj = g.adjacency();
    // Consecutive path vertices must be adjacent; collect prefix lengths.
    let mut prefix = vec![0.0f64; path.len()];
    for i in 1..path.len() {
        let (a, b) = (path[i - 1], path[i]);
        let w = adj[a]
            .iter()
            .find(|&&(v, _)| v == b)
            .map(|&(_, w)| w)
            .ok_or_else(|| {
                Error::InvalidSeparatorPath(format!("path vertices {a},{b} not adjacent"))
            })?;
        prefix[i] = prefix[i - 1] + w;
    }
    let dist: Vec<Vec<f64>> = path.iter().map(|&z| g.sssp(z)).collect();
    // Shortest-path check: total length equals the endpoint distance
    // (subpaths of shortest paths are then shortest automatically).
    let total = prefix[path.len() - 1];
    let direct = dist[0][path[path.len() - 1]];
    if total > direct * (1.0 + REL_TOL) + f64::MIN_POSITIVE {
        return Err(Error::InvalidSeparatorPath(format!(
            "path length {total} exceeds graph distance {direct}"
        )));
    }

    let mut sets = Vec::with_capacity(n);
    let mut nearest = Vec::with_capacity(n);
    for x in 0..n {
        // Nearest path vertex, first position on ties.
        let z0 = (0..path.len())
            .min_by(|&a, &b| dist[a][x].partial_cmp(&dist[b][x]).unwrap())
            .expect("path nonempty");
        let mut lx = vec![z0];
        for dir in [1i64, -1i64] {
            let mut last = z0;
            let mut q = z0 as i64 + dir;
            while q >= 0 && (q as usize) < path.len() {
                let z = q as usize;
                let d_p = (prefix[z] - prefix[last]).abs();
                if dist[z][x] < (dist[last][x] + d_p) / (1.0 + eps) {
                    lx.push(z);
                    last = z;
                }
                q += dir;
            }
        }
        lx.sort_unstable();
        nearest.push(z0);
        sets.push(lx);
    }
    Ok(LandmarkSets {
        sets,
        nearest,
        dist,
        prefix,
    })
}

/// Brute-force check of the routing guarantee for a pair whose shortest
/// path intersects the landmark path: is there a landmark pair (u, v)
/// with d(x,u) + d_P(u,v) + d(v,y) <= (1+eps) d(x,y)?
pub fn pair_has_witness(lm: &LandmarkSets, x: usize, y: usize, eps: f64, dxy: f64) -> bool {
    for &u in &lm.sets[x] {
        for &v in &lm.sets[y] {
            let through = lm.dist[u][x] + lm.path_distance(u, v) + lm.dist[v][y];
            if through <= (1.0 + eps) * dxy * (1.0 + REL_TOL) {
                return true;
            }
        }
    }
    false
}

/// Does some shortest x-y path intersect the path? True iff a path vertex
/// z has d(x,z) + d(z,y) = d(x,y) up to tolerance.
pub fn pair_crosses_path(lm: &LandmarkSets, x: usize, y: usize, dxy: f64) -> bool {
    (0..lm.dist.len()).any(|k| lm.dist[k][x] + lm.dist[k][y] <= dxy * (1.0 + REL_TOL))
}
