//! Balanced separators made of shortest-path-tree root paths.
//!
//! For a connected planar graph, a separator of at most three root-to-
//! vertex paths of one shortest-path tree always exists with every
//! remaining component at most half the graph. The search here is direct:
//! root the tree at a low-eccentricity vertex, scan all single root paths,
//! then all pairs, then the best pair plus one more path, taking the
//! candidate that minimizes (largest component, separator size). Every
//! accepted path is certified to be a shortest path, and the balance is a
//! hard assertion, so a search miss can never produce a wrong artifact.

use crate::error::{Error, Result};
use crate::metric::WeightedGraph;
use crate::planar::embedding::is_planar;

/// A separator: an ordered list of vertex paths plus their vertex union.
/// Paths later in the list are shortest paths of the graph with earlier
/// paths removed.
#[derive(Debug, Clone)]
pub struct PathSeparator {
    pub paths: Vec<Vec<usize>>,
    pub removed: Vec<usize>,
}

/// Find a balanced path separator of a connected planar graph.
///
/// Errors with `NonPlanar` if the planarity test fails and with
/// `SeparatorFailed` if no three-path candidate achieves balance (which
/// signals a bug rather than an expected outcome).
pub fn planar_separator(g: &WeightedGraph) -> Result<PathSeparator> {
    let undirected: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v, _)| (u, v)).collect();
    if !is_planar(g.len(), &undirected) {
        return Err(Error::NonPlanar(format!(
            "planarity test failed on {} vertices / {} edges",
            g.len(),
            undirected.len()
        )));
    }
    separator_unchecked(g)
}

/// The search itself, planarity already established by the caller.
pub(crate) fn separator_unchecked(g: &WeightedGraph) -> Result<PathSeparator> {
    let n = g.len();
    if n == 1 {
        return Ok(PathSeparator {
            paths: Vec::new(),
            removed: Vec::new(),
        });
    }
    let adj = g.adjacency();
    // A path graph is its own one-path separator.
    if let Some(path) = as_path_graph(&adj) {
        return Ok(PathSeparator {
            removed: {
                let mut r = path.clone();
                r.sort_unstable();
                r
            },
            paths: vec![path],
        });
    }

    // Roots in order of eccentricity; almost always the first works.
    let mut ecc: Vec<(f64, usize)> = (0..n)
        .map(|v| {
            let d = g.sssp(v);
            (d.iter().cloned().fold(0.0, f64::max), v)
        })
        .collect();
    ecc.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let roots: Vec<usize> = ecc.iter().take(8).map(|&(_, v)| v).collect();

    for root in roots {
        if let Some(sep) = search_from_root(g, &adj, root) {
            return Ok(sep);
        }
    }
    Err(Error::SeparatorFailed(format!(
        "no balanced root-path separator found on {n} vertices"
    )))
}

fn as_path_graph(adj: &[Vec<(usize, f64)>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut ends = Vec::new();
    for (v, a) in adj.iter().enumerate() {
        match a.len() {
            1 => ends.push(v),
            2 => {}
            _ => return None,
        }
    }
    if ends.len() != 2 {
        return None;
    }
    let mut path = vec![ends[0]];
    let mut prev = usize::MAX;
    let mut cur = ends[0];
    while path.len() < n {
        let next = adj[cur].iter().map(|&(v, _)| v).find(|&v| v != prev)?;
        path.push(next);
        prev = cur;
        cur = next;
    }
    Some(path)
}

/// Scratch buffers for candidate evaluation.
struct Scratch {
    in_sep: Vec<u32>,
    visited: Vec<u32>,
    stamp: u32,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            in_sep: vec![0; n],
            visited: vec![0; n],
            stamp: 0,
        }
    }

    /// Size of the largest component of G minus the union of the given
    /// paths, plus the union's size.
    fn evaluate(&mut self, adj: &[Vec<(usize, f64)>], paths: &[&[usize]]) -> (usize, usize) {
        self.stamp += 1;
        let stamp = self.stamp;
        let mut sep_size = 0;
        for path in paths {
            for &v in *path {
                if self.in_sep[v] != stamp {
                    self.in_sep[v] = stamp;
                    sep_size += 1;
                }
            }
        }
        let n = adj.len();
        let mut largest = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if self.in_sep[s] == stamp || self.visited[s] == stamp {
                continue;
            }
            let mut size = 0;
            self.visited[s] = stamp;
            stack.push(s);
            while let Some(u) = stack.pop() {
                size += 1;
                for &(v, _) in &adj[u] {
                    if self.in_sep[v] != stamp && self.visited[v] != stamp {
                        self.visited[v] = stamp;
                        stack.push(v);
                    }
                }
            }
            largest = largest.max(size);
        }
        (largest, sep_size)
    }
}

fn search_from_root(
    g: &WeightedGraph,
    adj: &[Vec<(usize, f64)>],
    root: usize,
) -> Option<PathSeparator> {
    let n = g.len();
    let half = n / 2;
    let parent = sssp_parents(adj, root);
    // Root paths, indexed by endpoint.
    let paths: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            let mut p = vec![u];
            let mut w = u;
            while parent[w] != usize::MAX {
                w = parent[w];
                p.push(w);
            }
            p.reverse();
            p
        })
        .collect();
    let mut scratch = Scratch::new(n);

    // Single root paths.
    let mut best: Option<(usize, usize, Vec<usize>)> = None; // (largest, size, endpoints)
    for u in 0..n {
        let (largest, size) = scratch.evaluate(adj, &[&paths[u]]);
        if largest <= half && better(&best, largest, size) {
            best = Some((largest, size, vec![u]));
        }
    }
    if let Some((_, _, endpoints)) = &best {
        return Some(assemble(g, &paths, endpoints));
    }

    // Pairs of root paths.
    let mut best_pair: Option<(usize, usize, Vec<usize>)> = None;
    for u in 0..n {
        for v in u + 1..n {
            let (largest, size) = scratch.evaluate(adj, &[&paths[u], &paths[v]]);
            if better(&best_pair, largest, size) {
                best_pair = Some((largest, size, vec![u, v]));
            }
            if largest <= half && better(&best, largest, size) {
                best = Some((largest, size, vec![u, v]));
            }
        }
    }
    if let Some((_, _, endpoints)) = &best {
        return Some(assemble(g, &paths, endpoints));
    }

    // Best pair plus one more root path.
    let (_, _, pair) = best_pair?;
    for w in 0..n {
        if pair.contains(&w) {
            continue;
        }
        let (largest, size) =
            scratch.evaluate(adj, &[&paths[pair[0]], &paths[pair[1]], &paths[w]]);
        if largest <= half && better(&best, largest, size) {
            best = Some((largest, size, vec![pair[0], pair[1], w]));
        }
    }
    best.map(|(_, _, endpoints)| assemble(g, &paths, &endpoints))
}

fn better(best: &Option<(usize, usize, Vec<usize>)>, largest: usize, size: usize) -> bool {
    match best {
        None => true,
        Some((bl, bs, _)) => largest < *bl || (largest == *bl && size < *bs),
    }
}

/// Turn chosen root paths into the staged separator: each successive path
/// is trimmed to the residual graph (vertices already removed drop out,
/// splitting a root path into maximal runs, each still a shortest path of
/// the residual graph because the run's endpoints inherit the tree path).
fn assemble(g: &WeightedGraph, paths: &[Vec<usize>], endpoints: &[usize]) -> PathSeparator {
    let mut removed: Vec<usize> = Vec::new();
    let mut out_paths: Vec<Vec<usize>> = Vec::new();
    let mut in_removed = vec![false; g.len()];
    for &u in endpoints {
        let mut run: Vec<usize> = Vec::new();
        for &v in &paths[u] {
            if in_removed[v] {
                if !run.is_empty() {
                    out_paths.push(std::mem::take(&mut run));
                }
            } else {
                in_removed[v] = true;
                removed.push(v);
                run.push(v);
            }
        }
        if !run.is_empty() {
            out_paths.push(run);
        }
    }
    removed.sort_unstable();
    PathSeparator {
        paths: out_paths,
        removed,
    }
}

/// Dijkstra parents with deterministic tie-breaking (first settled wins;
/// heap ties broken by vertex index). Nonnegative distances order the same
/// as their raw IEEE bits, so the heap key is just `to_bits`.
fn sssp_parents(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<usize> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((0u64, src)));
    while let Some(Reverse((bits, u))) = heap.pop() {
        let d = f64::from_bits(bits);
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = u;
                heap.push(Reverse((nd.to_bits(), v)));
            }
        }
    }
    parent
}

/// Components of the graph with a vertex set removed, as sorted vertex
/// lists (sorted by smallest member).
pub fn components_without(g: &WeightedGraph, removed: &[usize]) -> Vec<Vec<usize>> {
    let n = g.len();
    let adj = g.adjacency();
    let mut banned = vec![false; n];
    for &v in removed {
        banned[v] = true;
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for s in 0..n {
        if banned[s] || seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !banned[v] && !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}
