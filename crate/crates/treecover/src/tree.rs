//! Tree embeddings, ultrametrics and their Steiner realization.
//!
//! A [`TreeEmbedding`] is an edge-weighted tree whose node set contains all
//! metric points (Steiner nodes allowed). An [`HstTree`] is a labeled
//! rooted tree representing an ultrametric: the distance between two leaves
//! is the label of their least common ancestor. [`HstTree::to_tree`]
//! realizes an HST as a Steiner tree whose path metric restricted to the
//! leaves equals the LCA-label metric exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;

/// A node of a tree embedding: either a metric point or a Steiner node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Carries the index of a metric point; each point appears exactly once.
    Point(usize),
    Steiner,
}

/// An edge-weighted tree over the metric points plus optional Steiner nodes.
#[derive(Debug, Clone)]
pub struct TreeEmbedding {
    nodes: Vec<NodeKind>,
    edges: Vec<(usize, usize, f64)>,
    root: Option<usize>,
}

impl TreeEmbedding {
    /// Validate and build: `edges.len() == nodes.len() - 1`, connected,
    /// positive weights, every metric point mapped at most once.
    pub fn new(
        nodes: Vec<NodeKind>,
        edges: Vec<(usize, usize, f64)>,
        root: Option<usize>,
    ) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::InvalidMetric("tree has no nodes".into()));
        }
        if edges.len() + 1 != n {
            return Err(Error::InvalidMetric(format!(
                "tree has {} nodes but {} edges",
                n,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &edges {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidMetric(format!("bad tree edge ({u},{v})")));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidMetric(format!(
                    "tree edge ({u},{v}) has non-positive weight {w}"
                )));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        if count != n {
            return Err(Error::InvalidMetric("tree is not connected".into()));
        }
        let mut point_seen = std::collections::HashSet::new();
        for node in &nodes {
            if let NodeKind::Point(p) = node {
                if !point_seen.insert(*p) {
                    return Err(Error::InvalidMetric(format!(
                        "metric point {p} appears more than once"
                    )));
                }
            }
        }
        Ok(Self { nodes, edges, root })
    }

    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    /// Node index of a metric point, if mapped.
    pub fn node_of_point(&self, point: usize) -> Option<usize> {
        self.nodes
            .iter()
            .position(|k| matches!(k, NodeKind::Point(p) if *p == point))
    }

    /// Sorted indices of the metric points present in this tree.
    pub fn points(&self) -> Vec<usize> {
        let mut ps: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|k| match k {
                NodeKind::Point(p) => Some(*p),
                NodeKind::Steiner => None,
            })
            .collect();
        ps.sort_unstable();
        ps
    }

    /// Length of the unique tree path between two metric points.
    pub fn tree_distance(&self, x: usize, y: usize) -> Result<f64> {
        let index = TreeDistanceIndex::build(self)?;
        let nx = index
            .node_of_point(x)
            .ok_or(Error::UnmappedPoint(x))?;
        let ny = index
            .node_of_point(y)
            .ok_or(Error::UnmappedPoint(y))?;
        Ok(index.node_distance(nx, ny))
    }

    /// Render in the tree text format: header `nodes edges`, node lines
    /// `id kind [point_label]`, edge lines `u v w`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.nodes.len(), self.edges.len());
        for (id, node) in self.nodes.iter().enumerate() {
            match node {
                NodeKind::Point(p) => {
                    let _ = writeln!(out, "{id} point {p}");
                }
                NodeKind::Steiner => {
                    let _ = writeln!(out, "{id} steiner");
                }
            }
        }
        for &(u, v, w) in &self.edges {
            let _ = writeln!(out, "{u} {v} {w}");
        }
        out
    }

    /// Parse the tree text format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let head: Vec<&str> = first.split_whitespace().collect();
        if head.len() != 2 {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header 'nodes edges'".into(),
            });
        }
        let nn: usize = head[0].parse().map_err(|e| Error::Parse {
            line: 1,
            msg: format!("bad node count: {e}"),
        })?;
        let ne: usize = head[1].parse().map_err(|e| Error::Parse {
            line: 1,
            msg: format!("bad edge count: {e}"),
        })?;
        let mut nodes = vec![NodeKind::Steiner; nn];
        for _ in 0..nn {
            let (idx, line) = lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: "missing node lines".into(),
            })?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: String| Error::Parse { line: idx + 1, msg };
            if toks.len() < 2 {
                return Err(bad("expected 'id kind [point]'".into()));
            }
            let id: usize = toks[0].parse().map_err(|e| bad(format!("bad id: {e}")))?;
            if id >= nn {
                return Err(bad(format!("node id {id} out of range")));
            }
            nodes[id] = match toks[1] {
                "point" => {
                    if toks.len() != 3 {
                        return Err(bad("point node needs a point label".into()));
                    }
                    let p: usize = toks[2]
                        .parse()
                        .map_err(|e| bad(format!("bad point label: {e}")))?;
                    NodeKind::Point(p)
                }
                "steiner" => NodeKind::Steiner,
                other => return Err(bad(format!("unknown node kind '{other}'"))),
            };
        }
        let mut edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (idx, line) = lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: "missing edge lines".into(),
            })?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: String| Error::Parse { line: idx + 1, msg };
            if toks.len() != 3 {
                return Err(bad("expected 'u v w'".into()));
            }
            let u: usize = toks[0].parse().map_err(|e| bad(format!("bad id: {e}")))?;
            let v: usize = toks[1].parse().map_err(|e| bad(format!("bad id: {e}")))?;
            let w: f64 = toks[2]
                .parse()
                .map_err(|e| bad(format!("bad weight: {e}")))?;
            edges.push((u, v, w));
        }
        Self::new(nodes, edges, None)
    }
}

/// Preprocessed index answering tree-path length queries in O(1) after an
/// O(N log N) build: root distances plus an Euler-tour sparse-table LCA.
pub struct TreeDistanceIndex {
    point_node: std::collections::HashMap<usize, usize>,
    root_dist: Vec<f64>,
    first_occurrence: Vec<usize>,
    euler_depth: Vec<u32>,
    euler_node: Vec<usize>,
    sparse: Vec<Vec<u32>>, // sparse[k][i] = index of min-depth entry in window 2^k at i
}

impl TreeDistanceIndex {
    pub fn build(tree: &TreeEmbedding) -> Result<Self> {
        let n = tree.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &tree.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let root = tree.root.unwrap_or(0);
        let mut root_dist = vec![0.0; n];
        let mut first_occurrence = vec![usize::MAX; n];
        let mut euler_depth = Vec::with_capacity(2 * n);
        let mut euler_node = Vec::with_capacity(2 * n);
        // Iterative DFS building the Euler tour; children visited in
        // adjacency order so the accumulation order is deterministic.
        let mut stack: Vec<(usize, usize, u32, bool)> = vec![(root, usize::MAX, 0, false)];
        while let Some((u, parent, depth, closing)) = stack.pop() {
            if closing {
                euler_depth.push(depth);
                euler_node.push(u);
                continue;
            }
            if first_occurrence[u] == usize::MAX {
                first_occurrence[u] = euler_node.len();
            }
            euler_depth.push(depth);
            euler_node.push(u);
            for &(v, w) in adj[u].iter().rev() {
                if v != parent {
                    root_dist[v] = root_dist[u] + w;
                    stack.push((u, parent, depth, true));
                    stack.push((v, u, depth + 1, false));
                }
            }
        }
        if first_occurrence.contains(&usize::MAX) {
            return Err(Error::InvalidMetric("tree is not connected".into()));
        }
        // Sparse table over the Euler depths.
        let m = euler_depth.len();
        let levels = (usize::BITS - m.leading_zeros()) as usize;
        let mut sparse: Vec<Vec<u32>> = Vec::with_capacity(levels);
        sparse.push((0..m as u32).collect());
        let mut k = 1;
        while (1 << k) <= m {
            let prev = &sparse[k - 1];
            let half = 1 << (k - 1);
            let row: Vec<u32> = (0..=(m - (1 << k)))
                .map(|i| {
                    let a = prev[i];
                    let b = prev[i + half];
                    if euler_depth[a as usize] <= euler_depth[b as usize] {
                        a
                    } else {
                        b
                    }
                })
                .collect();
            sparse.push(row);
            k += 1;
        }
        let mut point_node = std::collections::HashMap::new();
        for (idx, node) in tree.nodes.iter().enumerate() {
            if let NodeKind::Point(p) = node {
                point_node.insert(*p, idx);
            }
        }
        Ok(Self {
            point_node,
            root_dist,
            first_occurrence,
            euler_depth,
            euler_node,
            sparse,
        })
    }

    pub fn node_of_point(&self, point: usize) -> Option<usize> {
        self.point_node.get(&point).copied()
    }

    fn lca(&self, u: usize, v: usize) -> usize {
        let (mut a, mut b) = (self.first_occurrence[u], self.first_occurrence[v]);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let len = b - a + 1;
        let k = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let x = self.sparse[k][a];
        let y = self.sparse[k][b + 1 - (1 << k)];
        let best = if self.euler_depth[x as usize] <= self.euler_depth[y as usize] {
            x
        } else {
            y
        };
        self.euler_node[best as usize]
    }

    /// Path length between two nodes: `rd[u] + rd[v] - 2 rd[lca]`.
    pub fn node_distance(&self, u: usize, v: usize) -> f64 {
        let l = self.lca(u, v);
        self.root_dist[u] + self.root_dist[v] - 2.0 * self.root_dist[l]
    }

    /// Path length between two metric points.
    pub fn point_distance(&self, x: usize, y: usize) -> Result<f64> {
        let nx = self.node_of_point(x).ok_or(Error::UnmappedPoint(x))?;
        let ny = self.node_of_point(y).ok_or(Error::UnmappedPoint(y))?;
        Ok(self.node_distance(nx, ny))
    }
}

/// A node of an HST: internal nodes carry labels, leaves carry points.
#[derive(Debug, Clone)]
pub struct HstNode {
    pub label: f64,
    pub children: Vec<usize>,
    pub point: Option<usize>,
}

/// A labeled rooted tree representing an ultrametric. Leaves are metric
/// points with label 0; internal labels are nonincreasing root-to-leaf;
/// the induced distance of two leaves is the label of their LCA.
#[derive(Debug, Clone)]
pub struct HstTree {
    nodes: Vec<HstNode>,
    root: usize,
    /// Separation factor: consecutive labels drop by at least this ratio
    /// when > 1. Purely descriptive.
    pub mu: f64,
}

impl HstTree {
    /// Validate label monotonicity and leaf structure.
    pub fn new(nodes: Vec<HstNode>, root: usize, mu: f64) -> Result<Self> {
        if nodes.is_empty() || root >= nodes.len() {
            return Err(Error::InvalidHst("empty tree or bad root".into()));
        }
        let mut seen_points = std::collections::HashSet::new();
        for (i, node) in nodes.iter().enumerate() {
            if node.label < 0.0 || !node.label.is_finite() {
                return Err(Error::InvalidHst(format!(
                    "node {i} has invalid label {}",
                    node.label
                )));
            }
            if node.children.is_empty() {
                match node.point {
                    Some(p) => {
                        if node.label != 0.0 {
                            return Err(Error::InvalidHst(format!(
                                "leaf {i} has nonzero label {}",
                                node.label
                            )));
                        }
                        if !seen_points.insert(p) {
                            return Err(Error::InvalidHst(format!(
                                "point {p} appears at more than one leaf"
                            )));
                        }
                    }
                    None => {
                        return Err(Error::InvalidHst(format!("leaf {i} carries no point")))
                    }
                }
            }
            for &c in &node.children {
                if c >= nodes.len() {
                    return Err(Error::InvalidHst(format!("node {i} has bad child {c}")));
                }
                if nodes[c].label > node.label {
                    return Err(Error::InvalidHst(format!(
                        "child label {} exceeds parent label {}",
                        nodes[c].label, node.label
                    )));
                }
            }
        }
        Ok(Self { nodes, root, mu })
    }

    /// Single-leaf tree.
    pub fn leaf(point: usize) -> Self {
        Self {
            nodes: vec![HstNode {
                label: 0.0,
                children: Vec::new(),
                point: Some(point),
            }],
            root: 0,
            mu: 1.0,
        }
    }

    pub fn nodes(&self) -> &[HstNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_empty()).count()
    }

    /// The induced ultrametric distance: label of the leaves' LCA.
    pub fn lca_distance(&self, x: usize, y: usize) -> Result<f64> {
        let mut leaf_of = std::collections::HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.children.is_empty() {
                leaf_of.insert(node.point.expect("validated leaf"), i);
            }
        }
        let lx = *leaf_of.get(&x).ok_or(Error::UnmappedPoint(x))?;
        let ly = *leaf_of.get(&y).ok_or(Error::UnmappedPoint(y))?;
        if lx == ly {
            return Ok(0.0);
        }
        // Walk up from the root: the LCA label is found by recursive descent.
        fn descend(nodes: &[HstNode], u: usize, lx: usize, ly: usize) -> Option<f64> {
            let mut holder = None;
            for &c in &nodes[u].children {
                let has_x = subtree_contains(nodes, c, lx);
                let has_y = subtree_contains(nodes, c, ly);
                if has_x && has_y {
                    holder = Some(c);
                    break;
                }
            }
            match holder {
                Some(c) => descend(nodes, c, lx, ly),
                None => Some(nodes[u].label),
            }
        }
        fn subtree_contains(nodes: &[HstNode], u: usize, target: usize) -> bool {
            if u == target {
                return true;
            }
            nodes[u]
                .children
                .iter()
                .any(|&c| subtree_contains(nodes, c, target))
        }
        descend(&self.nodes, self.root, lx, ly)
            .ok_or_else(|| Error::InvalidHst("leaves not under the root".into()))
    }

    /// Standard Steiner realization: the edge from a node with label `L` to
    /// a child with label `l` gets weight `(L - l) / 2`, so the path metric
    /// restricted to leaves equals the LCA-label metric exactly.
    ///
    /// Unary internal chains are spliced out (the half-gap weights
    /// telescope) and equal-label internal merges are contracted, so the
    /// result never carries zero-weight edges. An internal label-0 node
    /// over two leaves would mean two points at distance zero; that fails
    /// validation downstream.
    pub fn to_tree(&self) -> Result<TreeEmbedding> {
        if self.nodes.len() == 1 {
            let p = self.nodes[0]
                .point
                .ok_or_else(|| Error::InvalidHst("single node carries no point".into()))?;
            return TreeEmbedding::new(vec![NodeKind::Point(p)], Vec::new(), Some(0));
        }
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        // Stack entries: (hst node, emitted parent id, accumulated weight
        // from that emitted parent). Unary chains accumulate weight.
        let mut stack: Vec<(usize, usize, f64)> = vec![(self.root, usize::MAX, 0.0)];
        while let Some((mut u, parent_out, mut w)) = stack.pop() {
            // Splice unary internal chains.
            let mut node = &self.nodes[u];
            while node.children.len() == 1 {
                let c = node.children[0];
                if self.nodes[c].label > node.label {
                    return Err(Error::InvalidHst(format!(
                        "child label {} exceeds parent label {}",
                        self.nodes[c].label, node.label
                    )));
                }
                w += (node.label - self.nodes[c].label) / 2.0;
                u = c;
                node = &self.nodes[u];
            }
            let is_leaf = node.children.is_empty();
            let out_id = if parent_out != usize::MAX && w == 0.0 && !is_leaf {
                // Equal-label internal merge.
                parent_out
            } else {
                let id = nodes.len();
                nodes.push(if is_leaf {
                    NodeKind::Point(node.point.expect("validated leaf"))
                } else {
                    NodeKind::Steiner
                });
                if parent_out != usize::MAX {
                    edges.push((parent_out, id, w));
                }
                id
            };
            for &c in node.children.iter().rev() {
                if self.nodes[c].label > node.label {
                    return Err(Error::InvalidHst(format!(
                        "child label {} exceeds parent label {}",
                        self.nodes[c].label, node.label
                    )));
                }
                stack.push((c, out_id, (node.label - self.nodes[c].label) / 2.0));
            }
        }
        TreeEmbedding::new(nodes, edges, Some(0))
    }
}

/// Build an HST from an explicit ultrametric distance matrix.
///
/// Single-linkage merging over pairs sorted by distance: for an
/// ultrametric this reconstructs the LCA-label tree exactly (the merge
/// threshold of two points is their distance). `rho` is indexed by local
/// positions `0..points.len()`; leaf `i` carries metric point `points[i]`.
pub fn hst_from_ultrametric(points: &[usize], rho: impl Fn(usize, usize) -> f64) -> HstTree {
    let k = points.len();
    if k == 1 {
        return HstTree::leaf(points[0]);
    }
    let mut pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .collect();
    pairs.sort_by(|&(a, b), &(c, d)| {
        rho(a, b)
            .partial_cmp(&rho(c, d))
            .unwrap()
            .then(a.cmp(&c))
            .then(b.cmp(&d))
    });
    let mut nodes: Vec<HstNode> = points
        .iter()
        .map(|&p| HstNode {
            label: 0.0,
            children: Vec::new(),
            point: Some(p),
        })
        .collect();
    let mut dsu = Dsu::new(k);
    let mut comp_root: Vec<usize> = (0..k).collect(); // dsu root -> hst node
    let mut merges = 0;
    for (i, j) in pairs {
        let (ri, rj) = (dsu.find(i), dsu.find(j));
        if ri == rj {
            continue;
        }
        let node = HstNode {
            label: rho(i, j),
            children: vec![comp_root[ri], comp_root[rj]],
            point: None,
        };
        let id = nodes.len();
        nodes.push(node);
        dsu.union(ri, rj);
        comp_root[dsu.find(ri)] = id;
        merges += 1;
        if merges == k - 1 {
            break;
        }
    }
    let root = comp_root[dsu.find(0)];
    HstTree::new(nodes, root, 1.0).expect("constructed HST is valid")
}

/// Tree cover kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeKind {
    Plain,
    Ramsey,
}

/// An ordered collection of dominating trees with a claimed distortion.
#[derive(Debug, Clone)]
pub struct TreeCover {
    pub trees: Vec<TreeEmbedding>,
    pub kind: TreeKind,
    pub claimed_distortion: f64,
    /// For Ramsey covers: the home tree index of every metric point.
    pub home_tree: Option<Vec<usize>>,
}

impl TreeCover {
    pub fn plain(trees: Vec<TreeEmbedding>, claimed_distortion: f64) -> Self {
        Self {
            trees,
            kind: TreeKind::Plain,
            claimed_distortion,
            home_tree: None,
        }
    }

    pub fn ramsey(
        trees: Vec<TreeEmbedding>,
        claimed_distortion: f64,
        home_tree: Vec<usize>,
    ) -> Self {
        Self {
            trees,
            kind: TreeKind::Ramsey,
            claimed_distortion,
            home_tree: Some(home_tree),
        }
    }
}

/// Complete a forest over the metric points to a single dominating tree:
/// component representatives (lowest point index each) are connected to the
/// first component's representative with edges weighted by the true metric
/// distance. Every edge weight equals (or exceeds) a true distance, so any
/// tree path dominates by the triangle inequality.
///
/// `edges` are point-indexed; the result spans all `m.len()` points.
pub fn complete_forest(
    m: &FiniteMetric,
    edges: Vec<(usize, usize, f64)>,
) -> Result<TreeEmbedding> {
    let n = m.len();
    let mut dsu = Dsu::new(n);
    for &(u, v, _) in &edges {
        if !dsu.union(u, v) {
            return Err(Error::InvalidMetric(
                "forest completion given a cyclic edge set".into(),
            ));
        }
    }
    // Lowest point index per component.
    let mut rep: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for p in 0..n {
        let r = dsu.find(p);
        let e = rep.entry(r).or_insert(p);
        if p < *e {
            *e = p;
        }
    }
    let reps: Vec<usize> = rep.values().copied().collect();
    let mut all_edges = edges;
    let base = reps[0];
    for &r in &reps[1..] {
        all_edges.push((base, r, m.dist(base, r)));
    }
    let nodes = (0..n).map(NodeKind::Point).collect();
    TreeEmbedding::new(nodes, all_edges, Some(base))
}

/// Plain union-find with path compression.
pub struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}
