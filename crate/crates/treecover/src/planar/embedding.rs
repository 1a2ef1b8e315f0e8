//! Planarity testing by incremental face embedding (the classic
//! Demoucron-Malgrange-Pertuiset method).
//!
//! The graph is split into biconnected components; each component is grown
//! from an initial cycle by repeatedly embedding a path of some fragment
//! (bridge) into a face whose boundary contains all of the fragment's
//! attachment vertices. A fragment with no admissible face certifies
//! non-planarity; if at every step fragments with exactly one admissible
//! face are embedded first, the process succeeds on every planar input.
//!
//! Quadratic, which is plenty at desk scale; no coordinates or rotation
//! systems are produced, only the yes/no answer.

/// Test planarity of a simple undirected graph.
pub fn is_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    if n <= 4 {
        return true;
    }
    if edges.len() > 3 * n - 6 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for comp in biconnected_components(n, &adj) {
        if !bicomp_planar(&comp) {
            return false;
        }
    }
    true
}

/// Biconnected components as edge lists (Tarjan's edge-stack algorithm).
fn biconnected_components(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<(usize, usize)>> {
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0usize;
    let mut edge_stack: Vec<(usize, usize)> = Vec::new();
    let mut comps = Vec::new();

    // Iterative DFS; frames carry (vertex, parent, next-neighbor index).
    for start in 0..n {
        if disc[start] != usize::MAX {
            continue;
        }
        let mut frames: Vec<(usize, usize, usize)> = vec![(start, usize::MAX, 0)];
        disc[start] = timer;
        low[start] = timer;
        timer += 1;
        while let Some(&mut (u, parent, ref mut idx)) = frames.last_mut() {
            if *idx < adj[u].len() {
                let v = adj[u][*idx];
                *idx += 1;
                if v == parent {
                    continue;
                }
                if disc[v] == usize::MAX {
                    edge_stack.push((u, v));
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    frames.push((v, u, 0));
                } else if disc[v] < disc[u] {
                    edge_stack.push((u, v));
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                frames.pop();
                if let Some(&mut (p, _, _)) = frames.last_mut() {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        // (p, u) closes a biconnected component.
                        let mut comp = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            comp.push(e);
                            if e == (p, u) {
                                break;
                            }
                        }
                        comps.push(comp);
                    }
                }
            }
        }
    }
    comps
}

/// DMP on one biconnected component given by its edge list.
fn bicomp_planar(edges: &[(usize, usize)]) -> bool {
    // Compact the vertex ids.
    let mut ids: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let n = ids.len();
    if n <= 4 {
        return true;
    }
    if edges.len() > 3 * n - 6 {
        return false;
    }
    let local = |v: usize| ids.binary_search(&v).expect("id present");
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[local(u)].push(local(v));
        adj[local(v)].push(local(u));
    }

    let mut embedded_edge = std::collections::HashSet::new();
    let mut embedded_vertex = vec![false; n];
    let mut faces: Vec<Vec<usize>> = Vec::new();

    // Initial cycle via DFS back edge.
    let cycle = find_cycle(n, &adj).expect("biconnected components with >2 vertices have cycles");
    for w in cycle.windows(2) {
        embedded_edge.insert(key(w[0], w[1]));
    }
    embedded_edge.insert(key(cycle[cycle.len() - 1], cycle[0]));
    for &v in &cycle {
        embedded_vertex[v] = true;
    }
    faces.push(cycle.clone());
    faces.push(cycle);

    let total_edges = edges.len();
    while embedded_edge.len() < total_edges {
        let fragments = compute_fragments(n, &adj, &embedded_vertex, &embedded_edge);
        debug_assert!(!fragments.is_empty());
        // Admissible faces per fragment; embed a forced fragment first.
        let mut chosen: Option<(usize, usize)> = None; // (fragment, face)
        let mut best_count = usize::MAX;
        for (fi, frag) in fragments.iter().enumerate() {
            let mut admissible = None;
            let mut count = 0;
            for (face_id, face) in faces.iter().enumerate() {
                if frag
                    .attachments
                    .iter()
                    .all(|&a| face.contains(&a))
                {
                    count += 1;
                    if admissible.is_none() {
                        admissible = Some(face_id);
                    }
                }
            }
            if count == 0 {
                return false;
            }
            if count < best_count {
                best_count = count;
                chosen = Some((fi, admissible.expect("count > 0")));
                if count == 1 {
                    break;
                }
            }
        }
        let (fi, face_id) = chosen.expect("some fragment exists");
        let frag = &fragments[fi];
        let path = fragment_path(&adj, frag, &embedded_vertex);
        // Split the face along the path.
        let face = faces.swap_remove(face_id);
        let pa = face.iter().position(|&v| v == path[0]).expect("attachment on face");
        let pb = face
            .iter()
            .position(|&v| v == path[path.len() - 1])
            .expect("attachment on face");
        let arc = |from: usize, to: usize| -> Vec<usize> {
            let mut out = Vec::new();
            let mut i = from;
            loop {
                out.push(face[i]);
                if i == to {
                    break;
                }
                i = (i + 1) % face.len();
            }
            out
        };
        let interior: Vec<usize> = path[1..path.len() - 1].to_vec();
        let mut f1 = arc(pa, pb);
        f1.extend(interior.iter().rev());
        let mut f2 = arc(pb, pa);
        f2.extend(interior.iter());
        faces.push(f1);
        faces.push(f2);
        for w in path.windows(2) {
            embedded_edge.insert(key(w[0], w[1]));
        }
        for &v in &path {
            embedded_vertex[v] = true;
        }
    }
    true
}

#[inline]
fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Any cycle, as a vertex sequence without the closing repeat.
fn find_cycle(n: usize, adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; n];
    let mut state = vec![0u8; n]; // 0 unseen, 1 active, 2 done
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    state[0] = 1;
    while let Some(&mut (u, ref mut idx)) = stack.last_mut() {
        if *idx < adj[u].len() {
            let v = adj[u][*idx];
            *idx += 1;
            if v == parent[u] {
                continue;
            }
            if state[v] == 1 {
                // Back edge u -> v: cycle along parents.
                let mut cyc = vec![u];
                let mut w = u;
                while w != v {
                    w = parent[w];
                    cyc.push(w);
                }
                cyc.reverse();
                return Some(cyc);
            }
            if state[v] == 0 {
                parent[v] = u;
                state[v] = 1;
                stack.push((v, 0));
            }
        } else {
            state[u] = 2;
            stack.pop();
        }
    }
    None
}

struct Fragment {
    /// Embedded vertices the fragment touches.
    attachments: Vec<usize>,
    /// Non-embedded interior vertices (empty for a single chord).
    interior: Vec<usize>,
    /// A chord, when the fragment is one non-embedded edge between two
    /// embedded vertices.
    chord: Option<(usize, usize)>,
}

fn compute_fragments(
    n: usize,
    adj: &[Vec<usize>],
    embedded_vertex: &[bool],
    embedded_edge: &std::collections::HashSet<(usize, usize)>,
) -> Vec<Fragment> {
    let mut fragments = Vec::new();
    // Components of G minus embedded vertices.
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if embedded_vertex[s] || comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = next;
        let mut interior = vec![s];
        let mut attach = std::collections::BTreeSet::new();
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if embedded_vertex[v] {
                    attach.insert(v);
                } else if comp[v] == usize::MAX {
                    comp[v] = next;
                    interior.push(v);
                    stack.push(v);
                }
            }
        }
        interior.sort_unstable();
        fragments.push(Fragment {
            attachments: attach.into_iter().collect(),
            interior,
            chord: None,
        });
        next += 1;
    }
    // Chords: non-embedded edges between embedded vertices.
    for u in 0..n {
        if !embedded_vertex[u] {
            continue;
        }
        for &v in &adj[u] {
            if u < v && embedded_vertex[v] && !embedded_edge.contains(&key(u, v)) {
                fragments.push(Fragment {
                    attachments: vec![u, v],
                    interior: Vec::new(),
                    chord: Some((u, v)),
                });
            }
        }
    }
    fragments
}

/// A simple path through the fragment between two distinct attachments.
fn fragment_path(adj: &[Vec<usize>], frag: &Fragment, embedded_vertex: &[bool]) -> Vec<usize> {
    if let Some((u, v)) = frag.chord {
        return vec![u, v];
    }
    // BFS from one attachment through interior vertices to any other.
    let a = frag.attachments[0];
    let inside: std::collections::HashSet<usize> = frag.interior.iter().copied().collect();
    let mut prev = std::collections::HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    // Seed with interior neighbors of a.
    for &v in &adj[a] {
        if inside.contains(&v) && !prev.contains_key(&v) {
            prev.insert(v, a);
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if embedded_vertex[v] && v != a && frag.attachments.contains(&v) {
                // Found the far attachment; reconstruct.
                let mut path = vec![v, u];
                let mut w = u;
                while let Some(&p) = prev.get(&w) {
                    path.push(p);
                    w = p;
                    if p == a {
                        break;
                    }
                }
                path.reverse();
                return path;
            }
            if inside.contains(&v) && !prev.contains_key(&v) {
                prev.insert(v, u);
                queue.push_back(v);
            }
        }
    }
    unreachable!("fragment of a biconnected graph has two attachments");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Vec<(usize, usize)> {
        (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .collect()
    }

    fn complete_bipartite(a: usize, b: usize) -> Vec<(usize, usize)> {
        (0..a)
            .flat_map(|i| (0..b).map(move |j| (i, a + j)))
            .collect()
    }

    #[test]
    fn small_graphs_planar() {
        assert!(is_planar(1, &[]));
        assert!(is_planar(4, &complete(4)));
        assert!(is_planar(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]));
    }

    #[test]
    fn k5_not_planar() {
        assert!(!is_planar(5, &complete(5)));
    }

    #[test]
    fn k33_not_planar() {
        assert!(!is_planar(6, &complete_bipartite(3, 3)));
    }

    #[test]
    fn k5_subdivision_not_planar() {
        // Subdivide every edge of K5 once: still non-planar, and the edge
        // count is back under the Euler bound so DMP does the work.
        let mut edges = Vec::new();
        let mut next = 5;
        for (u, v) in complete(5) {
            edges.push((u, next));
            edges.push((next, v));
            next += 1;
        }
        assert!(!is_planar(next, &edges));
    }

    #[test]
    fn grid_planar() {
        let g = crate::metric::shapes::grid_graph(6, 7);
        let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v, _)| (u, v)).collect();
        assert!(is_planar(g.len(), &edges));
    }

    #[test]
    fn cycle_with_center_planar() {
        // Wheel graph W_8.
        let mut edges: Vec<(usize, usize)> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
        edges.extend((0..8).map(|i| (8, i)));
        assert!(is_planar(9, &edges));
    }

    #[test]
    fn petersen_not_planar() {
        let outer: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let inner: Vec<(usize, usize)> = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5)).collect();
        let spokes: Vec<(usize, usize)> = (0..5).map(|i| (i, 5 + i)).collect();
        let edges: Vec<(usize, usize)> =
            outer.into_iter().chain(inner).chain(spokes).collect();
        assert!(!is_planar(10, &edges));
    }

    #[test]
    fn two_blocks_each_tested() {
        // K5 hanging off a planar block through a cut vertex: non-planar.
        let mut edges = complete(5);
        edges.push((4, 5));
        edges.push((5, 6));
        edges.push((6, 4));
        assert!(!is_planar(7, &edges));
        // Two planar blocks: planar.
        let mut edges = complete(4);
        edges.push((3, 4));
        edges.push((4, 5));
        edges.push((5, 3));
        assert!(is_planar(6, &edges));
    }

    #[test]
    fn dense_planar_triangulation() {
        // Fan triangulation of a polygon plus the outer cycle: maximal
        // outerplanar, clearly planar.
        let n = 30;
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.extend((2..n - 1).map(|i| (0, i)));
        assert!(is_planar(n, &edges));
    }
}
