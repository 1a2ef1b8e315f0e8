//! Ramsey tree covers with few trees via iterative extraction.
//!
//! Each extraction round samples a hierarchy of random ball-carved
//! partitions over the whole space, cut into a nested 2-HST. The points
//! of the working set that are padded at every scale form the extracted
//! set Z: the tree preserves all their distances to everyone within a
//! factor proportional to the padding parameter. Rounds repeat with fresh
//! seeds until |Z| >= |S|^(1 - 1/alpha); survivors continue to the next
//! round. The final survivors are embedded by a scaled single-linkage
//! (subdominant) ultrametric with distortion at most |S|-1 on themselves,
//! extended to the whole space by nearest-survivor attachment with an
//! exact domination repair pass.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;
use crate::partition::{carve_subset, cut_hierarchy, BoundedPartition};
use crate::rng::stream;
use crate::tree::{hst_from_ultrametric, HstNode, HstTree, TreeCover};
use crate::verify::{verify_cover, DistortionReport};

/// Padding-divisor escalation ladder: balls of radius
/// Delta_i / (divisor * alpha) must survive carving. Small divisors give
/// tighter trees, so each is tried before escalating to an easier one.
const PAD_DIVISORS: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Seeds tried per divisor stage.
const RETRIES_PER_STAGE: usize = 6;

/// One extraction round.
#[derive(Debug, Clone)]
pub struct RamseyStep {
    /// The working set the round started from.
    pub surviving: Vec<usize>,
    /// Extracted subset, padded at every scale.
    pub extracted: Vec<usize>,
    /// Dominating ultrametric over the whole space.
    pub tree: HstTree,
    /// Parameter the round ran with.
    pub alpha: f64,
    /// Exhaustively measured max over extracted x all pairs of d_T/d.
    pub alpha_actual: f64,
    /// Seeds consumed before the size bound held.
    pub retries: usize,
    /// Padding divisor that succeeded.
    pub pad_divisor: f64,
}

/// Extract a large subset of `s` that one random ultrametric handles well.
///
/// Retries with fresh derived seeds (escalating the padding divisor) until
/// |Z| >= |S|^(1 - 1/alpha); errors with the best attempt size if the cap
/// trips.
pub fn ramsey_ultrametric(
    m: &FiniteMetric,
    s: &[usize],
    alpha: f64,
    seed: u64,
    round: u64,
) -> Result<RamseyStep> {
    if s.is_empty() {
        return Err(Error::Parameter("ramsey extraction from empty set".into()));
    }
    let alpha = alpha.max(1.0);
    let required = (s.len() as f64).powf(1.0 - 1.0 / alpha);
    let lambda = (crate::metric::doubling_constant_estimate(m) as f64).max(2.0);
    let mut best_len = 0usize;
    for attempt in 0..(RETRIES_PER_STAGE * PAD_DIVISORS.len()) {
        let pad_divisor = PAD_DIVISORS[attempt / RETRIES_PER_STAGE];
        let mut rng = stream(seed, "ramsey-extract", round * 1_000 + attempt as u64);
        let (levels, padded) = sample_hierarchy(m, alpha, pad_divisor, lambda, &mut rng);
        let extracted: Vec<usize> = s.iter().copied().filter(|&x| padded[x]).collect();
        best_len = best_len.max(extracted.len());
        if (extracted.len() as f64) + 1e-9 >= required {
            let tree = hierarchy_to_hst(m, &levels);
            let alpha_actual = measure_extracted(m, &levels, &extracted);
            return Ok(RamseyStep {
                surviving: s.to_vec(),
                extracted,
                tree,
                alpha,
                alpha_actual,
                retries: attempt,
                pad_divisor,
            });
        }
    }
    Err(Error::RamseyExtraction {
        attempts: RETRIES_PER_STAGE * PAD_DIVISORS.len(),
        best: best_len,
        required,
    })
}

/// Sample the cut hierarchy over all of X and mark points padded at every
/// scale (ball of radius Delta_i / (pad_divisor * alpha) inside the
/// level-i cluster).
fn sample_hierarchy(
    m: &FiniteMetric,
    alpha: f64,
    pad_divisor: f64,
    lambda: f64,
    rng: &mut impl Rng,
) -> (Vec<BoundedPartition>, Vec<bool>) {
    let n = m.len();
    let all: Vec<usize> = (0..n).collect();
    let d_max = m.d_max();
    let d_min = m.d_min();
    if n == 1 || d_max == 0.0 {
        return (
            vec![BoundedPartition {
                delta: 1.0,
                cluster_of: vec![0; n],
                centers: vec![0],
            }],
            vec![true; n],
        );
    }
    let num_levels = ((2.0 * d_max / d_min).log2().ceil() as usize).max(1) + 1;
    let mut raw = Vec::with_capacity(num_levels);
    for j in 0..num_levels {
        let delta = d_max / (j as f64).exp2();
        let rate = crate::partition::RATE_MULT * lambda.ln() / delta;
        let (cluster_of, centers) = carve_subset(m, &all, delta, rate, rng);
        raw.push(BoundedPartition {
            delta,
            cluster_of,
            centers,
        });
    }
    let levels = cut_hierarchy(m, &raw).levels;
    let theta = 1.0 / (pad_divisor * alpha);
    let padded: Vec<bool> = (0..n)
        .map(|x| {
            levels.iter().all(|level| {
                let radius = theta * level.delta;
                let cx = level.cluster_of[x];
                (0..n)
                    .filter(|&z| m.dist(x, z) <= radius)
                    .all(|z| level.cluster_of[z] == cx)
            })
        })
        .collect();
    (levels, padded)
}

/// The dominating HST of a cut hierarchy: cluster nodes labeled with
/// their level scale, points as leaves, root label d_max.
fn hierarchy_to_hst(m: &FiniteMetric, levels: &[BoundedPartition]) -> HstTree {
    let n = m.len();
    if n == 1 {
        return HstTree::leaf(0);
    }
    let mut nodes = vec![HstNode {
        label: m.d_max(),
        children: Vec::new(),
        point: None,
    }];
    let mut ids: Vec<Vec<usize>> = Vec::with_capacity(levels.len());
    for (j, level) in levels.iter().enumerate() {
        let label = level.delta.min(m.d_max());
        let mut level_ids = vec![usize::MAX; level.num_clusters()];
        for c in 0..level.num_clusters() {
            let id = nodes.len();
            nodes.push(HstNode {
                label,
                children: Vec::new(),
                point: None,
            });
            level_ids[c] = id;
            let parent = if j == 0 {
                0
            } else {
                ids[j - 1][levels[j - 1].cluster_of[level.centers[c]]]
            };
            nodes[parent].children.push(id);
        }
        ids.push(level_ids);
    }
    let finest = &levels[levels.len() - 1];
    for p in 0..n {
        let leaf = nodes.len();
        nodes.push(HstNode {
            label: 0.0,
            children: Vec::new(),
            point: Some(p),
        });
        let parent = ids[levels.len() - 1][finest.cluster_of[p]];
        nodes[parent].children.push(leaf);
    }
    HstTree::new(nodes, 0, 2.0).expect("cut hierarchy yields a valid HST")
}

/// Max over extracted x and all y of d_T(x,y)/d(x,y), via separation
/// levels of the cut hierarchy.
fn measure_extracted(m: &FiniteMetric, levels: &[BoundedPartition], extracted: &[usize]) -> f64 {
    let n = m.len();
    let mut worst: f64 = if extracted.is_empty() { 1.0 } else { 0.0 };
    for &x in extracted {
        for y in 0..n {
            if y == x {
                continue;
            }
            let mut label = m.d_max();
            for level in levels {
                if level.cluster_of[x] == level.cluster_of[y] {
                    label = level.delta.min(label);
                } else {
                    break;
                }
            }
            worst = worst.max(label / m.dist(x, y));
        }
    }
    worst.max(1.0)
}

/// Construction log for a Ramsey cover run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RamseyStepLog {
    pub surviving: usize,
    pub extracted: usize,
    pub alpha: f64,
    pub alpha_actual: f64,
    pub retries: usize,
    pub pad_divisor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RamseyReport {
    pub k: usize,
    pub alpha: f64,
    pub steps: Vec<RamseyStepLog>,
    pub last_tree_size: usize,
    pub verified_ramsey_distortion: f64,
}

/// Build a k-tree Ramsey cover: k-1 extraction rounds plus a final
/// scaled single-linkage ultrametric over the survivors, extended to all
/// points. Every point's home tree is the round that extracted it.
pub fn build_ramsey_cover(
    m: &FiniteMetric,
    k: usize,
    seed: u64,
) -> Result<(TreeCover, RamseyReport, DistortionReport)> {
    if k == 0 {
        return Err(Error::Parameter("ramsey cover needs k >= 1".into()));
    }
    let n = m.len();
    if n < 2 {
        return Err(Error::DegenerateMetric { needed: 2, got: n });
    }
    let nf = n as f64;
    let alpha = (nf.powf(1.0 / k as f64) * nf.ln().powf(1.0 - 1.0 / k as f64)).max(1.0);

    let mut home = vec![usize::MAX; n];
    let mut trees: Vec<HstTree> = Vec::new();
    let mut steps: Vec<RamseyStepLog> = Vec::new();
    let mut survivors: Vec<usize> = (0..n).collect();
    for round in 0..k.saturating_sub(1) {
        if survivors.is_empty() {
            break;
        }
        let step = ramsey_ultrametric(m, &survivors, alpha, seed, round as u64)?;
        // The extraction-size contract, asserted per step.
        assert!(
            step.extracted.len() as f64 + 1e-9
                >= (survivors.len() as f64).powf(1.0 - 1.0 / step.alpha),
            "|Z| = {} below |S|^(1-1/alpha) = {}",
            step.extracted.len(),
            (survivors.len() as f64).powf(1.0 - 1.0 / step.alpha)
        );
        let tree_index = trees.len();
        for &x in &step.extracted {
            home[x] = tree_index;
        }
        let extracted_set: std::collections::HashSet<usize> =
            step.extracted.iter().copied().collect();
        survivors.retain(|x| !extracted_set.contains(x));
        steps.push(RamseyStepLog {
            surviving: step.surviving.len(),
            extracted: step.extracted.len(),
            alpha: step.alpha,
            alpha_actual: step.alpha_actual,
            retries: step.retries,
            pad_divisor: step.pad_divisor,
        });
        trees.push(step.tree);
    }
    // Survivor shrinkage bound from the per-step contract.
    let bound = nf * (1.0 - nf.powf(-1.0 / alpha)).powi(k as i32 - 1);
    assert!(
        survivors.len() as f64 <= bound + 1e-9,
        "survivors {} exceed n(1-n^(-1/alpha))^(k-1) = {bound}",
        survivors.len()
    );

    let last_tree_size = survivors.len();
    if !survivors.is_empty() {
        let tree_index = trees.len();
        for &x in &survivors {
            home[x] = tree_index;
        }
        trees.push(last_tree(m, &survivors));
    }
    while trees.len() < k {
        let copy = trees.last().expect("at least one tree built").clone();
        trees.push(copy);
    }
    debug_assert!(home.iter().all(|&h| h != usize::MAX));

    let embeddings: Result<Vec<_>> = trees.iter().map(|h| h.to_tree()).collect();
    let mut cover = TreeCover::ramsey(embeddings?, f64::INFINITY, home);
    let mut verification = verify_cover(&cover, m)?;
    let achieved = verification
        .ramsey_distortion
        .expect("ramsey verification present");
    cover.claimed_distortion = achieved;
    verification.claimed_distortion = achieved;
    verification.claimed_met = verification.domination_ok;
    let report = RamseyReport {
        k,
        alpha,
        steps,
        last_tree_size,
        verified_ramsey_distortion: achieved,
    };
    Ok((cover, report, verification))
}

/// Final-survivor embedding: the subdominant (single-linkage) ultrametric
/// scaled by the smallest factor that dominates the survivor distances
/// (at most |S|-1), then extended to all points by nearest-survivor
/// attachment at height 2 d(x, S) with an exact one-pass domination
/// repair.
fn last_tree(m: &FiniteMetric, survivors: &[usize]) -> HstTree {
    let n = m.len();
    let s = survivors.len();
    if n == 1 {
        return HstTree::leaf(0);
    }
    // Single-linkage (minimax-path) distances within the survivors.
    let mut rho = vec![0.0f64; s * s];
    if s > 1 {
        // Prim-style: rho is the max edge on the path in the MST.
        let sub = |i: usize, j: usize| m.dist(survivors[i], survivors[j]);
        let mut in_tree = vec![false; s];
        let mut best_edge = vec![f64::INFINITY; s];
        let mut parent = vec![usize::MAX; s];
        best_edge[0] = 0.0;
        for _ in 0..s {
            let u = (0..s)
                .filter(|&u| !in_tree[u])
                .min_by(|&a, &b| best_edge[a].partial_cmp(&best_edge[b]).unwrap())
                .expect("some vertex remains");
            in_tree[u] = true;
            if parent[u] != usize::MAX {
                // rho(u, v) for all v already in the tree.
                let p = parent[u];
                for v in 0..s {
                    if in_tree[v] && v != u {
                        let through = rho[p * s + v].max(best_edge[u]);
                        rho[u * s + v] = through;
                        rho[v * s + u] = through;
                    }
                }
            }
            for v in 0..s {
                if !in_tree[v] && sub(u, v) < best_edge[v] {
                    best_edge[v] = sub(u, v);
                    parent[v] = u;
                }
            }
        }
    }
    // Smallest dominating scale; at most |S| - 1 because the minimax path
    // has at most |S| - 1 edges, each of length at most rho.
    let mut scale = 1.0f64;
    for i in 0..s {
        for j in 0..i {
            let d = m.dist(survivors[i], survivors[j]);
            scale = scale.max(d / rho[i * s + j]);
        }
    }
    debug_assert!(scale <= (s.max(2) - 1) as f64 + 1e-9);

    // Nearest survivor and attachment heights.
    let pos_of: std::collections::HashMap<usize, usize> = survivors
        .iter()
        .enumerate()
        .map(|(idx, &p)| (p, idx))
        .collect();
    let nearest: Vec<usize> = (0..n)
        .map(|x| {
            if pos_of.contains_key(&x) {
                pos_of[&x]
            } else {
                (0..s)
                    .min_by(|&a, &b| {
                        m.dist(x, survivors[a])
                            .partial_cmp(&m.dist(x, survivors[b]))
                            .unwrap()
                    })
                    .expect("survivors nonempty")
            }
        })
        .collect();
    let mut height: Vec<f64> = (0..n)
        .map(|x| {
            if pos_of.contains_key(&x) {
                0.0
            } else {
                2.0 * m.dist(x, survivors[nearest[x]])
            }
        })
        .collect();
    // One repair pass: any dominated pair raises the height of its first
    // endpoint; heights only grow, so earlier fixes stay fixed.
    let base = |x: usize, y: usize, height: &[f64]| -> f64 {
        let (sx, sy) = (nearest[x], nearest[y]);
        let b = if sx == sy { 0.0 } else { scale * rho[sx * s + sy] };
        b.max(height[x]).max(height[y])
    };
    for x in 0..n {
        for y in 0..x {
            let d = m.dist(x, y);
            if base(x, y, &height) < d {
                height[x] = height[x].max(d);
            }
        }
    }
    let points: Vec<usize> = (0..n).collect();
    hst_from_ultrametric(&points, |i, j| {
        if i == j {
            0.0
        } else {
            base(i, j, &height)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::metric_from_graph;
    use crate::metric::shapes;
    use crate::tree::TreeDistanceIndex;

    fn random_euclidean(n: usize, seed: u64) -> FiniteMetric {
        let mut rng = stream(seed, "test-points", 0);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let dx = pts[i].0 - pts[j].0;
                    let dy = pts[i].1 - pts[j].1;
                    dist[i * n + j] = dx.hypot(dy).max(1e-6);
                }
            }
        }
        // Symmetrize exactly.
        for i in 0..n {
            for j in 0..i {
                let d = dist[i * n + j];
                dist[j * n + i] = d;
            }
        }
        FiniteMetric::new(n, dist).unwrap()
    }

    #[test]
    fn extraction_single_point_set() {
        let m = shapes::line_metric(6, 1.0);
        let step = ramsey_ultrametric(&m, &[3], 2.0, 1, 0).unwrap();
        assert_eq!(step.extracted, vec![3]);
        assert!(step.alpha_actual.is_finite());
    }

    #[test]
    fn extraction_uniform_metric_takes_everything() {
        // A uniform metric is an ultrametric: every point is padded and
        // the tree is exact.
        let m = shapes::uniform_metric(8, 1.0);
        let all: Vec<usize> = (0..8).collect();
        let step = ramsey_ultrametric(&m, &all, 2.0, 3, 0).unwrap();
        assert_eq!(step.extracted.len(), 8);
        assert!((step.alpha_actual - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn extraction_eight_cycle_size_bound() {
        let m = metric_from_graph(&shapes::cycle_graph(8)).unwrap();
        let all: Vec<usize> = (0..8).collect();
        let step = ramsey_ultrametric(&m, &all, 3.0, 11, 0).unwrap();
        let required = 8f64.powf(1.0 - 1.0 / 3.0);
        assert!(step.extracted.len() as f64 >= required - 1e-9);
        // Exhaustive Z x X re-check of the reported distortion against the
        // realized tree.
        let t = step.tree.to_tree().unwrap();
        let index = TreeDistanceIndex::build(&t).unwrap();
        for &z in &step.extracted {
            for y in 0..8 {
                if y == z {
                    continue;
                }
                let ratio = index.point_distance(z, y).unwrap() / m.dist(z, y);
                assert!(
                    ratio <= step.alpha_actual * (1.0 + 1e-9),
                    "pair ({z},{y}): {ratio} > {}",
                    step.alpha_actual
                );
                assert!(ratio >= 1.0 - 1e-9, "domination broken on ({z},{y})");
            }
        }
    }

    #[test]
    fn two_point_cover_is_exact() {
        let m = shapes::line_metric(2, 5.0);
        let (cover, _, verification) = build_ramsey_cover(&m, 1, 2).unwrap();
        assert_eq!(cover.trees.len(), 1);
        assert_eq!(verification.ramsey_distortion, Some(1.0));
    }

    #[test]
    fn uniform_sixteen_single_tree_exact() {
        let m = shapes::uniform_metric(16, 1.0);
        let (_, report, verification) = build_ramsey_cover(&m, 1, 4).unwrap();
        assert_eq!(report.last_tree_size, 16);
        assert!(verification.ramsey_distortion.unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn last_tree_distortion_bound_on_survivors() {
        // The scaled single-linkage ultrametric stays within |S| - 1 on
        // survivor pairs, exhaustively.
        let m = random_euclidean(24, 9);
        let survivors: Vec<usize> = (0..24).step_by(2).collect();
        let h = last_tree(&m, &survivors);
        let t = h.to_tree().unwrap();
        let index = TreeDistanceIndex::build(&t).unwrap();
        let bound = (survivors.len() - 1) as f64;
        for (a, &x) in survivors.iter().enumerate() {
            for &y in &survivors[..a] {
                let ratio = index.point_distance(x, y).unwrap() / m.dist(x, y);
                assert!(ratio <= bound * (1.0 + 1e-9), "ratio {ratio} > {bound}");
                assert!(ratio >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn random_metric_k2_cover_verifies() {
        let m = random_euclidean(64, 17);
        let (cover, report, verification) = build_ramsey_cover(&m, 2, 6).unwrap();
        assert!(verification.domination_ok);
        assert_eq!(cover.trees.len(), 2);
        assert_eq!(
            cover.claimed_distortion,
            verification.ramsey_distortion.unwrap()
        );
        for step in &report.steps {
            assert!(
                step.extracted as f64
                    >= (step.surviving as f64).powf(1.0 - 1.0 / step.alpha) - 1e-9
            );
        }
    }

    #[test]
    fn optimal_home_assignment_achieves_verified_distortion() {
        let m = random_euclidean(32, 23);
        let (cover, _, verification) = build_ramsey_cover(&m, 3, 8).unwrap();
        assert!(cover.home_tree.is_some());
        let verified = verification.ramsey_distortion.unwrap();
        assert!(verified >= 1.0);
        // Every point's optimal home tree bounds all its pairs by the
        // verified ramsey distortion; recomputed here from scratch.
        let homes = verification.optimal_home_tree.as_ref().unwrap();
        for x in 0..m.len() {
            let t = &cover.trees[homes[x]];
            let index = TreeDistanceIndex::build(t).unwrap();
            for y in 0..m.len() {
                if y == x {
                    continue;
                }
                let ratio = index.point_distance(x, y).unwrap() / m.dist(x, y);
                assert!(
                    ratio <= verified * (1.0 + 1e-9),
                    "pair ({x},{y}) in home tree {}: {ratio} > {verified}",
                    homes[x]
                );
            }
        }
    }
}
