//! Exhaustive distortion verification for tree covers.
//!
//! Verification is exact and exhaustive over all pairs: for every tree an
//! O(N) preprocessing pass (root distances + Euler-tour LCA) makes each
//! tree-path query O(1), so a cover of `k` trees over `n` points costs
//! O(n^2 k) total. Trees are processed in parallel; the max/min reductions
//! are order-independent, so the report is deterministic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;
use crate::tree::{TreeCover, TreeDistanceIndex, TreeKind};
use crate::REL_TOL;

/// One offending pair in the worst-offender list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorstPair {
    pub x: usize,
    pub y: usize,
    /// Best (minimum over trees) distortion achieved for this pair.
    pub distortion: f64,
}

/// A domination violation: some tree path is shorter than the metric
/// distance beyond tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominationViolation {
    pub tree: usize,
    pub x: usize,
    pub y: usize,
    pub tree_distance: f64,
    pub metric_distance: f64,
}

/// Result of verifying a cover against a metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionReport {
    pub num_points: usize,
    pub num_trees: usize,
    pub domination_ok: bool,
    pub num_domination_violations: usize,
    /// At most 100 sample violations, ordered by (tree, x, y).
    pub domination_violations: Vec<DominationViolation>,
    /// max over pairs of (min over trees of d_T(x,y)/d(x,y)).
    pub plain_distortion: f64,
    /// For Ramsey covers: max over points x of (min over trees of
    /// max over y of d_T(x,y)/d(x,y)).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramsey_distortion: Option<f64>,
    /// For Ramsey covers: the optimal home-tree assignment induced by the
    /// verification (lowest tree index on ties).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_home_tree: Option<Vec<usize>>,
    pub claimed_distortion: f64,
    pub claimed_met: bool,
    /// Top 10 pairs by best-achieved distortion, descending.
    pub worst_pairs: Vec<WorstPair>,
}

impl DistortionReport {
    /// The distortion the cover is judged by: ramsey for Ramsey covers,
    /// plain otherwise.
    pub fn effective_distortion(&self) -> f64 {
        self.ramsey_distortion.unwrap_or(self.plain_distortion)
    }

    /// CSV histogram of per-pair best distortions (`bin_lo,bin_hi,count`).
    pub fn histogram_csv(pair_distortions: &[f64], bins: usize) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("bin_lo,bin_hi,count\n");
        if pair_distortions.is_empty() || bins == 0 {
            return out;
        }
        let lo = pair_distortions.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = pair_distortions
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
        let mut counts = vec![0usize; bins];
        for &d in pair_distortions {
            let b = (((d - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        for (b, c) in counts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{}",
                lo + width * b as f64,
                lo + width * (b + 1) as f64,
                c
            );
        }
        out
    }
}

#[inline]
fn pair_index(x: usize, y: usize) -> usize {
    // x > y
    x * (x - 1) / 2 + y
}

/// Fold accumulator: per-pair best ratios plus violations, merged across
/// worker chunks by elementwise min (order-independent, so deterministic).
struct Acc {
    best: Vec<f64>,
    violations: Vec<DominationViolation>,
}

impl Acc {
    fn new(num_pairs: usize) -> Self {
        Self {
            best: vec![f64::INFINITY; num_pairs],
            violations: Vec::new(),
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        for (b, o) in self.best.iter_mut().zip(other.best.iter()) {
            *b = b.min(*o);
        }
        self.violations.extend(other.violations);
        self
    }
}

/// Verify a cover exhaustively against its source metric.
///
/// Errors if any tree's point set differs from the metric's point set, or
/// if a Ramsey cover lacks a home-tree assignment.
pub fn verify_cover(cover: &TreeCover, m: &FiniteMetric) -> Result<DistortionReport> {
    let n = m.len();
    if cover.trees.is_empty() {
        return Err(Error::CoverMismatch("cover has no trees".into()));
    }
    for (t, tree) in cover.trees.iter().enumerate() {
        let pts = tree.points();
        if pts.len() != n || pts.iter().enumerate().any(|(i, &p)| i != p) {
            return Err(Error::CoverMismatch(format!(
                "tree {t} covers {} of {n} metric points",
                pts.len()
            )));
        }
    }
    if cover.kind == TreeKind::Ramsey {
        match &cover.home_tree {
            Some(h) if h.len() == n => {}
            _ => {
                return Err(Error::CoverMismatch(
                    "ramsey cover lacks a home-tree assignment".into(),
                ))
            }
        }
    }
    let num_pairs = n * (n - 1) / 2;

    let acc = cover
        .trees
        .par_iter()
        .enumerate()
        .fold(
            || Acc::new(num_pairs),
            |mut acc, (t, tree)| {
                let index = TreeDistanceIndex::build(tree).expect("validated tree");
                let node_of: Vec<usize> = (0..n)
                    .map(|p| index.node_of_point(p).expect("point set checked"))
                    .collect();
                for x in 1..n {
                    let nx = node_of[x];
                    for y in 0..x {
                        let d = m.dist(x, y);
                        let dt = index.node_distance(nx, node_of[y]);
                        if dt < d * (1.0 - REL_TOL) {
                            acc.violations.push(DominationViolation {
                                tree: t,
                                x,
                                y,
                                tree_distance: dt,
                                metric_distance: d,
                            });
                        }
                        let idx = pair_index(x, y);
                        acc.best[idx] = acc.best[idx].min(dt / d);
                    }
                }
                acc
            },
        )
        .reduce(|| Acc::new(num_pairs), Acc::merge);
    let best = acc.best;
    let plain_distortion = if n < 2 {
        1.0
    } else {
        best.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    };

    let (ramsey_distortion, optimal_home_tree) = if cover.kind == TreeKind::Ramsey {
        // Ramsey covers keep few trees, so per-tree row maxima are cheap.
        let row_max: Vec<Vec<f64>> = cover
            .trees
            .par_iter()
            .map(|tree| {
                let index = TreeDistanceIndex::build(tree).expect("validated tree");
                let node_of: Vec<usize> = (0..n)
                    .map(|p| index.node_of_point(p).expect("point set checked"))
                    .collect();
                let mut row = vec![0.0f64; n];
                for x in 1..n {
                    for y in 0..x {
                        let r = index.node_distance(node_of[x], node_of[y]) / m.dist(x, y);
                        row[x] = row[x].max(r);
                        row[y] = row[y].max(r);
                    }
                }
                row
            })
            .collect();
        let mut home = vec![0usize; n];
        let mut worst = if n < 2 { 1.0 } else { f64::NEG_INFINITY };
        for x in 0..n {
            let mut best_tree = 0;
            let mut best_val = f64::INFINITY;
            for (t, row) in row_max.iter().enumerate() {
                if row[x] < best_val {
                    best_val = row[x];
                    best_tree = t;
                }
            }
            home[x] = best_tree;
            if n >= 2 {
                worst = worst.max(best_val);
            }
        }
        (Some(worst), Some(home))
    } else {
        (None, None)
    };

    let mut violations = acc.violations;
    let num_domination_violations = violations.len();
    violations.sort_by_key(|v| (v.tree, v.x, v.y));
    violations.truncate(100);

    let mut worst_pairs: Vec<WorstPair> = (1..n)
        .flat_map(|x| (0..x).map(move |y| (x, y)))
        .map(|(x, y)| WorstPair {
            x,
            y,
            distortion: best[pair_index(x, y)],
        })
        .collect();
    worst_pairs.sort_by(|a, b| {
        b.distortion
            .partial_cmp(&a.distortion)
            .unwrap()
            .then(a.x.cmp(&b.x))
            .then(a.y.cmp(&b.y))
    });
    worst_pairs.truncate(10);

    let effective = ramsey_distortion.unwrap_or(plain_distortion);
    let claimed_met = num_domination_violations == 0
        && effective <= cover.claimed_distortion * (1.0 + REL_TOL);

    Ok(DistortionReport {
        num_points: n,
        num_trees: cover.trees.len(),
        domination_ok: num_domination_violations == 0,
        num_domination_violations,
        domination_violations: violations,
        plain_distortion,
        ramsey_distortion,
        optimal_home_tree,
        claimed_distortion: cover.claimed_distortion,
        claimed_met,
        worst_pairs,
    })
}

/// Per-pair best distortions, for histogram export.
pub fn pair_distortions(cover: &TreeCover, m: &FiniteMetric) -> Result<Vec<f64>> {
    let n = m.len();
    let num_pairs = n * (n - 1) / 2;
    let mut best = vec![f64::INFINITY; num_pairs];
    for tree in &cover.trees {
        let index = TreeDistanceIndex::build(tree)?;
        for x in 1..n {
            for y in 0..x {
                let dt = index.point_distance(x, y)?;
                let idx = pair_index(x, y);
                best[idx] = best[idx].min(dt / m.dist(x, y));
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::shapes;
    use crate::metric::metric_from_graph;
    use crate::tree::{NodeKind, TreeEmbedding};

    fn path_tree(n: usize) -> TreeEmbedding {
        TreeEmbedding::new(
            (0..n).map(NodeKind::Point).collect(),
            (0..n - 1).map(|i| (i, i + 1, 1.0)).collect(),
            Some(0),
        )
        .unwrap()
    }

    #[test]
    fn path_metric_covered_by_its_own_tree_has_distortion_one() {
        let m = shapes::line_metric(3, 1.0);
        let cover = TreeCover::plain(vec![path_tree(3)], 1.0);
        let rep = verify_cover(&cover, &m).unwrap();
        assert_eq!(rep.plain_distortion, 1.0);
        assert!(rep.domination_ok);
        assert!(rep.claimed_met);
    }

    #[test]
    fn uniform_metric_star_tree_has_distortion_two() {
        // Enumerating the 3 pairs: (a,b) and (a,c) are exact, (b,c) walks
        // through the center for distortion 2.
        let m = shapes::uniform_metric(3, 1.0);
        let star = TreeEmbedding::new(
            vec![NodeKind::Point(0), NodeKind::Point(1), NodeKind::Point(2)],
            vec![(0, 1, 1.0), (0, 2, 1.0)],
            Some(0),
        )
        .unwrap();
        let cover = TreeCover::plain(vec![star], 2.0);
        let rep = verify_cover(&cover, &m).unwrap();
        assert_eq!(rep.plain_distortion, 2.0);
        assert!(rep.domination_ok);
        assert_eq!(rep.worst_pairs[0].distortion, 2.0);
        assert_eq!((rep.worst_pairs[0].x, rep.worst_pairs[0].y), (2, 1));
    }

    #[test]
    fn four_cycle_spanning_path_distortion_three() {
        // Dropping edge {0,3} of the unit 4-cycle: d_T(0,3) = 3, d(0,3) = 1.
        let m = metric_from_graph(&shapes::cycle_graph(4)).unwrap();
        let cover = TreeCover::plain(vec![path_tree(4)], 3.0);
        let rep = verify_cover(&cover, &m).unwrap();
        assert_eq!(rep.plain_distortion, 3.0);
        assert_eq!((rep.worst_pairs[0].x, rep.worst_pairs[0].y), (3, 0));
    }

    #[test]
    fn mismatched_point_sets_rejected() {
        let m = shapes::line_metric(4, 1.0);
        let cover = TreeCover::plain(vec![path_tree(3)], 1.0);
        assert!(matches!(
            verify_cover(&cover, &m),
            Err(Error::CoverMismatch(_))
        ));
    }

    #[test]
    fn domination_violation_detected() {
        let m = shapes::line_metric(3, 1.0);
        // Tree with an edge shorter than the metric distance it spans.
        let t = TreeEmbedding::new(
            vec![NodeKind::Point(0), NodeKind::Point(1), NodeKind::Point(2)],
            vec![(0, 1, 1.0), (1, 2, 0.5)],
            Some(0),
        )
        .unwrap();
        let cover = TreeCover::plain(vec![t], 1.0);
        let rep = verify_cover(&cover, &m).unwrap();
        assert!(!rep.domination_ok);
        assert!(rep.num_domination_violations >= 1);
        assert!(!rep.claimed_met);
    }

    #[test]
    fn adding_a_tree_never_increases_plain_distortion() {
        let m = metric_from_graph(&shapes::cycle_graph(6)).unwrap();
        let spanning_path = TreeEmbedding::new(
            (0..6).map(NodeKind::Point).collect(),
            (0..5).map(|i| (i, i + 1, 1.0)).collect(),
            Some(0),
        )
        .unwrap();
        // A second tree that shortcuts the worst pair (0,5).
        let star = TreeEmbedding::new(
            (0..6).map(NodeKind::Point).collect(),
            (1..6).map(|i| (0, i, m.dist(0, i))).collect(),
            Some(0),
        )
        .unwrap();
        let one = verify_cover(&TreeCover::plain(vec![spanning_path.clone()], 9.0), &m).unwrap();
        let two =
            verify_cover(&TreeCover::plain(vec![spanning_path, star], 9.0), &m).unwrap();
        assert!(two.plain_distortion <= one.plain_distortion);
    }

    #[test]
    fn pair_distortions_agree_with_report() {
        let m = metric_from_graph(&shapes::cycle_graph(6)).unwrap();
        let spanning_path = TreeEmbedding::new(
            (0..6).map(NodeKind::Point).collect(),
            (0..5).map(|i| (i, i + 1, 1.0)).collect(),
            Some(0),
        )
        .unwrap();
        let cover = TreeCover::plain(vec![spanning_path], 9.0);
        let rep = verify_cover(&cover, &m).unwrap();
        let pairs = pair_distortions(&cover, &m).unwrap();
        let max = pairs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max, rep.plain_distortion);
        let csv = DistortionReport::histogram_csv(&pairs, 4);
        assert_eq!(csv.lines().count(), 5);
        let total: usize = csv
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
            .sum();
        assert_eq!(total, pairs.len());
    }

    #[test]
    fn ramsey_distortion_at_least_plain() {
        let m = metric_from_graph(&shapes::cycle_graph(5)).unwrap();
        let trees: Vec<TreeEmbedding> = (0..2)
            .map(|s| {
                TreeEmbedding::new(
                    (0..5).map(NodeKind::Point).collect(),
                    (0..5)
                        .filter(|&i| i != s)
                        .map(|i| (i, (i + 1) % 5, 1.0))
                        .collect(),
                    Some(0),
                )
                .unwrap()
            })
            .collect();
        let plain = verify_cover(&TreeCover::plain(trees.clone(), 10.0), &m).unwrap();
        let ramsey =
            verify_cover(&TreeCover::ramsey(trees, 10.0, vec![0; 5]), &m).unwrap();
        assert!(ramsey.ramsey_distortion.unwrap() >= plain.plain_distortion - 1e-12);
    }
}
