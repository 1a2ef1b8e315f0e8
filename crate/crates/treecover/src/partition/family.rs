//! Hierarchical partition families with certified padding.
//!
//! A family is a set of nested 2-hierarchies such that every (point,
//! scale) pair has its ball padded inside some hierarchy's cluster. Block
//! families cover a short scale range directly; the full-range assembly
//! interleaves two collections of scale blocks and glues consecutive
//! blocks of a collection bottom-up, re-forming each block cluster as a
//! union of finer clusters (selected by center membership) so diameters
//! stay bounded while padding survives with half the radius.
//!
//! Padding is never assumed: every family is checked exhaustively, and
//! uncovered (point, level) events trigger resampling of the offending
//! partitions, constructive-LLL style, until the check passes or the
//! iteration cap trips.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;
use crate::partition::{carve_subset, BoundedPartition, PartitionHierarchy, PartitionParams};
use crate::rng::stream;
use crate::tree::{HstNode, HstTree, TreeCover};

/// Resampling cap factor: the loop aborts after 1000 * k * B rounds.
const RESAMPLE_CAP_FACTOR: usize = 1000;

/// A family of nested hierarchies with a certified padding parameter.
#[derive(Debug, Clone)]
pub struct PaddedFamily {
    pub hierarchies: Vec<PartitionHierarchy>,
    /// Certified padding: for every point x and level i some hierarchy has
    /// B(x, eta * Delta_i) inside x's level-i cluster.
    pub eta: f64,
    /// Scale of level 0; level i is (delta0 / 2^i)-bounded.
    pub delta0: f64,
}

impl PaddedFamily {
    pub fn num_levels(&self) -> usize {
        self.hierarchies
            .first()
            .map(|h| h.levels.len())
            .unwrap_or(0)
    }

    /// The exhaustive Def-style padding check: every (point, level) must
    /// be padded in some hierarchy at radius `eta * Delta_i`. Returns the
    /// uncovered witnesses.
    pub fn padding_witnesses(&self, m: &FiniteMetric) -> Vec<(usize, usize)> {
        let n = m.len();
        let neighbors = sorted_neighbors(m);
        let mut bad = Vec::new();
        for i in 0..self.num_levels() {
            let radius = self.eta * self.delta0 / (i as f64).exp2();
            for x in 0..n {
                let covered = self.hierarchies.iter().any(|h| {
                    let part = &h.levels[i];
                    let cx = part.cluster_of[x];
                    neighbors[x]
                        .iter()
                        .take_while(|&&(_, d)| d <= radius)
                        .all(|&(z, _)| part.cluster_of[z as usize] == cx)
                });
                if !covered {
                    bad.push((x, i));
                }
            }
        }
        bad
    }
}

/// Construction log for family assembly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyReport {
    pub alpha: f64,
    pub lambda_estimate: usize,
    pub block_len: u32,
    pub glue_c: f64,
    pub pad_const: f64,
    pub eta: f64,
    pub family_size_per_collection: usize,
    pub num_hierarchies: usize,
    pub num_levels: usize,
    pub resampling_rounds: usize,
    /// Unpadded (point, level) witnesses after assembly; zero on success.
    pub padding_witnesses_remaining: usize,
    /// Lemma-style per-event failure bound (1 - delta^2)^k, logged for the
    /// expected-resampling sanity check.
    pub event_failure_bound: f64,
}

/// One block of hierarchies over scales `delta_top / 2^j`, j = 0..=levels-1,
/// as raw per-level partitions plus their nested cuts, all over X.
struct Block {
    /// cut[t][j]: nested common refinements of the raw samples 0..=j.
    cut: Vec<Vec<BoundedPartition>>,
    rounds: usize,
}

/// Sample a block of k hierarchies over the given scales and resample
/// until every (x, level) is padded (radius `pad_radius[j]`) in at least
/// one hierarchy.
#[allow(clippy::too_many_arguments)]
fn sample_block(
    m: &FiniteMetric,
    params: &PartitionParams,
    scales: &[f64],
    pad_radius: &[f64],
    k: usize,
    seed: u64,
    tag: &str,
) -> Result<Block> {
    let n = m.len();
    let levels = scales.len();
    // The net the partitions are built on; everything else inherits the
    // cluster of its nearest net point.
    let spacing = params.eta_net() * scales[levels - 1] / 4.0;
    let all: Vec<usize> = (0..n).collect();
    let net = crate::nets::greedy_net(m, spacing, &all);
    let nearest: Vec<usize> = (0..n)
        .map(|x| {
            let mut best = 0usize;
            for (idx, &z) in net.iter().enumerate() {
                if m.dist(x, z) < m.dist(x, net[best]) {
                    best = idx;
                }
            }
            best
        })
        .collect();

    // Distance-sorted neighbor lists make every padding test a prefix
    // walk: cheap at fine scales where balls are tiny.
    let neighbors = sorted_neighbors(m);

    let mut version = vec![vec![0u64; levels]; k];
    let carve = |t: usize, j: usize, ver: u64| -> BoundedPartition {
        let mut rng = stream(seed, &format!("{tag}/h{t}/l{j}"), ver);
        let (net_assign, centers) = carve_subset(m, &net, scales[j], params.rate(scales[j]), &mut rng);
        let cluster_of: Vec<usize> = (0..n).map(|x| net_assign[nearest[x]]).collect();
        BoundedPartition {
            delta: scales[j],
            cluster_of,
            centers,
        }
    };
    let mut raw: Vec<Vec<BoundedPartition>> = (0..k)
        .map(|t| (0..levels).map(|j| carve(t, j, 0)).collect())
        .collect();
    let mut cut: Vec<Vec<BoundedPartition>> = raw
        .iter()
        .map(|parts| crate::partition::cut_hierarchy(m, parts).levels)
        .collect();
    // pad[t][j][x]: cached per-hierarchy padding bitmaps.
    let mut pad: Vec<Vec<Vec<bool>>> = cut
        .iter()
        .map(|h| bitmap_all(&neighbors, h, pad_radius))
        .collect();

    let cap = RESAMPLE_CAP_FACTOR * k * levels.max(1);
    let mut rounds = 0usize;
    loop {
        let bad = first_unpadded(&pad, n, levels);
        let Some((x, j)) = bad else {
            return Ok(Block { cut, rounds });
        };
        rounds += 1;
        if rounds > cap {
            let all = collect_unpadded(&pad, n, levels);
            return Err(Error::ResamplingDiverged {
                rounds: rounds - 1,
                witnesses: all.len(),
                sample: all.into_iter().take(10).collect(),
            });
        }
        // The event depends on levels 0..=j of every hierarchy in which
        // (x, j) is unpadded; by construction of the event that is all of
        // them, so resample those variables and re-cut.
        for t in 0..k {
            if !pad[t][j][x] {
                for (l, row) in version[t].iter_mut().enumerate().take(j + 1) {
                    *row += 1;
                    raw[t][l] = carve(t, l, *row);
                }
                cut[t] = crate::partition::cut_hierarchy(m, &raw[t]).levels;
                pad[t] = bitmap_all(&neighbors, &cut[t], pad_radius);
            }
        }
    }
}

/// Per-point neighbor lists sorted by distance (the point itself first).
fn sorted_neighbors(m: &FiniteMetric) -> Vec<Vec<(u32, f64)>> {
    let n = m.len();
    (0..n)
        .map(|x| {
            let mut row: Vec<(u32, f64)> = (0..n).map(|z| (z as u32, m.dist(x, z))).collect();
            row.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            row
        })
        .collect()
}

fn bitmap_one(
    neighbors: &[Vec<(u32, f64)>],
    part: &BoundedPartition,
    radius: f64,
) -> Vec<bool> {
    neighbors
        .iter()
        .enumerate()
        .map(|(x, row)| {
            let cx = part.cluster_of[x];
            row.iter()
                .take_while(|&&(_, d)| d <= radius)
                .all(|&(z, _)| part.cluster_of[z as usize] == cx)
        })
        .collect()
}

fn bitmap_all(
    neighbors: &[Vec<(u32, f64)>],
    hierarchy: &[BoundedPartition],
    pad_radius: &[f64],
) -> Vec<Vec<bool>> {
    hierarchy
        .iter()
        .zip(pad_radius.iter())
        .map(|(part, &r)| bitmap_one(neighbors, part, r))
        .collect()
}

fn first_unpadded(pad: &[Vec<Vec<bool>>], n: usize, levels: usize) -> Option<(usize, usize)> {
    for j in 0..levels {
        for x in 0..n {
            if !pad.iter().any(|h| h[j][x]) {
                return Some((x, j));
            }
        }
    }
    None
}

fn collect_unpadded(pad: &[Vec<Vec<bool>>], n: usize, levels: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..levels {
        for x in 0..n {
            if !pad.iter().any(|h| h[j][x]) {
                out.push((x, j));
            }
        }
    }
    out
}

/// Block family over the range [delta, delta / 2^b]: k hierarchies whose
/// certified padding radius is (c'/alpha) * Delta_j at every level.
pub fn block_family(
    m: &FiniteMetric,
    delta: f64,
    b: u32,
    params: &PartitionParams,
    seed: u64,
) -> Result<(PaddedFamily, usize)> {
    if m.len() <= 1 {
        return Ok((trivial_family(m, delta), 0));
    }
    let levels: Vec<f64> = (0..=b).map(|j| delta / f64::from(j).exp2()).collect();
    let pad = params.pad_const / params.alpha;
    let pad_radius: Vec<f64> = levels.iter().map(|d| pad * d).collect();
    let block = sample_block(m, params, &levels, &pad_radius, params.family_size, seed, "hpf-block")?;
    let hierarchies: Vec<PartitionHierarchy> = block
        .cut
        .into_iter()
        .map(|levels| PartitionHierarchy {
            mu: 2.0,
            delta0: delta,
            levels,
        })
        .collect();
    Ok((
        PaddedFamily {
            hierarchies,
            eta: pad,
            delta0: delta,
        },
        block.rounds,
    ))
}

fn trivial_family(m: &FiniteMetric, delta: f64) -> PaddedFamily {
    let single = BoundedPartition {
        delta,
        cluster_of: vec![0; m.len()],
        centers: vec![0],
    };
    PaddedFamily {
        hierarchies: vec![PartitionHierarchy {
            mu: 2.0,
            delta0: delta,
            levels: vec![single],
        }],
        eta: 0.5,
        delta0: delta,
    }
}

/// Full-range family assembly.
///
/// When the whole scale ladder fits in one block the result is a single
/// block family. Otherwise two collections of k hierarchies are built
/// over interleaved scale blocks; within a collection, blocks are glued
/// bottom-up: block partitions are sampled at scales shrunk by c, then
/// each cluster is re-formed as the union of the glue-level clusters
/// whose centers it contains, which keeps level j exactly Delta_j-bounded
/// while padding keeps radius (c'/(2 alpha)) * Delta_j.
pub fn assemble_family(
    m: &FiniteMetric,
    alpha: f64,
    seed: u64,
) -> Result<(PaddedFamily, FamilyReport)> {
    let lambda_estimate = crate::metric::doubling_constant_estimate(m);
    let params = PartitionParams::for_alpha(alpha, lambda_estimate)?;
    let mut report = FamilyReport {
        alpha,
        lambda_estimate,
        block_len: params.block_len,
        glue_c: params.glue_c,
        pad_const: params.pad_const,
        eta: params.pad_const / alpha,
        family_size_per_collection: params.family_size,
        num_hierarchies: 0,
        num_levels: 0,
        resampling_rounds: 0,
        padding_witnesses_remaining: 0,
        event_failure_bound: (1.0 - params.delta * params.delta).powi(params.family_size as i32),
    };
    if m.len() <= 1 {
        let fam = trivial_family(m, 1.0);
        report.num_hierarchies = 1;
        report.num_levels = 1;
        return Ok((fam, report));
    }

    let b = params.block_len as usize;
    let phi = m.aspect_ratio()?;
    let l_real = phi.log2().ceil().max(1.0) as usize;

    if l_real <= b {
        // Single block covers every scale.
        let (fam, rounds) = block_family(m, m.d_max(), l_real as u32, &params, seed)?;
        report.resampling_rounds = rounds;
        report.num_hierarchies = fam.hierarchies.len();
        report.num_levels = fam.num_levels();
        report.eta = fam.eta;
        let witnesses = fam.padding_witnesses(m);
        assert!(
            witnesses.is_empty(),
            "single-block family left {} unpadded witnesses",
            witnesses.len()
        );
        return Ok((fam, report));
    }

    // Pad the ladder upward to a multiple of 2B levels; the extra top
    // scales exceed the diameter and are trivially padded.
    let m_levels = l_real.div_ceil(2 * b) * (2 * b);
    let delta_top = m.d_max() * ((m_levels - l_real) as f64).exp2();
    let scale_of = |j: usize| delta_top / (j as f64).exp2();
    let eta_family = params.eta_family();

    let mut total_rounds = 0usize;
    let mut hierarchies: Vec<PartitionHierarchy> = Vec::new();
    for (name, offset) in [("even", 0usize), ("odd", b)] {
        let collection = build_collection(
            m,
            &params,
            m_levels,
            offset,
            &scale_of,
            seed,
            name,
            &mut total_rounds,
        )?;
        hierarchies.extend(collection);
    }
    let fam = PaddedFamily {
        hierarchies,
        eta: eta_family,
        delta0: delta_top,
    };
    report.eta = eta_family;
    report.resampling_rounds = total_rounds;
    report.num_hierarchies = fam.hierarchies.len();
    report.num_levels = fam.num_levels();
    // The glue arithmetic guarantees this; an unpadded witness here is a
    // bug, not bad luck.
    let witnesses = fam.padding_witnesses(m);
    assert!(
        witnesses.is_empty(),
        "assembled family left {} unpadded witnesses, first: {:?}",
        witnesses.len(),
        witnesses.first()
    );
    for h in &fam.hierarchies {
        validate_ladder(m, h, &scale_of)?;
    }
    Ok((fam, report))
}

/// One collection: blocks start at `offset + 2lB`; the finest block
/// extends to the bottom of the ladder, coarser blocks glue onto the
/// structure below, gap levels copy the glue partition, and any levels
/// above the first block copy the top partition.
#[allow(clippy::too_many_arguments)]
fn build_collection(
    m: &FiniteMetric,
    params: &PartitionParams,
    m_levels: usize,
    offset: usize,
    scale_of: &impl Fn(usize) -> f64,
    seed: u64,
    name: &str,
    total_rounds: &mut usize,
) -> Result<Vec<PartitionHierarchy>> {
    let b = params.block_len as usize;
    let k = params.family_size;
    let n = m.len();
    let pad = params.pad_const / params.alpha;
    let starts: Vec<usize> = (0..)
        .map(|l| offset + 2 * b * l)
        .take_while(|&s| s + b <= m_levels)
        .collect();
    debug_assert!(!starts.is_empty());

    // levels_built[t][j] for j = built range, grown coarse-ward.
    let mut built: Vec<std::collections::BTreeMap<usize, BoundedPartition>> =
        vec![std::collections::BTreeMap::new(); k];

    for (l, &lo) in starts.iter().enumerate().rev() {
        let is_finest = l == starts.len() - 1;
        let hi = if is_finest { m_levels } else { lo + b };
        let shrink = if is_finest { 1.0 } else { params.glue_c };
        let scales: Vec<f64> = (lo..=hi).map(|j| scale_of(j) / shrink).collect();
        let pad_radius: Vec<f64> = scales.iter().map(|d| pad * d).collect();
        let tag = format!("hpf/{name}/b{l}");
        let block = sample_block(m, params, &scales, &pad_radius, k, seed, &tag)?;
        *total_rounds += block.rounds;

        for (t, built_t) in built.iter_mut().enumerate() {
            if is_finest {
                for (j, part) in block.cut[t].iter().enumerate() {
                    built_t.insert(lo + j, part.clone());
                }
            } else {
                let glue_level = lo + 2 * b;
                let glue = built_t
                    .get(&glue_level)
                    .expect("glue level built by the block below")
                    .clone();
                // Re-form each block level as unions of glue clusters.
                for (j, part) in block.cut[t].iter().enumerate() {
                    let mut cluster_of = vec![usize::MAX; n];
                    for x in 0..n {
                        let glue_cluster = glue.cluster_of[x];
                        let anchor = glue.centers[glue_cluster];
                        cluster_of[x] = part.cluster_of[anchor];
                    }
                    // Compact ids and recompute centers.
                    let mut remap: std::collections::HashMap<usize, usize> =
                        std::collections::HashMap::new();
                    let mut centers = Vec::new();
                    for slot in cluster_of.iter_mut() {
                        let next = remap.len();
                        let id = *remap.entry(*slot).or_insert(next);
                        if id == centers.len() {
                            centers.push(usize::MAX);
                        }
                        *slot = id;
                    }
                    for (p, &c) in cluster_of.iter().enumerate() {
                        if centers[c] == usize::MAX {
                            centers[c] = p;
                        }
                    }
                    let level = lo + j;
                    let reformed = BoundedPartition {
                        delta: scale_of(level),
                        cluster_of,
                        centers,
                    };
                    // Hard diameter assertion from the glue arithmetic.
                    reformed.validate(m).map_err(|e| {
                        Error::InvalidMetric(format!(
                            "re-formed level {level} of {tag}: {e}"
                        ))
                    })?;
                    built_t.insert(level, reformed);
                }
                // Gap levels copy the glue partition.
                for g in (hi + 1)..glue_level {
                    let mut copy = glue.clone();
                    copy.delta = glue.delta.min(scale_of(g));
                    built_t.insert(g, copy);
                }
            }
        }
    }
    // Top gap: copy the coarsest built partition upward.
    for built_t in built.iter_mut() {
        let (&top_level, top) = built_t.iter().next().expect("collection nonempty");
        let top = top.clone();
        for g in 0..top_level {
            let mut copy = top.clone();
            copy.delta = top.delta.min(scale_of(g));
            built_t.insert(g, copy);
        }
    }
    Ok(built
        .into_iter()
        .map(|built_t| {
            let levels: Vec<BoundedPartition> = built_t.into_values().collect();
            debug_assert_eq!(levels.len(), m_levels + 1);
            PartitionHierarchy {
                mu: 2.0,
                delta0: scale_of(0),
                levels,
            }
        })
        .collect())
}

fn validate_ladder(
    m: &FiniteMetric,
    h: &PartitionHierarchy,
    scale_of: &impl Fn(usize) -> f64,
) -> Result<()> {
    for (j, level) in h.levels.iter().enumerate() {
        if level.delta > scale_of(j) * (1.0 + crate::REL_TOL) {
            return Err(Error::InvalidMetric(format!(
                "level {j} delta {} exceeds ladder scale {}",
                level.delta,
                scale_of(j)
            )));
        }
    }
    h.validate(m)
}

/// One dominating 2-HST per hierarchy: a node per cluster labeled with the
/// level's scale bound, points as leaves under their finest cluster.
pub fn cover_from_family(fam: &PaddedFamily, m: &FiniteMetric) -> Result<TreeCover> {
    let mu = 2.0;
    let claimed = mu / fam.eta;
    let mut trees = Vec::with_capacity(fam.hierarchies.len());
    for h in &fam.hierarchies {
        let hst = hierarchy_to_hst(h, m)?;
        trees.push(hst.to_tree()?);
    }
    Ok(TreeCover::plain(trees, claimed))
}

/// The dominating 2-HST associated with a hierarchy: one node per
/// cluster labeled with its level's scale bound, points as leaves.
pub fn hierarchy_to_hst(h: &PartitionHierarchy, m: &FiniteMetric) -> Result<HstTree> {
    let n = m.len();
    if n == 1 {
        return Ok(HstTree::leaf(0));
    }
    let num_levels = h.levels.len();
    let mut nodes: Vec<HstNode> = Vec::new();
    // Root holds everything at the ladder top scale.
    let root_label = h.delta0.max(m.d_max());
    nodes.push(HstNode {
        label: root_label,
        children: Vec::new(),
        point: None,
    });
    // node id per (level, cluster).
    let mut ids: Vec<Vec<usize>> = Vec::with_capacity(num_levels);
    for (j, level) in h.levels.iter().enumerate() {
        let label = h.delta0 / h.mu.powi(j as i32);
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
                // The coarser cluster containing this one; refinement makes
                // it unique — take any member's parent cluster.
                let member = level.centers[c];
                ids[j - 1][h.levels[j - 1].cluster_of[member]]
            };
            nodes[parent].children.push(id);
        }
        ids.push(level_ids);
    }
    let finest = &h.levels[num_levels - 1];
    for p in 0..n {
        let leaf = nodes.len();
        nodes.push(HstNode {
            label: 0.0,
            children: Vec::new(),
            point: Some(p),
        });
        let parent = ids[num_levels - 1][finest.cluster_of[p]];
        nodes[parent].children.push(leaf);
    }
    HstTree::new(nodes, 0, h.mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::metric_from_graph;
    use crate::metric::shapes;
    use crate::verify::verify_cover;

    #[test]
    fn single_point_family_trivial() {
        let m = FiniteMetric::singleton();
        let (fam, report) = assemble_family(&m, 2.0, 1).unwrap();
        assert_eq!(fam.hierarchies.len(), 1);
        assert_eq!(report.resampling_rounds, 0);
        assert!(fam.padding_witnesses(&m).is_empty());
    }

    #[test]
    fn block_family_cycle32_passes_padding_check() {
        let m = metric_from_graph(&shapes::cycle_graph(32)).unwrap();
        let lambda = crate::metric::doubling_constant_estimate(&m);
        let params = PartitionParams::for_alpha(2.0, lambda).unwrap();
        let (fam, rounds) = block_family(&m, m.d_max(), 2, &params, 5).unwrap();
        assert!(fam.padding_witnesses(&m).is_empty());
        assert!(rounds <= 50, "resampling rounds {rounds}");
        for h in &fam.hierarchies {
            h.validate(&m).unwrap();
        }
    }

    #[test]
    fn assemble_unit_path64_all_scales_padded() {
        let m = shapes::line_metric(64, 1.0);
        let (fam, report) = assemble_family(&m, 2.0, 3).unwrap();
        // padding_witnesses empty is asserted inside assemble; re-assert
        // here as the visible contract.
        assert!(fam.padding_witnesses(&m).is_empty());
        assert!(report.resampling_rounds <= 50);
        for h in &fam.hierarchies {
            h.validate(&m).unwrap();
        }
    }

    #[test]
    fn cover_from_single_cluster_hierarchy_is_star() {
        let m = shapes::uniform_metric(5, 1.0);
        let fam = trivial_family(&m, 2.0);
        let cover = cover_from_family(&fam, &m).unwrap();
        assert_eq!(cover.trees.len(), 1);
        let rep = verify_cover(&cover, &m).unwrap();
        assert!(rep.domination_ok);
        // Star HST: distortion at most Delta_0 / d_min.
        assert!(rep.plain_distortion <= 2.0 + 1e-9);
    }

    #[test]
    fn cover_from_family_cycle32_within_claimed() {
        let m = metric_from_graph(&shapes::cycle_graph(32)).unwrap();
        let (fam, _) = assemble_family(&m, 2.0, 17).unwrap();
        let cover = cover_from_family(&fam, &m).unwrap();
        let rep = verify_cover(&cover, &m).unwrap();
        assert!(rep.domination_ok);
        assert!(
            rep.plain_distortion <= cover.claimed_distortion * (1.0 + 1e-9),
            "distortion {} > claimed {}",
            rep.plain_distortion,
            cover.claimed_distortion
        );
    }

    #[test]
    fn assembly_is_deterministic_given_seed() {
        let m = metric_from_graph(&shapes::cycle_graph(24)).unwrap();
        let (fam_a, _) = assemble_family(&m, 2.0, 101).unwrap();
        let (fam_b, _) = assemble_family(&m, 2.0, 101).unwrap();
        assert_eq!(fam_a.hierarchies.len(), fam_b.hierarchies.len());
        for (ha, hb) in fam_a.hierarchies.iter().zip(fam_b.hierarchies.iter()) {
            for (la, lb) in ha.levels.iter().zip(hb.levels.iter()) {
                assert_eq!(la.cluster_of, lb.cluster_of);
                assert_eq!(la.centers, lb.centers);
            }
        }
    }

    #[test]
    fn realized_hsts_preserve_lca_metric_exactly() {
        // Steiner realization of every emitted HST must reproduce the
        // LCA-label distances; brute force over all pairs.
        let m = metric_from_graph(&shapes::cycle_graph(24)).unwrap();
        let (fam, _) = assemble_family(&m, 2.0, 29).unwrap();
        let n = m.len();
        for h in fam.hierarchies.iter().take(3) {
            let hst = hierarchy_to_hst(h, &m).unwrap();
            let tree = hst.to_tree().unwrap();
            let index = crate::tree::TreeDistanceIndex::build(&tree).unwrap();
            for x in 0..n {
                for y in 0..x {
                    let want = hst.lca_distance(x, y).unwrap();
                    let got = index.point_distance(x, y).unwrap();
                    assert!(
                        (got - want).abs() <= 1e-9 * want.max(1.0),
                        "pair ({x},{y}): realized {got} vs label {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn adding_hierarchies_never_hurts() {
        let m = metric_from_graph(&shapes::cycle_graph(16)).unwrap();
        let (fam, _) = assemble_family(&m, 2.0, 23).unwrap();
        let full = cover_from_family(&fam, &m).unwrap();
        let mut truncated = full.clone();
        truncated.trees.truncate(1.max(full.trees.len() / 2));
        let rep_full = verify_cover(&full, &m).unwrap();
        let rep_trunc = verify_cover(&truncated, &m).unwrap();
        assert!(rep_full.plain_distortion <= rep_trunc.plain_distortion + 1e-12);
    }
}
