//! Padded probabilistic partitions and hierarchical partition families.
//!
//! A Delta-bounded partition splits the metric into clusters of diameter
//! at most Delta. The probabilistic realization here is random-order ball
//! carving over a (Delta/8)-net of centers, each center drawing an
//! independent radius from a truncated exponential on [Delta/4, Delta/2];
//! the padding probability of a ball then decays exponentially in its
//! radius, and carving decisions are local (independent of the structure
//! beyond twice the scale). [`family`] assembles such partitions into
//! nested hierarchies whose padding is certified exhaustively, resampling
//! constructive-LLL style until every (point, level) is padded somewhere.

pub mod family;

use rand::Rng;

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;

/// A Delta-bounded partition of the metric points.
#[derive(Debug, Clone)]
pub struct BoundedPartition {
    pub delta: f64,
    /// Cluster index per point.
    pub cluster_of: Vec<usize>,
    /// Designated center per cluster.
    pub centers: Vec<usize>,
}

impl BoundedPartition {
    pub fn num_clusters(&self) -> usize {
        self.centers.len()
    }

    /// Clusters as sorted point lists.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centers.len()];
        for (p, &c) in self.cluster_of.iter().enumerate() {
            out[c].push(p);
        }
        out
    }

    /// Enumerated invariant check: disjoint cover is structural, so this
    /// asserts the diameter bound and center membership.
    pub fn validate(&self, m: &FiniteMetric) -> Result<()> {
        for (c, &center) in self.centers.iter().enumerate() {
            if self.cluster_of[center] != c {
                return Err(Error::InvalidMetric(format!(
                    "center {center} not inside its cluster {c}"
                )));
            }
        }
        for x in 0..m.len() {
            for y in 0..x {
                if self.cluster_of[x] == self.cluster_of[y]
                    && m.dist(x, y) > self.delta * (1.0 + crate::REL_TOL)
                {
                    return Err(Error::InvalidMetric(format!(
                        "cluster diameter violated: d({x},{y}) = {} > {}",
                        m.dist(x, y),
                        self.delta
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parameters shared by the partition-family constructions.
#[derive(Debug, Clone)]
pub struct PartitionParams {
    /// Target distortion parameter, >= 2.
    pub alpha: f64,
    /// Doubling-constant estimate of the metric, clamped to >= 2.
    pub lambda: f64,
    /// Per-partition padding success target: lambda^(-1/(2 alpha)).
    pub delta: f64,
    /// Block length B.
    pub block_len: u32,
    /// Diameter-glue constant c = 1 + 1/(2^(B-1) - 1).
    pub glue_c: f64,
    /// Family size k per scale-block collection.
    pub family_size: usize,
    /// Block padding constant c' (frozen by calibration): block families
    /// certify padding radius (c'/alpha) * Delta at their own scales.
    pub pad_const: f64,
}

/// Frozen calibration: block padding constant c'. Chosen so that the
/// exhaustive family padding check converges with few resampling rounds
/// on the calibration suite (unit cycles and grids, alpha in {2, 4}).
pub const PAD_CONST: f64 = 0.25;

/// Frozen calibration: carving radius rate multiplier; the truncated
/// exponential has rate RATE_MULT * ln(lambda) / Delta.
pub const RATE_MULT: f64 = 2.0;

/// Frozen calibration: family-size multiplier for
/// k = K0 * lambda^(1/alpha) * log2(lambda) * (log2(alpha) + B).
pub const SIZE_MULT: f64 = 1.0;

impl PartitionParams {
    pub fn for_alpha(alpha: f64, lambda_estimate: usize) -> Result<Self> {
        if alpha < 2.0 {
            return Err(Error::Parameter(format!(
                "alpha must be at least 2, got {alpha}"
            )));
        }
        let lambda = (lambda_estimate as f64).max(2.0);
        let delta = lambda.powf(-1.0 / (2.0 * alpha));
        // Validity range of the padded-partition profile.
        debug_assert!(delta <= 1.0 && delta >= lambda.powf(-(2f64.powi(12))));
        let pad_const = PAD_CONST;
        // Smallest B >= 2 with (c'/alpha)/c(B) - 2^-B >= c'/(2 alpha): the
        // slack that survives the bottom-up union of clusters.
        let mut block_len = 2u32;
        loop {
            let c = glue_c(block_len);
            let lhs = (pad_const / alpha) / c - (-(block_len as f64)).exp2();
            if lhs >= pad_const / (2.0 * alpha) {
                break;
            }
            block_len += 1;
            assert!(block_len <= 64, "block length runaway");
        }
        let glue = glue_c(block_len);
        let family_size = ((SIZE_MULT
            * lambda.powf(1.0 / alpha)
            * lambda.log2().max(1.0)
            * (alpha.log2() + block_len as f64))
            .ceil() as usize)
            .clamp(4, 64);
        Ok(Self {
            alpha,
            lambda,
            delta,
            block_len,
            glue_c: glue,
            family_size,
            pad_const,
        })
    }

    /// The padding-profile radius fraction for success probability
    /// `delta_prime`: eta(d') = ln(1/d') / (2^6 ln lambda).
    pub fn eta_of(&self, delta_prime: f64) -> f64 {
        (1.0 / delta_prime).ln() / (64.0 * self.lambda.ln())
    }

    /// eta at the canonical delta; equals 2^-7 / alpha by construction.
    pub fn eta_net(&self) -> f64 {
        self.eta_of(self.delta)
    }

    /// Final family padding parameter: c' / (2 alpha).
    pub fn eta_family(&self) -> f64 {
        self.pad_const / (2.0 * self.alpha)
    }

    /// Carving radius rate at a given scale.
    pub fn rate(&self, delta_scale: f64) -> f64 {
        RATE_MULT * self.lambda.ln() / delta_scale
    }
}

fn glue_c(b: u32) -> f64 {
    1.0 + 1.0 / ((b as f64 - 1.0).exp2() - 1.0)
}

/// Random-order ball carving restricted to a point subset.
///
/// Centers form a (Delta/8)-net of the subset; in a random order each
/// center claims all unclaimed subset points within its radius, drawn
/// independently from a truncated exponential on [Delta/4, Delta/2].
/// Every point lands in a cluster because its nearest center reaches at
/// least Delta/4 > Delta/8. Returns cluster assignments parallel to
/// `subset` plus the carving centers.
pub fn carve_subset(
    m: &FiniteMetric,
    subset: &[usize],
    delta: f64,
    rate: f64,
    rng: &mut impl Rng,
) -> (Vec<usize>, Vec<usize>) {
    debug_assert!(delta > 0.0);
    let centers = greedy_net_subset(m, subset, delta / 8.0);
    let mut order: Vec<usize> = (0..centers.len()).collect();
    // Fisher-Yates with the caller's stream.
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let lo = delta / 4.0;
    let hi = delta / 2.0;
    let mut assignment = vec![usize::MAX; subset.len()];
    let mut kept_centers = Vec::new();
    for &ci in &order {
        let center = centers[ci];
        let radius = sample_trunc_exp(lo, hi, rate, rng);
        let mut claimed_any = false;
        for (k, &p) in subset.iter().enumerate() {
            if assignment[k] == usize::MAX && m.dist(center, p) <= radius {
                if !claimed_any {
                    kept_centers.push(center);
                    claimed_any = true;
                }
                assignment[k] = kept_centers.len() - 1;
            }
        }
    }
    debug_assert!(assignment.iter().all(|&a| a != usize::MAX));
    // Designated center: the carving center when it stayed inside its own
    // cluster (it can be claimed away by an earlier ball), else the
    // lowest-index member.
    let mut final_centers = vec![usize::MAX; kept_centers.len()];
    for (k, &p) in subset.iter().enumerate() {
        let c = assignment[k];
        if final_centers[c] == usize::MAX || p == kept_centers[c] {
            final_centers[c] = p;
        }
    }
    (assignment, final_centers)
}

/// Greedy net over an explicit subset, scanning in the given order.
fn greedy_net_subset(m: &FiniteMetric, subset: &[usize], r: f64) -> Vec<usize> {
    let mut net: Vec<usize> = Vec::new();
    for &x in subset {
        if net.iter().all(|&y| m.dist(x, y) > r) {
            net.push(x);
        }
    }
    net
}

fn sample_trunc_exp(lo: f64, hi: f64, rate: f64, rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random();
    if rate * (hi - lo) < 1e-12 {
        return lo + u * (hi - lo);
    }
    let mass = 1.0 - (-rate * (hi - lo)).exp();
    lo + (-(1.0 - u * mass).ln()) / rate
}

/// Delta-bounded locally padded probabilistic partition of the whole
/// metric (one sample).
pub fn padded_partition(
    m: &FiniteMetric,
    delta: f64,
    params: &PartitionParams,
    rng: &mut impl Rng,
) -> BoundedPartition {
    let all: Vec<usize> = (0..m.len()).collect();
    let (cluster_of, centers) = carve_subset(m, &all, delta, params.rate(delta), rng);
    BoundedPartition {
        delta,
        cluster_of,
        centers,
    }
}

/// A nested hierarchy of bounded partitions over a 2-geometric ladder.
#[derive(Debug, Clone)]
pub struct PartitionHierarchy {
    pub mu: f64,
    pub delta0: f64,
    /// `levels[i]` is (delta0 / mu^i)-bounded and refines `levels[i-1]`.
    pub levels: Vec<BoundedPartition>,
}

impl PartitionHierarchy {
    /// Enumerated refinement + boundedness check.
    pub fn validate(&self, m: &FiniteMetric) -> Result<()> {
        for (i, level) in self.levels.iter().enumerate() {
            let bound = self.delta0 / self.mu.powi(i as i32);
            if level.delta > bound * (1.0 + crate::REL_TOL) {
                return Err(Error::InvalidMetric(format!(
                    "level {i} declares delta {} > ladder bound {bound}",
                    level.delta
                )));
            }
            level.validate(m)?;
            if i > 0 {
                let coarse = &self.levels[i - 1];
                for x in 0..m.len() {
                    for y in 0..x {
                        if level.cluster_of[x] == level.cluster_of[y]
                            && coarse.cluster_of[x] != coarse.cluster_of[y]
                        {
                            return Err(Error::InvalidMetric(format!(
                                "refinement violated at level {i}: {x},{y} split above"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Cut a list of independently sampled partitions (coarsest first, with
/// delta halving) into a nested 2-hierarchy: level i of the result is the
/// common refinement of input levels 0..=i.
pub fn cut_hierarchy(m: &FiniteMetric, partitions: &[BoundedPartition]) -> PartitionHierarchy {
    let n = m.len();
    let mut levels: Vec<BoundedPartition> = Vec::with_capacity(partitions.len());
    for (i, part) in partitions.iter().enumerate() {
        if i == 0 {
            levels.push(part.clone());
            continue;
        }
        let prev = &levels[i - 1];
        // Pair (previous cluster, this cluster) -> new cluster id.
        let mut ids: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut cluster_of = vec![0usize; n];
        let mut centers: Vec<usize> = Vec::new();
        for p in 0..n {
            let key = (prev.cluster_of[p], part.cluster_of[p]);
            let next_id = ids.len();
            let id = *ids.entry(key).or_insert(next_id);
            if id == centers.len() {
                centers.push(p); // first point becomes the center
            }
            cluster_of[p] = id;
        }
        levels.push(BoundedPartition {
            delta: part.delta,
            cluster_of,
            centers,
        });
    }
    PartitionHierarchy {
        mu: 2.0,
        delta0: partitions.first().map(|p| p.delta).unwrap_or(0.0),
        levels,
    }
}
