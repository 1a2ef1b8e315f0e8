//! Greedy r-nets, hierarchical net ladders, and separated sub-net
//! partitions.
//!
//! An r-net packs (pairwise distances > r) and covers (every point within
//! r of a net point). A ladder holds a 2^i-net per integer scale i, nested
//! so that `net[i+1]` is a subset of `net[i]`. The sub-net partition splits
//! each level's net into classes that are pairwise (6/eps)*2^i separated,
//! with class membership constant across levels.

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;

/// Greedy net: scan points in the given order, keep a point iff it is at
/// distance > r from every point already kept. The result packs by
/// construction and covers because every rejected point witnessed a kept
/// point within r.
pub fn greedy_net(m: &FiniteMetric, r: f64, order: &[usize]) -> Vec<usize> {
    let mut net: Vec<usize> = Vec::new();
    for &x in order {
        if net.iter().all(|&y| m.dist(x, y) > r) {
            net.push(x);
        }
    }
    net
}

/// A nested ladder of 2^i-nets over an integer scale range.
#[derive(Debug, Clone)]
pub struct NetLadder {
    /// Inclusive scale range: nets exist for every integer i in
    /// `lo..=hi`, with `net(i)` a 2^i-net.
    pub lo: i32,
    pub hi: i32,
    /// nets[k] is the net at scale `lo + k`.
    nets: Vec<Vec<usize>>,
}

impl NetLadder {
    pub fn net(&self, i: i32) -> &[usize] {
        &self.nets[(i - self.lo) as usize]
    }

    pub fn scales(&self) -> impl Iterator<Item = i32> + '_ {
        self.lo..=self.hi
    }

    pub fn num_levels(&self) -> usize {
        self.nets.len()
    }

    /// Run-length encoding of identical consecutive levels, as
    /// (starting scale, run length). Spread-out metrics repeat nets at
    /// many scales; the report notes the runs instead of the copies.
    pub fn dedup_runs(&self) -> Vec<(i32, usize)> {
        let mut runs: Vec<(i32, usize)> = Vec::new();
        for i in self.lo..=self.hi {
            match runs.last_mut() {
                Some((start, len)) if self.net(i) == self.net(*start) => *len += 1,
                _ => runs.push((i, 1)),
            }
        }
        runs
    }
}

/// Scale of level i: 2^i as f64 (i may be negative).
#[inline]
pub fn pow2(i: i32) -> f64 {
    (i as f64).exp2()
}

/// Build the hierarchical ladder for scales
/// `ceil(log2(eps*d_min)) ..= ceil(log2(d_max))`.
///
/// Nesting is obtained by seeding the greedy scan at level i with all of
/// net(i+1) first (in its own order), then scanning the remaining points
/// by ascending index.
pub fn build_ladder(m: &FiniteMetric, eps: f64) -> Result<NetLadder> {
    if !(eps > 0.0 && eps < 0.125) {
        return Err(Error::Parameter(format!(
            "build_ladder needs 0 < eps < 1/8, got {eps}"
        )));
    }
    let n = m.len();
    if n == 1 {
        return Ok(NetLadder {
            lo: 0,
            hi: 0,
            nets: vec![vec![0]],
        });
    }
    let lo = (eps * m.d_min()).log2().ceil() as i32;
    let hi = (m.d_max()).log2().ceil() as i32;
    debug_assert!(lo <= hi);
    let mut nets: Vec<Vec<usize>> = Vec::with_capacity((hi - lo + 1) as usize);
    let mut above: Vec<usize> = Vec::new(); // net at level i+1
    for i in (lo..=hi).rev() {
        let mut order = above.clone();
        let in_above = |x: usize| above.contains(&x);
        order.extend((0..n).filter(|&x| !in_above(x)));
        let net = greedy_net(m, pow2(i), &order);
        nets.push(net.clone());
        above = net;
    }
    nets.reverse();
    Ok(NetLadder { lo, hi, nets })
}

/// Partition of each ladder level's net into separated classes.
///
/// Class indices are 1-based to match the construction's counting; `t` is
/// the maximum class index used on any level.
#[derive(Debug, Clone)]
pub struct SubnetPartition {
    pub t: usize,
    /// One map per ladder level (same indexing as the ladder): net point
    /// -> class index in 1..=t.
    class_of: Vec<std::collections::HashMap<usize, usize>>,
    lo: i32,
}

impl SubnetPartition {
    pub fn class_of(&self, i: i32, x: usize) -> Option<usize> {
        self.class_of[(i - self.lo) as usize].get(&x).copied()
    }

    /// Net points of class j at level i, ascending.
    pub fn members(&self, i: i32, j: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.class_of[(i - self.lo) as usize]
            .iter()
            .filter(|&(_, &c)| c == j)
            .map(|(&x, _)| x)
            .collect();
        v.sort_unstable();
        v
    }
}

/// Separation threshold at level i: (6/eps) * 2^i.
#[inline]
pub fn separation(eps: f64, i: i32) -> f64 {
    6.0 / eps * pow2(i)
}

/// Split every ladder level into classes whose pairwise in-class distance
/// is at least (6/eps)*2^i, hierarchically: a point first inherits its
/// class from the level above, then classes are filled greedily
/// (ascending index) from the unassigned net points.
pub fn subnet_partition(ladder: &NetLadder, m: &FiniteMetric, eps: f64) -> SubnetPartition {
    let mut class_of: Vec<std::collections::HashMap<usize, usize>> =
        vec![std::collections::HashMap::new(); ladder.num_levels()];
    let mut t = 1usize;
    for i in (ladder.lo..=ladder.hi).rev() {
        let level = (i - ladder.lo) as usize;
        let sep = separation(eps, i);
        // Inherit from the level above.
        if i < ladder.hi {
            let (lower, upper) = class_of.split_at_mut(level + 1);
            let inherited = &upper[0];
            for (&x, &j) in inherited {
                lower[level].insert(x, j);
            }
        }
        // Greedy fill, class by class, scanning by ascending point index.
        let mut unassigned: Vec<usize> = ladder
            .net(i)
            .iter()
            .copied()
            .filter(|x| !class_of[level].contains_key(x))
            .collect();
        unassigned.sort_unstable();
        let mut remaining = unassigned;
        let mut j = 1usize;
        while !remaining.is_empty() {
            let members_j: Vec<usize> = class_of[level]
                .iter()
                .filter(|&(_, &c)| c == j)
                .map(|(&x, _)| x)
                .collect();
            let mut taken: Vec<usize> = Vec::new();
            let mut rest: Vec<usize> = Vec::new();
            for &x in &remaining {
                let ok_members = members_j.iter().all(|&y| m.dist(x, y) >= sep);
                let ok_taken = taken.iter().all(|&y| m.dist(x, y) >= sep);
                if ok_members && ok_taken {
                    taken.push(x);
                } else {
                    rest.push(x);
                }
            }
            for &x in &taken {
                class_of[level].insert(x, j);
            }
            remaining = rest;
            if !remaining.is_empty() {
                j += 1;
                t = t.max(j);
            }
        }
    }
    SubnetPartition {
        t,
        class_of,
        lo: ladder.lo,
    }
}

/// Assert packing and covering of a net by full enumeration.
pub fn assert_net_valid(m: &FiniteMetric, r: f64, net: &[usize]) {
    for (a, &x) in net.iter().enumerate() {
        for &y in &net[..a] {
            assert!(m.dist(x, y) > r, "packing violated: d({x},{y}) <= {r}");
        }
    }
    for p in 0..m.len() {
        assert!(
            net.iter().any(|&x| m.dist(p, x) <= r),
            "covering violated: point {p} beyond {r} of every net point"
        );
    }
}
