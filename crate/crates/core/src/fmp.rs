//! Fast match pruning.
//!
//! A pair `k` is a *certain outlier* when even the best registration forced
//! to align it cannot reach a consensus already achieved by some other
//! pose. Fixing pair `k` pins the translation to within ε of
//! `q_k − R(θ)p_k`; centering the data on the pivot turns the constrained
//! problem into a pure rotation search at threshold 2ε whose optimum bounds
//! the constrained one from above. The same rotation, with the pivot aligned
//! exactly, gives a feasible pose and hence a lower bound on the global
//! optimum. Pairs whose upper bound falls below the best lower bound are
//! removed; no pair of any optimal consensus set can be.

use std::time::{Duration, Instant};

use crate::geometry::{objective, rotate_z, Correspondence, InlierConfig, MatchSet, Pose4DOF};
use crate::rotation::RotationSearch;

/// Pairs re-expressed relative to a pivot pair `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMatchSet {
    pub pivot: usize,
    pub pairs: Vec<Correspondence>,
}

impl CenteredMatchSet {
    pub fn new(matches: &MatchSet, pivot: usize) -> Self {
        let origin = matches.pairs()[pivot];
        Self {
            pivot,
            pairs: matches
                .iter()
                .map(|m| Correspondence::new(m.p - origin.p, m.q - origin.q))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneReport {
    /// Surviving pairs in their original order.
    pub kept: MatchSet,
    /// Indices (into the input) of the surviving pairs.
    pub kept_indices: Vec<usize>,
    pub removed_count: usize,
    /// Upper bound recorded for each input pair when it was processed.
    pub pivot_bounds: Vec<usize>,
    /// Best lower bound on the optimal consensus found during the pass.
    pub lower_bound: usize,
    pub elapsed: Duration,
}

/// Upper bound on the consensus of any pose that aligns pair `k`, and the
/// rotation achieving the relaxed optimum.
pub fn upper_bound_k(k: usize, matches: &MatchSet, cfg: &InlierConfig) -> (usize, f64) {
    let pairs = matches.pairs();
    let alive = vec![true; pairs.len()];
    pivot_bound(&mut RotationSearch::new(), pairs, &alive, k, cfg)
}

/// Consensus on `current` of the pose that uses `theta_k` and aligns pair
/// `k` exactly.
pub fn lower_bound_from_k(k: usize, theta_k: f64, current: &MatchSet, cfg: &InlierConfig) -> usize {
    let pivot = current.pairs()[k];
    objective(&pivot_pose(pivot, theta_k), current, cfg)
}

fn pivot_pose(pivot: Correspondence, theta: f64) -> Pose4DOF {
    Pose4DOF::new(theta, pivot.q - rotate_z(theta, pivot.p))
}

fn pivot_bound(
    search: &mut RotationSearch,
    pairs: &[Correspondence],
    alive: &[bool],
    k: usize,
    cfg: &InlierConfig,
) -> (usize, f64) {
    let origin = pairs[k];
    let doubled = cfg.scaled(2.0);
    let centered = pairs
        .iter()
        .zip(alive)
        .enumerate()
        .filter(|&(i, (_, &a))| a && i != k)
        .map(|(_, (m, _))| (m.p - origin.p, m.q - origin.q));
    let stab = search.solve(centered, &doubled);
    (1 + stab.count, stab.theta)
}

/// Prune with pivots taken in storage order.
pub fn fmp_prune(matches: &MatchSet, cfg: &InlierConfig) -> PruneReport {
    let order: Vec<usize> = (0..matches.len()).collect();
    fmp_prune_in_order(matches, cfg, &order)
}

/// Prune with pivots taken in the given order (a permutation of
/// `0..matches.len()`).
pub fn fmp_prune_in_order(matches: &MatchSet, cfg: &InlierConfig, order: &[usize]) -> PruneReport {
    assert_eq!(order.len(), matches.len(), "order must be a permutation");
    let started = Instant::now();
    let pairs = matches.pairs();
    let n = pairs.len();
    let eps = cfg.epsilon();

    let mut alive = vec![true; n];
    let mut bounds = vec![0usize; n];
    let mut lower = 0usize;
    let mut search = RotationSearch::new();

    for &k in order {
        let (upper, theta) = pivot_bound(&mut search, pairs, &alive, k, cfg);
        bounds[k] = upper;
        if upper < lower {
            alive[k] = false;
            continue;
        }
        let pose = pivot_pose(pairs[k], theta);
        let feasible = pairs
            .iter()
            .zip(&alive)
            .filter(|&(m, &a)| a && (pose.apply(m.p) - m.q).norm() <= eps)
            .count();
        lower = lower.max(feasible);
    }

    for k in 0..n {
        if alive[k] && bounds[k] < lower {
            alive[k] = false;
        }
    }

    let kept_indices: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    PruneReport {
        kept: matches.subset(&kept_indices),
        removed_count: n - kept_indices.len(),
        kept_indices,
        pivot_bounds: bounds,
        lower_bound: lower,
        elapsed: started.elapsed(),
    }
}
