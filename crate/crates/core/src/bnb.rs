//! Best-first branch-and-bound over the translation.
//!
//! Every node is a cube of translations. The rotation never appears as a
//! search dimension: for any fixed translation the best rotation is found
//! exactly by [`crate::rotation`]. A cube is bounded by solving the rotation
//! problem at its center with the threshold relaxed by the cube's
//! half-diagonal, which by the triangle inequality dominates every
//! translation inside the cube.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::geometry::{InlierConfig, MatchSet, Point3, Pose4DOF};
use crate::rotation::{rotation_consensus, RotationSearch};

/// Default smallest cube half-side that is still subdivided, in metres.
pub const DEFAULT_MIN_HALF_SIDE: f64 = 1e-4;

/// Axis-aligned cube of candidate translations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationCube {
    pub center: Point3,
    pub half_side: f64,
}

impl TranslationCube {
    pub fn new(center: Point3, half_side: f64) -> Self {
        debug_assert!(half_side > 0.0);
        Self { center, half_side }
    }

    /// Half the length of the space diagonal.
    pub fn half_diagonal(&self) -> f64 {
        self.half_side * 3f64.sqrt()
    }

    pub fn contains(&self, t: Point3) -> bool {
        let d = t - self.center;
        d.x.abs() <= self.half_side && d.y.abs() <= self.half_side && d.z.abs() <= self.half_side
    }

    /// The eight octants, ordered by index bits (x = bit 0, y = bit 1,
    /// z = bit 2; a set bit is the positive side).
    pub fn children(&self) -> [TranslationCube; 8] {
        let h = 0.5 * self.half_side;
        std::array::from_fn(|o| {
            let sign = |bit: usize| if o & (1 << bit) != 0 { h } else { -h };
            TranslationCube::new(self.center + Point3::new(sign(0), sign(1), sign(2)), h)
        })
    }
}

/// `Ū(S) = U(t_S | ε + d_S)`, an upper bound on `U(t)` over the cube.
pub fn upper_bound(cube: &TranslationCube, matches: &MatchSet, cfg: &InlierConfig) -> usize {
    rotation_consensus(cube.center, matches, &cfg.widened(cube.half_diagonal())).count
}

/// A cube containing every translation that aligns at least one pair.
pub fn initial_cube(matches: &MatchSet, cfg: &InlierConfig) -> Result<TranslationCube> {
    if matches.is_empty() {
        return Err(Error::EmptyMatches);
    }
    let eps = cfg.epsilon();
    let n = matches.len() as f64;

    let mut dz: Vec<f64> = matches.iter().map(|m| m.q.z - m.p.z).collect();
    dz.sort_by(f64::total_cmp);
    let mid = dz.len() / 2;
    let median = if dz.len().is_multiple_of(2) {
        0.5 * (dz[mid - 1] + dz[mid])
    } else {
        dz[mid]
    };

    let (mut sx, mut sy) = (0.0, 0.0);
    for m in matches {
        sx += m.q.x - m.p.x;
        sy += m.q.y - m.p.y;
    }
    let center = Point3::new(sx / n, sy / n, median);

    // t aligning pair i lies within ε of q_i − R(θ)p_i for some θ, whose
    // horizontal offset from the center is at most ‖p_i‖_xy + ‖q_i − c‖_xy.
    let radial = matches
        .iter()
        .map(|m| m.p.norm_xy() + (m.q - center).norm_xy())
        .fold(0.0, f64::max)
        + eps;
    let vertical = (dz[dz.len() - 1] + eps - median).max(median - (dz[0] - eps));
    Ok(TranslationCube::new(center, radial.max(vertical)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueEntry {
    cube: TranslationCube,
    upper: usize,
    seq: u64,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    // max-heap: higher bound first, then earlier insertion
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .cmp(&other.upper)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BnbStats {
    /// Cubes popped and evaluated at their center.
    pub cubes_explored: usize,
    /// Upper-bound evaluations, root included.
    pub bound_evaluations: usize,
    /// Cubes that were not split because they reached the minimum size.
    pub depth_limited: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbSolution {
    pub pose: Pose4DOF,
    pub consensus: usize,
    /// True when the search certified the consensus as the global optimum.
    /// False only if a cube was left unsplit at the minimum size while its
    /// bound still exceeded the returned consensus.
    pub exact: bool,
    pub stats: BnbStats,
}

/// Globally optimal 4DOF registration by branch-and-bound over translation.
///
/// `min_half_side` stops subdivision of cubes smaller than that size; pass
/// [`DEFAULT_MIN_HALF_SIDE`] unless there is a reason not to.
pub fn bnb_register(
    matches: &MatchSet,
    cfg: &InlierConfig,
    min_half_side: f64,
) -> Result<BnbSolution> {
    if !(min_half_side >= 0.0 && min_half_side.is_finite()) {
        return Err(Error::Config(format!(
            "minimum half-side must be finite and non-negative, got {min_half_side}"
        )));
    }
    let started = Instant::now();
    let mut stats = BnbStats::default();
    let mut search = RotationSearch::new();

    let root = initial_cube(matches, cfg)?;
    let mut best_t = root.center;
    let mut best = search.consensus(root.center, matches, cfg);

    let mut bound = |cube: &TranslationCube, search: &mut RotationSearch| {
        stats.bound_evaluations += 1;
        search
            .consensus(cube.center, matches, &cfg.widened(cube.half_diagonal()))
            .count
    };

    let mut queue = BinaryHeap::new();
    let mut seq = 0u64;
    let root_upper = bound(&root, &mut search);
    queue.push(QueueEntry {
        cube: root,
        upper: root_upper,
        seq,
    });

    let mut unsplit_bound = 0usize;
    let mut explored = 0usize;
    let mut depth_limited = 0usize;

    while let Some(entry) = queue.pop() {
        // entries that can no longer beat the incumbent are discarded lazily
        if entry.upper <= best.count {
            continue;
        }
        explored += 1;
        let at_center = search.consensus(entry.cube.center, matches, cfg);
        if at_center.count > best.count {
            best = at_center;
            best_t = entry.cube.center;
        }
        if at_center.count == entry.upper {
            break;
        }
        if entry.cube.half_side < min_half_side {
            depth_limited += 1;
            unsplit_bound = unsplit_bound.max(entry.upper);
            continue;
        }
        for child in entry.cube.children() {
            let upper = bound(&child, &mut search);
            if upper > best.count {
                seq += 1;
                queue.push(QueueEntry {
                    cube: child,
                    upper,
                    seq,
                });
            }
        }
    }
    // closing the gap and draining the queue both certify the incumbent,
    // unless a cube was abandoned with a larger bound
    let exact = unsplit_bound <= best.count;

    stats.cubes_explored = explored;
    stats.depth_limited = depth_limited;
    stats.elapsed = started.elapsed();
    Ok(BnbSolution {
        pose: Pose4DOF::new(best.theta, best_t),
        consensus: best.count,
        exact,
        stats,
    })
}

/// The rotation that maximizes consensus for a fixed translation.
pub fn extract_rotation(t: Point3, matches: &MatchSet, cfg: &InlierConfig) -> f64 {
    rotation_consensus(t, matches, cfg).theta
}
