//! Synthetic benchmark data, evaluation metrics and a brute-force oracle.
//!
//! Two generators:
//!
//! - [`generate_planted`] draws match sets directly: inliers are exact
//!   correspondences plus bounded noise, outliers are random pairs rejected
//!   until they miss the true pose.
//! - [`generate_overlap_pair`] cuts two partially overlapping subsets out of a
//!   complete cloud, moves the second by a random pose and adds noise.
//!   [`overlap_matches`] then builds correspondences between the subsets.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    angle_difference, objective, residual, rotate_z, Correspondence, InlierConfig, MatchSet,
    Point3, Pose4DOF,
};
use crate::pipeline::StageTimings;
use crate::ransac::minimal_solver_2pt;

/// Rotation error below which a registration counts as successful.
pub const SUCCESS_ROTATION_DEG: f64 = 1.0;
/// Translation error below which a registration counts as successful.
pub const SUCCESS_TRANSLATION_M: f64 = 0.15;

/// Fraction of the full cloud placed in each subset for overlap ratio `tau`.
pub fn subset_fraction(tau: f64) -> f64 {
    2.0 / (4.0 - 2.0 * tau)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapSpec {
    pub tau: f64,
    pub noise_magnitude: f64,
    pub target_spacing: f64,
    pub seed: u64,
}

impl OverlapSpec {
    pub const DEFAULT_NOISE: f64 = 0.05;
    pub const DEFAULT_SPACING: f64 = 0.05;

    pub fn new(tau: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            tau,
            noise_magnitude: Self::DEFAULT_NOISE,
            target_spacing: Self::DEFAULT_SPACING,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_noise(mut self, noise_magnitude: f64) -> Self {
        self.noise_magnitude = noise_magnitude;
        self
    }

    pub fn with_spacing(mut self, target_spacing: f64) -> Self {
        self.target_spacing = target_spacing;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!(
                "overlap ratio must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if !(self.noise_magnitude.is_finite() && self.noise_magnitude >= 0.0) {
            return Err(Error::Config(format!(
                "noise magnitude must be non-negative, got {}",
                self.noise_magnitude
            )));
        }
        if !(self.target_spacing.is_finite() && self.target_spacing > 0.0) {
            return Err(Error::Config(format!(
                "target spacing must be positive, got {}",
                self.target_spacing
            )));
        }
        Ok(())
    }
}

/// Two overlapping scans cut from one cloud.
///
/// `source_ids[i]` / `target_ids[j]` give the index in the rescaled input
/// cloud of `source[i]` / `target[j]`; equal ids are true correspondences.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapPair {
    pub source: Vec<Point3>,
    pub target: Vec<Point3>,
    pub truth: Pose4DOF,
    pub source_ids: Vec<usize>,
    pub target_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub matches: MatchSet,
    pub truth: Pose4DOF,
    pub inlier_mask: Vec<bool>,
}

impl PlantedInstance {
    pub fn inlier_count(&self) -> usize {
        self.inlier_mask.iter().filter(|&&b| b).count()
    }

    pub fn inlier_indices(&self) -> Vec<usize> {
        (0..self.inlier_mask.len())
            .filter(|&i| self.inlier_mask[i])
            .collect()
    }
}

/// Parameters of [`generate_planted_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSpec {
    pub matches: usize,
    pub inliers: usize,
    /// Inlier noise magnitude; `None` uses ε.
    pub noise: Option<f64>,
    /// Half-extents of the box source points are drawn from.
    pub scene_half_extent: Point3,
    /// Half-extents of the box the true translation is drawn from.
    pub translation_half_extent: Point3,
    pub seed: u64,
}

impl PlantedSpec {
    pub fn new(matches: usize, inliers: usize, seed: u64) -> Self {
        Self {
            matches,
            inliers,
            noise: None,
            scene_half_extent: Point3::new(10.0, 10.0, 2.0),
            translation_half_extent: Point3::new(5.0, 5.0, 1.0),
            seed,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = Some(noise);
        self
    }
}

pub fn generate_planted(
    m: usize,
    inlier_count: usize,
    cfg: &InlierConfig,
    seed: u64,
) -> Result<PlantedInstance> {
    generate_planted_with(&PlantedSpec::new(m, inlier_count, seed), cfg)
}

pub fn generate_planted_with(spec: &PlantedSpec, cfg: &InlierConfig) -> Result<PlantedInstance> {
    if spec.matches == 0 {
        return Err(Error::Config("match count must be at least 1".into()));
    }
    if spec.inliers > spec.matches {
        return Err(Error::Config(format!(
            "inlier count {} exceeds match count {}",
            spec.inliers, spec.matches
        )));
    }
    let eps = cfg.epsilon();
    let noise = spec.noise.unwrap_or(eps);
    if !(noise.is_finite() && (0.0..=eps).contains(&noise)) {
        return Err(Error::Config(format!(
            "inlier noise must lie in [0, {eps}], got {noise}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let truth = Pose4DOF::new(
        rng.gen_range(0.0..TAU),
        uniform_in_box(&mut rng, spec.translation_half_extent),
    );

    let mut pairs = Vec::with_capacity(spec.matches);
    let mut mask = Vec::with_capacity(spec.matches);
    for _ in 0..spec.inliers {
        let p = uniform_in_box(&mut rng, spec.scene_half_extent);
        let q = loop {
            let q = truth.apply(p) + uniform_noise(&mut rng, noise);
            if residual(&truth, p, q) <= eps {
                break q;
            }
        };
        pairs.push(Correspondence::new(p, q));
        mask.push(true);
    }
    for _ in spec.inliers..spec.matches {
        let p = uniform_in_box(&mut rng, spec.scene_half_extent);
        let q = loop {
            let q = truth.apply(uniform_in_box(&mut rng, spec.scene_half_extent));
            if residual(&truth, p, q) > eps {
                break q;
            }
        };
        pairs.push(Correspondence::new(p, q));
        mask.push(false);
    }

    let mut order: Vec<usize> = (0..spec.matches).collect();
    order.shuffle(&mut rng);
    let matches = MatchSet::new(order.iter().map(|&i| pairs[i]).collect())?;
    let inlier_mask = order.iter().map(|&i| mask[i]).collect();
    Ok(PlantedInstance {
        matches,
        truth,
        inlier_mask,
    })
}

/// Cuts two overlapping subsets out of `cloud` and moves the second one.
///
/// The cloud is centred and rescaled to the target mean nearest-neighbour
/// spacing, then ordered along a random horizontal direction. The source takes
/// the first `⌊f·N⌋` points and the target the last `⌊f·N⌋`, with
/// `f = 2 / (4 − 2τ)`, so a fraction `τ` of each subset is shared.
pub fn generate_overlap_pair(cloud: &[Point3], spec: &OverlapSpec) -> Result<OverlapPair> {
    spec.validate()?;
    if cloud.len() < 2 {
        return Err(Error::DegenerateCloud(format!(
            "need at least two points, got {}",
            cloud.len()
        )));
    }
    if cloud.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite);
    }
    let spacing = mean_nn_distance(cloud);
    if spacing.is_nan() || spacing <= 0.0 {
        return Err(Error::DegenerateCloud(
            "mean nearest-neighbour distance is zero".into(),
        ));
    }

    let n = cloud.len() as f64;
    let centroid = cloud.iter().fold(Point3::ORIGIN, |acc, &p| acc + p) * (1.0 / n);
    let scale = spec.target_spacing / spacing;
    let points: Vec<Point3> = cloud.iter().map(|&p| (p - centroid) * scale).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (ay, ax) = rng.gen_range(0.0..TAU).sin_cos();
    let mut ranked: Vec<usize> = (0..points.len()).collect();
    let proj = |i: usize| points[i].x * ax + points[i].y * ay;
    ranked.sort_by(|&a, &b| proj(a).total_cmp(&proj(b)).then(a.cmp(&b)));

    let take = ((subset_fraction(spec.tau) * n).floor() as usize).max(1);
    let mut source_ids = ranked[..take].to_vec();
    let mut target_ids = ranked[ranked.len() - take..].to_vec();
    source_ids.sort_unstable();
    target_ids.sort_unstable();

    let half = bounding_half_extent(&points);
    let truth = Pose4DOF::new(rng.gen_range(0.0..TAU), uniform_in_box(&mut rng, half));

    let source = source_ids
        .iter()
        .map(|&i| points[i] + uniform_noise(&mut rng, spec.noise_magnitude))
        .collect();
    let target = target_ids
        .iter()
        .map(|&i| truth.apply(points[i]) + uniform_noise(&mut rng, spec.noise_magnitude))
        .collect();
    Ok(OverlapPair {
        source,
        target,
        truth,
        source_ids,
        target_ids,
    })
}

/// Correspondences between the two halves of an overlap pair.
///
/// `count · (1 − outlier_rate)` pairs (capped by the overlap size) link the
/// same cloud point in both scans; the rest are random pairs rejected until
/// they miss the true pose. The mask flags pairs within ε under the truth, so
/// heavily noisy true correspondences may be flagged as outliers.
pub fn overlap_matches(
    pair: &OverlapPair,
    count: usize,
    outlier_rate: f64,
    cfg: &InlierConfig,
    seed: u64,
) -> Result<PlantedInstance> {
    if count == 0 {
        return Err(Error::Config("match count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&outlier_rate) {
        return Err(Error::Config(format!(
            "outlier rate must lie in [0, 1], got {outlier_rate}"
        )));
    }
    if pair.source.is_empty() || pair.target.is_empty() {
        return Err(Error::DegenerateCloud("empty scan".into()));
    }
    let target_pos: HashMap<usize, usize> = pair
        .target_ids
        .iter()
        .enumerate()
        .map(|(j, &id)| (id, j))
        .collect();
    let mut shared: Vec<(usize, usize)> = pair
        .source_ids
        .iter()
        .enumerate()
        .filter_map(|(i, id)| target_pos.get(id).map(|&j| (i, j)))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wanted = (count as f64 * (1.0 - outlier_rate)).round() as usize;
    let n_in = wanted.min(shared.len());
    shared.shuffle(&mut rng);

    let eps = cfg.epsilon();
    let mut pairs: Vec<Correspondence> = shared[..n_in]
        .iter()
        .map(|&(i, j)| Correspondence::new(pair.source[i], pair.target[j]))
        .collect();
    const MAX_ATTEMPTS: usize = 1000;
    for _ in n_in..count {
        let mut attempts = 0;
        let c = loop {
            let c = Correspondence::new(
                *pair.source.choose(&mut rng).unwrap(),
                *pair.target.choose(&mut rng).unwrap(),
            );
            if residual(&pair.truth, c.p, c.q) > eps {
                break c;
            }
            attempts += 1;
            if attempts == MAX_ATTEMPTS {
                return Err(Error::DegenerateCloud(
                    "cannot draw outliers: scans too small relative to ε".into(),
                ));
            }
        };
        pairs.push(c);
    }
    pairs.shuffle(&mut rng);
    let inlier_mask = pairs
        .iter()
        .map(|c| residual(&pair.truth, c.p, c.q) <= eps)
        .collect();
    Ok(PlantedInstance {
        matches: MatchSet::new(pairs)?,
        truth: pair.truth,
        inlier_mask,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rotation_error_deg: f64,
    pub translation_error_m: f64,
    pub consensus: Option<usize>,
    pub runtimes: Option<StageTimings>,
}

impl EvalReport {
    pub fn within(&self, max_rotation_deg: f64, max_translation_m: f64) -> bool {
        self.rotation_error_deg < max_rotation_deg && self.translation_error_m < max_translation_m
    }

    pub fn is_success(&self) -> bool {
        self.within(SUCCESS_ROTATION_DEG, SUCCESS_TRANSLATION_M)
    }
}

pub fn eval_errors(estimated: &Pose4DOF, truth: &Pose4DOF) -> EvalReport {
    EvalReport {
        rotation_error_deg: angle_difference(estimated.theta(), truth.theta())
            .abs()
            .to_degrees(),
        translation_error_m: (estimated.t - truth.t).norm(),
        consensus: None,
        runtimes: None,
    }
}

/// Best consensus over a dense pose grid plus every two-point candidate.
///
/// Grid poses take each of `theta_steps` angles, anchor the translation on
/// every pair (`t = q_i − R(θ)p_i`) and perturb it by lattice offsets of
/// spacing `t_grid` inside the ε-ball. Every pose evaluated is a real pose, so
/// the result is a lower bound on the optimum. Cost is O(M² · theta_steps ·
/// (ε / t_grid)³); meant for small instances.
pub fn grid_oracle(
    matches: &MatchSet,
    cfg: &InlierConfig,
    theta_steps: usize,
    t_grid: f64,
) -> usize {
    let pairs = matches.pairs();
    let mut best = 0;
    for (i, &a) in pairs.iter().enumerate() {
        for (j, &b) in pairs.iter().enumerate() {
            if i == j {
                continue;
            }
            if let Some(pose) = minimal_solver_2pt(a, b) {
                best = best.max(objective(&pose, matches, cfg));
            }
        }
    }

    let eps = cfg.epsilon();
    let mut offsets = vec![Point3::ORIGIN];
    if t_grid > 0.0 && t_grid.is_finite() {
        let reach = (eps / t_grid).floor() as i64;
        for a in -reach..=reach {
            for b in -reach..=reach {
                for c in -reach..=reach {
                    let o = Point3::new(a as f64, b as f64, c as f64) * t_grid;
                    if (a, b, c) != (0, 0, 0) && o.norm() <= eps {
                        offsets.push(o);
                    }
                }
            }
        }
    }
    for s in 0..theta_steps {
        let theta = TAU * s as f64 / theta_steps as f64;
        for anchor in pairs {
            let base = anchor.q - rotate_z(theta, anchor.p);
            for &o in &offsets {
                let pose = Pose4DOF::new(theta, base + o);
                best = best.max(objective(&pose, matches, cfg));
            }
        }
    }
    best
}

/// Mean distance from each point to its nearest other point.
///
/// Uses a hash grid whose cell size comes from a brute-force estimate on a
/// sample of the points. Returns 0 for fewer than two points.
pub fn mean_nn_distance(points: &[Point3]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let brute = |i: usize| {
        let mut best = f64::INFINITY;
        for (j, q) in points.iter().enumerate() {
            if j != i {
                best = best.min(points[i].distance(q));
            }
        }
        best
    };
    let sample = 64.min(n);
    let stride = n / sample;
    let estimate = (0..sample).map(|s| brute(s * stride)).sum::<f64>() / sample as f64;
    let diag = 2.0 * bounding_half_extent(points).norm();
    if estimate.is_nan() || estimate <= 0.0 || diag.is_nan() || diag <= 0.0 {
        // too many duplicates for a sensible cell size
        return (0..n).map(brute).sum::<f64>() / n as f64;
    }

    let cell = 2.0 * estimate;
    let key = |p: &Point3| {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    let max_ring = (diag / cell).ceil() as i64 + 1;

    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let (kx, ky, kz) = key(p);
        let mut best = f64::INFINITY;
        for r in 0..=max_ring {
            for dx in -r..=r {
                for dy in -r..=r {
                    for dz in -r..=r {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                            continue;
                        }
                        if let Some(ids) = grid.get(&(kx + dx, ky + dy, kz + dz)) {
                            for &j in ids {
                                if j != i {
                                    best = best.min(p.distance(&points[j]));
                                }
                            }
                        }
                    }
                }
            }
            // anything beyond ring r is at least r cells away
            if best <= r as f64 * cell {
                break;
            }
        }
        total += best;
    }
    total / n as f64
}

fn bounding_half_extent(points: &[Point3]) -> Point3 {
    let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for p in points {
        lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    (hi - lo) * 0.5
}

fn uniform_in_box<R: Rng>(rng: &mut R, half: Point3) -> Point3 {
    let mut coord = |h: f64| if h > 0.0 { rng.gen_range(-h..h) } else { 0.0 };
    Point3::new(coord(half.x), coord(half.y), coord(half.z))
}

/// Offset with isotropic direction and magnitude uniform in `[0, max]`.
fn uniform_noise<R: Rng>(rng: &mut R, max: f64) -> Point3 {
    if max <= 0.0 {
        return Point3::ORIGIN;
    }
    let dir = loop {
        let v = Point3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let len = v.norm();
        if len > 1e-6 && len <= 1.0 {
            break v * (1.0 / len);
        }
    };
    dir * rng.gen_range(0.0..=max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::inlier_mask;

    fn cfg(eps: f64) -> InlierConfig {
        InlierConfig::new(eps).unwrap()
    }

    /// Points sampled on the floor and two walls of a room.
    pub(crate) fn room_cloud(n: usize, seed: u64) -> Vec<Point3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| match i % 3 {
                0 => Point3::new(rng.gen_range(0.0..8.0), rng.gen_range(0.0..5.0), 0.0),
                1 => Point3::new(rng.gen_range(0.0..8.0), 0.0, rng.gen_range(0.0..3.0)),
                _ => Point3::new(0.0, rng.gen_range(0.0..5.0), rng.gen_range(0.0..3.0)),
            })
            .collect()
    }

    #[test]
    fn subset_fraction_values() {
        assert!((subset_fraction(0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert!((subset_fraction(1.0 - 1e-12) - 1.0).abs() < 1e-11);
        assert!((subset_fraction(0.1) - 2.0 / 3.8).abs() < 1e-15);
    }

    #[test]
    fn overlap_spec_rejects_bad_tau() {
        assert!(OverlapSpec::new(0.0, 0).is_err());
        assert!(OverlapSpec::new(1.0, 0).is_err());
        assert!(OverlapSpec::new(f64::NAN, 0).is_err());
        assert!(OverlapSpec::new(0.5, 0)
            .unwrap()
            .with_noise(-1.0)
            .validate()
            .is_err());
    }

    #[test]
    fn overlap_subset_sizes() {
        let cloud = room_cloud(3000, 1);
        let pair = generate_overlap_pair(&cloud, &OverlapSpec::new(0.5, 2).unwrap()).unwrap();
        assert_eq!(pair.source.len(), 2000);
        assert_eq!(pair.target.len(), 2000);
        let shared = pair
            .source_ids
            .iter()
            .filter(|id| pair.target_ids.binary_search(id).is_ok())
            .count();
        assert_eq!(shared, 1000);
    }

    #[test]
    fn overlap_output_spacing() {
        let cloud = room_cloud(4000, 3);
        let spec = OverlapSpec::new(0.5, 4).unwrap().with_noise(0.0);
        let pair = generate_overlap_pair(&cloud, &spec).unwrap();
        let d = mean_nn_distance(&pair.source);
        assert!((d - 0.05).abs() <= 0.005, "spacing {d}");
    }

    #[test]
    fn overlap_truth_and_noise() {
        let cloud = room_cloud(1500, 5);
        let spec = OverlapSpec::new(0.7, 6).unwrap().with_noise(0.02);
        let pair = generate_overlap_pair(&cloud, &spec).unwrap();
        let src: HashMap<usize, Point3> = pair
            .source_ids
            .iter()
            .copied()
            .zip(pair.source.iter().copied())
            .collect();
        for (id, q) in pair.target_ids.iter().zip(&pair.target) {
            if let Some(&p) = src.get(id) {
                assert!(residual(&pair.truth, p, *q) <= 0.04 + 1e-12);
            }
        }
    }

    #[test]
    fn overlap_is_deterministic() {
        let cloud = room_cloud(900, 7);
        let spec = OverlapSpec::new(0.3, 8).unwrap();
        let a = generate_overlap_pair(&cloud, &spec).unwrap();
        let b = generate_overlap_pair(&cloud, &spec).unwrap();
        assert_eq!(a, b);
        let c = generate_overlap_pair(&cloud, &OverlapSpec::new(0.3, 9).unwrap()).unwrap();
        assert_ne!(a.truth, c.truth);
    }

    #[test]
    fn overlap_rejects_degenerate() {
        let same = vec![Point3::new(1.0, 2.0, 3.0); 10];
        let spec = OverlapSpec::new(0.5, 0).unwrap();
        assert!(matches!(
            generate_overlap_pair(&same, &spec),
            Err(Error::DegenerateCloud(_))
        ));
        assert!(generate_overlap_pair(&[], &spec).is_err());
    }

    #[test]
    fn overlap_matches_mask() {
        let cloud = room_cloud(2000, 10);
        let spec = OverlapSpec::new(0.5, 11).unwrap().with_noise(0.01);
        let pair = generate_overlap_pair(&cloud, &spec).unwrap();
        let c = cfg(0.05);
        let inst = overlap_matches(&pair, 300, 0.9, &c, 12).unwrap();
        assert_eq!(inst.matches.len(), 300);
        assert_eq!(inst.inlier_count(), 30);
        let mask: Vec<bool> = inlier_mask(&inst.truth, &inst.matches, &c).collect();
        assert_eq!(mask, inst.inlier_mask);
    }

    #[test]
    fn planted_mask_is_exact() {
        let c = cfg(0.05);
        for seed in 0..50 {
            let inst = generate_planted(60, 15, &c, seed).unwrap();
            assert_eq!(inst.matches.len(), 60);
            assert_eq!(inst.inlier_count(), 15);
            let mask: Vec<bool> = inlier_mask(&inst.truth, &inst.matches, &c).collect();
            assert_eq!(mask, inst.inlier_mask);
        }
    }

    #[test]
    fn planted_examples() {
        let c = cfg(0.05);
        let all = generate_planted(10, 10, &c, 1).unwrap();
        assert_eq!(objective(&all.truth, &all.matches, &c), 10);
        let sparse = generate_planted(100, 10, &c, 2).unwrap();
        assert_eq!(objective(&sparse.truth, &sparse.matches, &c), 10);
        assert!(generate_planted(5, 6, &c, 0).is_err());
        assert!(generate_planted_with(&PlantedSpec::new(5, 5, 0).with_noise(0.1), &c).is_err());
    }

    #[test]
    fn planted_is_deterministic() {
        let c = cfg(0.1);
        assert_eq!(
            generate_planted(40, 8, &c, 3).unwrap(),
            generate_planted(40, 8, &c, 3).unwrap()
        );
    }

    #[test]
    fn eval_examples() {
        let pose = Pose4DOF::new(0.4, Point3::new(1.0, 2.0, 3.0));
        let r = eval_errors(&pose, &pose);
        assert_eq!((r.rotation_error_deg, r.translation_error_m), (0.0, 0.0));

        let wrapped = eval_errors(&Pose4DOF::new(0.4 + TAU, pose.t), &pose);
        assert!(wrapped.rotation_error_deg < 1e-9);

        let shifted = Pose4DOF::new(0.4, pose.t + Point3::new(0.03, 0.04, 0.0));
        assert!((eval_errors(&shifted, &pose).translation_error_m - 0.05).abs() < 1e-12);

        let degree = Pose4DOF::new(0.4 + 1f64.to_radians(), pose.t);
        assert!((eval_errors(&degree, &pose).rotation_error_deg - 1.0).abs() < 1e-9);

        let across = eval_errors(
            &Pose4DOF::new(TAU - 0.01, pose.t),
            &Pose4DOF::new(0.01, pose.t),
        );
        assert!((across.rotation_error_deg - 0.02f64.to_degrees()).abs() < 1e-9);
    }

    #[test]
    fn oracle_examples() {
        let c = cfg(0.05);
        let all = generate_planted(12, 12, &c, 4).unwrap();
        assert_eq!(grid_oracle(&all.matches, &c, 90, 0.025), 12);
        for seed in 0..5 {
            let inst = generate_planted(20, 10, &c, 100 + seed).unwrap();
            assert!(grid_oracle(&inst.matches, &c, 180, 0.025) >= 10);
        }
    }

    #[test]
    fn nn_distance_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in [2usize, 3, 17, 400] {
            let pts: Vec<Point3> = (0..n)
                .map(|_| uniform_in_box(&mut rng, Point3::new(3.0, 1.0, 0.2)))
                .collect();
            let brute = (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i)
                        .map(|j| pts[i].distance(&pts[j]))
                        .fold(f64::INFINITY, f64::min)
                })
                .sum::<f64>()
                / n as f64;
            assert!((mean_nn_distance(&pts) - brute).abs() < 1e-12);
        }
        let lattice: Vec<Point3> = (0..10)
            .flat_map(|i| (0..10).map(move |j| Point3::new(i as f64 * 0.5, j as f64 * 0.5, 0.0)))
            .collect();
        assert!((mean_nn_distance(&lattice) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn noise_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..10_000 {
            assert!(uniform_noise(&mut rng, 0.05).norm() <= 0.05 + 1e-15);
        }
        assert_eq!(uniform_noise(&mut rng, 0.0), Point3::ORIGIN);
    }
}
