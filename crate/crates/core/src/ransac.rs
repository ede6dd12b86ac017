//! 4DOF RANSAC with a two-point minimal solver.
//!
//! Used as a baseline and as a sanity check: its consensus can never exceed
//! the branch-and-bound optimum.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{objective, rotate_z, Correspondence, InlierConfig, MatchSet, Pose4DOF};

/// Horizontal displacement below which a sample pair has no usable azimuth.
const MIN_BASELINE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    pub inlier: InlierConfig,
    /// Probability of drawing at least one all-inlier sample.
    pub confidence: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl RansacConfig {
    pub const DEFAULT_CONFIDENCE: f64 = 0.99;
    pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

    pub fn new(inlier: InlierConfig) -> Self {
        Self {
            inlier,
            confidence: Self::DEFAULT_CONFIDENCE,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacSolution {
    pub pose: Pose4DOF,
    pub consensus: usize,
    /// Samples drawn, including ones rejected by the height filter.
    pub iterations: usize,
    pub elapsed: Duration,
}

/// Pose aligning `a` exactly and the horizontal direction of `b − a`.
///
/// Returns `None` when either pair's horizontal displacement is too short to
/// define an azimuth.
pub fn minimal_solver_2pt(a: Correspondence, b: Correspondence) -> Option<Pose4DOF> {
    let dp = b.p - a.p;
    let dq = b.q - a.q;
    if dp.norm_xy() < MIN_BASELINE || dq.norm_xy() < MIN_BASELINE {
        return None;
    }
    // R(θ) turns azimuths clockwise, so θ = azi(dp) − azi(dq)
    let theta = dp.azimuth() - dq.azimuth();
    Some(Pose4DOF::new(theta, a.q - rotate_z(theta, a.p)))
}

/// True when some vertical shift is within ε of both pairs' height offsets.
pub fn heights_compatible(a: Correspondence, b: Correspondence, cfg: &InlierConfig) -> bool {
    ((a.q.z - a.p.z) - (b.q.z - b.p.z)).abs() <= 2.0 * cfg.epsilon()
}

/// Iterations needed to hit an all-inlier pair with the given confidence.
pub fn required_iterations(confidence: f64, inlier_ratio: f64, cap: usize) -> usize {
    let w2 = inlier_ratio * inlier_ratio;
    if w2 >= 1.0 {
        return 1;
    }
    if w2 <= 0.0 {
        return cap;
    }
    let n = ((1.0 - confidence).ln() / (1.0 - w2).ln()).ceil();
    if n.is_finite() && n < cap as f64 {
        (n as usize).max(1)
    } else {
        cap
    }
}

pub fn ransac_4dof(matches: &MatchSet, cfg: &RansacConfig) -> Result<RansacSolution> {
    cfg.validate()?;
    let m = matches.len();
    if m < 2 {
        return Err(Error::Config(format!(
            "RANSAC needs at least two matches, got {m}"
        )));
    }
    let started = Instant::now();
    let pairs = matches.pairs();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut best: Option<(Pose4DOF, usize)> = None;
    let mut required = cfg.max_iterations;
    let mut iterations = 0;
    while iterations < required {
        iterations += 1;
        let i = rng.gen_range(0..m);
        let mut j = rng.gen_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (pairs[i], pairs[j]);
        if !heights_compatible(a, b, &cfg.inlier) {
            continue;
        }
        let Some(pose) = minimal_solver_2pt(a, b) else {
            continue;
        };
        let count = objective(&pose, matches, &cfg.inlier);
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((pose, count));
            required =
                required_iterations(cfg.confidence, count as f64 / m as f64, cfg.max_iterations);
        }
    }

    let (pose, consensus) = best.unwrap_or_else(|| {
        let id = Pose4DOF::identity();
        (id, objective(&id, matches, &cfg.inlier))
    });
    Ok(RansacSolution {
        pose,
        consensus,
        iterations,
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{angle_difference, residual, Point3};
    use rand::Rng;
    use std::f64::consts::TAU;

    fn cfg(eps: f64) -> InlierConfig {
        InlierConfig::new(eps).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng) -> Point3 {
        Point3::new(
            rng.gen_range(-8.0..8.0),
            rng.gen_range(-8.0..8.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    #[test]
    fn exact_recovery_from_two_inliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let truth = Pose4DOF::new(rng.gen_range(0.0..TAU), random_point(&mut rng));
            let (p1, p2) = (random_point(&mut rng), random_point(&mut rng));
            let a = Correspondence::new(p1, truth.apply(p1));
            let b = Correspondence::new(p2, truth.apply(p2));
            let pose = minimal_solver_2pt(a, b).unwrap();
            assert!(angle_difference(pose.theta(), truth.theta()).abs() < 1e-9);
            assert!((pose.t - truth.t).norm() < 1e-9);
        }
    }

    #[test]
    fn vertical_baseline_is_degenerate() {
        let a = Correspondence::new(Point3::new(1.0, 1.0, 0.0), Point3::new(2.0, 0.0, 0.0));
        let b = Correspondence::new(Point3::new(1.0, 1.0, 3.0), Point3::new(5.0, 5.0, 3.0));
        assert!(minimal_solver_2pt(a, b).is_none());
        assert!(minimal_solver_2pt(b, a).is_none());
    }

    #[test]
    fn noisy_sample_residuals_within_two_epsilon() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let eps = 0.05;
        let noise = |rng: &mut ChaCha8Rng| {
            let d = Point3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            d * (rng.gen_range(0.0..eps) / d.norm())
        };
        let mut checked = 0;
        while checked < 200 {
            let truth = Pose4DOF::new(rng.gen_range(0.0..TAU), random_point(&mut rng));
            let (p1, p2) = (random_point(&mut rng), random_point(&mut rng));
            // the bound needs a baseline long enough that the heading error
            // stays below the noise level at the sampled points
            if (p2 - p1).norm_xy() < 4.0 || p1.norm_xy() > 8.0 {
                continue;
            }
            let a = Correspondence::new(p1, truth.apply(p1) + noise(&mut rng));
            let b = Correspondence::new(p2, truth.apply(p2) + noise(&mut rng));
            let pose = minimal_solver_2pt(a, b).unwrap();
            assert!(residual(&pose, a.p, a.q) <= 2.0 * eps);
            assert!(residual(&pose, b.p, b.q) <= 2.0 * eps);
            checked += 1;
        }
    }

    #[test]
    fn height_filter_keeps_common_inliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = cfg(0.05);
        for _ in 0..1000 {
            let truth = Pose4DOF::new(rng.gen_range(0.0..TAU), random_point(&mut rng));
            let mk = |rng: &mut ChaCha8Rng| {
                let p = random_point(rng);
                let dz = rng.gen_range(-0.05..=0.05);
                Correspondence::new(p, truth.apply(p) + Point3::new(0.0, 0.0, dz))
            };
            let (a, b) = (mk(&mut rng), mk(&mut rng));
            assert!(heights_compatible(a, b, &c));
        }
    }

    #[test]
    fn iteration_schedule() {
        assert_eq!(required_iterations(0.99, 1.0, 1000), 1);
        assert_eq!(required_iterations(0.99, 0.0, 1000), 1000);
        // ln(0.01) / ln(0.99) = 458.2
        assert_eq!(required_iterations(0.99, 0.1, 100_000), 459);
        assert_eq!(required_iterations(0.99, 0.01, 5000), 5000);
    }

    #[test]
    fn all_inliers_converge_quickly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let truth = Pose4DOF::new(1.3, Point3::new(2.0, -1.0, 0.4));
        let pairs = (0..20)
            .map(|_| {
                let p = random_point(&mut rng);
                Correspondence::new(p, truth.apply(p))
            })
            .collect();
        let ms = MatchSet::new(pairs).unwrap();
        let sol = ransac_4dof(&ms, &RansacConfig::new(cfg(0.05)).with_seed(9)).unwrap();
        assert_eq!(sol.consensus, 20);
        assert!(sol.iterations <= 5);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs = (0..80)
            .map(|_| Correspondence::new(random_point(&mut rng), random_point(&mut rng)))
            .collect();
        let ms = MatchSet::new(pairs).unwrap();
        let config = RansacConfig::new(cfg(0.2))
            .with_seed(7)
            .with_max_iterations(3000);
        let a = ransac_4dof(&ms, &config).unwrap();
        let b = ransac_4dof(&ms, &config).unwrap();
        assert_eq!(a.pose, b.pose);
        assert_eq!(a.consensus, b.consensus);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(objective(&a.pose, &ms, &config.inlier), a.consensus);
    }

    #[test]
    fn rejects_bad_input() {
        let one = MatchSet::new(vec![Correspondence::new(Point3::ORIGIN, Point3::ORIGIN)]).unwrap();
        assert!(ransac_4dof(&one, &RansacConfig::new(cfg(0.1))).is_err());
        let two = MatchSet::new(vec![
            Correspondence::new(Point3::ORIGIN, Point3::ORIGIN),
            Correspondence::new(Point3::new(1.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)),
        ])
        .unwrap();
        assert!(ransac_4dof(&two, &RansacConfig::new(cfg(0.1)).with_confidence(1.0)).is_err());
        assert!(ransac_4dof(&two, &RansacConfig::new(cfg(0.1)).with_max_iterations(0)).is_err());
    }
}
