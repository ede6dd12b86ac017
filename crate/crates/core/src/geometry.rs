//! Points, correspondences, the 4DOF transform model and the consensus
//! objective shared by every solver.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A point (or vector) in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    /// Length of the horizontal (xy) projection.
    pub fn norm_xy(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Azimuth of the horizontal projection, `atan2(y, x)`.
    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        (*self - *other).norm()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, rhs: f64) -> Point3 {
        Point3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// One candidate correspondence `(p, q)`: `p` in the source scan, `q` in the
/// target scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub p: Point3,
    pub q: Point3,
}

impl Correspondence {
    pub const fn new(p: Point3, q: Point3) -> Self {
        Self { p, q }
    }
}

/// An ordered, non-empty list of candidate correspondences.
///
/// Storage order matters: match pruning processes pivots in this order.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    pairs: Vec<Correspondence>,
}

impl MatchSet {
    pub fn new(pairs: Vec<Correspondence>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyMatches);
        }
        if pairs.iter().any(|c| !c.p.is_finite() || !c.q.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[Correspondence] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Always false for a constructed set; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Correspondence> {
        self.pairs.iter()
    }

    pub fn into_pairs(self) -> Vec<Correspondence> {
        self.pairs
    }

    /// The pairs at `indices`, in the order given.
    ///
    /// Panics if `indices` is empty or out of range.
    pub fn subset(&self, indices: &[usize]) -> MatchSet {
        assert!(!indices.is_empty(), "subset must be non-empty");
        MatchSet {
            pairs: indices.iter().map(|&i| self.pairs[i]).collect(),
        }
    }
}

impl<'a> IntoIterator for &'a MatchSet {
    type Item = &'a Correspondence;
    type IntoIter = std::slice::Iter<'a, Correspondence>;
    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter()
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `a - b` wrapped to `[-π, π]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// Rigid transform restricted to a rotation about the vertical axis plus a
/// 3D translation: `f(p) = R(θ)p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose4DOF {
    theta: f64,
    pub t: Point3,
}

impl Pose4DOF {
    pub fn new(theta: f64, t: Point3) -> Self {
        Self {
            theta: normalize_angle(theta),
            t,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, Point3::ORIGIN)
    }

    /// Rotation angle in `[0, 2π)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        apply_pose(self, p)
    }

    /// The pose that applies `first` and then `self`.
    pub fn after(&self, first: &Pose4DOF) -> Pose4DOF {
        Pose4DOF::new(
            self.theta + first.theta,
            rotate_z(self.theta, first.t) + self.t,
        )
    }

    pub fn inverse(&self) -> Pose4DOF {
        Pose4DOF::new(-self.theta, -rotate_z(-self.theta, self.t))
    }
}

impl Default for Pose4DOF {
    fn default() -> Self {
        Self::identity()
    }
}

/// Inlier threshold in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InlierConfig {
    epsilon: f64,
}

impl InlierConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Config(format!(
                "inlier threshold must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same configuration with the threshold grown by `extra` metres.
    pub fn widened(&self, extra: f64) -> Self {
        Self {
            epsilon: self.epsilon + extra,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            epsilon: self.epsilon * factor,
        }
    }
}

/// `R(θ)p` with
///
/// ```text
/// R(θ) = [  cos θ  sin θ  0 ]
///        [ -sin θ  cos θ  0 ]
///        [    0      0    1 ]
/// ```
///
/// i.e. a clockwise rotation of the xy-plane when viewed from +z.
pub fn rotate_z(theta: f64, p: Point3) -> Point3 {
    let (s, c) = theta.sin_cos();
    Point3::new(c * p.x + s * p.y, -s * p.x + c * p.y, p.z)
}

pub fn apply_pose(pose: &Pose4DOF, p: Point3) -> Point3 {
    rotate_z(pose.theta, p) + pose.t
}

/// `‖R(θ)p + t − q‖`.
pub fn residual(pose: &Pose4DOF, p: Point3, q: Point3) -> f64 {
    (apply_pose(pose, p) - q).norm()
}

/// Number of pairs aligned within the inlier threshold (inclusive).
pub fn objective(pose: &Pose4DOF, matches: &MatchSet, cfg: &InlierConfig) -> usize {
    inlier_mask(pose, matches, cfg).filter(|&b| b).count()
}

/// Per-pair inlier flags under `pose`.
pub fn inlier_mask<'a>(
    pose: &'a Pose4DOF,
    matches: &'a MatchSet,
    cfg: &'a InlierConfig,
) -> impl Iterator<Item = bool> + 'a {
    let eps = cfg.epsilon;
    let (s, c) = pose.theta.sin_cos();
    matches.iter().map(move |m| {
        let rx = c * m.p.x + s * m.p.y + pose.t.x - m.q.x;
        let ry = -s * m.p.x + c * m.p.y + pose.t.y - m.q.y;
        let rz = m.p.z + pose.t.z - m.q.z;
        (rx * rx + ry * ry + rz * rz).sqrt() <= eps
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: Point3, b: Point3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn rotate_z_examples() {
        let p = Point3::new(1.0, 2.0, 3.0);
        assert_eq!(rotate_z(0.0, p), p);
        assert!(close(
            rotate_z(FRAC_PI_2, Point3::new(1.0, 0.0, 0.0)),
            Point3::new(0.0, -1.0, 0.0),
            1e-15
        ));
        for theta in [0.3, 1.0, 4.0] {
            assert_eq!(
                rotate_z(theta, Point3::new(0.0, 0.0, 5.0)),
                Point3::new(0.0, 0.0, 5.0)
            );
        }
    }

    #[test]
    fn apply_pose_examples() {
        let one = Point3::new(1.0, 1.0, 1.0);
        assert_eq!(Pose4DOF::identity().apply(one), one);
        let shift = Pose4DOF::new(0.0, Point3::new(1.0, 0.0, 0.0));
        assert_eq!(shift.apply(Point3::ORIGIN), Point3::new(1.0, 0.0, 0.0));
        let pose = Pose4DOF::new(FRAC_PI_2, Point3::new(0.0, 0.0, 1.0));
        assert!(close(
            pose.apply(Point3::new(1.0, 0.0, 0.0)),
            Point3::new(0.0, -1.0, 1.0),
            1e-15
        ));
    }

    #[test]
    fn residual_examples() {
        let id = Pose4DOF::identity();
        let p = Point3::new(0.3, -2.0, 1.0);
        assert_eq!(residual(&id, p, p), 0.0);
        assert_eq!(
            residual(&id, Point3::ORIGIN, Point3::new(3.0, 4.0, 0.0)),
            5.0
        );
        let half = Pose4DOF::new(PI, Point3::ORIGIN);
        let x = Point3::new(1.0, 0.0, 0.0);
        assert!((residual(&half, x, x) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn objective_counts_exact_matches() {
        let pairs = (0..5)
            .map(|i| {
                let p = Point3::new(i as f64, 2.0 * i as f64, -1.0);
                Correspondence::new(p, p)
            })
            .collect();
        let ms = MatchSet::new(pairs).unwrap();
        let cfg = InlierConfig::new(0.01).unwrap();
        assert_eq!(objective(&Pose4DOF::identity(), &ms, &cfg), 5);
    }

    #[test]
    fn objective_boundary_is_inclusive() {
        // 0.5 is exact in binary so the residual equals epsilon bit for bit
        let ms = MatchSet::new(vec![Correspondence::new(
            Point3::ORIGIN,
            Point3::new(0.5, 0.0, 0.0),
        )])
        .unwrap();
        let cfg = InlierConfig::new(0.5).unwrap();
        assert_eq!(objective(&Pose4DOF::identity(), &ms, &cfg), 1);
    }

    #[test]
    fn match_set_rejects_empty_and_nan() {
        assert!(matches!(MatchSet::new(vec![]), Err(Error::EmptyMatches)));
        let bad = Correspondence::new(Point3::new(f64::NAN, 0.0, 0.0), Point3::ORIGIN);
        assert!(matches!(MatchSet::new(vec![bad]), Err(Error::NonFinite)));
    }

    #[test]
    fn inlier_config_validation() {
        assert!(InlierConfig::new(0.0).is_err());
        assert!(InlierConfig::new(-1.0).is_err());
        assert!(InlierConfig::new(f64::INFINITY).is_err());
        assert!(InlierConfig::new(0.05).is_ok());
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(TAU), 0.0);
        assert_eq!(normalize_angle(-1e-300), 0.0);
        assert!((normalize_angle(-FRAC_PI_2) - 3.0 * FRAC_PI_2).abs() < 1e-15);
        assert!((angle_difference(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        let th = Pose4DOF::new(7.0 * PI, Point3::ORIGIN).theta();
        assert!((0.0..TAU).contains(&th));
    }

    fn point() -> impl Strategy<Value = Point3> {
        (-50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn rotation_preserves_norm_and_height(theta in -20.0..20.0f64, p in point()) {
            let r = rotate_z(theta, p);
            prop_assert!((r.norm() - p.norm()).abs() <= 1e-12 * p.norm().max(1.0));
            prop_assert_eq!(r.z, p.z);
        }

        #[test]
        fn rotations_compose(a in 0.0..TAU, b in 0.0..TAU, p in point()) {
            let lhs = rotate_z(a, rotate_z(b, p));
            let rhs = rotate_z(normalize_angle(a + b), p);
            prop_assert!((lhs - rhs).norm() <= 1e-9);
        }

        #[test]
        fn pose_composition_matches_sequential_application(
            a in 0.0..TAU, b in 0.0..TAU, ta in point(), tb in point(), p in point()
        ) {
            let first = Pose4DOF::new(a, ta);
            let second = Pose4DOF::new(b, tb);
            let composed = second.after(&first);
            prop_assert!((composed.apply(p) - second.apply(first.apply(p))).norm() <= 1e-9);
            let back = first.inverse().apply(first.apply(p));
            prop_assert!((back - p).norm() <= 1e-9);
        }

        #[test]
        fn objective_is_bounded_and_permutation_invariant(
            pts in prop::collection::vec((point(), point()), 1..40),
            theta in 0.0..TAU,
            t in point(),
            seed in any::<u64>(),
        ) {
            let pairs: Vec<_> = pts.iter().map(|&(p, q)| Correspondence::new(p, q * 0.1)).collect();
            let ms = MatchSet::new(pairs.clone()).unwrap();
            let cfg = InlierConfig::new(5.0).unwrap();
            let pose = Pose4DOF::new(theta, t * 0.1);
            let count = objective(&pose, &ms, &cfg);
            prop_assert!(count <= ms.len());
            let mut shuffled = pairs;
            use rand::{seq::SliceRandom, SeedableRng};
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let ms2 = MatchSet::new(shuffled).unwrap();
            prop_assert_eq!(objective(&pose, &ms2, &cfg), count);
        }
    }
}
