//! Exact 1D rotation search for a fixed translation.
//!
//! For a pair `(p, q̃)` the set of angles with `‖R(θ)p − q̃‖ ≤ ε` is a single
//! arc (possibly empty or the whole circle): the horizontal circle swept by
//! `p` cut by the ε-ball around `q̃`. The best angle over all pairs is then
//! the point stabbing the most arcs, found with a sorted-endpoint sweep.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use crate::geometry::{normalize_angle, InlierConfig, MatchSet, Point3};

/// Horizontal radius below which the circle swept by `p` is a single point.
const DEGENERATE_RADIUS: f64 = 1e-12;

/// Angles aligning one pair, before wrap-around handling.
///
/// `Arc` endpoints are raw: `alpha` may be negative and `beta` may exceed
/// 2π, but `0 ≤ beta − alpha < 2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularInterval {
    Empty,
    Full,
    Arc { alpha: f64, beta: f64 },
}

/// Closed arc `[start, end]` with `0 ≤ start ≤ end ≤ 2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub start: f64,
    pub end: f64,
}

impl Span {
    pub fn new(start: f64, end: f64) -> Self {
        debug_assert!(start <= end, "span start after end: {start} > {end}");
        Self { start, end }
    }

    pub fn point(angle: f64) -> Self {
        Self::new(angle, angle)
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.start <= angle && angle <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EndpointKind {
    Start,
    End,
}

/// Sweep event. Sorted by angle, then starts before ends, then span index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalEndpoint {
    pub angle: f64,
    pub kind: EndpointKind,
    pub id: usize,
}

impl IntervalEndpoint {
    fn sweep_order(&self, other: &Self) -> Ordering {
        self.angle
            .total_cmp(&other.angle)
            .then(self.kind.cmp(&other.kind))
            .then(self.id.cmp(&other.id))
    }
}

/// Maximum stabbing depth and an angle achieving it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabResult {
    pub count: usize,
    pub theta: f64,
}

/// Closest distance from `q̃` to the horizontal circle swept by `p`.
pub fn circ_ball_distance(p: Point3, q_tilde: Point3) -> f64 {
    (p.norm_xy() - q_tilde.norm_xy()).hypot(p.z - q_tilde.z)
}

/// The set of `θ` with `‖R(θ)p − q̃‖ ≤ ε`.
pub fn compute_interval(p: Point3, q_tilde: Point3, cfg: &InlierConfig) -> AngularInterval {
    let eps = cfg.epsilon();
    let dz = (p.z - q_tilde.z).abs();
    if dz > eps {
        return AngularInterval::Empty;
    }
    let rp = p.norm_xy();
    let rq = q_tilde.norm_xy();
    if circ_ball_distance(p, q_tilde) > eps {
        return AngularInterval::Empty;
    }
    // every point of the circle (or the on-axis target) is at distance d ≤ ε
    if rp < DEGENERATE_RADIUS || rq < DEGENERATE_RADIUS {
        return AngularInterval::Full;
    }
    let eps_xy = ((eps - dz) * (eps + dz)).sqrt();
    if rp + rq <= eps_xy {
        return AngularInterval::Full;
    }

    // Law of cosines in the horizontal plane: γ is the angle at the origin
    // of the triangle with sides rp, rq, eps_xy. The half-angle form keeps
    // precision for narrow arcs where the cosine is close to 1.
    let cos_gamma = (rp * rp + rq * rq - eps_xy * eps_xy) / (2.0 * rp * rq);
    let gamma = if cos_gamma > 0.0 {
        let gap = rp - rq;
        let half_sin2 = ((eps_xy - gap) * (eps_xy + gap) / (4.0 * rp * rq)).clamp(0.0, 1.0);
        2.0 * half_sin2.sqrt().asin()
    } else {
        cos_gamma.clamp(-1.0, 1.0).acos()
    };

    // R(θ) turns azimuths clockwise: azi(R(θ)p) = azi(p) − θ.
    let omega = normalize_angle(p.azimuth() - q_tilde.azimuth());
    AngularInterval::Arc {
        alpha: omega - gamma,
        beta: omega + gamma,
    }
}

/// Map a raw interval onto `[0, 2π]`.
///
/// Arcs crossing the seam are cut in two. An arc touching exactly one of the
/// seam angles 0 and 2π gets a zero-length companion at the other one, so a
/// pair contributes identically to the stabbing depth at θ = 0 and θ = 2π.
pub fn split_wraparound(raw: AngularInterval) -> Vec<Span> {
    let mut out = Vec::with_capacity(2);
    push_spans(raw, &mut out);
    out
}

fn push_spans(raw: AngularInterval, out: &mut Vec<Span>) {
    match raw {
        AngularInterval::Empty => {}
        AngularInterval::Full => out.push(Span::new(0.0, TAU)),
        AngularInterval::Arc { alpha, beta } => {
            if beta - alpha >= TAU {
                out.push(Span::new(0.0, TAU));
                return;
            }
            // arcs from compute_interval satisfy alpha < 2π and beta ≥ 0;
            // anything else is shifted by whole turns first
            let (alpha, beta) = if alpha < TAU && beta >= 0.0 {
                (alpha, beta)
            } else {
                let shift = (alpha / TAU).floor() * TAU;
                (alpha - shift, beta - shift)
            };
            if alpha < 0.0 {
                out.push(Span::new(alpha + TAU, TAU));
                out.push(Span::new(0.0, beta));
            } else if beta > TAU {
                out.push(Span::new(alpha, TAU));
                out.push(Span::new(0.0, beta - TAU));
            } else {
                out.push(Span::new(alpha, beta));
                if alpha == 0.0 && beta < TAU {
                    out.push(Span::point(TAU));
                } else if beta == TAU && alpha > 0.0 {
                    out.push(Span::point(0.0));
                }
            }
        }
    }
}

/// Maximum number of spans sharing a common angle.
///
/// The returned angle is the midpoint of the first deepest region, so it
/// lies strictly inside every stabbed span whenever that region has
/// positive width.
pub fn max_stab(spans: &[Span]) -> StabResult {
    let mut events = Vec::with_capacity(spans.len() * 2);
    max_stab_with(spans, &mut events)
}

fn max_stab_with(spans: &[Span], events: &mut Vec<IntervalEndpoint>) -> StabResult {
    events.clear();
    for (id, s) in spans.iter().enumerate() {
        events.push(IntervalEndpoint {
            angle: s.start,
            kind: EndpointKind::Start,
            id,
        });
        events.push(IntervalEndpoint {
            angle: s.end,
            kind: EndpointKind::End,
            id,
        });
    }
    events.sort_unstable_by(IntervalEndpoint::sweep_order);

    let mut depth = 0usize;
    let mut best = 0usize;
    let mut best_at = None;
    for (i, e) in events.iter().enumerate() {
        match e.kind {
            EndpointKind::Start => {
                depth += 1;
                if depth > best {
                    best = depth;
                    best_at = Some(i);
                }
            }
            EndpointKind::End => depth -= 1,
        }
    }

    let theta = match best_at {
        // a deepest start is always followed by an end event
        Some(i) => 0.5 * (events[i].angle + events[i + 1].angle),
        None => 0.0,
    };
    StabResult { count: best, theta }
}

/// Reusable buffers for repeated rotation searches.
#[derive(Debug, Default)]
pub struct RotationSearch {
    spans: Vec<Span>,
    events: Vec<IntervalEndpoint>,
}

impl RotationSearch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Max-stab over the arcs of `(p, q̃)` pairs at threshold `cfg`.
    pub fn solve<I>(&mut self, pairs: I, cfg: &InlierConfig) -> StabResult
    where
        I: IntoIterator<Item = (Point3, Point3)>,
    {
        self.spans.clear();
        for (p, q_tilde) in pairs {
            push_spans(compute_interval(p, q_tilde, cfg), &mut self.spans);
        }
        max_stab_with(&self.spans, &mut self.events)
    }

    pub fn consensus(&mut self, t: Point3, matches: &MatchSet, cfg: &InlierConfig) -> StabResult {
        self.solve(matches.iter().map(|m| (m.p, m.q - t)), cfg)
    }
}

/// `U(t)`: the best consensus over all rotations for translation `t`, and a
/// maximizing angle.
pub fn rotation_consensus(t: Point3, matches: &MatchSet, cfg: &InlierConfig) -> StabResult {
    RotationSearch::new().consensus(t, matches, cfg)
}
