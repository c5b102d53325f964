//! Worst-case angular speed of a boundary robot as seen from the target.
//!
//! A robot that can travel at most `d_max = v_max * dt` along the boundary
//! per step sweeps an angle about an interior reference point `o` that
//! depends on where it is. The coordination layer needs one scalar bound
//! `omega_max` valid for every robot, computed as the minimum over three
//! geometric cases of the largest angle a `d_max` chord can sweep:
//!
//! 1. edges whose perpendicular foot from `o` falls inside the edge — the
//!    worst chord straddles the foot (clamped to stay on the edge);
//! 2. edges whose foot falls outside — the worst chord is anchored at the
//!    endpoint nearer the foot;
//! 3. vertex crossings — the robot must stop and turn in place through the
//!    exterior angle at rate `omega_ro`, which eats into the step's travel
//!    budget; the remaining distance is split across the two incident edges
//!    to maximize the swept angle.
//!
//! Cases with no qualifying edge or vertex contribute `+inf` (they simply
//! do not constrain the minimum).

use crate::geometry::{ConvexPolygon, GeometryError};
use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("step travel budget {d_max} must be smaller than the shortest edge {shortest}")]
    DmaxExceedsShortestEdge { d_max: f64, shortest: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("speed budget fields must be positive (v_max={v_max}, omega_ro={omega_ro}, dt={dt})")]
    NonPositiveBudget { v_max: f64, omega_ro: f64, dt: f64 },
    #[error("no case produced a finite bound")]
    AllCasesEmpty,
}

/// Per-step motion budget: linear speed cap, in-place rotation speed, and
/// the step length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedBudget {
    /// max linear speed along the boundary (m/s)
    pub v_max: f64,
    /// in-place rotation speed at vertices (rad/s)
    pub omega_ro: f64,
    /// step length (s)
    pub dt: f64,
}

impl SpeedBudget {
    pub fn new(v_max: f64, omega_ro: f64, dt: f64) -> Result<Self, KinematicsError> {
        if v_max <= 0.0 || omega_ro <= 0.0 || dt <= 0.0 {
            return Err(KinematicsError::NonPositiveBudget { v_max, omega_ro, dt });
        }
        Ok(Self { v_max, omega_ro, dt })
    }

    /// Maximum boundary distance coverable in one step.
    pub fn d_max(&self) -> f64 {
        self.v_max * self.dt
    }
}

/// The three case values and their minimum. Empty cases hold `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaBreakdown {
    pub case1: f64,
    pub case2: f64,
    pub case3: f64,
    pub omega_max: f64,
}

/// Angle at `o` subtended by the chord `[s, s + d]` (arclength along the
/// edge), where `foot` is the perpendicular foot parameter and `h` the
/// distance from `o` to the edge line. Exact for any window on the line.
fn window_angle(s: f64, d: f64, foot: f64, h: f64) -> f64 {
    ((s + d - foot) / h).atan() - ((s - foot) / h).atan()
}

/// Foot parameter along the edge (in length units from its start) and
/// perpendicular distance from `o` to the edge line.
fn foot_and_height(a: Point2<f64>, b: Point2<f64>, o: &Point2<f64>) -> (f64, f64, f64) {
    let e = b - a;
    let len = e.norm();
    let u = e / len;
    let rel = o - a;
    let foot = rel.x * u.x + rel.y * u.y;
    // interior o sits on the positive side of every ccw edge
    let h = u.x * rel.y - u.y * rel.x;
    (foot, h, len)
}

/// Bound from edges whose perpendicular foot lies inside the edge. The
/// worst chord straddles the foot; if that placement would overhang an
/// endpoint it is clamped to stay on the edge. Returns `+inf` when no edge
/// qualifies.
pub fn omega_max_case1(poly: &ConvexPolygon, o: &Point2<f64>, budget: &SpeedBudget) -> f64 {
    let d = budget.d_max();
    let mut best = f64::INFINITY;
    for i in 0..poly.n_edges() {
        let (a, b) = poly.edge(i);
        let (foot, h, len) = foot_and_height(a, b, o);
        if !(0.0..=len).contains(&foot) {
            continue;
        }
        let s = (foot - d / 2.0).clamp(0.0, len - d);
        let theta = window_angle(s, d, foot, h);
        best = best.min(theta / budget.dt);
    }
    best
}

/// Bound from edges whose perpendicular foot lies outside the edge. The
/// swept angle is monotone toward the foot, so the worst chord is anchored
/// at one of the endpoints; both are evaluated by the law of cosines and
/// the larger kept. Returns `+inf` when no edge qualifies.
pub fn omega_max_case2(poly: &ConvexPolygon, o: &Point2<f64>, budget: &SpeedBudget) -> f64 {
    let d = budget.d_max();
    let mut best = f64::INFINITY;
    for i in 0..poly.n_edges() {
        let (a, b) = poly.edge(i);
        let (foot, _h, len) = foot_and_height(a, b, o);
        if (0.0..=len).contains(&foot) {
            continue;
        }
        let u = (b - a) / len;
        let chord_angle = |anchor: Point2<f64>, inward: Vector2<f64>| -> f64 {
            let far = anchor + inward * d;
            let ra = (anchor - o).norm();
            let rb = (far - o).norm();
            let cos = ((ra * ra + rb * rb - d * d) / (2.0 * ra * rb)).clamp(-1.0, 1.0);
            cos.acos()
        };
        let theta = chord_angle(a, u).max(chord_angle(b, -u));
        best = best.min(theta / budget.dt);
    }
    best
}

/// Bound from vertex crossings. Turning in place through the exterior angle
/// at `omega_ro` consumes `theta_ext / omega_ro` seconds; if that exceeds
/// the step the vertex cannot be crossed and is skipped. Otherwise the
/// leftover travel distance is split `d1 + d2` across the incident edges
/// and the swept angle (two applications of the law of cosines) maximized
/// over the split. The case value is the minimum over vertices of that
/// per-vertex maximum. Returns `+inf` when no vertex is crossable.
pub fn omega_max_case3(poly: &ConvexPolygon, o: &Point2<f64>, budget: &SpeedBudget) -> f64 {
    let n = poly.n_edges();
    let mut best = f64::INFINITY;
    for v in 0..n {
        let vert = poly.vertices()[v];
        let prev = poly.vertices()[(v + n - 1) % n];
        let next = poly.vertices()[(v + 1) % n];
        let u_in = (vert - prev) / (vert - prev).norm();
        let u_out = (next - vert) / (next - vert).norm();
        let ext = (u_in.x * u_out.x + u_in.y * u_out.y).clamp(-1.0, 1.0).acos();
        let dwell = ext / budget.omega_ro;
        if dwell >= budget.dt {
            continue;
        }
        let travel = budget.v_max * (budget.dt - dwell);
        let swept = |d1: f64| -> f64 {
            let d2 = travel - d1;
            let p_s = vert - u_in * d1;
            let p_e = vert + u_out * d2;
            // chord across the corner, then the angle at o
            let interior = std::f64::consts::PI - ext;
            let c2 = d1 * d1 + d2 * d2 - 2.0 * d1 * d2 * interior.cos();
            let ra = (p_s - o).norm();
            let rb = (p_e - o).norm();
            let cos = ((ra * ra + rb * rb - c2) / (2.0 * ra * rb)).clamp(-1.0, 1.0);
            cos.acos()
        };
        // coarse scan plus golden-section refinement around the best split
        let scans = 128;
        let mut arg = 0.0;
        let mut val = f64::NEG_INFINITY;
        for k in 0..=scans {
            let d1 = travel * k as f64 / scans as f64;
            let th = swept(d1);
            if th > val {
                val = th;
                arg = d1;
            }
        }
        let w = travel / scans as f64;
        let (mut lo, mut hi) = ((arg - w).max(0.0), (arg + w).min(travel));
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..60 {
            let c = hi - phi * (hi - lo);
            let d1 = lo + phi * (hi - lo);
            if swept(c) < swept(d1) {
                lo = c;
            } else {
                hi = d1;
            }
        }
        let theta = val.max(swept(0.5 * (lo + hi)));
        best = best.min(theta / budget.dt);
    }
    best
}

/// Common worst-case angular speed: the minimum of the three case bounds.
///
/// Validates that the reference point is strictly interior and that the
/// per-step travel budget is smaller than the shortest edge (so a chord
/// spans at most one vertex).
pub fn omega_max(
    poly: &ConvexPolygon,
    o: &Point2<f64>,
    budget: &SpeedBudget,
) -> Result<OmegaBreakdown, KinematicsError> {
    if !poly.contains_interior(o, 1e-12) {
        return Err(GeometryError::CenterOutsidePolygon(o.x, o.y).into());
    }
    let d_max = budget.d_max();
    let shortest = poly.shortest_edge();
    if d_max >= shortest {
        return Err(KinematicsError::DmaxExceedsShortestEdge { d_max, shortest });
    }
    let case1 = omega_max_case1(poly, o, budget);
    let case2 = omega_max_case2(poly, o, budget);
    let case3 = omega_max_case3(poly, o, budget);
    let omega_max = case1.min(case2).min(case3);
    if !omega_max.is_finite() {
        return Err(KinematicsError::AllCasesEmpty);
    }
    Ok(OmegaBreakdown {
        case1,
        case2,
        case3,
        omega_max,
    })
}
