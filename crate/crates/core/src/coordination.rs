//! Self-triggered neighbor coordination on the circle.
//!
//! Each robot keeps one record per ring neighbor: the neighbor's angle at
//! the last exchange and the record's age. Because every robot's angular
//! speed is bounded by `omega_max`, an age-`tau` record pins the neighbor
//! inside an interval of half-width `omega_max * tau`. From those intervals
//! the robot derives:
//!
//! - the *guaranteed segment*: angles certain to lie in its true Voronoi
//!   cell no matter where the neighbors have actually moved;
//! - the *guaranteed midpoint*: its steering target;
//! - `ubd`: a bound on how far the guaranteed midpoint can sit from the
//!   true (full-information) midpoint.
//!
//! The control law moves toward the guaranteed midpoint but parks once
//! within `ubd` of it — going closer could overshoot the true midpoint.
//! A trigger test decides when records are too stale to keep guarantees:
//! either the uncertainty bound has caught up with the remaining distance
//! (and the slack `sigma`), or one more step of worst-case neighbor motion
//! could break the circular ordering. All interval arithmetic happens on a
//! locally unwrapped line (`prev <= own <= next`) to dodge wraparound bugs.
//!
//! Two coherent uncertainty modes are provided. The default pairs the
//! interval-corrected midpoint with `ubd = omega_max * max(tau_prev,
//! tau_next) / 2`. The tighter mode pairs the record-average midpoint with
//! `ubd = omega_max * (tau_prev + tau_next) / 4`; mixing the pairs breaks
//! the bound when record ages differ, so the flag switches both together.

use crate::geometry::Angle;
use serde::{Deserialize, Serialize};

/// Last known angle of a ring neighbor and the age of that information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborRecord {
    pub angle: Angle,
    /// seconds since the record was exchanged
    pub age: f64,
}

impl NeighborRecord {
    pub fn fresh(angle: Angle) -> Self {
        Self { angle, age: 0.0 }
    }
}

/// Where a neighbor can be, given its record and the common speed bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionInterval {
    pub center: Angle,
    pub half_width: f64,
}

impl PredictionInterval {
    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }
}

/// Which (midpoint, uncertainty-bound) pair the robot uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UbdRule {
    /// interval-corrected midpoint, bound from the staler record
    #[default]
    MaxAge,
    /// record-average midpoint, bound from the mean record age
    MeanAge,
}

/// Everything a robot knows locally when it computes its control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotLocalState {
    pub own: Angle,
    /// clockwise ring neighbor (previous index)
    pub prev: NeighborRecord,
    /// counter-clockwise ring neighbor (next index)
    pub next: NeighborRecord,
    /// trigger slack (rad): staleness is tolerated while the uncertainty
    /// bound stays below max(remaining distance, sigma)
    pub sigma: f64,
    pub omega_max: f64,
    pub dt: f64,
    pub ubd_rule: UbdRule,
}

/// Segment of angles guaranteed to lie in the robot's true Voronoi cell,
/// expressed on the locally unwrapped line (lo <= hi; own angle unwraps to
/// a value inside when the ordering condition holds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteedSegment {
    pub lo: f64,
    pub hi: f64,
}

impl GuaranteedSegment {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Why a trigger fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerReason {
    None,
    /// the uncertainty bound caught up with the distance still to travel
    MidpointUncertainty,
    /// one more step of worst-case motion could break the ring ordering
    OrderRisk,
}

/// Control decision for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    /// signed angular velocity (rad/s), positive counter-clockwise
    pub omega: f64,
    pub trigger: bool,
    pub reason: TriggerReason,
}

/// Neighbor angles unwrapped around the robot's own angle: `prev_u <= own`
/// and `next_u >= own` on the real line.
fn unwrap_neighbors(st: &RobotLocalState) -> (f64, f64, f64) {
    let own = st.own.normalized();
    let next_u = own + st.next.angle.ccw_delta(Angle(own));
    let prev_u = own - Angle(own).ccw_delta(st.prev.angle);
    (prev_u, own, next_u)
}

/// Interval containing the neighbor's true angle: record center, half-width
/// `omega_max * age`.
pub fn prediction_interval(rec: &NeighborRecord, omega_max: f64) -> PredictionInterval {
    PredictionInterval {
        center: rec.angle,
        half_width: omega_max * rec.age,
    }
}

/// The guaranteed Voronoi segment: each end is the midpoint toward the
/// neighbor's *nearest* possible position, so the segment is contained in
/// the true cell for every neighbor position consistent with the records.
pub fn guaranteed_segment(st: &RobotLocalState) -> GuaranteedSegment {
    let (prev_u, own, next_u) = unwrap_neighbors(st);
    let phi_p = st.omega_max * st.prev.age;
    let phi_n = st.omega_max * st.next.age;
    GuaranteedSegment {
        lo: 0.5 * ((prev_u + phi_p) + own),
        hi: 0.5 * (own + (next_u - phi_n)),
    }
}

/// Steering target on the unwrapped line. Default rule: midpoint of the
/// guaranteed segment. Mean-age rule: plain average of the records (which
/// its tighter bound is valid against).
pub fn guaranteed_midpoint(st: &RobotLocalState) -> f64 {
    match st.ubd_rule {
        UbdRule::MaxAge => guaranteed_segment(st).midpoint(),
        UbdRule::MeanAge => {
            let (prev_u, own, next_u) = unwrap_neighbors(st);
            0.25 * (prev_u + 2.0 * own + next_u)
        }
    }
}

/// Bound on the distance between the guaranteed midpoint and the true
/// (full-information) midpoint.
pub fn ubd(st: &RobotLocalState) -> f64 {
    match st.ubd_rule {
        UbdRule::MaxAge => 0.5 * st.omega_max * st.prev.age.max(st.next.age),
        UbdRule::MeanAge => 0.25 * st.omega_max * (st.prev.age + st.next.age),
    }
}

/// Signed angular velocity for one step: full speed while far from the
/// guaranteed midpoint, zero once inside the uncertainty band, and exactly
/// the remaining distance (over `dt`) in between. Ties resolve to the
/// earlier case, so the full-speed branch wins at its boundary.
pub fn control(st: &RobotLocalState) -> f64 {
    let (_, own, _) = unwrap_neighbors(st);
    let target = guaranteed_midpoint(st);
    let band = ubd(st);
    let delta = target - own;
    let dist = delta.abs();
    let speed = if dist >= band + st.omega_max * st.dt {
        st.omega_max
    } else if dist <= band {
        0.0
    } else {
        (dist - band) / st.dt
    };
    speed * delta.signum()
}

/// Trigger test, evaluated against the robot's *planned post-step* angle.
///
/// Fires when the uncertainty band has caught up with max(remaining
/// distance to the guaranteed midpoint, sigma), or when the ring ordering
/// could be violated after one more step of worst-case neighbor motion.
pub fn trigger_check(st: &RobotLocalState, own_next: Angle) -> (bool, TriggerReason) {
    let (prev_u, own, next_u) = unwrap_neighbors(st);
    let own_next_u = own + own_next.signed_diff(Angle(own));
    let target = guaranteed_midpoint(st);
    let band = ubd(st);
    if band >= (own_next_u - target).abs().max(st.sigma) {
        return (true, TriggerReason::MidpointUncertainty);
    }
    // look one step ahead: records will be dt older and the neighbors may
    // have kept moving toward us the whole time
    let phi_p1 = st.omega_max * (st.prev.age + st.dt);
    let phi_n1 = st.omega_max * (st.next.age + st.dt);
    let order_safe = (next_u - phi_n1) > own_next_u && own_next_u > (prev_u + phi_p1);
    if !order_safe {
        return (true, TriggerReason::OrderRisk);
    }
    (false, TriggerReason::None)
}

/// Baseline control with fresh information every step: saturated motion
/// toward the true midpoint of the two neighbors.
pub fn constant_control(
    own: Angle,
    prev: Angle,
    next: Angle,
    omega_max: f64,
    dt: f64,
) -> f64 {
    let own_n = own.normalized();
    let next_u = own_n + next.ccw_delta(Angle(own_n));
    let prev_u = own_n - Angle(own_n).ccw_delta(prev);
    let target = 0.25 * (prev_u + 2.0 * own_n + next_u);
    let delta = target - own_n;
    (delta.abs() / dt).min(omega_max) * delta.signum()
}
