//! Evaluation metrics computed over simulation traces.
//!
//! Convergence error comes in two variants: against the true Voronoi
//! midpoints (full-information strategies) and against the guaranteed
//! midpoints each robot derives from its possibly stale records
//! (self-triggered strategies). Convergence time is the first logged step
//! whose error drops below `0.1 * N`, and the communication rate averages
//! the messages sent up to that step per robot per step.

use crate::coordination::{guaranteed_midpoint, RobotLocalState};
use crate::geometry::Angle;
use nalgebra::Point2;
use std::f64::consts::PI;

/// Unwrap the two ring neighbors of `own` onto the real line around it.
fn unwrap_around(own: Angle, prev: Angle, next: Angle) -> (f64, f64, f64) {
    let own_n = own.normalized();
    let next_u = own_n + next.ccw_delta(Angle(own_n));
    let prev_u = own_n - Angle(own_n).ccw_delta(prev);
    (prev_u, own_n, next_u)
}

/// Sum over robots of the circular distance to the true midpoint of the
/// robot's Voronoi cell, computed from exact neighbor angles. `angles`
/// must be in ring order (index i's neighbors are i±1 mod N).
pub fn cerr_constant(angles: &[Angle]) -> f64 {
    let n = angles.len();
    (0..n)
        .map(|i| {
            let prev = angles[(i + n - 1) % n];
            let next = angles[(i + 1) % n];
            let (prev_u, own_u, next_u) = unwrap_around(angles[i], prev, next);
            let target = 0.25 * (prev_u + 2.0 * own_u + next_u);
            (own_u - target).abs()
        })
        .sum()
}

/// Sum over robots of the distance to the guaranteed midpoint derived from
/// each robot's own (possibly stale) neighbor records.
pub fn cerr_self(states: &[RobotLocalState]) -> f64 {
    states
        .iter()
        .map(|st| (st.own.normalized() - guaranteed_midpoint(st)).abs())
        .sum()
}

/// Variant for limited communication: a robot that has never heard from
/// one of its neighbors has no midpoint to aim for; it contributes the
/// worst-case circular distance π instead, so missing links cannot read
/// as convergence.
pub fn cerr_with_missing(states: &[Option<RobotLocalState>]) -> f64 {
    states
        .iter()
        .map(|st| match st {
            Some(st) => (st.own.normalized() - guaranteed_midpoint(st)).abs(),
            None => PI,
        })
        .sum()
}

/// First logged step whose convergence error is below `0.1 * N`, or `None`
/// if the series never crosses the threshold.
pub fn ctime(cerr_series: &[f64], n: usize) -> Option<usize> {
    let threshold = 0.1 * n as f64;
    cerr_series.iter().position(|&c| c < threshold)
}

/// Messages per robot per step up to convergence:
/// `Σ_i com(i, Ctime) / (N · Ctime)`. A trace that starts converged has
/// sent nothing, reported as 0.
pub fn com_bar(per_robot_messages: &[u64], ctime: usize) -> f64 {
    if ctime == 0 || per_robot_messages.is_empty() {
        return 0.0;
    }
    let total: u64 = per_robot_messages.iter().sum();
    total as f64 / (per_robot_messages.len() as f64 * ctime as f64)
}

/// Mean distance between target estimates and the true target. Pass one
/// estimate for a shared filter, or one per robot for decentralized
/// filters; with no estimator there are no estimates and the error is 0.
pub fn terr(estimates: &[Point2<f64>], true_target: &Point2<f64>) -> f64 {
    if estimates.is_empty() {
        return 0.0;
    }
    estimates.iter().map(|e| (e - true_target).norm()).sum::<f64>() / estimates.len() as f64
}
