//! Limited communication and sensing ranges.
//!
//! Range feasibility bounds, chord-distance reachability between ring
//! neighbors, the modified control law for robots with missing links, and
//! chain decomposition as a global diagnostic.
//!
//! Two different metrics are in play and are kept explicit: communication
//! reachability is a *Euclidean* (chord) test against `r_c`, while chain
//! lengths and separation accounting run *along the boundary*. The
//! necessary bounds come from the worst case of robots spread uniformly
//! (adjacent chords cannot all be shorter than those of the inscribed
//! circle); the sufficient bounds come from pigeonholing the perimeter
//! (some adjacent pair is always within `L/N` of each other along the
//! boundary, hence within `L/N` as a chord).

use crate::coordination::{control, RobotLocalState};
use crate::geometry::{arc_distance, BoundaryPoint, ConvexPolygon, Direction};
use serde::{Deserialize, Serialize};

/// Scenario-level ranges. `f64::INFINITY` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeConfig {
    /// maximum chord distance over which two robots can exchange messages
    pub communication: f64,
    /// maximum distance at which a robot's range sensor sees the target
    pub sensing: f64,
}

impl Default for RangeConfig {
    fn default() -> Self {
        Self { communication: f64::INFINITY, sensing: f64::INFINITY }
    }
}

impl RangeConfig {
    pub fn is_unlimited(&self) -> bool {
        self.communication.is_infinite() && self.sensing.is_infinite()
    }
}

/// A pair of range values (communication, sensing) used for feasibility
/// reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeBounds {
    pub r_c: f64,
    pub r_s: f64,
}

/// Ranges below which the tracking task is infeasible regardless of
/// strategy: communication below the uniform-configuration chord on the
/// inscribed circle, sensing below its radius.
pub fn necessary_bounds(poly: &ConvexPolygon, n: usize) -> RangeBounds {
    let d_in = 2.0 * poly.inscribed_circle().1;
    RangeBounds {
        r_c: d_in * (std::f64::consts::PI / n as f64).sin(),
        r_s: d_in / 2.0,
    }
}

/// Ranges at which the modified strategy is guaranteed to work: one robot
/// share of the perimeter for communication, the polygon diameter for
/// sensing.
pub fn sufficient_bounds(poly: &ConvexPolygon, n: usize) -> RangeBounds {
    RangeBounds {
        r_c: poly.perimeter() / n as f64,
        r_s: poly.longest_inner_segment(),
    }
}

/// Which ring neighbors a robot can currently talk to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborReach {
    pub prev: bool,
    pub next: bool,
}

/// Chord-distance reachability of robot `i`'s two ring neighbors.
/// `positions` must be in ring (index) order.
pub fn reachable_neighbors(positions: &[nalgebra::Point2<f64>], i: usize, r_c: f64) -> NeighborReach {
    let n = positions.len();
    let prev = (positions[i] - positions[(i + n - 1) % n]).norm() <= r_c;
    let next = (positions[i] - positions[(i + 1) % n]).norm() <= r_c;
    NeighborReach { prev, next }
}

/// Control law with missing links. A fully connected robot runs the normal
/// self-triggered law; a robot hearing only one side flees toward the
/// silent side at full speed (the engine clips the move if it would break
/// the remaining link); an isolated robot holds position.
///
/// `state` must be `Some` when both links are up (records exist after the
/// first contact, which precedes any control computation on a both-linked
/// robot).
pub fn modified_control(
    state: Option<&RobotLocalState>,
    reach: NeighborReach,
    omega_max: f64,
) -> f64 {
    match (reach.prev, reach.next) {
        (false, false) => 0.0,
        (true, false) => omega_max,
        (false, true) => -omega_max,
        (true, true) => control(state.expect("both-linked robot must hold records for both neighbors")),
    }
}

/// Maximal run of consecutive robots whose adjacent chords are all within
/// `r_c`. `length` is measured along the boundary between the extreme
/// members (0 for a singleton, the full perimeter once the ring closes).
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub members: Vec<usize>,
    pub length: f64,
}

/// Split the ring into maximal communication chains. Input order is ring
/// order; robot `i` links to `i+1 (mod N)` iff their chord is within
/// `r_c`. A fully linked ring yields a single chain spanning the whole
/// boundary.
pub fn chain_decomposition(
    positions: &[BoundaryPoint],
    poly: &ConvexPolygon,
    r_c: f64,
) -> Vec<Chain> {
    let n = positions.len();
    if n == 0 {
        return Vec::new();
    }
    let linked: Vec<bool> = (0..n)
        .map(|i| (positions[i].point - positions[(i + 1) % n].point).norm() <= r_c)
        .collect();
    if linked.iter().all(|&l| l) {
        return vec![Chain { members: (0..n).collect(), length: poly.perimeter() }];
    }
    let mut chains = Vec::new();
    // chain starts are the robots whose backward link is down
    for start in 0..n {
        if linked[(start + n - 1) % n] {
            continue;
        }
        let mut members = vec![start];
        let mut i = start;
        while linked[i] {
            i = (i + 1) % n;
            members.push(i);
        }
        let length: f64 = members
            .windows(2)
            .map(|w| arc_distance(poly, &positions[w[0]], &positions[w[1]], Direction::Ccw))
            .sum();
        chains.push(Chain { members, length });
    }
    chains
}
