//! Deterministic discrete-time simulator and library for decentralized
//! multi-robot target tracking on the boundary of a convex polygon.
//!
//! A team of N robots is constrained to the boundary of a strictly convex
//! polygon and must spread into a uniform ring around a target inside it.
//! Each robot maps its boundary position to an angle on a unit circle
//! centered at (its estimate of) the target, steers toward the midpoint of
//! its guaranteed Voronoi segment, and exchanges state with its two ring
//! neighbors only when a local test says its information is too stale to
//! keep guarantees — a self-triggered scheme that needs a fraction of the
//! messages of the communicate-every-step baseline.
//!
//! Module map:
//! - [`geometry`]: convex polygon, boundary points, circle mapping.
//! - [`kinematics`]: worst-case angular speed bound for boundary motion.
//! - [`coordination`]: neighbor records, guaranteed segments/midpoints,
//!   control law and trigger test.
//! - [`estimation`]: range-only EKF, covariance intersection, target models.
//! - [`limited_range`]: communication/sensing range bounds, chain analysis,
//!   modified control for robots with unreachable neighbors.
//! - [`engine`]: synchronous lockstep world stepping, runs and batches.
//! - [`metrics`]: convergence error/time, communication cost, tracking error.
//! - [`scenario`]: TOML scenario schema, validation, dot-path overrides.
//! - [`svg`]: small static SVG writer for trajectory/series/bar plots.
//!
//! All randomness flows from a single per-run seed; two runs with the same
//! scenario and seed produce bit-identical traces.

pub mod coordination;
pub mod engine;
pub mod estimation;
pub mod geometry;
pub mod kinematics;
pub mod limited_range;
pub mod metrics;
pub mod scenario;
pub mod svg;
