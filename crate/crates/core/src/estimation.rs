//! Target-state estimation: range-only EKF and covariance-intersection fusion.
//!
//! The target state is its 2-D position. Robots measure only their distance
//! to the target, so a single robot cannot localize it; the filter becomes
//! observable through measurements from several vantage points (centralized)
//! or through belief fusion between neighbors (decentralized).
//!
//! Covariance intersection fuses two Gaussian beliefs with unknown
//! cross-correlation: the fused information matrix is the λ-weighted sum of
//! the input information matrices, and the fused mean weights the means the
//! same way. (Some published statements of the mean drop the λ-weights;
//! that variant is not consistent with the covariance and is not used.)
//! λ is chosen by golden-section search on a scalar criterion of the fused
//! covariance; both the trace and the determinant are unimodal in λ, so the
//! search is exact up to its tolerance.

use crate::geometry::{ConvexPolygon, EPS};
use nalgebra::{Matrix2, Point2, RowVector2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimationError {
    /// a range measurement from the estimate's own location has no gradient
    #[error("measurement geometry is degenerate: robot is at the estimated target")]
    DegenerateGeometry,
    #[error("covariance matrix is singular or not invertible")]
    SingularCovariance,
    #[error("fusion weight {0} is outside [0, 1]")]
    InvalidLambda(f64),
    #[error("target trajectory leaves the polygon interior at t = {t} s")]
    TargetLeftInterior { t: f64 },
}

/// Gaussian belief over the target position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBelief {
    pub mean: Point2<f64>,
    pub cov: Matrix2<f64>,
}

impl GaussianBelief {
    pub fn new(mean: Point2<f64>, cov: Matrix2<f64>) -> Self {
        Self { mean, cov }
    }

    /// Isotropic prior centered on `mean`.
    pub fn isotropic(mean: Point2<f64>, variance: f64) -> Self {
        Self { mean, cov: Matrix2::identity() * variance }
    }
}

/// Filter noise parameters: additive process covariance per step and the
/// range-measurement variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub process: Matrix2<f64>,
    pub measurement: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { process: Matrix2::identity() * 1e-4, measurement: 1e-2 }
    }
}

/// Prediction step for a target with unknown motion: the mean is carried
/// over and the covariance inflates by the process noise.
pub fn ekf_predict(belief: &mut GaussianBelief, process: &Matrix2<f64>) {
    belief.cov += process;
}

/// Range-measurement update. `z` is the measured distance from `robot` to
/// the target; `q` is the measurement variance.
pub fn ekf_update(
    belief: &mut GaussianBelief,
    robot: &Point2<f64>,
    z: f64,
    q: f64,
) -> Result<(), EstimationError> {
    let offset = belief.mean - robot;
    let predicted = offset.norm();
    if predicted < EPS {
        return Err(EstimationError::DegenerateGeometry);
    }
    let h = RowVector2::new(offset.x / predicted, offset.y / predicted);
    let s = (h * belief.cov * h.transpose())[(0, 0)] + q;
    if s <= 0.0 {
        return Err(EstimationError::SingularCovariance);
    }
    let gain: Vector2<f64> = belief.cov * h.transpose() / s;
    belief.mean += gain * (z - predicted);
    belief.cov = (Matrix2::identity() - gain * h) * belief.cov;
    // the Joseph-free update loses symmetry to rounding; restore it
    belief.cov = (belief.cov + belief.cov.transpose()) * 0.5;
    Ok(())
}

/// Scalar criterion minimized when picking the fusion weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CiCriterion {
    #[default]
    Trace,
    Determinant,
}

impl CiCriterion {
    fn apply(self, cov: &Matrix2<f64>) -> f64 {
        match self {
            CiCriterion::Trace => cov.trace(),
            CiCriterion::Determinant => cov.determinant(),
        }
    }
}

/// Covariance intersection of two beliefs with weight `lambda` on `a`.
/// The endpoints return the corresponding input unchanged.
pub fn covariance_intersection(
    a: &GaussianBelief,
    b: &GaussianBelief,
    lambda: f64,
) -> Result<GaussianBelief, EstimationError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(EstimationError::InvalidLambda(lambda));
    }
    if lambda == 0.0 {
        return Ok(b.clone());
    }
    if lambda == 1.0 {
        return Ok(a.clone());
    }
    let info_a = a.cov.try_inverse().ok_or(EstimationError::SingularCovariance)?;
    let info_b = b.cov.try_inverse().ok_or(EstimationError::SingularCovariance)?;
    let info = info_a * lambda + info_b * (1.0 - lambda);
    let cov = info.try_inverse().ok_or(EstimationError::SingularCovariance)?;
    let cov = (cov + cov.transpose()) * 0.5;
    let mean = cov * (info_a * a.mean.coords * lambda + info_b * b.mean.coords * (1.0 - lambda));
    Ok(GaussianBelief { mean: Point2::from(mean), cov })
}

/// Fusion weight minimizing the criterion over λ ∈ [0, 1], found by
/// golden-section search to |Δλ| ≤ 1e-6. Identical covariances tie-break
/// to exactly 0.5.
pub fn optimize_lambda(
    a: &GaussianBelief,
    b: &GaussianBelief,
    criterion: CiCriterion,
) -> Result<f64, EstimationError> {
    if (a.cov - b.cov).abs().max() < 1e-13 {
        return Ok(0.5);
    }
    let cost = |lambda: f64| -> Result<f64, EstimationError> {
        Ok(criterion.apply(&covariance_intersection(a, b, lambda)?.cov))
    };
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = cost(c)?;
    let mut fd = cost(d)?;
    while hi - lo > 1e-6 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = cost(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = cost(d)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Optimized covariance intersection: pick λ by `criterion`, then fuse.
pub fn fuse(
    a: &GaussianBelief,
    b: &GaussianBelief,
    criterion: CiCriterion,
) -> Result<GaussianBelief, EstimationError> {
    let lambda = optimize_lambda(a, b, criterion)?;
    covariance_intersection(a, b, lambda)
}

/// Motion model of the true target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TargetModel {
    Stationary {
        position: Point2<f64>,
    },
    /// Counter-clockwise circular motion of radius `speed / omega` around
    /// `center`, starting at angle `phase`.
    Circle {
        center: Point2<f64>,
        speed: f64,
        omega: f64,
        phase: f64,
    },
    /// Constant-speed patrol along the closed polyline through `points`.
    Waypoints {
        points: Vec<Point2<f64>>,
        speed: f64,
    },
}

impl TargetModel {
    /// Position at absolute time `t` (closed form — no integration drift).
    pub fn position_at(&self, t: f64) -> Point2<f64> {
        match self {
            TargetModel::Stationary { position } => *position,
            TargetModel::Circle { center, speed, omega, phase } => {
                if omega.abs() < EPS {
                    return *center;
                }
                let r = speed / omega;
                let a = phase + omega * t;
                Point2::new(center.x + r * a.cos(), center.y + r * a.sin())
            }
            TargetModel::Waypoints { points, speed } => {
                if points.len() < 2 {
                    return points.first().copied().unwrap_or(Point2::origin());
                }
                let mut lens = Vec::with_capacity(points.len());
                let mut total = 0.0;
                for i in 0..points.len() {
                    let j = (i + 1) % points.len();
                    let l = (points[j] - points[i]).norm();
                    lens.push(l);
                    total += l;
                }
                if total < EPS {
                    return points[0];
                }
                let mut s = (speed * t).rem_euclid(total);
                for i in 0..points.len() {
                    if s <= lens[i] {
                        let j = (i + 1) % points.len();
                        let u = if lens[i] < EPS { 0.0 } else { s / lens[i] };
                        return points[i] + (points[j] - points[i]) * u;
                    }
                    s -= lens[i];
                }
                points[0]
            }
        }
    }

    /// Check the trajectory stays strictly inside the polygon over
    /// `[0, horizon]`, sampled every `dt`.
    pub fn validate_inside(
        &self,
        poly: &ConvexPolygon,
        horizon: f64,
        dt: f64,
    ) -> Result<(), EstimationError> {
        let steps = (horizon / dt).ceil() as usize;
        for k in 0..=steps {
            let t = (k as f64 * dt).min(horizon);
            if !poly.contains_interior(&self.position_at(t), EPS) {
                return Err(EstimationError::TargetLeftInterior { t });
            }
        }
        Ok(())
    }
}

/// Target position plus the absolute time it corresponds to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub t: f64,
    pub position: Point2<f64>,
}

impl TargetState {
    pub fn initial(model: &TargetModel) -> Self {
        Self { t: 0.0, position: model.position_at(0.0) }
    }
}

/// Advance the target by one step of `dt` seconds.
pub fn target_step(model: &TargetModel, state: &TargetState, dt: f64) -> TargetState {
    let t = state.t + dt;
    TargetState { t, position: model.position_at(t) }
}
