//! Deterministic lockstep simulation engine.
//!
//! A trial advances all robots synchronously. Each step: record ages grow;
//! the target is measured and the filters update; every robot recomputes
//! its circle angle against its current center (the true target or an
//! estimate, clamped inside the polygon); triggers are evaluated against a
//! snapshot of the pre-move world; triggered exchanges refresh records
//! (and fuse beliefs in the decentralized mode) with per-link message
//! accounting; controls are applied; robots move along the boundary; the
//! target advances; the step is logged.
//!
//! Determinism: a single counter-based RNG per trial, consumed in a fixed
//! order (initial placement first, then one measurement draw per robot per
//! step in index order, drawn even when a sensing limit discards them), and
//! index-ordered containers throughout. The same seed reproduces a trace
//! bit for bit; trials of a batch are independent and may run in parallel.

use crate::coordination::{
    constant_control, control, trigger_check, NeighborRecord, RobotLocalState, TriggerReason,
    UbdRule,
};
use crate::estimation::{
    ekf_predict, ekf_update, fuse, target_step, CiCriterion, EstimationError, GaussianBelief,
    NoiseConfig, TargetModel, TargetState,
};
use crate::geometry::{
    circle_to_boundary, project_to_circle, Angle, BoundaryPoint, ConvexPolygon, GeometryError,
};
use crate::limited_range::{chain_decomposition, reachable_neighbors, NeighborReach, RangeConfig};
use crate::metrics;
use nalgebra::Point2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error("need at least 3 robots for ring coordination, got {0}")]
    TooFewRobots(usize),
    #[error("initial positions must be pairwise distinct")]
    CoincidentInitialPositions,
    #[error("initial boundary fractions must be strictly increasing within [0, 1)")]
    BadInitialFractions,
    #[error("{name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("robot circular order violated at step {step}")]
    OrderViolated { step: usize },
}

/// Coordination strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// read both neighbors every step
    Constant,
    /// exchange only when the trigger fires
    SelfTriggered,
    /// self-triggered with communication/sensing ranges and chain building
    SelfTriggeredLimited,
}

/// Where the circle center (the tracked point) comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// the true target position is broadcast to everyone (no filtering)
    KnownTarget,
    /// one shared filter updated with every robot's measurement
    CentralizedEkf,
    /// one filter per robot, fused over triggered exchanges
    DecentralizedEkfCi,
}

/// Initial robot placement on the boundary, as arclength fractions.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialPlacement {
    /// draw uniformly at random (sorted, so indices are in ring order)
    Random,
    /// explicit fractions in [0, 1), strictly increasing
    Fractions(Vec<f64>),
}

/// Everything a single trial needs. `omega_max` is the resolved value
/// (a configured constant or the feasibility bound computed elsewhere).
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub polygon: ConvexPolygon,
    pub n_robots: usize,
    pub initial: InitialPlacement,
    pub strategy: Strategy,
    pub estimator: EstimatorMode,
    /// trigger slack (rad)
    pub sigma: f64,
    /// step length (s)
    pub dt: f64,
    /// angular speed bound (rad/s)
    pub omega_max: f64,
    /// linear speed bound (m/s)
    pub v_max: f64,
    pub ubd_rule: UbdRule,
    pub target: TargetModel,
    pub noise: NoiseConfig,
    /// isotropic prior variance for the filters (m²)
    pub init_cov: f64,
    /// prior mean; defaults to the polygon's inscribed-circle center
    pub init_mean: Option<Point2<f64>>,
    pub ranges: RangeConfig,
    pub ci_criterion: CiCriterion,
    pub max_steps: usize,
    /// stop at the first logged record below the convergence threshold
    pub stop_on_convergence: bool,
    pub seed: u64,
}

impl SimConfig {
    // `!(x > 0)` rather than `x <= 0` so NaN parameters fail validation
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.n_robots < 3 {
            return Err(EngineError::TooFewRobots(self.n_robots));
        }
        for (name, value) in [
            ("dt", self.dt),
            ("omega_max", self.omega_max),
            ("v_max", self.v_max),
            ("max_steps", self.max_steps as f64),
            ("communication range", self.ranges.communication),
            ("sensing range", self.ranges.sensing),
        ] {
            if !(value > 0.0) {
                return Err(EngineError::NonPositiveParameter { name, value });
            }
        }
        if self.sigma < 0.0 {
            return Err(EngineError::NonPositiveParameter { name: "sigma", value: self.sigma });
        }
        if self.estimator != EstimatorMode::KnownTarget {
            for (name, value) in [
                ("init_cov", self.init_cov),
                ("measurement noise", self.noise.measurement),
            ] {
                if !(value > 0.0) {
                    return Err(EngineError::NonPositiveParameter { name, value });
                }
            }
        }
        if let InitialPlacement::Fractions(f) = &self.initial {
            if f.len() != self.n_robots {
                return Err(EngineError::BadInitialFractions);
            }
            let increasing = f.windows(2).all(|w| w[0] < w[1]);
            if !increasing || f.iter().any(|&x| !(0.0..1.0).contains(&x)) {
                return Err(EngineError::BadInitialFractions);
            }
        }
        // the center mapping needs the tracked point strictly inside
        self.target
            .validate_inside(&self.polygon, self.max_steps as f64 * self.dt, self.dt)?;
        Ok(())
    }

    fn prior_mean(&self) -> Point2<f64> {
        self.init_mean.unwrap_or_else(|| self.polygon.inscribed_circle().0)
    }
}

/// Neighbor information as the engine stores it: the position the neighbor
/// reported at the last exchange, and the age of that report. Angles are
/// re-derived from the stored position against the receiver's *current*
/// center, so a moving center does not corrupt the ring bookkeeping.
#[derive(Debug, Clone, Copy)]
struct StoredRecord {
    position: Point2<f64>,
    age: f64,
}

/// Per-robot filter state, shaped by the estimator mode.
#[derive(Debug, Clone)]
pub enum Beliefs {
    None,
    Shared(GaussianBelief),
    PerRobot(Vec<GaussianBelief>),
}

/// Full mutable state of one trial.
pub struct WorldState {
    pub k: usize,
    boundary: Vec<BoundaryPoint>,
    angles: Vec<Angle>,
    centers: Vec<Point2<f64>>,
    records_prev: Vec<Option<StoredRecord>>,
    records_next: Vec<Option<StoredRecord>>,
    pub beliefs: Beliefs,
    pub target: TargetState,
    com: Vec<u64>,
    triggered: Vec<bool>,
    reasons: Vec<TriggerReason>,
}

/// One logged step: everything the CSV and the metrics need.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub angles: Vec<f64>,
    pub positions: Vec<Point2<f64>>,
    /// empty (known target), one entry (shared filter), or one per robot
    pub estimates: Vec<Point2<f64>>,
    pub triggered: Vec<bool>,
    /// cumulative per-robot message counts at the end of the step
    pub messages: Vec<u64>,
    pub cerr: f64,
    pub terr: f64,
    pub target: Point2<f64>,
    /// communication chains at this step (1 when the range is unlimited)
    pub chains: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    /// logged records (the initial state plus one per executed step)
    pub steps: usize,
    /// first record index with Cerr below 0.1·N
    pub ctime: Option<usize>,
    pub converged: bool,
    /// messages per robot per step up to convergence (full horizon if the
    /// trial never converged)
    pub com_bar: f64,
    pub final_cerr: f64,
    pub mean_terr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SimTrace {
    pub records: Vec<StepRecord>,
    pub summary: RunSummary,
}

/// Pull a point strictly inside the polygon (toward the centroid) if it is
/// not already; the result is the circle center used for angle mapping.
fn clamp_interior(p: Point2<f64>, poly: &ConvexPolygon) -> Point2<f64> {
    let margin = 1e-7 * poly.inscribed_circle().1;
    if poly.contains_interior(&p, margin) {
        return p;
    }
    let anchor = poly.centroid();
    let (mut lo, mut hi) = (0.0f64, 1.0f64); // fraction of the way to p
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let q = anchor + (p - anchor) * mid;
        if poly.contains_interior(&q, margin) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    anchor + (p - anchor) * lo
}

/// Angular velocity after the linear-speed cap: `v = |ω|·‖p − center‖`,
/// and ω is rescaled when v would exceed `v_max`.
fn effective_omega(omega: f64, pos: &Point2<f64>, center: &Point2<f64>, v_max: f64) -> f64 {
    let r = (pos - center).norm();
    let v = omega.abs() * r;
    if v > v_max {
        omega * v_max / v
    } else {
        omega
    }
}

impl WorldState {
    fn init(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Result<Self, EngineError> {
        let n = cfg.n_robots;
        let perimeter = cfg.polygon.perimeter();
        let fractions: Vec<f64> = match &cfg.initial {
            InitialPlacement::Fractions(f) => f.clone(),
            InitialPlacement::Random => {
                let mut attempt = 0;
                loop {
                    let mut f: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
                    f.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    let distinct = f.windows(2).all(|w| w[1] - w[0] > 1e-9)
                        && (f[0] + 1.0 - f[n - 1]) > 1e-9;
                    if distinct {
                        break f;
                    }
                    attempt += 1;
                    if attempt > 1000 {
                        return Err(EngineError::CoincidentInitialPositions);
                    }
                }
            }
        };
        let boundary: Vec<BoundaryPoint> =
            fractions.iter().map(|&f| cfg.polygon.at_arclength(f * perimeter)).collect();
        for i in 0..n {
            let j = (i + 1) % n;
            if (boundary[i].point - boundary[j].point).norm() < 1e-12 {
                return Err(EngineError::CoincidentInitialPositions);
            }
        }
        let target = TargetState::initial(&cfg.target);
        let beliefs = match cfg.estimator {
            EstimatorMode::KnownTarget => Beliefs::None,
            EstimatorMode::CentralizedEkf => {
                Beliefs::Shared(GaussianBelief::isotropic(cfg.prior_mean(), cfg.init_cov))
            }
            EstimatorMode::DecentralizedEkfCi => Beliefs::PerRobot(vec![
                GaussianBelief::isotropic(cfg.prior_mean(), cfg.init_cov);
                n
            ]),
        };
        let mut world = WorldState {
            k: 0,
            boundary,
            angles: vec![Angle(0.0); n],
            centers: vec![Point2::origin(); n],
            records_prev: vec![None; n],
            records_next: vec![None; n],
            beliefs,
            target,
            com: vec![0; n],
            triggered: vec![false; n],
            reasons: vec![TriggerReason::None; n],
        };
        world.refresh_centers_and_angles(cfg)?;
        if cfg.strategy != Strategy::SelfTriggeredLimited {
            // everyone starts knowing the true initial neighbor positions
            // (free initialization, not counted as communication)
            for i in 0..n {
                let prev = (i + n - 1) % n;
                let next = (i + 1) % n;
                world.records_prev[i] =
                    Some(StoredRecord { position: world.boundary[prev].point, age: 0.0 });
                world.records_next[i] =
                    Some(StoredRecord { position: world.boundary[next].point, age: 0.0 });
            }
        }
        Ok(world)
    }

    fn estimate_mean(&self, i: usize) -> Option<Point2<f64>> {
        match &self.beliefs {
            Beliefs::None => None,
            Beliefs::Shared(b) => Some(b.mean),
            Beliefs::PerRobot(bs) => Some(bs[i].mean),
        }
    }

    fn refresh_centers_and_angles(&mut self, cfg: &SimConfig) -> Result<(), EngineError> {
        for i in 0..cfg.n_robots {
            let raw = self.estimate_mean(i).unwrap_or(self.target.position);
            self.centers[i] = clamp_interior(raw, &cfg.polygon);
            self.angles[i] = project_to_circle(&self.boundary[i].point, &self.centers[i])?;
        }
        Ok(())
    }

    /// Local view of robot `i`, if it holds records for both neighbors.
    /// Record angles are re-projected against the robot's current center.
    fn local_state(&self, i: usize, cfg: &SimConfig) -> Option<RobotLocalState> {
        let prev = self.records_prev[i]?;
        let next = self.records_next[i]?;
        let center = &self.centers[i];
        let prev_angle = project_to_circle(&prev.position, center).ok()?;
        let next_angle = project_to_circle(&next.position, center).ok()?;
        Some(RobotLocalState {
            own: self.angles[i],
            prev: NeighborRecord { angle: prev_angle, age: prev.age },
            next: NeighborRecord { angle: next_angle, age: next.age },
            sigma: cfg.sigma,
            omega_max: cfg.omega_max,
            dt: cfg.dt,
            ubd_rule: cfg.ubd_rule,
        })
    }

    /// Sum of forward boundary gaps; exactly one lap of the perimeter iff
    /// the index order still matches the ring order.
    fn order_intact(&self, poly: &ConvexPolygon) -> bool {
        let n = self.boundary.len();
        let perimeter = poly.perimeter();
        let gaps: f64 = (0..n)
            .map(|i| {
                let a = poly.arclength_of(&self.boundary[i]);
                let b = poly.arclength_of(&self.boundary[(i + 1) % n]);
                (b - a).rem_euclid(perimeter)
            })
            .sum();
        (gaps - perimeter).abs() < 1e-6 * perimeter.max(1.0)
    }

    fn cerr(&self, cfg: &SimConfig) -> f64 {
        match cfg.strategy {
            Strategy::Constant => metrics::cerr_constant(&self.angles),
            Strategy::SelfTriggered => {
                let states: Vec<RobotLocalState> = (0..cfg.n_robots)
                    .map(|i| {
                        self.local_state(i, cfg)
                            .expect("unlimited-range robots always hold both records")
                    })
                    .collect();
                metrics::cerr_self(&states)
            }
            Strategy::SelfTriggeredLimited => {
                let states: Vec<Option<RobotLocalState>> =
                    (0..cfg.n_robots).map(|i| self.local_state(i, cfg)).collect();
                metrics::cerr_with_missing(&states)
            }
        }
    }

    fn log(&self, cfg: &SimConfig) -> StepRecord {
        let estimates: Vec<Point2<f64>> = match &self.beliefs {
            Beliefs::None => Vec::new(),
            Beliefs::Shared(b) => vec![b.mean],
            Beliefs::PerRobot(bs) => bs.iter().map(|b| b.mean).collect(),
        };
        let chains = if cfg.strategy == Strategy::SelfTriggeredLimited {
            chain_decomposition(&self.boundary, &cfg.polygon, cfg.ranges.communication).len()
        } else {
            1
        };
        StepRecord {
            k: self.k,
            angles: self.angles.iter().map(|a| a.normalized()).collect(),
            positions: self.boundary.iter().map(|b| b.point).collect(),
            terr: metrics::terr(&estimates, &self.target.position),
            estimates,
            triggered: self.triggered.clone(),
            messages: self.com.clone(),
            cerr: self.cerr(cfg),
            target: self.target.position,
            chains,
        }
    }
}

/// Advance the world by one step.
// index loops here walk several per-robot arrays in lockstep
#[allow(clippy::needless_range_loop)]
fn step(world: &mut WorldState, cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Result<(), EngineError> {
    let n = cfg.n_robots;
    world.k += 1;
    world.triggered = vec![false; n];
    world.reasons = vec![TriggerReason::None; n];

    // 1. information held by the robots ages by one step
    for rec in world.records_prev.iter_mut().chain(world.records_next.iter_mut()).flatten() {
        rec.age += cfg.dt;
    }

    // 2. sensing and filtering (one draw per robot per step, consumed in
    //    index order so traces with equal seeds stay aligned)
    if cfg.estimator != EstimatorMode::KnownTarget {
        let noises: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let q = cfg.noise.measurement;
        let in_range = |p: &Point2<f64>| {
            (p - world.target.position).norm() <= cfg.ranges.sensing
        };
        match &mut world.beliefs {
            Beliefs::Shared(b) => {
                ekf_predict(b, &cfg.noise.process);
                for i in 0..n {
                    let p = world.boundary[i].point;
                    if in_range(&p) {
                        let z = (world.target.position - p).norm() + q.sqrt() * noises[i];
                        // a robot sitting exactly on the estimate carries no
                        // directional information; skip it
                        match ekf_update(b, &p, z, q) {
                            Ok(()) | Err(EstimationError::DegenerateGeometry) => {}
                            Err(e) => return Err(e.into()),
                        }
                    }
                }
            }
            Beliefs::PerRobot(bs) => {
                for i in 0..n {
                    ekf_predict(&mut bs[i], &cfg.noise.process);
                    let p = world.boundary[i].point;
                    if in_range(&p) {
                        let z = (world.target.position - p).norm() + q.sqrt() * noises[i];
                        match ekf_update(&mut bs[i], &p, z, q) {
                            Ok(()) | Err(EstimationError::DegenerateGeometry) => {}
                            Err(e) => return Err(e.into()),
                        }
                    }
                }
            }
            Beliefs::None => {}
        }
    }

    // 3. per-robot centers and angles for this step
    world.refresh_centers_and_angles(cfg)?;

    match cfg.strategy {
        Strategy::Constant => step_constant(world, cfg)?,
        Strategy::SelfTriggered => step_self_triggered(world, cfg)?,
        Strategy::SelfTriggeredLimited => step_limited(world, cfg)?,
    }

    // 8. the target moves last; robots react from the next step on
    world.target = target_step(&cfg.target, &world.target, cfg.dt);

    if !world.order_intact(&cfg.polygon) {
        return Err(EngineError::OrderViolated { step: world.k });
    }
    Ok(())
}

/// Move robot `i` to `angle` on the boundary (exact angle realization).
fn apply_move(
    world: &mut WorldState,
    cfg: &SimConfig,
    i: usize,
    omega: f64,
) -> Result<(), EngineError> {
    let omega_eff = effective_omega(omega, &world.boundary[i].point, &world.centers[i], cfg.v_max);
    let theta = Angle(world.angles[i].0 + omega_eff * cfg.dt);
    world.boundary[i] = circle_to_boundary(theta, &world.centers[i], &cfg.polygon)?;
    world.angles[i] = theta;
    Ok(())
}

/// Full-information baseline: read both neighbors, steer at the true
/// midpoint, pay two messages per robot per step.
fn step_constant(world: &mut WorldState, cfg: &SimConfig) -> Result<(), EngineError> {
    let n = cfg.n_robots;
    let snapshot = world.angles.clone();
    let omegas: Vec<f64> = (0..n)
        .map(|i| {
            constant_control(
                snapshot[i],
                snapshot[(i + n - 1) % n],
                snapshot[(i + 1) % n],
                cfg.omega_max,
                cfg.dt,
            )
        })
        .collect();
    let positions: Vec<Point2<f64>> = world.boundary.iter().map(|b| b.point).collect();
    for i in 0..n {
        world.com[i] += 2;
        // keep records coherent (fresh every step) for logging parity
        world.records_prev[i] =
            Some(StoredRecord { position: positions[(i + n - 1) % n], age: 0.0 });
        world.records_next[i] = Some(StoredRecord { position: positions[(i + 1) % n], age: 0.0 });
        apply_move(world, cfg, i, omegas[i])?;
    }
    Ok(())
}

/// Engage link `l` (between ring robots `l` and `l+1`): both endpoints
/// refresh their records from the snapshot and, in the decentralized mode,
/// the caller fuses beliefs. Exactly one message is charged.
fn links_of(i: usize, n: usize) -> (usize, usize) {
    ((i + n - 1) % n, i) // (link to prev, link to next) by link id = lower ring index
}

fn step_self_triggered(world: &mut WorldState, cfg: &SimConfig) -> Result<(), EngineError> {
    let n = cfg.n_robots;

    // 4. trigger evaluation against the pre-move snapshot
    let states: Vec<RobotLocalState> = (0..n)
        .map(|i| world.local_state(i, cfg).expect("records always present without range limits"))
        .collect();
    let mut engaged: BTreeSet<usize> = BTreeSet::new();
    for (i, st) in states.iter().enumerate() {
        let omega_planned = control(st);
        let omega_eff =
            effective_omega(omega_planned, &world.boundary[i].point, &world.centers[i], cfg.v_max);
        let planned = Angle(st.own.0 + omega_eff * cfg.dt);
        let (fire, reason) = trigger_check(st, planned);
        world.triggered[i] = fire;
        world.reasons[i] = reason;
        if fire {
            let (lp, ln) = links_of(i, n);
            engaged.insert(lp);
            engaged.insert(ln);
        }
    }

    // 5. exchanges over engaged links: records refresh from the snapshot,
    //    message charged to the triggering endpoint (lower robot index if
    //    both fired), beliefs fused pairwise from the post-filter snapshot
    let positions: Vec<Point2<f64>> = world.boundary.iter().map(|b| b.point).collect();
    for &l in &engaged {
        let a = l;
        let b = (l + 1) % n;
        world.records_next[a] = Some(StoredRecord { position: positions[b], age: 0.0 });
        world.records_prev[b] = Some(StoredRecord { position: positions[a], age: 0.0 });
        let charged = match (world.triggered[a], world.triggered[b]) {
            (true, false) => a,
            (false, true) => b,
            _ => a.min(b),
        };
        world.com[charged] += 1;
    }
    if let Beliefs::PerRobot(bs) = &mut world.beliefs {
        let snapshot = bs.clone();
        for i in 0..n {
            let (lp, ln) = links_of(i, n);
            let mut fused = snapshot[i].clone();
            if engaged.contains(&lp) {
                fused = fuse(&fused, &snapshot[(i + n - 1) % n], cfg.ci_criterion)?;
            }
            if engaged.contains(&ln) {
                fused = fuse(&fused, &snapshot[(i + 1) % n], cfg.ci_criterion)?;
            }
            bs[i] = fused;
        }
    }

    // 6–7. recompute control with refreshed records, then move
    for i in 0..n {
        let st = world
            .local_state(i, cfg)
            .expect("records always present without range limits");
        apply_move(world, cfg, i, control(&st))?;
    }
    Ok(())
}

// index loops here walk several per-robot arrays in lockstep
#[allow(clippy::needless_range_loop)]
fn step_limited(world: &mut WorldState, cfg: &SimConfig) -> Result<(), EngineError> {
    let n = cfg.n_robots;
    let r_c = cfg.ranges.communication;
    let positions: Vec<Point2<f64>> = world.boundary.iter().map(|b| b.point).collect();

    // first contact: a link inside communication range whose endpoints have
    // never exchanged initializes both records and costs one message
    for l in 0..n {
        let a = l;
        let b = (l + 1) % n;
        let within = (positions[a] - positions[b]).norm() <= r_c;
        if within && (world.records_next[a].is_none() || world.records_prev[b].is_none()) {
            world.records_next[a] = Some(StoredRecord { position: positions[b], age: 0.0 });
            world.records_prev[b] = Some(StoredRecord { position: positions[a], age: 0.0 });
            world.com[a.min(b)] += 1;
        }
    }

    // trigger evaluation only makes sense with both links up
    let reaches: Vec<NeighborReach> =
        (0..n).map(|i| reachable_neighbors(&positions, i, r_c)).collect();
    let mut engaged: BTreeSet<usize> = BTreeSet::new();
    for i in 0..n {
        if !(reaches[i].prev && reaches[i].next) {
            continue;
        }
        let st = match world.local_state(i, cfg) {
            Some(st) => st,
            None => continue,
        };
        let omega_planned =
            crate::limited_range::modified_control(Some(&st), reaches[i], cfg.omega_max);
        let omega_eff =
            effective_omega(omega_planned, &positions[i], &world.centers[i], cfg.v_max);
        let planned = Angle(st.own.0 + omega_eff * cfg.dt);
        let (fire, reason) = trigger_check(&st, planned);
        world.triggered[i] = fire;
        world.reasons[i] = reason;
        if fire {
            let (lp, ln) = links_of(i, n);
            engaged.insert(lp);
            engaged.insert(ln);
        }
    }
    // exchanges happen only across links that are actually up
    engaged.retain(|&l| (positions[l] - positions[(l + 1) % n]).norm() <= r_c);
    for &l in &engaged {
        let a = l;
        let b = (l + 1) % n;
        // fresh already this step (first contact) costs nothing extra
        let fresh = |r: &Option<StoredRecord>| r.map(|r| r.age == 0.0).unwrap_or(false);
        if fresh(&world.records_next[a]) && fresh(&world.records_prev[b]) {
            continue;
        }
        world.records_next[a] = Some(StoredRecord { position: positions[b], age: 0.0 });
        world.records_prev[b] = Some(StoredRecord { position: positions[a], age: 0.0 });
        let charged = match (world.triggered[a], world.triggered[b]) {
            (true, false) => a,
            (false, true) => b,
            _ => a.min(b),
        };
        world.com[charged] += 1;
    }
    if let Beliefs::PerRobot(bs) = &mut world.beliefs {
        let snapshot = bs.clone();
        for i in 0..n {
            let (lp, ln) = links_of(i, n);
            let mut fused = snapshot[i].clone();
            if engaged.contains(&lp) {
                fused = fuse(&fused, &snapshot[(i + n - 1) % n], cfg.ci_criterion)?;
            }
            if engaged.contains(&ln) {
                fused = fuse(&fused, &snapshot[(i + 1) % n], cfg.ci_criterion)?;
            }
            bs[i] = fused;
        }
    }

    // controls with refreshed records; commits are serialized in index
    // order and clipped so no established link ever stretches past r_c
    for i in 0..n {
        let st = world.local_state(i, cfg);
        let omega = crate::limited_range::modified_control(st.as_ref(), reaches[i], cfg.omega_max);
        let omega_eff =
            effective_omega(omega, &world.boundary[i].point, &world.centers[i], cfg.v_max);
        // links the robot must keep: any neighbor it holds a record for
        let mut keep: Vec<Point2<f64>> = Vec::new();
        if world.records_prev[i].is_some() {
            keep.push(world.boundary[(i + n - 1) % n].point); // committed if < i
        }
        if world.records_next[i].is_some() {
            keep.push(world.boundary[(i + 1) % n].point);
        }
        let ok = |s: f64, world: &WorldState| -> Result<bool, EngineError> {
            let theta = Angle(world.angles[i].0 + s * omega_eff * cfg.dt);
            let p = circle_to_boundary(theta, &world.centers[i], &cfg.polygon)?.point;
            Ok(keep.iter().all(|q| (p - q).norm() <= r_c))
        };
        let mut s = 1.0;
        if !ok(1.0, world)? {
            // staying put is always safe: neighbors that moved earlier this
            // step were clipped against our stored position, so if no
            // feasible fraction is found the robot simply does not move
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if ok(mid, world)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            s = lo;
        }
        // commit exactly the position the clip verified; a zero fraction
        // keeps the stored position bit-for-bit (re-deriving it from the
        // angle would wobble a link pinned at r_c across the threshold)
        if s > 0.0 {
            let theta = Angle(world.angles[i].0 + s * omega_eff * cfg.dt);
            world.boundary[i] = circle_to_boundary(theta, &world.centers[i], &cfg.polygon)?;
            world.angles[i] = theta;
        }
    }
    Ok(())
}

/// Run one trial to convergence or `max_steps`.
pub fn run(cfg: &SimConfig) -> Result<SimTrace, EngineError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut world = WorldState::init(cfg, &mut rng)?;
    let threshold = 0.1 * cfg.n_robots as f64;
    let mut records = vec![world.log(cfg)];
    if !(cfg.stop_on_convergence && records[0].cerr < threshold) {
        for _ in 1..=cfg.max_steps {
            step(&mut world, cfg, &mut rng)?;
            let rec = world.log(cfg);
            let done = cfg.stop_on_convergence && rec.cerr < threshold;
            records.push(rec);
            if done {
                break;
            }
        }
    }
    let cerr_series: Vec<f64> = records.iter().map(|r| r.cerr).collect();
    let ctime = metrics::ctime(&cerr_series, cfg.n_robots);
    let horizon = ctime.unwrap_or(records.len() - 1);
    let com_bar = metrics::com_bar(&records[horizon].messages, horizon);
    let mean_terr =
        records.iter().map(|r| r.terr).sum::<f64>() / records.len() as f64;
    let summary = RunSummary {
        steps: records.len(),
        ctime,
        converged: ctime.is_some(),
        com_bar,
        final_cerr: records.last().expect("at least the initial record").cerr,
        mean_terr,
        seed: cfg.seed,
    };
    Ok(SimTrace { records, summary })
}

/// Run independent trials (one per seed) in parallel. Results are ordered
/// like `seeds` regardless of scheduling.
pub fn run_batch(cfg: &SimConfig, seeds: &[u64]) -> Result<Vec<SimTrace>, EngineError> {
    seeds
        .par_iter()
        .map(|&seed| run(&SimConfig { seed, ..cfg.clone() }))
        .collect()
}

/// One CSV row per robot per logged step.
pub fn write_csv<W: Write>(trace: &SimTrace, out: &mut W) -> io::Result<()> {
    writeln!(out, "k,i,theta,x,y,ohat_x,ohat_y,triggered,messages,cerr,terr")?;
    for rec in &trace.records {
        for i in 0..rec.angles.len() {
            let ohat = match rec.estimates.len() {
                0 => rec.target,
                1 => rec.estimates[0],
                _ => rec.estimates[i],
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                rec.k,
                i,
                rec.angles[i],
                rec.positions[i].x,
                rec.positions[i].y,
                ohat.x,
                ohat.y,
                u8::from(rec.triggered[i]),
                rec.messages[i],
                rec.cerr,
                rec.terr,
            )?;
        }
    }
    Ok(())
}

/// Render a full trace to a CSV string (convenience for determinism checks
/// and the C interface).
pub fn csv_string(trace: &SimTrace) -> String {
    let mut buf = Vec::new();
    write_csv(trace, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}
