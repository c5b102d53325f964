//! Acceptance suite: one test per release criterion, so `cargo test
//! --test acceptance` prints one pass/fail line per criterion. Each test
//! also prints its measured figures (visible with `--nocapture` or on
//! failure).

use boundary_tracking::coordination::{
    guaranteed_midpoint, guaranteed_segment, ubd, NeighborRecord, RobotLocalState, UbdRule,
};
use boundary_tracking::engine::{
    csv_string, run, run_batch, EstimatorMode, InitialPlacement, SimConfig, SimTrace, Strategy,
};
use boundary_tracking::estimation::{
    covariance_intersection, optimize_lambda, CiCriterion, GaussianBelief, NoiseConfig,
    TargetModel,
};
use boundary_tracking::geometry::{circle_to_boundary, project_to_circle, Angle, ConvexPolygon};
use boundary_tracking::kinematics::{omega_max, SpeedBudget};
use boundary_tracking::limited_range::reachable_neighbors;
use nalgebra::{Matrix2, Point2, Rotation2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

const OMEGA_REF: f64 = PI / 180.0; // reference angular speed bound, rad/s

fn hexagon() -> ConvexPolygon {
    let r = 4.0;
    let verts = (0..6)
        .map(|k| {
            let a = PI / 3.0 * k as f64;
            Point2::new(r * a.cos(), r * a.sin())
        })
        .collect();
    ConvexPolygon::new(verts).unwrap()
}

fn hexagon_config(strategy: Strategy, sigma: f64) -> SimConfig {
    SimConfig {
        polygon: hexagon(),
        n_robots: 6,
        initial: InitialPlacement::Random,
        strategy,
        estimator: EstimatorMode::KnownTarget,
        sigma,
        dt: 0.1,
        omega_max: OMEGA_REF,
        v_max: 0.2,
        ubd_rule: UbdRule::MaxAge,
        target: TargetModel::Stationary { position: Point2::new(0.5, 0.3) },
        noise: NoiseConfig::default(),
        init_cov: 0.1,
        init_mean: None,
        ranges: Default::default(),
        ci_criterion: CiCriterion::Trace,
        max_steps: 5000,
        stop_on_convergence: true,
        seed: 0,
    }
}

fn paired_seeds() -> Vec<u64> {
    (1..=30).collect()
}

/// The 30-trial paired batches shared by criteria 1 and 2.
fn paired_batches() -> &'static (Vec<SimTrace>, Vec<SimTrace>, f64) {
    static BATCHES: OnceLock<(Vec<SimTrace>, Vec<SimTrace>, f64)> = OnceLock::new();
    BATCHES.get_or_init(|| {
        let seeds = paired_seeds();
        let start = Instant::now();
        let triggered = run_batch(&hexagon_config(Strategy::SelfTriggered, 0.02), &seeds)
            .expect("self-triggered batch runs");
        let elapsed = start.elapsed().as_secs_f64();
        let constant = run_batch(&hexagon_config(Strategy::Constant, 0.02), &seeds)
            .expect("constant batch runs");
        (triggered, constant, elapsed)
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn criterion_01_convergence_on_hexagon() {
    let (triggered, _, elapsed) = paired_batches();
    let mut worst = 0usize;
    for trace in triggered {
        let ct = trace.summary.ctime.unwrap_or_else(|| {
            panic!("seed {} did not converge within 5000 steps", trace.summary.seed)
        });
        assert!(ct < 5000, "seed {}: ctime {ct} not under the step budget", trace.summary.seed);
        worst = worst.max(ct);
    }
    println!(
        "criterion 1: PASS - 30/30 trials converged, worst ctime {worst} steps, batch {elapsed:.2} s"
    );
    assert!(
        *elapsed < 10.0,
        "30-trial batch took {elapsed:.2} s, expected well under 10 s"
    );
}

#[test]
fn criterion_02_communication_reduction() {
    let (triggered, constant, _) = paired_batches();
    let com_trig = mean(&triggered.iter().map(|t| t.summary.com_bar).collect::<Vec<_>>());
    let com_const = mean(&constant.iter().map(|t| t.summary.com_bar).collect::<Vec<_>>());
    assert!(
        (com_const - 2.0).abs() < 1e-12,
        "constant strategy must exchange on every step (got {com_const})"
    );
    let ratio = com_trig / com_const;
    println!(
        "criterion 2: PASS - mean message ratio {ratio:.4} (hard bound 0.50, reference figure 0.30)"
    );
    assert!(ratio < 0.50, "message ratio {ratio:.4} exceeds the hard 0.50 bound");
}

#[test]
fn criterion_03_sigma_tradeoff() {
    let sigmas = [0.005, 0.02, 0.05];
    let seeds = paired_seeds();
    let mut com_means = Vec::new();
    let mut ctime_means = Vec::new();
    for &sigma in &sigmas {
        let traces = run_batch(&hexagon_config(Strategy::SelfTriggered, sigma), &seeds)
            .expect("sweep batch runs");
        com_means.push(mean(&traces.iter().map(|t| t.summary.com_bar).collect::<Vec<_>>()));
        ctime_means.push(mean(
            &traces
                .iter()
                .map(|t| t.summary.ctime.unwrap_or(5000) as f64)
                .collect::<Vec<_>>(),
        ));
    }
    for w in com_means.windows(2) {
        assert!(
            w[0] > w[1],
            "mean message rate must fall strictly as sigma grows: {com_means:?}"
        );
    }
    // convergence slows with sigma; one adjacent pair may tie (differences
    // within 2 steps or 1% count as a tie, and only one such pair may
    // actually dip)
    let mut ties_used = 0;
    for w in ctime_means.windows(2) {
        if w[1] < w[0] - 1e-9 {
            let dip = w[0] - w[1];
            assert!(
                dip <= (0.01 * w[0]).max(2.0),
                "mean ctime dropped by {dip:.2} steps as sigma grew: {ctime_means:?}"
            );
            ties_used += 1;
        }
    }
    assert!(ties_used <= 1, "more than one tied adjacent pair: {ctime_means:?}");
    println!(
        "criterion 3: PASS - com {:?}, ctime {:?} ({} tie)",
        com_means.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
        ctime_means.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>(),
        ties_used
    );
}

#[test]
fn criterion_04_guaranteed_segment_containment_and_midpoint_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let omega = 0.3;
    let trials = 10_000;
    for rule in [UbdRule::MaxAge, UbdRule::MeanAge] {
        for _ in 0..trials {
            let own = rng.gen_range(0.0..2.0 * PI);
            let gap_p: f64 = rng.gen_range(0.05..1.2);
            let gap_n: f64 = rng.gen_range(0.05..1.2);
            // ages bounded so the staleness never allows an order swap
            let tau_p = rng.gen_range(0.0..0.9 * gap_p / omega);
            let tau_n = rng.gen_range(0.0..0.9 * gap_n / omega);
            let st = RobotLocalState {
                own: Angle(own),
                prev: NeighborRecord { angle: Angle(own - gap_p), age: tau_p },
                next: NeighborRecord { angle: Angle(own + gap_n), age: tau_n },
                sigma: 0.01,
                omega_max: omega,
                dt: 0.1,
                ubd_rule: rule,
            };
            // realizable true neighbor positions inside the prediction sets
            let phi_p = omega * tau_p;
            let phi_n = omega * tau_n;
            let prev_true = own - gap_p + rng.gen_range(-phi_p..=phi_p);
            let next_true = own + gap_n + rng.gen_range(-phi_n..=phi_n);
            let true_lo = 0.5 * (prev_true + own);
            let true_hi = 0.5 * (own + next_true);
            let g = guaranteed_segment(&st);
            assert!(
                g.lo >= true_lo - 1e-12 && g.hi <= true_hi + 1e-12,
                "guaranteed segment [{}, {}] escapes the true segment [{}, {}]",
                g.lo,
                g.hi,
                true_lo,
                true_hi
            );
            let true_mid = 0.25 * (prev_true + 2.0 * own + next_true);
            let err = (true_mid - guaranteed_midpoint(&st)).abs();
            let bound = ubd(&st);
            assert!(
                err <= bound + 1e-12,
                "midpoint error {err} exceeds its bound {bound} under {rule:?}"
            );
        }
    }
    println!("criterion 4: PASS - {trials} containment and {trials} bound checks per rule, zero violations");
}

#[test]
fn criterion_05_order_safety() {
    let mut total_steps = 0usize;
    let polygons = [
        hexagon(),
        ConvexPolygon::new(vec![
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
        ])
        .unwrap(),
        ConvexPolygon::new(vec![
            Point2::new(2.0, 0.0),
            Point2::new(0.5, 1.8),
            Point2::new(-2.2, 0.9),
            Point2::new(-1.4, -1.6),
            Point2::new(0.9, -1.7),
        ])
        .unwrap(),
    ];
    // randomized starts across polygons and estimators
    for (i, poly) in polygons.iter().enumerate() {
        for seed in 0..10u64 {
            let cfg = SimConfig {
                polygon: poly.clone(),
                n_robots: 5,
                initial: InitialPlacement::Random,
                strategy: Strategy::SelfTriggered,
                estimator: if seed % 3 == 0 {
                    EstimatorMode::CentralizedEkf
                } else {
                    EstimatorMode::KnownTarget
                },
                sigma: 0.02,
                dt: 0.1,
                omega_max: 0.05,
                v_max: 0.5,
                ubd_rule: if seed % 2 == 0 { UbdRule::MaxAge } else { UbdRule::MeanAge },
                target: TargetModel::Stationary { position: Point2::new(0.1, 0.05) },
                noise: NoiseConfig::default(),
                init_cov: 0.1,
                init_mean: None,
                ranges: Default::default(),
                ci_criterion: CiCriterion::Trace,
                max_steps: 3000,
                stop_on_convergence: false,
                seed: 1000 * i as u64 + seed,
            };
            let trace = run(&cfg).expect("ring order must survive randomized runs");
            total_steps += trace.records.len() - 1;
        }
    }
    // adversarial near-swap starts: robots packed within a whisker of each
    // other so a single bad step would cross them
    for seed in 0..10u64 {
        let eps = 1e-4 * (seed + 1) as f64;
        let cfg = SimConfig {
            polygon: hexagon(),
            n_robots: 5,
            initial: InitialPlacement::Fractions(vec![
                0.3,
                0.3 + eps,
                0.3 + 2.0 * eps,
                0.3 + 3.0 * eps,
                0.8,
            ]),
            strategy: Strategy::SelfTriggered,
            estimator: EstimatorMode::KnownTarget,
            sigma: 0.02,
            dt: 0.1,
            omega_max: 0.05,
            v_max: 0.5,
            ubd_rule: UbdRule::MaxAge,
            target: TargetModel::Stationary { position: Point2::new(0.5, 0.3) },
            noise: NoiseConfig::default(),
            init_cov: 0.1,
            init_mean: None,
            ranges: Default::default(),
            ci_criterion: CiCriterion::Trace,
            max_steps: 1000,
            stop_on_convergence: false,
            seed,
        };
        let trace = run(&cfg).expect("ring order must survive near-swap starts");
        total_steps += trace.records.len() - 1;
    }
    assert!(
        total_steps >= 100_000,
        "need at least 1e5 simulated steps, got {total_steps}"
    );
    println!("criterion 5: PASS - zero order violations across {total_steps} steps");
}

/// Brute-force displacement oracle: slide the one-step travel window over
/// every edge and every crossable vertex split, measuring swept angles
/// directly from coordinates; per-element max, then min across elements.
fn oracle_omega_max(
    poly: &ConvexPolygon,
    o: &Point2<f64>,
    budget: &SpeedBudget,
    samples: usize,
) -> f64 {
    let d = budget.d_max();
    let angle_between = |p: Point2<f64>, q: Point2<f64>| -> f64 {
        let a = project_to_circle(&p, o).unwrap();
        let b = project_to_circle(&q, o).unwrap();
        b.signed_diff(a).abs()
    };
    let mut best = f64::INFINITY;
    for i in 0..poly.n_edges() {
        let (a, b) = poly.edge(i);
        let len = (b - a).norm();
        let u = (b - a) / len;
        let mut edge_max = 0.0f64;
        for k in 0..=samples {
            let s = (len - d) * k as f64 / samples as f64;
            let p = a + u * s;
            let q = a + u * (s + d);
            edge_max = edge_max.max(angle_between(p, q));
        }
        best = best.min(edge_max / budget.dt);
    }
    let n = poly.n_edges();
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
        let mut vert_max = 0.0f64;
        for k in 0..=samples {
            let d1 = travel * k as f64 / samples as f64;
            let p = vert - u_in * d1;
            let q = vert + u_out * (travel - d1);
            vert_max = vert_max.max(angle_between(p, q));
        }
        best = best.min(vert_max / budget.dt);
    }
    best
}

/// Random strictly convex polygon: an affine image (positive determinant)
/// of a regular k-gon.
fn random_polygon(rng: &mut ChaCha8Rng) -> ConvexPolygon {
    let k = rng.gen_range(5..=9);
    let rot1 = Rotation2::new(rng.gen_range(0.0..2.0 * PI));
    let rot2 = Rotation2::new(rng.gen_range(0.0..2.0 * PI));
    let sx: f64 = rng.gen_range(0.8..2.0);
    let sy: f64 = rng.gen_range(0.8..2.0);
    let shift = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let verts = (0..k)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / k as f64;
            let p = Vector2::new(a.cos(), a.sin());
            let q = rot1 * Vector2::new(sx * (rot2 * p).x, sy * (rot2 * p).y);
            Point2::from(q + shift)
        })
        .collect();
    ConvexPolygon::new(verts).expect("affine image of a regular polygon is strictly convex")
}

#[test]
fn criterion_06_omega_bound_matches_oracle_and_caps_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for case in 0..20 {
        let poly = random_polygon(&mut rng);
        // interior target: blend from the centroid toward a boundary point
        let c = poly.centroid();
        let b = poly.at_arclength(rng.gen_range(0.0..poly.perimeter())).point;
        let t = rng.gen_range(0.0..0.6);
        let target = Point2::from(c.coords * (1.0 - t) + b.coords * t);
        let omega_ro = if case % 2 == 0 { 12.0 } else { 3.0 };
        let budget = SpeedBudget::new(0.6, omega_ro, 0.1).unwrap();

        let analytic = omega_max(&poly, &target, &budget).expect("bound computes").omega_max;
        let oracle = oracle_omega_max(&poly, &target, &budget, 4000);
        let rel = (analytic - oracle).abs() / oracle;
        assert!(
            rel <= 0.005,
            "case {case}: analytic {analytic} vs oracle {oracle} ({:.3}% off)",
            100.0 * rel
        );

        // the computed bound must cap every simulated step
        let cfg = SimConfig {
            polygon: poly,
            n_robots: 4,
            initial: InitialPlacement::Fractions(vec![0.1, 0.35, 0.6, 0.85]),
            strategy: Strategy::SelfTriggered,
            estimator: EstimatorMode::KnownTarget,
            sigma: 0.02,
            dt: 0.1,
            omega_max: analytic,
            v_max: 0.6,
            ubd_rule: UbdRule::MaxAge,
            target: TargetModel::Stationary { position: target },
            noise: NoiseConfig::default(),
            init_cov: 0.1,
            init_mean: None,
            ranges: Default::default(),
            ci_criterion: CiCriterion::Trace,
            max_steps: 100,
            stop_on_convergence: false,
            seed: case,
        };
        let trace = run(&cfg).unwrap();
        for pair in trace.records.windows(2) {
            for i in 0..4 {
                let step = Angle(pair[1].angles[i]).signed_diff(Angle(pair[0].angles[i])).abs();
                assert!(
                    step <= analytic * 0.1 + 1e-12,
                    "case {case}: one-step sweep {step} exceeds bound*dt {}",
                    analytic * 0.1
                );
            }
        }
    }
    println!("criterion 6: PASS - 20 random polygons within 0.5% of the oracle, steps capped");
}

#[test]
fn criterion_07_estimation_identities_and_noiseless_loop() {
    // (a) information-matrix identity on random SPD pairs
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let spd = |rng: &mut ChaCha8Rng| -> Matrix2<f64> {
        let m = Matrix2::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        m * m.transpose() + Matrix2::identity() * 0.05
    };
    for _ in 0..1000 {
        let a = GaussianBelief::new(
            Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            spd(&mut rng),
        );
        let b = GaussianBelief::new(
            Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            spd(&mut rng),
        );
        let lambda = rng.gen_range(0.0..1.0);
        let fused = covariance_intersection(&a, &b, lambda).unwrap();
        let lhs = fused.cov.try_inverse().unwrap();
        let rhs = a.cov.try_inverse().unwrap() * lambda + b.cov.try_inverse().unwrap() * (1.0 - lambda);
        assert!(
            (lhs - rhs).norm() <= 1e-10,
            "information identity violated by {}",
            (lhs - rhs).norm()
        );
        let opt = optimize_lambda(&a, &b, CiCriterion::Trace).unwrap();
        assert!((0.0..=1.0).contains(&opt), "optimized weight {opt} out of range");
    }

    // (b) endpoint weights return the inputs exactly
    let a = GaussianBelief::new(Point2::new(0.3, -0.4), spd(&mut rng));
    let b = GaussianBelief::new(Point2::new(-1.1, 0.9), spd(&mut rng));
    let at1 = covariance_intersection(&a, &b, 1.0).unwrap();
    assert_eq!(at1.mean, a.mean, "weight 1 must return the first belief exactly");
    assert_eq!(at1.cov, a.cov);
    let at0 = covariance_intersection(&a, &b, 0.0).unwrap();
    assert_eq!(at0.mean, b.mean, "weight 0 must return the second belief exactly");
    assert_eq!(at0.cov, b.cov);

    // (c) noiseless closed loop: centralized filter pins the target
    let cfg = SimConfig {
        polygon: hexagon(),
        n_robots: 6,
        initial: InitialPlacement::Fractions(vec![0.05, 0.2, 0.4, 0.55, 0.7, 0.9]),
        strategy: Strategy::SelfTriggered,
        estimator: EstimatorMode::CentralizedEkf,
        sigma: 0.02,
        dt: 0.1,
        omega_max: OMEGA_REF,
        v_max: 0.2,
        ubd_rule: UbdRule::MaxAge,
        target: TargetModel::Stationary { position: Point2::new(0.8, -0.5) },
        noise: NoiseConfig { process: Matrix2::zeros(), measurement: 1e-12 },
        init_cov: 0.1,
        init_mean: None,
        ranges: Default::default(),
        ci_criterion: CiCriterion::Trace,
        max_steps: 500,
        stop_on_convergence: false,
        seed: 7,
    };
    let trace = run(&cfg).unwrap();
    let first_pin = trace
        .records
        .iter()
        .position(|r| (r.estimates[0] - r.target).norm() <= 1e-3)
        .expect("estimate must reach the target within 500 steps");
    println!(
        "criterion 7: PASS - CI identity over 1000 pairs, exact endpoints, noiseless loop pinned in {first_pin} steps"
    );
    assert!(first_pin <= 500);
}

fn moving_target_config(
    strategy: Strategy,
    estimator: EstimatorMode,
) -> SimConfig {
    SimConfig {
        polygon: ConvexPolygon::new(vec![
            Point2::new(3.0, -3.0),
            Point2::new(3.0, 3.0),
            Point2::new(-3.0, 3.0),
            Point2::new(-3.0, -3.0),
        ])
        .unwrap(),
        n_robots: 6,
        initial: InitialPlacement::Random,
        strategy,
        estimator,
        sigma: 0.02,
        dt: 0.1,
        omega_max: 0.3,
        v_max: 1.5,
        ubd_rule: UbdRule::MaxAge,
        target: TargetModel::Circle {
            center: Point2::new(0.0, 0.0),
            speed: 1.0,
            omega: 0.6,
            phase: 0.0,
        },
        noise: NoiseConfig { process: Matrix2::identity() * 1e-2, measurement: 1e-2 },
        init_cov: 0.5,
        init_mean: None,
        ranges: Default::default(),
        ci_criterion: CiCriterion::Trace,
        max_steps: 10_000,
        stop_on_convergence: false,
        seed: 0,
    }
}

#[test]
fn criterion_08_moving_target_pipelines_stay_bounded() {
    let seeds = [11u64, 12, 13, 14];
    let pipelines = [
        ("constant+centralized", Strategy::Constant, EstimatorMode::CentralizedEkf),
        ("self-triggered+centralized", Strategy::SelfTriggered, EstimatorMode::CentralizedEkf),
        ("self-triggered+decentralized", Strategy::SelfTriggered, EstimatorMode::DecentralizedEkfCi),
    ];
    let mut terr_by_pipeline = Vec::new();
    for (name, strategy, estimator) in pipelines {
        let traces =
            run_batch(&moving_target_config(strategy, estimator), &seeds).expect("batch runs");
        for trace in &traces {
            let cerr: Vec<f64> = trace.records.iter().map(|r| r.cerr).collect();
            assert!(cerr.iter().all(|v| v.is_finite()), "{name}: error series must stay finite");
            // steady state must not grow: compare third and fourth quarters
            let q3 = mean(&cerr[5000..7500]);
            let q4 = mean(&cerr[7500..]);
            assert!(
                q4 <= 1.3 * q3 + 0.05,
                "{name} seed {}: steady-state error grew from {q3:.4} to {q4:.4}",
                trace.summary.seed
            );
        }
        terr_by_pipeline
            .push(mean(&traces.iter().map(|t| t.summary.mean_terr).collect::<Vec<_>>()));
    }
    let centralized = terr_by_pipeline[1];
    let decentralized = terr_by_pipeline[2];
    println!(
        "criterion 8: PASS - tracking error constant/centralized {:.4}, triggered/centralized {centralized:.4}, triggered/decentralized {decentralized:.4}",
        terr_by_pipeline[0]
    );
    assert!(
        decentralized >= centralized,
        "decentralized fusion should track no better than the centralized filter \
         ({decentralized:.4} vs {centralized:.4})"
    );
}

#[test]
// wraparound ring pairs (i, i+1 mod n) need explicit indices
#[allow(clippy::needless_range_loop)]
fn criterion_09_limited_range_chains_merge_and_links_hold() {
    let square = ConvexPolygon::new(vec![
        Point2::new(-0.5, -0.5),
        Point2::new(0.5, -0.5),
        Point2::new(0.5, 0.5),
        Point2::new(-0.5, 0.5),
    ])
    .unwrap();
    let n = 5;
    let r_c = square.perimeter() / n as f64; // sufficient communication bound
    let r_s = square.longest_inner_segment(); // sufficient sensing bound
    let cfg = SimConfig {
        polygon: square.clone(),
        n_robots: n,
        initial: InitialPlacement::Random,
        strategy: Strategy::SelfTriggeredLimited,
        estimator: EstimatorMode::CentralizedEkf,
        sigma: 0.02,
        dt: 0.1,
        omega_max: OMEGA_REF,
        v_max: 0.2,
        ubd_rule: UbdRule::MaxAge,
        target: TargetModel::Stationary { position: Point2::new(0.05, -0.02) },
        noise: NoiseConfig::default(),
        init_cov: 0.1,
        init_mean: None,
        ranges: boundary_tracking::limited_range::RangeConfig {
            communication: r_c,
            sensing: r_s,
        },
        ci_criterion: CiCriterion::Trace,
        max_steps: 5000,
        stop_on_convergence: true,
        seed: 0,
    };
    let seeds: Vec<u64> = (1..=20).collect();
    let traces = run_batch(&cfg, &seeds).expect("limited-range batch runs");
    let mut worst_ct = 0;
    for trace in &traces {
        let seed = trace.summary.seed;
        let ct = trace
            .summary
            .ctime
            .unwrap_or_else(|| panic!("seed {seed}: no convergence under sufficient ranges"));
        worst_ct = worst_ct.max(ct);
        for pair in trace.records.windows(2) {
            assert!(
                pair[1].chains <= pair[0].chains,
                "seed {seed}: chain count rose from {} to {} at step {}",
                pair[0].chains,
                pair[1].chains,
                pair[1].k
            );
        }
        assert_eq!(
            trace.records.last().unwrap().chains,
            1,
            "seed {seed}: robots must end in a single chain"
        );
        // once a ring-adjacent pair is linked it must stay within range
        let mut linked = vec![false; n];
        for rec in &trace.records {
            for i in 0..n {
                let d = (rec.positions[i] - rec.positions[(i + 1) % n]).norm();
                if linked[i] {
                    assert!(
                        d <= r_c + 1e-9,
                        "seed {seed}: linked pair ({i},{}) separated to {d} at step {}",
                        (i + 1) % n,
                        rec.k
                    );
                } else if d <= r_c {
                    linked[i] = true;
                }
            }
        }
    }

    // unreachable-neighbor witness: a uniform ring with the communication
    // radius just under the necessary bound leaves every robot isolated
    let r_c_tight = 0.99 * 1.0 * (PI / n as f64).sin(); // inscribed diameter is 1
    let center = Point2::new(0.0, 0.0);
    let positions: Vec<Point2<f64>> = (0..n)
        .map(|k| {
            let theta = Angle(2.0 * PI * k as f64 / n as f64 + 0.3);
            circle_to_boundary(theta, &center, &square).unwrap().point
        })
        .collect();
    for i in 0..n {
        let reach = reachable_neighbors(&positions, i, r_c_tight);
        assert!(
            !reach.prev && !reach.next,
            "robot {i} should find both neighbors unreachable below the necessary bound"
        );
    }
    println!(
        "criterion 9: PASS - 20/20 trials single chain (worst ctime {worst_ct}), links held, witness isolated"
    );
}

#[test]
fn criterion_10_byte_identical_traces_per_seed() {
    let mut configs = vec![
        hexagon_config(Strategy::SelfTriggered, 0.02),
        hexagon_config(Strategy::Constant, 0.02),
    ];
    configs[0].estimator = EstimatorMode::CentralizedEkf;
    let mut limited = hexagon_config(Strategy::SelfTriggeredLimited, 0.02);
    limited.estimator = EstimatorMode::DecentralizedEkfCi;
    limited.ranges = boundary_tracking::limited_range::RangeConfig {
        communication: hexagon().perimeter() / 6.0,
        sensing: 8.0,
    };
    configs.push(limited);
    for (i, base) in configs.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.max_steps = 400;
        cfg.stop_on_convergence = false;
        cfg.seed = 99;
        let first = csv_string(&run(&cfg).unwrap());
        let second = csv_string(&run(&cfg).unwrap());
        assert_eq!(first, second, "config {i}: same seed must reproduce the trace byte for byte");
        cfg.seed = 100;
        let other = csv_string(&run(&cfg).unwrap());
        assert_ne!(first, other, "config {i}: a different seed should change the trace");
    }
    println!("criterion 10: PASS - byte-identical traces for all three pipeline shapes");
}
