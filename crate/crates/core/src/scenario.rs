//! Scenario files: a strict TOML schema that builds engine configurations.
//!
//! Unknown keys are rejected everywhere (typos fail loudly instead of
//! silently running a different experiment). Scalar fields can be
//! overridden from the command line with `section.key=value` paths applied
//! to the parsed document before it is typed and validated.

use crate::engine::{EngineError, EstimatorMode, InitialPlacement, SimConfig, Strategy};
use crate::estimation::{CiCriterion, NoiseConfig, TargetModel};
use crate::geometry::{ConvexPolygon, GeometryError};
use crate::kinematics::{omega_max, KinematicsError, OmegaBreakdown, SpeedBudget};
use crate::limited_range::RangeConfig;
use nalgebra::{Matrix2, Point2};
use serde::Deserialize;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported schema_version {found} (this build reads {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("override '{0}' is not of the form section.key=value")]
    MalformedOverride(String),
    #[error("override path '{0}' does not lead to a settable key")]
    OverridePath(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub polygon: PolygonSection,
    pub run: RunSection,
    #[serde(default)]
    pub robots: RobotsSection,
    #[serde(default)]
    pub omega: OmegaSection,
    pub target: TargetSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub ranges: RangesSection,
    #[serde(default)]
    pub ci: CiSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonSection {
    /// counter-clockwise vertices, meters
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub strategy: Strategy,
    pub estimator: EstimatorMode,
    pub n_robots: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_true")]
    pub stop_on_convergence: bool,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub ubd_rule: crate::coordination::UbdRule,
}

fn default_dt() -> f64 {
    0.1
}
fn default_sigma() -> f64 {
    0.02
}
fn default_max_steps() -> usize {
    5000
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotsSection {
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default)]
    pub initial: InitialSpec,
}

fn default_v_max() -> f64 {
    0.2
}

impl Default for RobotsSection {
    fn default() -> Self {
        Self { v_max: default_v_max(), initial: InitialSpec::default() }
    }
}

/// `initial = "random"` or an explicit array of boundary fractions.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Named(String),
    Fractions(Vec<f64>),
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Named("random".to_owned())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSection {
    #[serde(default = "default_omega_mode")]
    pub mode: OmegaMode,
    /// fixed angular speed bound (rad/s), used by mode = "fixed"
    #[serde(default = "default_omega_value")]
    pub value: f64,
    /// in-place heading rate ω_ro (rad/s) for vertex turns, used by
    /// mode = "computed"
    #[serde(default = "default_rotation_speed")]
    pub rotation_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaMode {
    Fixed,
    Computed,
}

fn default_omega_mode() -> OmegaMode {
    OmegaMode::Fixed
}
fn default_omega_value() -> f64 {
    std::f64::consts::PI / 180.0
}
fn default_rotation_speed() -> f64 {
    std::f64::consts::PI
}

impl Default for OmegaSection {
    fn default() -> Self {
        Self {
            mode: default_omega_mode(),
            value: default_omega_value(),
            rotation_speed: default_rotation_speed(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub kind: String,
    /// stationary
    #[serde(default)]
    pub position: Option<[f64; 2]>,
    /// circle
    #[serde(default)]
    pub center: Option<[f64; 2]>,
    #[serde(default)]
    pub v: Option<f64>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub phase: Option<f64>,
    /// waypoints
    #[serde(default)]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub speed: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// scalar s gives an isotropic per-step process covariance s·I (m²)
    #[serde(default = "default_process")]
    pub process: f64,
    /// range-measurement variance (m²)
    #[serde(default = "default_measurement")]
    pub measurement: f64,
    /// isotropic prior variance (m²)
    #[serde(default = "default_init_cov")]
    pub init_cov: f64,
    /// prior mean; defaults to the polygon's inscribed-circle center
    #[serde(default)]
    pub init_mean: Option<[f64; 2]>,
}

fn default_process() -> f64 {
    1e-4
}
fn default_measurement() -> f64 {
    1e-2
}
fn default_init_cov() -> f64 {
    0.1
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            process: default_process(),
            measurement: default_measurement(),
            init_cov: default_init_cov(),
            init_mean: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangesSection {
    /// absent = unlimited
    #[serde(default)]
    pub communication: Option<f64>,
    #[serde(default)]
    pub sensing: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CiSection {
    #[serde(default)]
    pub criterion: CiCriterion,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_true")]
    pub csv: bool,
    #[serde(default = "default_true")]
    pub summary: bool,
    #[serde(default)]
    pub plots: bool,
}

fn default_dir() -> String {
    ".".to_owned()
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), csv: true, summary: true, plots: false }
    }
}

/// A scenario after validation: the engine configuration plus the details
/// the CLI reports.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub config: SimConfig,
    /// present when the angular bound was computed from the geometry
    pub omega_breakdown: Option<OmegaBreakdown>,
    pub output: OutputSection,
}

/// Parse scenario text, apply `section.key=value` overrides, and type-check
/// against the schema.
pub fn parse_scenario(text: &str, overrides: &[String]) -> Result<ScenarioFile, ScenarioError> {
    let mut value: toml::Value = text.parse()?;
    for ov in overrides {
        apply_override(&mut value, ov)?;
    }
    let file: ScenarioFile = value.try_into()?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(ScenarioError::SchemaVersion { found: file.schema_version });
    }
    Ok(file)
}

/// Set one dotted path in a parsed TOML document. The value side is parsed
/// as TOML itself (numbers, booleans, arrays, quoted strings); bare words
/// fall back to strings so `run.strategy=constant` reads naturally.
fn apply_override(doc: &mut toml::Value, spec: &str) -> Result<(), ScenarioError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| ScenarioError::MalformedOverride(spec.to_owned()))?;
    let path = path.trim();
    let raw = raw.trim();
    if path.is_empty() || raw.is_empty() {
        return Err(ScenarioError::MalformedOverride(spec.to_owned()));
    }
    let parsed: toml::Value = match format!("v = {raw}").parse::<toml::Value>() {
        Ok(toml::Value::Table(mut t)) => t.remove("v").expect("key v was just parsed"),
        _ => toml::Value::String(raw.to_owned()),
    };
    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        node = node
            .as_table_mut()
            .ok_or_else(|| ScenarioError::OverridePath(path.to_owned()))?
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    node.as_table_mut()
        .ok_or_else(|| ScenarioError::OverridePath(path.to_owned()))?
        .insert(parts[parts.len() - 1].to_owned(), parsed);
    Ok(())
}

fn to_point(p: [f64; 2]) -> Point2<f64> {
    Point2::new(p[0], p[1])
}

impl TargetSection {
    // `!(x > 0)` rather than `x <= 0` so NaN parameters fail validation
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn build(&self) -> Result<TargetModel, ScenarioError> {
        match self.kind.as_str() {
            "stationary" => {
                let position = self
                    .position
                    .ok_or_else(|| invalid("target.kind = \"stationary\" needs target.position"))?;
                Ok(TargetModel::Stationary { position: to_point(position) })
            }
            "circle" => {
                let center = self
                    .center
                    .ok_or_else(|| invalid("target.kind = \"circle\" needs target.center"))?;
                let v = self.v.ok_or_else(|| invalid("target.kind = \"circle\" needs target.v"))?;
                let omega = self
                    .omega
                    .ok_or_else(|| invalid("target.kind = \"circle\" needs target.omega"))?;
                if !(v > 0.0) || !(omega.abs() > 0.0) {
                    return Err(invalid("circle target needs v > 0 and omega != 0"));
                }
                Ok(TargetModel::Circle {
                    center: to_point(center),
                    speed: v,
                    omega,
                    phase: self.phase.unwrap_or(0.0),
                })
            }
            "waypoints" => {
                let points = self
                    .points
                    .as_ref()
                    .ok_or_else(|| invalid("target.kind = \"waypoints\" needs target.points"))?;
                if points.len() < 2 {
                    return Err(invalid("waypoint target needs at least 2 points"));
                }
                let speed = self
                    .speed
                    .ok_or_else(|| invalid("target.kind = \"waypoints\" needs target.speed"))?;
                if !(speed > 0.0) {
                    return Err(invalid("waypoint target needs speed > 0"));
                }
                Ok(TargetModel::Waypoints {
                    points: points.iter().map(|&p| to_point(p)).collect(),
                    speed,
                })
            }
            other => Err(invalid(format!(
                "unknown target.kind \"{other}\" (expected stationary, circle, or waypoints)"
            ))),
        }
    }
}

impl ScenarioFile {
    /// Validate everything and assemble the engine configuration. `seed`
    /// must already be resolved (flag, file, or generated by the caller).
    // `!(x > 0)` rather than `x <= 0` so NaN parameters fail validation
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn build(&self, seed: u64) -> Result<BuiltScenario, ScenarioError> {
        let polygon =
            ConvexPolygon::new(self.polygon.vertices.iter().map(|&p| to_point(p)).collect())?;
        let target = self.target.build()?;
        let initial = match &self.robots.initial {
            InitialSpec::Named(s) if s == "random" => InitialPlacement::Random,
            InitialSpec::Named(s) => {
                return Err(invalid(format!(
                    "robots.initial must be \"random\" or an array of fractions, got \"{s}\""
                )))
            }
            InitialSpec::Fractions(f) => InitialPlacement::Fractions(f.clone()),
        };
        let (omega, omega_breakdown) = match self.omega.mode {
            OmegaMode::Fixed => {
                if !(self.omega.value > 0.0) {
                    return Err(invalid("omega.value must be positive in fixed mode"));
                }
                (self.omega.value, None)
            }
            OmegaMode::Computed => {
                let budget =
                    SpeedBudget::new(self.robots.v_max, self.omega.rotation_speed, self.run.dt)?;
                let center = target.position_at(0.0);
                let breakdown = omega_max(&polygon, &center, &budget)?;
                (breakdown.omega_max, Some(breakdown))
            }
        };
        let ranges = RangeConfig {
            communication: self.ranges.communication.unwrap_or(f64::INFINITY),
            sensing: self.ranges.sensing.unwrap_or(f64::INFINITY),
        };
        let config = SimConfig {
            polygon,
            n_robots: self.run.n_robots,
            initial,
            strategy: self.run.strategy,
            estimator: self.run.estimator,
            sigma: self.run.sigma,
            dt: self.run.dt,
            omega_max: omega,
            v_max: self.robots.v_max,
            ubd_rule: self.run.ubd_rule,
            target,
            noise: NoiseConfig {
                process: Matrix2::identity() * self.noise.process,
                measurement: self.noise.measurement,
            },
            init_cov: self.noise.init_cov,
            init_mean: self.noise.init_mean.map(to_point),
            ranges,
            ci_criterion: self.ci.criterion,
            max_steps: self.run.max_steps,
            stop_on_convergence: self.run.stop_on_convergence,
            seed,
        };
        config.validate()?;
        Ok(BuiltScenario { config, omega_breakdown, output: self.output.clone() })
    }
}
