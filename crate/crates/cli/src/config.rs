//! Scenario configuration. One JSON document per run; unknown keys are
//! rejected.

use serde::Deserialize;

use fanning_lab_core::deformations::{katok_metric, ClosedOneForm};
use fanning_lab_core::finsler::{zoo, MetricSpec, OneForm, Potential};
use fanning_lab_core::jacobi::{TransportOptions, DEFAULT_STEPS_PER_UNIT, STENCIL_BASE_H};
use fanning_lab_core::reduction::{Submersion, TangentMethod};
use fanning_lab_core::validation::Settings;
use fanning_lab_core::GeomError;

use crate::CliError;

/// Upper bounds that keep a single run bounded; not numerical limits.
const MAX_DIM: usize = 8;
const MAX_SAMPLES: usize = 100_000;
const MAX_STEPS_PER_UNIT: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Stem of the output files; letters, digits, `-`, `_` and `.` only.
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_steps")]
    pub steps_per_unit: usize,
    #[serde(default = "default_stencil_h")]
    pub stencil_h: f64,
    pub experiment: Experiment,
}

fn default_seed() -> u64 {
    Settings::default().seed
}

fn default_steps() -> usize {
    DEFAULT_STEPS_PER_UNIT
}

fn default_stencil_h() -> f64 {
    STENCIL_BASE_H
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    CurvatureGrid(CurvatureGrid),
    InvariantsAlongOrbit(OrbitScan),
    Submersion(SubmersionRun),
    Projective(ProjectiveRun),
    Katok(KatokRun),
    Selftest(SelftestRun),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::CurvatureGrid(_) => "curvature-grid",
            Experiment::InvariantsAlongOrbit(_) => "invariants-along-orbit",
            Experiment::Submersion(_) => "submersion",
            Experiment::Projective(_) => "projective",
            Experiment::Katok(_) => "katok",
            Experiment::Selftest(_) => "selftest",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureGrid {
    pub metric: MetricConfig,
    pub sampling: Sampling,
    /// Base points are offset by this vector; defaults to the origin.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    /// Known constant curvature; replaces the Riemann oracle.
    #[serde(default)]
    pub expected: Option<f64>,
    /// Bound on `|K − oracle|`.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Sampling {
    /// `count` seeded flags with base points in a ball.
    Random { count: usize, radius: f64 },
    /// `points` base points on a diagonal segment, `directions` poles in the
    /// `(x₁, x₂)`-plane and `transverse` edges turned away from each pole.
    Grid { points: usize, directions: usize, transverse: usize, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitScan {
    pub metric: MetricConfig,
    pub x: Vec<f64>,
    /// Initial direction; rescaled to unit speed.
    pub y: Vec<f64>,
    pub t_max: f64,
    pub samples: usize,
    /// Bound on the deviation of the Wronskian from the fundamental tensor.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmersionRun {
    pub scenario: SubmersionScenario,
    pub samples: usize,
    #[serde(default)]
    pub method: Method,
    /// Expected `(K_base, K_total, correction)`.
    #[serde(default)]
    pub expected: Option<[f64; 3]>,
    #[serde(default = "default_expected_tolerance")]
    pub expected_tolerance: f64,
    /// Bound on `|K_base − K_total − correction|`.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn default_expected_tolerance() -> f64 {
    1e-2
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SubmersionScenario {
    Hopf {
        #[serde(default = "one")]
        radius: f64,
    },
    Projection { total: usize, base: usize },
}

impl SubmersionScenario {
    pub fn id(&self) -> &'static str {
        match self {
            SubmersionScenario::Hopf { .. } => "hopf",
            SubmersionScenario::Projection { .. } => "projection",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Analytic,
    ConeLinearization,
}

impl From<Method> for TangentMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Analytic => TangentMethod::Analytic,
            Method::ConeLinearization => TangentMethod::ConeLinearization,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectiveRun {
    pub base: MetricConfig,
    pub theta: ThetaConfig,
    pub samples: usize,
    pub radius: f64,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    /// Bound on `|K_direct − K_formula|`.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThetaConfig {
    Constant { values: Vec<f64> },
    /// `d(scale · xᵢ)` for the ambient coordinate `xᵢ` of the stereographic
    /// chart of the unit sphere.
    StereoCoordinate { index: usize, scale: f64 },
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatokRun {
    pub epsilons: Vec<f64>,
    pub samples: usize,
    /// Bound on `|K − 1|`.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestRun {}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricConfig {
    Euclidean {
        #[serde(default = "two")]
        n: usize,
    },
    Sphere {
        #[serde(default = "one")]
        radius: f64,
    },
    Hyperbolic {},
    RiemannianConformal {
        #[serde(default = "default_a")]
        a: f64,
        #[serde(default = "three")]
        n: usize,
    },
    Randers {
        beta: Vec<f64>,
    },
    Katok {
        epsilon: f64,
    },
    HopfTotal {
        #[serde(default = "one")]
        radius: f64,
    },
    S2Polar {
        #[serde(default = "one")]
        radius: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

fn three() -> usize {
    3
}

fn default_a() -> f64 {
    0.2
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config(format!("{key} must be positive and finite, got {v}")))
    }
}

fn count(key: &str, v: usize) -> Result<(), CliError> {
    if (1..=MAX_SAMPLES).contains(&v) {
        Ok(())
    } else {
        Err(config(format!("{key} must be between 1 and {MAX_SAMPLES}, got {v}")))
    }
}

fn dim(key: &str, v: usize, lo: usize) -> Result<(), CliError> {
    if (lo..=MAX_DIM).contains(&v) {
        Ok(())
    } else {
        Err(config(format!("{key} must be between {lo} and {MAX_DIM}, got {v}")))
    }
}

fn finite(key: &str, v: &[f64]) -> Result<(), CliError> {
    match v.iter().position(|c| !c.is_finite()) {
        Some(i) => Err(config(format!("{key}[{i}] is not finite"))),
        None => Ok(()),
    }
}

fn opt_positive(key: &str, v: Option<f64>) -> Result<(), CliError> {
    v.map_or(Ok(()), |v| positive(key, v))
}

/// A construction failure caused by parameter values, reported against `key`.
fn metric_error(key: &str, e: GeomError) -> CliError {
    config(format!("{key}: {e}"))
}

impl MetricConfig {
    pub fn id(&self) -> &'static str {
        match self {
            MetricConfig::Euclidean { .. } => "euclidean",
            MetricConfig::Sphere { .. } => "sphere",
            MetricConfig::Hyperbolic {} => "hyperbolic",
            MetricConfig::RiemannianConformal { .. } => "riemannian-conformal",
            MetricConfig::Randers { .. } => "randers",
            MetricConfig::Katok { .. } => "katok",
            MetricConfig::HopfTotal { .. } => "hopf-total",
            MetricConfig::S2Polar { .. } => "s2-polar",
        }
    }

    /// Checks the parameters and builds the metric; `key` names this entry
    /// in error messages.
    pub fn build(&self, key: &str) -> Result<MetricSpec, CliError> {
        let err = |e| metric_error(key, e);
        match self {
            MetricConfig::Euclidean { n } => {
                dim(&format!("{key}.n"), *n, 1)?;
                Ok(zoo::euclidean(*n))
            }
            MetricConfig::Sphere { radius } => {
                positive(&format!("{key}.radius"), *radius)?;
                zoo::sphere(*radius).map_err(err)
            }
            MetricConfig::Hyperbolic {} => Ok(zoo::hyperbolic()),
            MetricConfig::RiemannianConformal { a, n } => {
                dim(&format!("{key}.n"), *n, 2)?;
                finite(&format!("{key}.a"), &[*a])?;
                zoo::riemannian_conformal(*a, *n).map_err(err)
            }
            MetricConfig::Randers { beta } => {
                dim(&format!("{key}.beta length"), beta.len(), 1)?;
                finite(&format!("{key}.beta"), beta)?;
                zoo::randers_constant(beta.clone()).map_err(err)
            }
            MetricConfig::Katok { epsilon } => {
                finite(&format!("{key}.epsilon"), &[*epsilon])?;
                katok_metric(*epsilon).map_err(err)
            }
            MetricConfig::HopfTotal { radius } => {
                positive(&format!("{key}.radius"), *radius)?;
                zoo::hopf_total(*radius).map_err(err)
            }
            MetricConfig::S2Polar { radius } => {
                positive(&format!("{key}.radius"), *radius)?;
                zoo::s2_polar(*radius).map_err(err)
            }
        }
    }
}

impl ThetaConfig {
    pub fn build(&self, key: &str, n: usize) -> Result<ClosedOneForm, CliError> {
        match self {
            ThetaConfig::Constant { values } => {
                finite(&format!("{key}.values"), values)?;
                if values.len() != n {
                    return Err(config(format!("{key}.values has {} entries for a metric of dimension {n}", values.len())));
                }
                Ok(ClosedOneForm::new(OneForm::Constant(values.clone())))
            }
            ThetaConfig::StereoCoordinate { index, scale } => {
                finite(&format!("{key}.scale"), &[*scale])?;
                if *index >= n {
                    return Err(config(format!("{key}.index must be below {n}, got {index}")));
                }
                Ok(ClosedOneForm::new(OneForm::Exact(Potential::StereoCoordinate { index: *index, scale: *scale })))
            }
        }
    }
}

impl SubmersionScenario {
    pub fn build(&self, key: &str) -> Result<Submersion, CliError> {
        match self {
            SubmersionScenario::Hopf { radius } => {
                positive(&format!("{key}.radius"), *radius)?;
                Submersion::hopf(*radius).map_err(|e| metric_error(key, e))
            }
            SubmersionScenario::Projection { total, base } => {
                dim(&format!("{key}.total"), *total, 2)?;
                if !(2..*total).contains(base) {
                    return Err(config(format!("{key}.base must be at least 2 and below total = {total}, got {base}")));
                }
                Submersion::projection(*total, *base).map_err(|e| metric_error(key, e))
            }
        }
    }
}

impl ScenarioConfig {
    /// Parses and validates a config document.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every knob that can be checked without building metrics.
    pub fn validate(&self) -> Result<(), CliError> {
        let name_ok = !self.name.is_empty()
            && !self.name.starts_with('.')
            && self.name.len() <= 128
            && self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        if !name_ok {
            return Err(config(format!("name {:?} must be 1-128 characters from [A-Za-z0-9._-], not starting with '.'", self.name)));
        }
        if !(1..=MAX_STEPS_PER_UNIT).contains(&self.steps_per_unit) {
            return Err(config(format!("steps_per_unit must be between 1 and {MAX_STEPS_PER_UNIT}, got {}", self.steps_per_unit)));
        }
        positive("stencil_h", self.stencil_h)?;
        match &self.experiment {
            Experiment::CurvatureGrid(g) => {
                match g.sampling {
                    Sampling::Random { count: c, radius } => {
                        count("experiment.sampling.count", c)?;
                        positive("experiment.sampling.radius", radius)?;
                    }
                    Sampling::Grid { points, directions, transverse, radius } => {
                        count("experiment.sampling.points", points)?;
                        count("experiment.sampling.directions", directions)?;
                        count("experiment.sampling.transverse", transverse)?;
                        count("experiment.sampling total", points.saturating_mul(directions).saturating_mul(transverse))?;
                        positive("experiment.sampling.radius", radius)?;
                    }
                }
                if let Some(c) = &g.center {
                    finite("experiment.center", c)?;
                }
                if let Some(e) = g.expected {
                    finite("experiment.expected", &[e])?;
                }
                opt_positive("experiment.tolerance", g.tolerance)
            }
            Experiment::InvariantsAlongOrbit(o) => {
                finite("experiment.x", &o.x)?;
                finite("experiment.y", &o.y)?;
                if !(o.t_max >= 0.0 && o.t_max.is_finite()) {
                    return Err(config(format!("experiment.t_max must be non-negative and finite, got {}", o.t_max)));
                }
                count("experiment.samples", o.samples)?;
                opt_positive("experiment.tolerance", o.tolerance)
            }
            Experiment::Submersion(s) => {
                count("experiment.samples", s.samples)?;
                if let Some(e) = &s.expected {
                    finite("experiment.expected", e)?;
                }
                positive("experiment.expected_tolerance", s.expected_tolerance)?;
                opt_positive("experiment.tolerance", s.tolerance)
            }
            Experiment::Projective(p) => {
                count("experiment.samples", p.samples)?;
                positive("experiment.radius", p.radius)?;
                if let Some(c) = &p.center {
                    finite("experiment.center", c)?;
                }
                opt_positive("experiment.tolerance", p.tolerance)
            }
            Experiment::Katok(k) => {
                if k.epsilons.is_empty() {
                    return Err(config("experiment.epsilons must not be empty"));
                }
                finite("experiment.epsilons", &k.epsilons)?;
                count("experiment.samples", k.samples)?;
                opt_positive("experiment.tolerance", k.tolerance)
            }
            Experiment::Selftest(_) => Ok(()),
        }
    }

    pub fn transport(&self) -> TransportOptions {
        TransportOptions { steps_per_unit: self.steps_per_unit, route: None, stencil_h: self.stencil_h }
    }

    /// Validation settings with this config's seed and numeric knobs.
    pub fn settings(&self) -> Settings {
        let mut s = Settings { seed: self.seed, transport: self.transport(), ..Settings::default() };
        s.stencil.h = self.stencil_h;
        s
    }
}
