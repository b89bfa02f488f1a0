//! Experiment configuration: one TOML document per run.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use topowave::coeffs::{coeffs_from_p, coeffs_from_q, parse_rational, ConstantCoeffs};
use topowave::params::{check_regime, BathymetryProfile, RegimeFamily, RegimeParams, RegimeTag};
use topowave::reconstruct::ReconstructionVariant;
use topowave::spectral::Grid;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Residual order of a unidirectional model against its reference system.
    Consistency,
    /// Threshold evaluation and surging detection for the breaking equation.
    Breaking,
    /// Temporal self-convergence and energy drift under step halving.
    Convergence,
    /// Flat-bottom KdV-top soliton transport.
    Soliton,
    /// KdV-top against a direct Boussinesq run.
    ModelError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ChVelocity,
    ChElevation,
    /// The elevation equation at `q = 1/12` with constant dispersive coefficients.
    Breaking,
    KdvElevation,
    KdvVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffFamily {
    P,
    Q,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomCoeffs {
    pub a: String,
    pub b: String,
    pub e: String,
    pub f: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<CoeffFamily>,
    /// Free parameter `p` or `q` as a rational literal, e.g. `"-1/12"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomCoeffs>,
    /// Reconstruction of the second unknown; defaults by model kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconstructionVariant>,
}

impl ModelConfig {
    /// Constant coefficients for the CH kinds.
    pub fn coeffs(&self) -> Result<Option<ConstantCoeffs>, ConfigError> {
        if !matches!(self.kind, ModelKind::ChVelocity | ModelKind::ChElevation) {
            return Ok(None);
        }
        let family = self.family.ok_or_else(|| invalid("model.family", "required for CH models"))?;
        let parse = |field: &str, s: &str| parse_rational(s).map_err(|e| invalid(field, e.to_string()));
        let cc = match family {
            CoeffFamily::P | CoeffFamily::Q => {
                let v = self.value.as_deref().ok_or_else(|| invalid("model.value", "required for family p or q"))?;
                let r = parse("model.value", v)?;
                if family == CoeffFamily::P {
                    coeffs_from_p(r)
                } else {
                    coeffs_from_q(r)
                }
            }
            CoeffFamily::Custom => {
                let c = self.custom.as_ref().ok_or_else(|| invalid("model.custom", "required for family custom"))?;
                ConstantCoeffs::custom(
                    parse("model.custom.a", &c.a)?,
                    parse("model.custom.b", &c.b)?,
                    parse("model.custom.e", &c.e)?,
                    parse("model.custom.f", &c.f)?,
                )
            }
        };
        Ok(Some(cc))
    }

    pub fn reconstruction(&self) -> ReconstructionVariant {
        use ReconstructionVariant::*;
        self.reconstruction.unwrap_or(match self.kind {
            ModelKind::ChVelocity => ChZetaFromUFull,
            ModelKind::ChElevation | ModelKind::Breaking => ChUFromZetaFull,
            ModelKind::KdvElevation => KdvUFromZetaHs,
            ModelKind::KdvVelocity => KdvZetaFromUHs,
        })
    }

    /// True when the evolved unknown is the surface elevation.
    pub fn evolves_elevation(&self) -> bool {
        matches!(self.kind, ModelKind::ChElevation | ModelKind::Breaking | ModelKind::KdvElevation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeConfig {
    pub tag: RegimeTag,
    /// Bound on every size ratio of the regime.
    #[serde(default = "default_bound")]
    pub bound: f64,
    pub members: Vec<RegimeParams<f64>>,
}

fn default_bound() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub half_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum DtRule {
    Fixed(f64),
    /// Fraction of the model's stability bound.
    StabilityFraction(f64),
    /// Fraction of the grid spacing.
    DxFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    pub dt: DtRule,
    /// Horizon as a multiple of `1/eps`.
    pub horizon: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Gaussian { amplitude: f64, center: f64, width: f64 },
    Sech2 { amplitude: f64, center: f64, width: f64 },
    /// Sum of Gaussians with seeded random amplitudes in `[-1, 1] * amplitude`.
    RandomBumps { count: usize, amplitude: f64, spread: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "default_slope")]
    pub slope: [f64; 2],
    /// Terminal-time exponent window of the model-error study.
    #[serde(default = "default_terminal")]
    pub terminal_slope: [f64; 2],
    #[serde(default = "default_spread")]
    pub normalized_spread: f64,
    #[serde(default = "default_shape")]
    pub shape_error: f64,
    #[serde(default = "default_drift")]
    pub energy_drift: f64,
    #[serde(default = "default_refinement")]
    pub refinement: f64,
    #[serde(default = "default_order")]
    pub time_order: [f64; 2],
}

fn default_slope() -> [f64; 2] {
    [1.7, 2.3]
}
fn default_terminal() -> [f64; 2] {
    [0.7, 1.3]
}
fn default_spread() -> f64 {
    2.0
}
fn default_shape() -> f64 {
    1e-4
}
fn default_drift() -> f64 {
    1e-8
}
fn default_refinement() -> f64 {
    0.05
}
fn default_order() -> [f64; 2] {
    [3.5, 4.5]
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            slope: default_slope(),
            terminal_slope: default_terminal(),
            normalized_spread: default_spread(),
            shape_error: default_shape(),
            energy_drift: default_drift(),
            refinement: default_refinement(),
            time_order: default_order(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakingExpectation {
    Surging,
    NoBreaking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakingConfig {
    pub expect: BreakingExpectation,
    #[serde(default = "default_multiple")]
    pub slope_multiple: f64,
    #[serde(default = "default_guard")]
    pub amp_guard: f64,
    /// Grid sizes for the refinement gate (each also run at half the step).
    #[serde(default)]
    pub refine_n: Vec<usize>,
}

fn default_multiple() -> f64 {
    20.0
}
fn default_guard() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub study: StudyKind,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Also write trajectory snapshots (CSV and binary) per member.
    #[serde(default)]
    pub snapshots: bool,
    pub model: ModelConfig,
    pub bathymetry: BathymetryProfile,
    pub regime: RegimeConfig,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub initial: InitialData,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breaking: Option<BreakingConfig>,
    /// Fixed comparison time of the model-error study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_time: Option<f64>,
}

/// Edge ratio the initial data must meet, and the margin kept between the
/// travelled pulse and the right edge, in pulse widths.
const EDGE_TOL: f64 = 1e-8;
const TRAVEL_MARGIN: f64 = 6.0;

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Grid<f64>, ConfigError> {
        Grid::new(self.grid.n, self.grid.half_length).map_err(|e| invalid("grid", e.to_string()))
    }

    /// Checks everything that can be checked without running a solver.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = self.grid()?;
        if self.regime.members.is_empty() {
            return Err(invalid("regime.members", "at least one member is required"));
        }
        for (i, m) in self.regime.members.iter().enumerate() {
            m.validate().map_err(|e| invalid(format!("regime.members[{i}]"), e.to_string()))?;
            if m.eps > 1.0 {
                return Err(invalid(format!("regime.members[{i}].eps"), format!("{} exceeds 1", m.eps)));
            }
        }
        let family =
            RegimeFamily { members: self.regime.members.clone(), regime_tag: self.regime.tag, bound_constant: self.regime.bound };
        let diag = check_regime(&family).map_err(|e| invalid("regime", e.to_string()))?;
        if let Some(bad) = diag.relations.iter().find(|r| !r.pass) {
            return Err(invalid(
                "regime.members",
                format!("{} reaches {:.3e} above the bound {}", bad.relation, bad.worst_ratio, self.regime.bound),
            ));
        }
        self.bathymetry.validate().map_err(|e| invalid("bathymetry", e.to_string()))?;
        self.validate_model()?;
        self.validate_time()?;
        self.validate_study()?;
        self.validate_decay(&grid)
    }

    fn validate_model(&self) -> Result<(), ConfigError> {
        if let Some(cc) = self.model.coeffs()? {
            if !cc.linearly_well_posed() {
                return Err(invalid("model", format!("B = {} > 0 gives an ill-posed linear problem", cc.b)));
            }
            if !cc.regularized() {
                return Err(invalid(
                    "model",
                    "B = 0 has no regularising operator; the CH solver needs B < 0 (use a KdV model instead)",
                ));
            }
        }
        let v = self.model.reconstruction();
        if v.zeta_from_u() == self.model.evolves_elevation() {
            return Err(invalid("model.reconstruction", format!("{v:?} starts from the wrong unknown")));
        }
        Ok(())
    }

    fn validate_time(&self) -> Result<(), ConfigError> {
        let positive = match self.time.dt {
            DtRule::Fixed(v) | DtRule::StabilityFraction(v) | DtRule::DxFraction(v) => v > 0.0 && v.is_finite(),
        };
        if !positive {
            return Err(invalid("time.dt", "must be positive"));
        }
        if let DtRule::StabilityFraction(v) = self.time.dt {
            if v > 1.0 {
                return Err(invalid("time.dt", "a stability fraction above 1 is unstable"));
            }
        }
        if !(self.time.horizon > 0.0) {
            return Err(invalid("time.horizon", "must be positive"));
        }
        if self.time.samples == 0 {
            return Err(invalid("time.samples", "must be at least 1"));
        }
        Ok(())
    }

    fn validate_study(&self) -> Result<(), ConfigError> {
        let kind = self.model.kind;
        let need_family = |n: usize| {
            if self.regime.members.len() < n {
                Err(invalid("regime.members", format!("this study fits an order and needs at least {n} members")))
            } else {
                Ok(())
            }
        };
        match self.study {
            StudyKind::Consistency => need_family(3)?,
            StudyKind::ModelError => {
                need_family(3)?;
                if kind != ModelKind::KdvElevation {
                    return Err(invalid("model.kind", "the model-error study compares kdv_elevation with Boussinesq"));
                }
            }
            StudyKind::Breaking => {
                if kind != ModelKind::Breaking {
                    return Err(invalid("model.kind", "the breaking study evolves the breaking model"));
                }
                if self.breaking.is_none() {
                    return Err(invalid("breaking", "section required for the breaking study"));
                }
            }
            StudyKind::Soliton => {
                if kind != ModelKind::KdvVelocity || !self.bathymetry.is_flat() {
                    return Err(invalid("model.kind", "the soliton study needs kdv_velocity over a flat bottom"));
                }
                let InitialData::Sech2 { amplitude, width, .. } = self.initial else {
                    return Err(invalid("initial", "the soliton study starts from sech2 data"));
                };
                for (i, m) in self.regime.members.iter().enumerate() {
                    let w = crate::studies::soliton_width(amplitude, m.eps, m.mu);
                    if !((width - w).abs() <= 1e-6 * w) {
                        return Err(invalid(
                            "initial.width",
                            format!("member {i} needs the soliton width {w:.12} for amplitude {amplitude}"),
                        ));
                    }
                }
            }
            StudyKind::Convergence => {}
        }
        Ok(())
    }

    fn validate_decay(&self, grid: &Grid<f64>) -> Result<(), ConfigError> {
        let (front, width) = match self.initial {
            InitialData::Gaussian { center, width, .. } | InitialData::Sech2 { center, width, .. } => (center, width),
            InitialData::RandomBumps { spread, width, .. } => (spread, width),
        };
        if !(width > 0.0) {
            return Err(invalid("initial.width", "must be positive"));
        }
        // The breaking model has no left-anchored integral and its runs are
        // periodic by design, so it is exempt from both checks.
        if self.study == StudyKind::Breaking {
            return Ok(());
        }
        let z = crate::studies::initial_field(grid, &self.initial, self.seed);
        let edge = grid.edge_ratio(&z);
        if edge > EDGE_TOL {
            return Err(invalid("initial", format!("data does not decay in the box (edge ratio {edge:.2e})")));
        }
        // Pulses travel at speed about 1 for horizon/eps.
        {
            let eps_min = self.regime.members.iter().map(|m| m.eps).fold(f64::MAX, f64::min);
            let reach = front + 1.1 * self.time.horizon / eps_min + TRAVEL_MARGIN * width;
            if reach > self.grid.half_length {
                return Err(invalid(
                    "grid.half_length",
                    format!("the pulse reaches x = {reach:.1} before the horizon; enlarge the box"),
                ));
            }
        }
        Ok(())
    }
}
