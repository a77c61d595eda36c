//! Run configuration, read from a JSON document with `model`, `engine`,
//! `protocol` and `output` sections. Everything except `model` may be
//! omitted; [`RunConfig::materialize`] fills in the defaults so that the
//! manifest records the values actually used.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::meanfield::{ClassicalState, FINE_TUNED_PRESET};
use crate::model::{ModelParams, DEFAULT_DIMENSION_CAP};
use crate::ode::Tolerances;
use crate::propagator::DEFAULT_CHEBYSHEV_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Quantum,
    Meanfield,
    #[serde(alias = "meanfield_linear")]
    Linear,
    Geomphase,
}

impl Engine {
    /// Averaging window in drive periods used when none is configured.
    pub fn default_periods(self) -> f64 {
        match self {
            Engine::Geomphase => 10.0,
            _ => 150.0,
        }
    }

    pub fn default_initial(self) -> InitialState {
        match self {
            Engine::Geomphase => InitialState::Exact,
            _ => InitialState::Meanfield,
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = DickeError;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| DickeError::InvalidParameter(format!("unknown engine '{s}'")))
    }
}

/// Where a quench starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Mean-field ground state of the undriven model (a coherent state for
    /// the quantum engines).
    Meanfield,
    /// Exact ground state of the undriven Hamiltonian.
    Exact,
    /// The fine-tuned start that darkens the cavity at λ ≈ 0.823.
    Preset,
    /// Explicit classical coordinates.
    Classical { spin_q: f64, spin_p: f64, field_q: f64, field_p: f64 },
}

impl InitialState {
    /// Classical coordinates for the explicit choices, `None` for the
    /// ground states.
    pub fn classical(&self) -> Option<ClassicalState> {
        match *self {
            InitialState::Preset => Some(FINE_TUNED_PRESET),
            InitialState::Classical { spin_q, spin_p, field_q, field_p } => {
                Some(ClassicalState::new(spin_q, spin_p, field_q, field_p))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub kind: Engine,
    /// `None` selects the engine default.
    pub initial: Option<InitialState>,
    /// Pick the broken-symmetry start with Q(0) < 0.
    pub lower_branch: bool,
    pub chebyshev_tol: f64,
    pub steps_per_period: u32,
    pub dimension_cap: usize,
    pub rtol: f64,
    pub atol: f64,
    /// Drop the geometric phases in the phase-resolved engine.
    pub zero_geometric: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            kind: Engine::Meanfield,
            initial: None,
            lower_branch: false,
            chebyshev_tol: DEFAULT_CHEBYSHEV_TOL,
            steps_per_period: 1000,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            rtol: 1e-10,
            atol: 1e-12,
            zero_geometric: false,
        }
    }
}

impl EngineConfig {
    pub fn of(kind: Engine) -> Self {
        EngineConfig { kind, ..Default::default() }
    }

    pub fn initial_state(&self) -> InitialState {
        self.initial.unwrap_or_else(|| self.kind.default_initial())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances { rtol: self.rtol, atol: self.atol, ..Tolerances::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.chebyshev_tol > 0.0) || !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(DickeError::InvalidParameter("tolerances must be positive".into()));
        }
        if self.steps_per_period == 0 {
            return Err(DickeError::InvalidParameter("steps_per_period must be positive".into()));
        }
        Ok(())
    }
}

/// Evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        let g = Grid { start, stop, count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(DickeError::InvalidParameter(format!(
                "grid needs finite bounds and at least 2 points, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count - 1;
        (0..self.count).map(|i| self.start + (self.stop - self.start) * i as f64 / n as f64).collect()
    }

    pub fn spacing(&self) -> f64 {
        (self.stop - self.start).abs() / (self.count - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub lambda: Option<Grid>,
    pub delta_phi: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalLineConfig {
    pub delta_phi: Grid,
    /// λ is scanned on (λ_c(δφ), λ_c(δφ) + lambda_span] in steps of `lambda_step`.
    pub lambda_step: f64,
    pub lambda_span: f64,
}

impl Default for CriticalLineConfig {
    fn default() -> Self {
        CriticalLineConfig { delta_phi: Grid { start: 0.2, stop: 2.0, count: 10 }, lambda_step: 0.005, lambda_span: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MexHatConfig {
    pub mass: f64,
    pub quadratic: f64,
    pub quartic: f64,
    /// Depth for single-trajectory runs.
    pub depth: f64,
    /// Number of depths in a sweep, evenly spaced in (0, k²/4g].
    pub points: usize,
    pub half_periods: u32,
    pub samples_per_half_period: u32,
}

impl Default for MexHatConfig {
    fn default() -> Self {
        MexHatConfig {
            mass: 1.0,
            quadratic: 3.0,
            quartic: 4.0,
            depth: 0.3,
            points: 50,
            half_periods: 8,
            samples_per_half_period: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourConfig {
    /// Q ranges over [−spin_span, spin_span], clipped to |Q| ≤ 2.
    pub spin_span: f64,
    pub field_span: f64,
    pub points: usize,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig { spin_span: 2.0, field_span: 3.0, points: 101 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Run length and averaging window in drive periods; `None` selects
    /// the engine default.
    pub periods: Option<f64>,
    pub samples_per_period: u32,
    pub scan: ScanConfig,
    pub critical_line: CriticalLineConfig,
    pub mexhat: MexHatConfig,
    pub contours: ContourConfig,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            periods: None,
            samples_per_period: 100,
            scan: ScanConfig::default(),
            critical_line: CriticalLineConfig::default(),
            mexhat: MexHatConfig::default(),
            contours: ContourConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// File stem; defaults to the subcommand name.
    pub stem: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("output"), stem: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn new(model: ModelParams) -> Self {
        RunConfig {
            model,
            engine: EngineConfig::default(),
            protocol: ProtocolConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.engine.validate()?;
        if let Some(t) = self.protocol.periods {
            if !(t >= 1.0) {
                return Err(DickeError::InvalidParameter(format!("periods must be >= 1, got {t}")));
            }
        }
        if self.protocol.samples_per_period == 0 {
            return Err(DickeError::InvalidParameter("samples_per_period must be positive".into()));
        }
        for g in [self.protocol.scan.lambda, self.protocol.scan.delta_phi].into_iter().flatten() {
            g.validate()?;
        }
        Ok(())
    }

    pub fn periods(&self) -> f64 {
        self.protocol.periods.unwrap_or_else(|| self.engine.kind.default_periods())
    }

    /// Copy with every engine- and protocol-dependent default resolved.
    pub fn materialize(&self) -> RunConfig {
        let mut out = self.clone();
        out.engine.initial = Some(self.engine.initial_state());
        out.protocol.periods = Some(self.periods());
        out
    }
}
