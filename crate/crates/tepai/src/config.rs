//! Run configuration: a JSON document plus command-line overrides.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tepai_core::analytics::q_tradeoff;
use tepai_core::hamiltonian::{build_spin_ring, parse_term_file};
use tepai_core::simulator::{NoiseModel, DEFAULT_STATEVECTOR_LIMIT};
use tepai_core::{Hamiltonian, InitialState, PauliString};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    SpinRing { n: usize, seed: u64 },
    TermFile { path: PathBuf },
}

/// An angle given as radians or as text such as `"pi/128"` or `"3*pi/4"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Radians(f64),
    Text(String),
}

impl AngleSpec {
    pub fn radians(&self) -> Result<f64, String> {
        match self {
            AngleSpec::Radians(x) => Ok(*x),
            AngleSpec::Text(s) => parse_angle(s),
        }
    }
}

/// `[a*]pi[/b]` or a plain number.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read angle `{text}` (use radians or e.g. \"pi/128\")");
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, Some(b.parse::<f64>().map_err(|_| bad())?)),
        None => (t.as_str(), None),
    };
    let coeff = if num == "pi" {
        1.0
    } else if let Some(a) = num.strip_suffix("*pi") {
        a.parse::<f64>().map_err(|_| bad())?
    } else {
        return Err(bad());
    };
    Ok(coeff * PI / den.unwrap_or(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    SampledShot,
    PerCircuitExpectation,
}

impl From<Mode> for tepai_core::simulator::EstimatorMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::SampledShot => Self::SampledShot,
            Mode::PerCircuitExpectation => Self::PerCircuitExpectation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    #[default]
    Tepai,
    Qdrift,
    Trotter,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub p1: f64,
    #[serde(default)]
    pub p2: f64,
    #[serde(default)]
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub times: Vec<f64>,
    /// Continuous-angle Trotter references to run at each time.
    #[serde(default)]
    pub reference_steps: Vec<usize>,
    /// Apply the run's noise model to the references too.
    #[serde(default = "yes")]
    pub noisy_reference: bool,
    /// Add the exact oracle column (n <= 12).
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "T")]
    Time,
    #[serde(rename = "delta")]
    Delta,
    N,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<AngleSpec>,
    /// Monte Carlo circuit draws per row for the empirical columns.
    #[serde(default)]
    pub draws: u64,
}

fn yes() -> bool {
    true
}

fn default_state() -> String {
    "plus_all".into()
}

fn default_precision() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(rename = "T")]
    pub time: f64,
    #[serde(rename = "N")]
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<AngleSpec>,
    #[serde(default, rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default)]
    pub shots: u64,
    pub observable: String,
    #[serde(default = "default_state")]
    pub initial_state: String,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub protocol: ProtocolKind,
    /// Target precision for the reported shot bound.
    #[serde(default = "default_precision")]
    pub precision: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Not echoed into outputs so results are independent of it.
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub log_gates: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statevector_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &str) -> AppResult<Self> {
        serde_json::from_str(text).map_err(|e| AppError::Format {
            path: origin.into(),
            message: e.to_string(),
        })
    }

    /// Reads a config; relative term-file paths resolve against its directory.
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut cfg = Self::from_json(&text, &path.display().to_string())?;
        if let ModelConfig::TermFile { path: p } = &mut cfg.model {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn noise_model(&self) -> AppResult<NoiseModel> {
        if !self.noise.enabled {
            return Ok(NoiseModel::disabled());
        }
        NoiseModel::new(self.noise.p1, self.noise.p2).map_err(|e| AppError::validation("noise", e.to_string()))
    }
}

pub fn load_term_file(path: &Path) -> AppResult<Hamiltonian> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_term_file(&text, &label).map_err(|e| AppError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn build_model(model: &ModelConfig) -> AppResult<Hamiltonian> {
    match model {
        ModelConfig::SpinRing { n, seed } => {
            build_spin_ring(*n, *seed).map_err(|e| AppError::validation("model.n", e.to_string()))
        }
        ModelConfig::TermFile { path } => {
            if !path.exists() {
                return Err(AppError::validation(
                    "model.path",
                    format!("term file {} does not exist", path.display()),
                ));
            }
            load_term_file(path)
        }
    }
}

/// A validated configuration with its Hamiltonian built.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub hamiltonian: Hamiltonian,
    pub observable: PauliString,
    pub initial: InitialState,
    pub noise: NoiseModel,
    /// `||c||_1avg` over `[0, T]`; `None` when `T = 0`.
    pub c_norm_avg: Option<f64>,
    /// Required for the angle-interpolation protocol.
    pub delta: Option<f64>,
    pub statevector_limit: usize,
}

impl Prepared {
    pub fn new(config: RunConfig) -> AppResult<Self> {
        fn v(field: &str, message: impl Into<String>) -> AppError {
            AppError::validation(field, message)
        }
        if !(config.time >= 0.0) || !config.time.is_finite() {
            return Err(v("T", "must be finite and non-negative"));
        }
        if config.steps == 0 {
            return Err(v("N", "must be at least 1"));
        }
        if !(config.precision > 0.0) {
            return Err(v("precision", "must be positive"));
        }
        if config.workers == Some(0) {
            return Err(v("workers", "must be at least 1"));
        }
        let hamiltonian = build_model(&config.model)?;
        let n = hamiltonian.n_qubits();
        let observable = PauliString::parse(&config.observable, n).map_err(|e| v("observable", e.to_string()))?;
        let initial: InitialState = config
            .initial_state
            .parse()
            .map_err(|e: tepai_core::Error| v("initial_state", e.to_string()))?;
        if let InitialState::Bits(b) = &initial {
            if b.len() != n {
                return Err(v(
                    "initial_state",
                    format!("bitstring has {} characters for {n} qubits", b.len()),
                ));
            }
        }
        let noise = config.noise_model()?;
        let c_norm_avg = if config.time > 0.0 {
            Some(hamiltonian.l1_norm_avg(config.time)?)
        } else {
            None
        };
        let delta = match (&config.delta, config.q) {
            (Some(_), Some(_)) => return Err(v("delta", "set either delta or Q, not both")),
            (Some(d), None) => {
                let d = d.radians().map_err(|m| v("delta", m))?;
                if !(d > 0.0 && d < PI) {
                    return Err(v("delta", format!("{d} must lie in (0, pi)")));
                }
                Some(d)
            }
            (None, Some(q)) => {
                let ct = c_norm_avg.ok_or_else(|| v("Q", "needs T > 0"))? * config.time;
                Some(q_tradeoff(ct, q).map_err(|e| v("Q", e.to_string()))?.delta)
            }
            (None, None) => None,
        };
        if config.protocol == ProtocolKind::Tepai && delta.is_none() {
            return Err(v("delta", "one of delta or Q is required"));
        }
        if config.protocol == ProtocolKind::Qdrift && !hamiltonian.is_time_independent() {
            return Err(v("protocol", "qdrift needs a time-independent Hamiltonian"));
        }
        if let Some(t) = &config.trajectory {
            if t.times.windows(2).any(|w| !(w[1] > w[0])) || t.times.iter().any(|x| !(*x >= 0.0)) {
                return Err(v("trajectory.times", "must be non-negative and strictly increasing"));
            }
            if t.reference_steps.contains(&0) {
                return Err(v("trajectory.reference_steps", "entries must be at least 1"));
            }
        }
        let statevector_limit = config.statevector_limit.unwrap_or(DEFAULT_STATEVECTOR_LIMIT);
        Ok(Prepared {
            config,
            hamiltonian,
            observable,
            initial,
            noise,
            c_norm_avg,
            delta,
            statevector_limit,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }
}
