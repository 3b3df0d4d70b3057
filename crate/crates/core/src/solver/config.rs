use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relaxation rule for the Kaczmarz sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Loping Landweber-Kaczmarz, `αₖ ≡ 1`.
    #[serde(rename = "llk")]
    Landweber,
    /// Loping steepest-descent Kaczmarz, `αₖ = ‖sₖ‖² / ‖F sₖ‖²`.
    #[serde(rename = "lsdk")]
    SteepestDescent,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Landweber => "llk",
            Method::SteepestDescent => "lsdk",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "llk" => Ok(Method::Landweber),
            "lsdk" => Ok(Method::SteepestDescent),
            other => Err(Error::Config(format!("unknown method {other:?} (expected llk or lsdk)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceVerbosity {
    /// Record every step.
    #[default]
    Steps,
    /// Record only the stopping information.
    Quiet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: Method,
    /// Loping threshold factor; must exceed 2.
    pub tau: f64,
    pub max_cycles: usize,
    /// When positive, a cycle also counts as stationary if every iterate in it
    /// stays within this distance of the cycle's first iterate.
    pub stop_tolerance: f64,
    /// Exact-data halt: max residual in a cycle at or below this fraction of
    /// the initial max residual (used only when every `δᵢ = 0`).
    pub exact_data_tolerance: f64,
    /// Replaces `αₖ` on non-loped steps.
    pub step_override: Option<f64>,
    pub verbosity: TraceVerbosity,
}

pub const DEFAULT_TAU: f64 = 2.1;
pub const DEFAULT_MAX_CYCLES: usize = 10_000;
pub const DEFAULT_EXACT_DATA_TOLERANCE: f64 = 1e-10;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::SteepestDescent,
            tau: DEFAULT_TAU,
            max_cycles: DEFAULT_MAX_CYCLES,
            stop_tolerance: 0.0,
            exact_data_tolerance: DEFAULT_EXACT_DATA_TOLERANCE,
            step_override: None,
            verbosity: TraceVerbosity::Steps,
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 2.0) || !self.tau.is_finite() {
            return Err(Error::Config(format!("tau must be finite and > 2, got {}", self.tau)));
        }
        if self.max_cycles == 0 {
            return Err(Error::Config("max_cycles must be at least 1".into()));
        }
        if !(self.stop_tolerance >= 0.0) {
            return Err(Error::Config("stop_tolerance must be nonnegative".into()));
        }
        if !(self.exact_data_tolerance >= 0.0) {
            return Err(Error::Config("exact_data_tolerance must be nonnegative".into()));
        }
        if let Some(a) = self.step_override {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("step override must be positive, got {a}")));
            }
        }
        Ok(())
    }
}
