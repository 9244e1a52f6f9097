use std::path::Path;

use lie_poisson_core::dynamics::{IntegratorConfig, Scheme};
use lie_poisson_core::reduction::ReductionOp;
use lie_poisson_core::Matrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    TodaRun,
    LvnRun,
    ReduceDemo,
    OrbitKks,
}

/// Top-level run description. `params` is interpreted per command.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    #[serde(default)]
    pub params: Value,
    pub integrator: Option<IntegratorConfig>,
    pub output_path: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default = "default_toda_dim")]
    pub toda_dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TodaFlow {
    Canonical,
    Lax,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TodaParams {
    #[serde(default = "default_toda_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_flows")]
    pub flows: Vec<TodaFlow>,
    #[serde(default = "default_drift_tol")]
    pub drift_tol: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LvnParams {
    #[serde(default = "default_lvn_dims")]
    pub dims: Vec<usize>,
    /// Strength `c` of the state-dependent term in `DH = -i (H + c B rho B)`.
    #[serde(default)]
    pub coupling: f64,
    #[serde(default = "default_drift_tol")]
    pub drift_tol: f64,
    #[serde(default = "default_spectrum_tol")]
    pub spectrum_tol: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceParams {
    #[serde(rename = "N", default = "default_small_dim")]
    pub n: usize,
    pub state: Option<Matrix>,
    pub reductions: Option<Vec<ReductionOp>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitParams {
    #[serde(rename = "N", default = "default_small_dim")]
    pub n: usize,
    #[serde(default = "default_kks_samples")]
    pub samples: usize,
    pub state: Option<Matrix>,
}

fn default_samples() -> usize {
    100
}
fn default_max_dim() -> usize {
    6
}
fn default_toda_dim() -> usize {
    8
}
fn default_toda_dims() -> Vec<usize> {
    vec![8]
}
fn default_flows() -> Vec<TodaFlow> {
    vec![TodaFlow::Canonical, TodaFlow::Lax]
}
fn default_lvn_dims() -> Vec<usize> {
    vec![6]
}
fn default_drift_tol() -> f64 {
    1e-8
}
fn default_spectrum_tol() -> f64 {
    1e-11
}
fn default_small_dim() -> usize {
    4
}
fn default_kks_samples() -> usize {
    20
}

/// Validated, command-specific configuration.
#[derive(Clone, Debug)]
pub enum Plan {
    Verify(VerifyParams, IntegratorConfig),
    Toda(TodaParams, IntegratorConfig),
    Lvn(LvnParams, IntegratorConfig),
    Reduce(ReduceParams),
    Orbit(OrbitParams),
}

fn params<T: DeserializeOwned>(v: &Value) -> Result<T, ConfigError> {
    let v = if v.is_null() { Value::Object(Default::default()) } else { v.clone() };
    Ok(serde_json::from_value(v)?)
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn check_dims(dims: &[usize], lo: usize) -> Result<(), ConfigError> {
    if dims.is_empty() {
        return Err(invalid("dims must not be empty"));
    }
    if let Some(d) = dims.iter().find(|&&d| d < lo || d > 64) {
        return Err(invalid(format!("dimension {d} outside {lo}..=64")));
    }
    Ok(())
}

fn integrator(cfg: &RunConfig, default: IntegratorConfig) -> Result<IntegratorConfig, ConfigError> {
    let ic = cfg.integrator.unwrap_or(default);
    ic.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(ic)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Schema and range validation; nothing is computed or written before this passes.
    pub fn plan(&self) -> Result<Plan, ConfigError> {
        if self.output_path.trim().is_empty() {
            return Err(invalid("output_path must not be empty"));
        }
        let rk4 = IntegratorConfig { scheme: Scheme::Rk4, dt: 1e-3, t_end: 10.0, record_stride: 100 };
        match self.command {
            Command::Verify => {
                let p: VerifyParams = params(&self.params)?;
                if p.samples == 0 {
                    return Err(invalid("samples must be positive"));
                }
                check_dims(&[p.max_dim, p.toda_dim], 2)?;
                Ok(Plan::Verify(p, integrator(self, rk4)?))
            }
            Command::TodaRun => {
                let p: TodaParams = params(&self.params)?;
                check_dims(&p.dims, 2)?;
                if p.flows.is_empty() {
                    return Err(invalid("flows must not be empty"));
                }
                let ic = integrator(self, rk4)?;
                if ic.scheme != Scheme::Rk4 {
                    return Err(invalid("toda-run supports only the rk4 scheme"));
                }
                Ok(Plan::Toda(p, ic))
            }
            Command::LvnRun => {
                let p: LvnParams = params(&self.params)?;
                check_dims(&p.dims, 1)?;
                if !p.coupling.is_finite() {
                    return Err(invalid("coupling must be finite"));
                }
                Ok(Plan::Lvn(p, integrator(self, rk4)?))
            }
            Command::ReduceDemo => {
                let p: ReduceParams = params(&self.params)?;
                let n = p.state.as_ref().map_or(p.n, Matrix::dim);
                check_dims(&[n], 1)?;
                if let Some(ops) = &p.reductions {
                    if let Some(op) = ops.iter().find(|op| op.dim() != n) {
                        return Err(invalid(format!("reduction of size {} does not match N = {n}", op.dim())));
                    }
                }
                Ok(Plan::Reduce(p))
            }
            Command::OrbitKks => {
                let p: OrbitParams = params(&self.params)?;
                let n = p.state.as_ref().map_or(p.n, Matrix::dim);
                check_dims(&[n], 1)?;
                if p.samples == 0 {
                    return Err(invalid("samples must be positive"));
                }
                Ok(Plan::Orbit(p))
            }
        }
    }
}
