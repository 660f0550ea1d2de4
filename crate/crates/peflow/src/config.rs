//! Run configuration: JSON schema, validation, default materialisation and
//! the configuration hash embedded in every artifact.

use std::path::Path;

use peflow_core::{
    quantize, DiscreteMeasure, InitialVelocity, MeasureSpec, Model, Potential, SolverOptions, TabulatedPotential,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Rho0Config {
    Atoms { x: Vec<f64>, m: Vec<f64> },
    Uniform { a: f64, b: f64, n: usize },
    Gaussian { mean: f64, std_dev: f64, n: usize },
    TabulatedCdf { x: Vec<f64>, cdf: Vec<f64>, n: usize },
}

impl Rho0Config {
    pub fn spec(&self) -> Result<(MeasureSpec, usize), CliError> {
        Ok(match self {
            Rho0Config::Atoms { x, m } => {
                let atoms = DiscreteMeasure::from_atoms(x.clone(), m.clone())?;
                let n = atoms.len();
                (MeasureSpec::Atoms(atoms), n)
            }
            Rho0Config::Uniform { a, b, n } => (MeasureSpec::Uniform { a: *a, b: *b }, *n),
            Rho0Config::Gaussian { mean, std_dev, n } => {
                (MeasureSpec::Gaussian { mean: *mean, std_dev: *std_dev }, *n)
            }
            Rho0Config::TabulatedCdf { x, cdf, n } => {
                (MeasureSpec::TabulatedCdf { x: x.clone(), cdf: cdf.clone() }, *n)
            }
        })
    }

    /// The quantised initial measure with the configured atom count.
    pub fn measure(&self) -> Result<DiscreteMeasure, CliError> {
        let (spec, n) = self.spec()?;
        Ok(quantize(&spec, n)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolantV0 {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantV0 {
    pub constant: f64,
}

/// `{"breakpoints": [...], "values": [...]}` or `{"constant": c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum V0Config {
    Interpolant(InterpolantV0),
    Constant(ConstantV0),
}

impl V0Config {
    pub fn velocity(&self) -> Result<InitialVelocity, CliError> {
        Ok(match self {
            V0Config::Interpolant(v) => InitialVelocity::interpolating(&v.breakpoints, &v.values)?,
            V0Config::Constant(c) => InitialVelocity::constant(c.constant)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    #[default]
    Zero,
    Quadratic {
        curvature: f64,
    },
    SmoothAbs {
        epsilon: f64,
    },
    Custom {
        nodes: Vec<f64>,
        w: Vec<f64>,
        w_prime: Vec<f64>,
        semiconvexity: f64,
    },
}

impl PotentialConfig {
    pub fn potential(&self) -> Result<Potential, CliError> {
        Ok(match self {
            PotentialConfig::Zero => Potential::zero(),
            PotentialConfig::Quadratic { curvature } => Potential::quadratic(*curvature)?,
            PotentialConfig::SmoothAbs { epsilon } => Potential::smooth_abs(*epsilon)?,
            PotentialConfig::Custom { nodes, w, w_prime, semiconvexity } => {
                let table = TabulatedPotential::new(nodes.clone(), w.clone(), w_prime.clone())?;
                Potential::custom(table, *semiconvexity)?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelConfig {
    #[default]
    PressurelessEuler,
    EulerPoisson,
}

impl From<ModelConfig> for Model {
    fn from(m: ModelConfig) -> Self {
        match m {
            ModelConfig::PressurelessEuler => Model::PressurelessEuler,
            ModelConfig::EulerPoisson => Model::EulerPoisson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Simulate,
    Verify,
    ConvergeN,
    ConvergeEps,
    Ep,
}

fn default_dt() -> f64 {
    1e-3
}
fn default_max_steps() -> usize {
    10_000_000
}
fn default_intervals() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_dt")]
    pub dt_init: f64,
    #[serde(default)]
    pub gap_tol: Option<f64>,
    #[serde(default)]
    pub t_tol: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Uniform snapshots `k T / output_intervals`; `0` disables them.
    #[serde(default = "default_intervals")]
    pub output_intervals: usize,
    /// Extra snapshot times.
    #[serde(default)]
    pub output_times: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt_init: default_dt(),
            gap_tol: None,
            t_tol: None,
            max_steps: default_max_steps(),
            output_intervals: default_intervals(),
            output_times: Vec::new(),
        }
    }
}

fn default_schedule_n() -> Vec<usize> {
    vec![4, 8, 16, 32, 64]
}
fn default_eps_exponents() -> Vec<u32> {
    (0..=10).collect()
}
fn default_final_tol() -> f64 {
    1e-3
}
fn default_monotone_tol() -> f64 {
    1e-6
}
fn default_w2_monotone_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    #[serde(default = "default_schedule_n")]
    pub schedule_n: Vec<usize>,
    /// Defaults to `max(256, 2 max(schedule_n))`.
    #[serde(default)]
    pub reference_n: Option<usize>,
    /// `ε_k = 2^{-k}` for each listed `k`.
    #[serde(default = "default_eps_exponents")]
    pub eps_exponents: Vec<u32>,
    #[serde(default = "default_final_tol")]
    pub eps_final_tol: f64,
    #[serde(default = "default_monotone_tol")]
    pub eps_monotone_tol: f64,
    #[serde(default = "default_w2_monotone_tol")]
    pub w2_monotone_tol: f64,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            schedule_n: default_schedule_n(),
            reference_n: None,
            eps_exponents: default_eps_exponents(),
            eps_final_tol: default_final_tol(),
            eps_monotone_tol: default_monotone_tol(),
            w2_monotone_tol: default_w2_monotone_tol(),
        }
    }
}

impl ConvergeConfig {
    pub fn reference_for(&self, schedule: &[usize]) -> usize {
        self.reference_n.unwrap_or_else(|| 256.max(2 * schedule.iter().copied().max().unwrap_or(0)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub rho0: Rho0Config,
    pub v0: V0Config,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub horizon: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub converge: ConvergeConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.materialize()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Validates every section and fills in derived defaults so the
    /// persisted copy reproduces the run on its own.
    pub fn materialize(mut self) -> Result<Self, CliError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(CliError::Config(format!("horizon must be positive and finite, got {}", self.horizon)));
        }
        let rho0 = self.rho0.measure()?;
        self.v0.velocity()?;
        self.potential.potential()?;
        let tol = self.solver_options().tolerances(&rho0, self.horizon);
        self.solver.gap_tol.get_or_insert(tol.gap_tol);
        self.solver.t_tol.get_or_insert(tol.t_tol);
        let opts = self.solver_options();
        opts.output_grid(self.horizon)?;
        if !(opts.dt_init.is_finite() && opts.dt_init > 0.0) {
            return Err(CliError::Config(format!("dt_init must be positive, got {}", opts.dt_init)));
        }
        Ok(self)
    }

    pub fn solver_options(&self) -> SolverOptions {
        let s = &self.solver;
        let mut output_times = s.output_times.clone();
        if s.output_intervals > 0 {
            let n = s.output_intervals;
            output_times.extend((1..n).map(|k| k as f64 * self.horizon / n as f64));
        }
        SolverOptions { dt_init: s.dt_init, gap_tol: s.gap_tol, t_tol: s.t_tol, output_times, max_steps: s.max_steps }
    }

    /// SHA-256 of the canonical JSON of the physics sections (everything
    /// except `mode` and `converge`).
    pub fn hash(&self) -> String {
        let physics = serde_json::json!({
            "rho0": self.rho0,
            "v0": self.v0,
            "potential": self.potential,
            "horizon": self.horizon,
            "solver": self.solver,
            "model": self.model,
        });
        let digest = Sha256::digest(physics.to_string().as_bytes());
        format!("{digest:x}")
    }

    /// Pretty JSON with sorted keys.
    pub fn to_pretty_json(&self) -> String {
        let value = serde_json::to_value(self).expect("configuration serialises");
        serde_json::to_string_pretty(&value).expect("JSON value serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FREE: &str = r#"{
        "rho0": {"kind": "atoms", "x": [0, 1], "m": [0.5, 0.5]},
        "v0": {"breakpoints": [0, 1], "values": [1, -1]},
        "horizon": 1
    }"#;

    #[test]
    fn defaults_are_materialised() {
        let cfg = RunConfig::from_json(FREE).unwrap();
        assert_eq!(cfg.solver.gap_tol, Some(1e-9));
        assert_eq!(cfg.solver.t_tol, Some(1e-10));
        assert_eq!(cfg.converge.reference_for(&cfg.converge.schedule_n), 256);
        assert_eq!(cfg.potential, PotentialConfig::Zero);
        let again = RunConfig::from_json(&cfg.to_pretty_json()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = FREE.replace("\"horizon\"", "\"horizn\": 2, \"horizon\"");
        assert!(matches!(RunConfig::from_json(&bad), Err(CliError::Config(_))));
        let bad = FREE.replace("\"m\":", "\"mass\": [1], \"m\":");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn bad_masses_rejected() {
        let bad = FREE.replace("[0.5, 0.5]", "[0.5, 0.6]");
        assert!(matches!(RunConfig::from_json(&bad), Err(CliError::Core(_))));
    }

    #[test]
    fn hash_ignores_mode_only() {
        let cfg = RunConfig::from_json(FREE).unwrap();
        let mut other = cfg.clone();
        other.mode = Mode::Verify;
        assert_eq!(cfg.hash(), other.hash());
        other.horizon = 2.0;
        assert_ne!(cfg.hash(), other.hash());
    }
}
