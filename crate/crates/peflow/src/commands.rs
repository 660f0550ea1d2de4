//! The `simulate`, `ep`, `verify` and `converge` commands.

use std::fs;
use std::path::Path;

use peflow_core::diagnostics::{energy, verify, wasserstein2, CheckKind};
use peflow_core::euler_poisson::{epsilon_report, ContinuationTolerances};
use peflow_core::{
    quantize, simulate, simulate_ep, AbsPotential, DiscreteMeasure, InitialVelocity, Interaction, Model,
    Potential, SolverOptions, TrajectoryMap,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Mode, ModelConfig, RunConfig};
use crate::csv_io::{read_trajectory, write_events, write_trajectory, EVENTS_FILE, TRAJECTORY_FILE};
use crate::error::CliError;
use crate::report::{diagnostics_json, epsilon_json, pretty};

pub const CONFIG_FILE: &str = "config.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const REPORT_FILE: &str = "report.json";
pub const CONVERGE_FILE: &str = "converge.json";

/// A validated configuration with everything needed to run it.
pub struct Setup {
    pub config: RunConfig,
    pub rho0: DiscreteMeasure,
    pub v0: InitialVelocity,
    pub potential: Potential,
    pub opts: SolverOptions,
    pub hash: String,
}

impl Setup {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        let config = config.materialize()?;
        Ok(Self {
            rho0: config.rho0.measure()?,
            v0: config.v0.velocity()?,
            potential: config.potential.potential()?,
            opts: config.solver_options(),
            hash: config.hash(),
            config,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::new(RunConfig::load(path)?)
    }

    pub fn model(&self) -> Model {
        self.config.model.into()
    }

    /// `|x|` for Euler-Poisson runs, the configured potential otherwise.
    pub fn interaction(&self) -> &dyn Interaction {
        match self.model() {
            Model::EulerPoisson => &AbsPotential,
            Model::PressurelessEuler => &self.potential,
        }
    }

    pub fn run_with(&self, rho0: &DiscreteMeasure) -> Result<TrajectoryMap, CliError> {
        let horizon = self.config.horizon;
        Ok(match self.model() {
            Model::EulerPoisson => simulate_ep(rho0, &self.v0, horizon, &self.opts)?,
            Model::PressurelessEuler => simulate(rho0, &self.v0, &self.potential, horizon, &self.opts)?,
        })
    }

    pub fn run(&self) -> Result<TrajectoryMap, CliError> {
        self.run_with(&self.rho0)
    }

    pub fn initial_velocities(&self) -> Vec<f64> {
        self.rho0.positions().iter().map(|&x| self.v0.eval(x)).collect()
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Runs the configured simulation (forced to Euler-Poisson for `Mode::Ep`)
/// and writes `config.json`, `trajectory.csv`, `events.csv` and
/// `summary.json` to `out`. Returns the summary.
pub fn cmd_simulate(config: &Path, out: &Path, mode: Mode) -> Result<Value, CliError> {
    let mut cfg = RunConfig::load(config)?;
    cfg.mode = mode;
    if mode == Mode::Ep {
        cfg.model = ModelConfig::EulerPoisson;
    }
    let setup = Setup::new(cfg)?;
    let tm = setup.run()?;
    let summary = summary(&setup, &tm)?;
    create_dir(out)?;
    write(&out.join(CONFIG_FILE), &(setup.config.to_pretty_json() + "\n"))?;
    write_trajectory(&out.join(TRAJECTORY_FILE), &tm, &setup.hash)?;
    write_events(&out.join(EVENTS_FILE), &tm, &setup.hash)?;
    write(&out.join(SUMMARY_FILE), &pretty(&summary))?;
    Ok(summary)
}

fn summary(setup: &Setup, tm: &TrajectoryMap) -> Result<Value, CliError> {
    let p = setup.interaction();
    let e = energy(tm, p, tm.last_time())?;
    let grid = setup.opts.output_grid(setup.config.horizon)?;
    let clusters = grid
        .iter()
        .map(|&t| Ok(json!({"t": t, "clusters": tm.clusters_at(t)?.len()})))
        .collect::<Result<Vec<Value>, CliError>>()?;
    Ok(json!({
        "config_hash": setup.hash,
        "model": match setup.model() { Model::EulerPoisson => "euler_poisson", Model::PressurelessEuler => "pressureless_euler" },
        "interaction": p.label(),
        "atoms": tm.atom_count(),
        "merge_count": tm.events().len(),
        "event_times": tm.event_times(),
        "final_energy": {"kinetic": e.kinetic, "potential": e.potential, "total": e.total},
        "clusters_over_time": clusters,
    }))
}

/// Parses a comma-separated check list; empty entries are ignored.
pub fn parse_checks(list: &str) -> Result<Vec<CheckKind>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<CheckKind>().map_err(|e| CliError::Argument(e.to_string())))
        .collect()
}

/// Runs the selected diagnostics on a stored trajectory (`trajectory`
/// directory) or on a fresh run of the configuration. Returns the report and
/// whether every check passed.
pub fn cmd_verify(
    config: &Path,
    checks: &[CheckKind],
    trajectory: Option<&Path>,
    out: Option<&Path>,
) -> Result<(Value, bool), CliError> {
    let setup = Setup::load(config)?;
    let tm = match trajectory {
        Some(dir) => {
            let (tm, found) = read_trajectory(dir, setup.rho0.clone(), setup.initial_velocities())?;
            if found != setup.hash {
                return Err(CliError::HashMismatch { expected: setup.hash.clone(), found });
            }
            tm
        }
        None => setup.run()?,
    };
    let mut report = verify(&tm, setup.interaction(), &setup.v0, checks)?;
    report.config_hash = Some(setup.hash.clone());
    let value = diagnostics_json(&report);
    if let Some(dir) = out {
        create_dir(dir)?;
        write(&dir.join(REPORT_FILE), &pretty(&value))?;
    }
    Ok((value, report.pass()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergeMode {
    N,
    Eps,
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| CliError::Argument(format!("bad schedule entry '{x}'"))))
        .collect()
}

/// Quantisation refinement (`N`) or ε-continuation (`Eps`) study.
pub fn cmd_converge(
    config: &Path,
    mode: ConvergeMode,
    schedule: Option<&str>,
    out: Option<&Path>,
) -> Result<(Value, bool), CliError> {
    let mut cfg = RunConfig::load(config)?;
    cfg.mode = match mode {
        ConvergeMode::N => Mode::ConvergeN,
        ConvergeMode::Eps => Mode::ConvergeEps,
    };
    let setup = Setup::new(cfg)?;
    let (mut value, pass) = match mode {
        ConvergeMode::N => {
            let schedule = match schedule {
                Some(s) => parse_list(s)?,
                None => setup.config.converge.schedule_n.clone(),
            };
            converge_n(&setup, &schedule)?
        }
        ConvergeMode::Eps => {
            let exponents = match schedule {
                Some(s) => parse_list(s)?,
                None => setup.config.converge.eps_exponents.clone(),
            };
            converge_eps(&setup, &exponents)?
        }
    };
    value["config_hash"] = json!(setup.hash);
    if let Some(dir) = out {
        create_dir(dir)?;
        write(&dir.join(CONFIG_FILE), &(setup.config.to_pretty_json() + "\n"))?;
        write(&dir.join(CONVERGE_FILE), &pretty(&value))?;
    }
    Ok((value, pass))
}

/// `W₂(ρ_t^N, ρ_t^{ref})` on the output grid for each `N` in `schedule`.
pub fn converge_n(setup: &Setup, schedule: &[usize]) -> Result<(Value, bool), CliError> {
    if schedule.is_empty() || schedule.contains(&0) {
        return Err(CliError::Argument("schedule must list positive atom counts".into()));
    }
    let reference_n = setup.config.converge.reference_for(schedule);
    let (spec, _) = setup.config.rho0.spec()?;
    let times = setup.opts.output_grid(setup.config.horizon)?;
    let measures_at = |n: usize| -> Result<Vec<DiscreteMeasure>, CliError> {
        let tm = setup.run_with(&quantize(&spec, n)?)?;
        times.iter().map(|&t| Ok(tm.push_forward(t)?)).collect()
    };
    let runs: Vec<usize> = schedule.iter().copied().chain([reference_n]).collect();
    let measures = runs.par_iter().map(|&n| measures_at(n)).collect::<Result<Vec<_>, CliError>>()?;
    let (reference, members) = measures.split_last().expect("reference run present");
    let distances: Vec<Vec<f64>> = members
        .iter()
        .map(|m| m.iter().zip(reference).map(|(a, b)| wasserstein2(a, b)).collect())
        .collect();
    let tol = setup.config.converge.w2_monotone_tol;
    let worst_increase = distances
        .windows(2)
        .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| b - a))
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_increase = if distances.len() < 2 { 0.0 } else { worst_increase };
    let pass = worst_increase <= tol;
    let final_distances: Vec<f64> = distances.iter().map(|d| *d.last().expect("grid has T")).collect();
    Ok((
        json!({
            "mode": "n",
            "schedule": schedule,
            "reference_n": reference_n,
            "times": times,
            "distances": distances,
            "final_distances": final_distances,
            "worst_increase": worst_increase,
            "monotone_tol": tol,
            "pass": pass,
        }),
        pass,
    ))
}

/// ε-continuation: `W_ε` runs for `ε = 2^{-k}` against the exact
/// Euler-Poisson run.
pub fn converge_eps(setup: &Setup, exponents: &[u32]) -> Result<(Value, bool), CliError> {
    let epsilons: Vec<f64> = exponents.iter().map(|&k| (-(k as f64)).exp2()).collect();
    let c = &setup.config.converge;
    let tol = ContinuationTolerances { final_tol: c.eps_final_tol, monotone_tol: c.eps_monotone_tol };
    let horizon = setup.config.horizon;
    let exact = simulate_ep(&setup.rho0, &setup.v0, horizon, &setup.opts)?;
    let members = epsilons
        .par_iter()
        .enumerate()
        .map(|(index, &eps)| {
            Potential::smooth_abs(eps)
                .and_then(|p| simulate(&setup.rho0, &setup.v0, &p, horizon, &setup.opts))
                .map_err(|e| peflow_core::Error::Member { index, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let times = setup.opts.output_grid(horizon)?;
    let report = epsilon_report(&exact, &members, &epsilons, &times, tol)?;
    Ok((epsilon_json(&report, exponents), report.pass))
}
