//! Run configuration: a TOML document with one table per task. Every table and key is
//! optional; unknown keys are rejected.
//!
//! ```toml
//! [model]
//! lambda = 1e-4
//! delta = 7e-4
//!
//! [continuation]
//! parameter = "gamma"
//! lower = -0.01
//! upper = 0.01
//! ```

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::floquet::{build_mass, FloquetOptions, LatticeCoupling, DEFAULT_STEPS, DEFAULT_TOLERANCE};
use crate::orbits::orbit_for_period;
use crate::wavesolver::{
    linear_response_guess, FourierSolution, ModelParams, NewtonOptions, Parameter, StepControl, Subspace,
};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelParams,
    pub discretization: Discretization,
    pub wave: WaveConfig,
    pub continuation: ContinuationConfig,
    pub melnikov: MelnikovConfig,
    pub simulation: SimulationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Discretization {
    /// Fourier modes `J`.
    pub modes: usize,
    /// Lattice sites `N`.
    pub sites: usize,
    /// RK4 steps per wave period for monodromy and simulation.
    pub steps_per_period: usize,
    /// Samples of the unperturbed orbit.
    pub n_samples: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self { modes: 50, sites: 20, steps_per_period: DEFAULT_STEPS, n_samples: 1024, tol: 1e-10, max_iter: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedKind {
    /// Unperturbed orbit of period `t_bar`.
    Orbit,
    /// Single-mode linear response to the drive.
    Linear,
    /// `U ≡ 0` on one drive period.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveConfig {
    pub seed: SeedKind,
    /// Orbit period in the unscaled variable.
    pub t_bar: f64,
    /// Move the orbit minimum to the origin.
    pub shift_half: bool,
    /// Newton subspace; `even` is only valid for undamped runs.
    pub subspace: Subspace,
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self { seed: SeedKind::Orbit, t_bar: 4.0 * PI, shift_half: false, subspace: Subspace::Auto }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationConfig {
    pub parameter: Parameter,
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
    pub max_points: usize,
    pub increasing: bool,
    /// Attach Floquet verdicts to the branch points.
    pub stability: bool,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            parameter: Parameter::Gamma,
            lower: -0.01,
            upper: 0.01,
            step: 0.05,
            max_points: 5000,
            increasing: true,
            stability: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MelnikovConfig {
    /// Use the saddle loop instead of the bounded orbit of period `wave.t_bar`.
    pub homoclinic: bool,
    /// Phase samples for the zero search.
    pub grid: usize,
    /// Resonance index of the subharmonic function.
    pub u: u32,
}

impl Default for MelnikovConfig {
    fn default() -> Self {
        Self { homoclinic: true, grid: 512, u: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    /// Duration in wave periods.
    pub periods: f64,
    /// Record every this many steps.
    pub sample_every: usize,
    /// Relative size of the random initial perturbation; zero disables it.
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { periods: 50.0, sample_every: 64, perturbation: 1e-8, seed: 0 }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be at least {min}, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate().map_err(|e| Error::Config(format!("[model] {e}")))?;
        let d = &self.discretization;
        at_least("discretization.modes", d.modes, 4)?;
        at_least("discretization.sites", d.sites, 3)?;
        at_least("discretization.steps_per_period", d.steps_per_period, 8)?;
        at_least("discretization.n_samples", d.n_samples, 64)?;
        at_least("discretization.max_iter", d.max_iter, 1)?;
        positive("discretization.tol", d.tol)?;
        positive("wave.t_bar", self.wave.t_bar)?;
        let c = &self.continuation;
        if !(c.lower.is_finite() && c.upper.is_finite() && c.lower <= c.upper) {
            return Err(Error::Config(format!(
                "continuation range needs lower <= upper, got [{}, {}]",
                c.lower, c.upper
            )));
        }
        positive("continuation.step", c.step)?;
        at_least("continuation.max_points", c.max_points, 1)?;
        at_least("melnikov.grid", self.melnikov.grid, 32)?;
        at_least("melnikov.u", self.melnikov.u as usize, 1)?;
        let s = &self.simulation;
        positive("simulation.periods", s.periods)?;
        at_least("simulation.sample_every", s.sample_every, 1)?;
        if !(s.perturbation.is_finite() && s.perturbation >= 0.0) {
            return Err(Error::Config(format!("simulation.perturbation must be non-negative, got {}", s.perturbation)));
        }
        Ok(())
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.discretization.tol,
            max_iter: self.discretization.max_iter,
            subspace: self.wave.subspace,
            ..Default::default()
        }
    }

    pub fn floquet_options(&self) -> FloquetOptions {
        FloquetOptions {
            sites: self.discretization.sites,
            steps_per_period: self.discretization.steps_per_period,
            tolerance: DEFAULT_TOLERANCE,
            check_resolution: false,
        }
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            initial: self.continuation.step,
            max_points: self.continuation.max_points,
            increasing: self.continuation.increasing,
            tol: self.discretization.tol,
            ..Default::default()
        }
    }

    pub fn coupling(&self) -> Result<LatticeCoupling> {
        build_mass(self.discretization.sites, self.model.lambda)
    }

    /// Newton starting guess selected by `[wave]`.
    pub fn initial_wave(&self) -> Result<FourierSolution> {
        let modes = self.discretization.modes;
        let seed = match self.wave.seed {
            SeedKind::Orbit => {
                let orbit = orbit_for_period(self.wave.t_bar, self.model.beta, self.discretization.n_samples)?;
                FourierSolution::from_orbit(&orbit, self.model.omega, modes)?
            }
            SeedKind::Linear => linear_response_guess(&self.model, 2.0 * PI, modes)?,
            SeedKind::Zero => FourierSolution::zeros(2.0 * PI, modes)?,
        };
        Ok(if self.wave.shift_half { seed.half_shifted() } else { seed })
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::from_toml(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
