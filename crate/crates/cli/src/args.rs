use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use srrwave::config::{RunConfig, SeedKind};
use srrwave::wavesolver::{Parameter, Subspace};

/// Travelling waves of a driven, damped SRR lattice: solve, continue, analyse and simulate.
#[derive(Debug, Parser)]
#[command(name = "srrwave", version)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts and the manifest.
    #[arg(long, global = true, default_value = "srrwave-out")]
    pub out: PathBuf,
    /// Random seed for perturbation protocols.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Phase shift between neighbouring sites.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Fourier modes.
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    /// Lattice sites.
    #[arg(long, global = true)]
    pub sites: Option<usize>,
    #[arg(long, global = true)]
    pub steps_per_period: Option<usize>,
    #[arg(long, global = true)]
    pub n_samples: Option<usize>,
    /// Starting guess for Newton's method.
    #[arg(long, global = true, value_parser = parse_seed_kind)]
    pub wave_seed: Option<SeedKind>,
    /// Orbit period for the orbit seed.
    #[arg(long, global = true)]
    pub t_bar: Option<f64>,
    /// Move the orbit minimum to the origin.
    #[arg(long, global = true)]
    pub shift_half: bool,
    #[arg(long, global = true, value_parser = parse_subspace)]
    pub subspace: Option<Subspace>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for one travelling wave and report the residual.
    Solve,
    /// Continue a wave in gamma or delta, with Floquet stability along the branch.
    Branch {
        #[arg(long, value_parser = parse_parameter)]
        param: Option<Parameter>,
        #[arg(long, allow_hyphen_values = true)]
        lower: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        upper: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        max_points: Option<usize>,
        /// Leave the start towards decreasing parameter values.
        #[arg(long)]
        decreasing: bool,
        /// Skip the Floquet verdicts.
        #[arg(long)]
        no_stability: bool,
    },
    /// Floquet multipliers of one wave.
    Floquet,
    /// Melnikov function, its simple zeros and the damping threshold.
    Melnikov {
        /// Use the saddle loop.
        #[arg(long, conflicts_with = "periodic")]
        homoclinic: bool,
        /// Use the bounded orbit of period t-bar.
        #[arg(long)]
        periodic: bool,
        #[arg(long)]
        grid: Option<usize>,
        /// Resonance index of the subharmonic function.
        #[arg(long)]
        u: Option<u32>,
    },
    /// Direct lattice simulation seeded by a wave.
    Simulate {
        /// Duration in wave periods.
        #[arg(long)]
        periods: Option<f64>,
        #[arg(long)]
        sample_every: Option<usize>,
        /// Relative size of the random initial perturbation.
        #[arg(long)]
        perturbation: Option<f64>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Run only these criteria (1-based); all by default.
        #[arg(long = "criterion")]
        criteria: Vec<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Branch { .. } => "branch",
            Command::Floquet => "floquet",
            Command::Melnikov { .. } => "melnikov",
            Command::Simulate { .. } => "simulate",
            Command::Verify { .. } => "verify",
        }
    }
}

fn parse_seed_kind(s: &str) -> Result<SeedKind, String> {
    match s {
        "orbit" => Ok(SeedKind::Orbit),
        "linear" => Ok(SeedKind::Linear),
        "zero" => Ok(SeedKind::Zero),
        other => Err(format!("unknown wave seed '{other}' (orbit, linear, zero)")),
    }
}

fn parse_subspace(s: &str) -> Result<Subspace, String> {
    match s {
        "auto" => Ok(Subspace::Auto),
        "full" => Ok(Subspace::Full),
        "even" => Ok(Subspace::Even),
        other => Err(format!("unknown subspace '{other}' (auto, full, even)")),
    }
}

fn parse_parameter(s: &str) -> Result<Parameter, String> {
    s.parse().map_err(|e: srrwave::Error| e.to_string())
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Cli {
    /// Applies every flag on top of `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig) {
        let o = &self.overrides;
        set(&mut cfg.model.beta, o.beta);
        set(&mut cfg.model.gamma, o.gamma);
        set(&mut cfg.model.lambda, o.lambda);
        set(&mut cfg.model.omega, o.omega);
        set(&mut cfg.model.p, o.p);
        set(&mut cfg.model.delta, o.delta);
        set(&mut cfg.discretization.modes, o.modes);
        set(&mut cfg.discretization.sites, o.sites);
        set(&mut cfg.discretization.steps_per_period, o.steps_per_period);
        set(&mut cfg.discretization.n_samples, o.n_samples);
        set(&mut cfg.wave.seed, o.wave_seed);
        set(&mut cfg.wave.t_bar, o.t_bar);
        set(&mut cfg.wave.subspace, o.subspace);
        cfg.wave.shift_half |= o.shift_half;
        set(&mut cfg.simulation.seed, self.seed);
        match &self.command {
            Command::Branch { param, lower, upper, step, max_points, decreasing, no_stability } => {
                let c = &mut cfg.continuation;
                set(&mut c.parameter, *param);
                set(&mut c.lower, *lower);
                set(&mut c.upper, *upper);
                set(&mut c.step, *step);
                set(&mut c.max_points, *max_points);
                c.increasing &= !decreasing;
                c.stability &= !no_stability;
            }
            Command::Melnikov { homoclinic, periodic, grid, u } => {
                let m = &mut cfg.melnikov;
                if *homoclinic {
                    m.homoclinic = true;
                }
                if *periodic {
                    m.homoclinic = false;
                }
                set(&mut m.grid, *grid);
                set(&mut m.u, *u);
            }
            Command::Simulate { periods, sample_every, perturbation } => {
                let s = &mut cfg.simulation;
                set(&mut s.periods, *periods);
                set(&mut s.sample_every, *sample_every);
                set(&mut s.perturbation, *perturbation);
            }
            Command::Solve | Command::Floquet | Command::Verify { .. } => {}
        }
    }
}
