use serde::Serialize;
use std::path::{Path, PathBuf};

use srrwave::config::RunConfig;
use srrwave::export::{self, FieldMetadata, MelnikovSummary, SolutionRecord};
use srrwave::floquet::{classify, monodromy, stability_along_branch, InstabilityKind, StabilitySegment};
use srrwave::lattice::{seed_from_wave, simulate};
use srrwave::melnikov::{
    damping_threshold_homoclinic, damping_threshold_periodic, find_simple_zeros, melnikov_homoclinic_closed,
    melnikov_subharmonic_numeric, DriveSpec, SubharmonicIndex,
};
use srrwave::orbits::orbit_for_period;
use srrwave::verify::acceptance;
use srrwave::wavesolver::{continue_branch, newton_solve, FourierSolution, NewtonReport};
use srrwave::{Error, Result};

use crate::args::Command;

/// Files written by a command, relative to the output directory.
pub struct Artifacts {
    dir: PathBuf,
    pub files: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        export::write_json(&path, value)
    }
}

fn solve_wave(cfg: &RunConfig) -> Result<NewtonReport> {
    newton_solve(&cfg.initial_wave()?, &cfg.model, cfg.newton_options())
}

#[derive(Serialize)]
struct SolveReport {
    iterations: usize,
    residual: f64,
    offgrid_residual: f64,
    norm: f64,
    tail_ratio: f64,
}

fn write_solution(out: &mut Artifacts, cfg: &RunConfig, report: &NewtonReport) -> Result<()> {
    out.json("solution.json", &SolutionRecord::new(&report.solution, &cfg.model))?;
    let s = &report.solution;
    out.json(
        "solve.json",
        &SolveReport {
            iterations: report.iterations,
            residual: report.residual,
            offgrid_residual: report.offgrid_residual,
            norm: s.norm(),
            tail_ratio: s.tail_ratio(),
        },
    )
}

pub fn run(command: &Command, cfg: &RunConfig, out: &mut Artifacts) -> Result<String> {
    match command {
        Command::Solve => solve(cfg, out),
        Command::Branch { .. } => branch(cfg, out),
        Command::Floquet => floquet(cfg, out),
        Command::Melnikov { .. } => melnikov(cfg, out),
        Command::Simulate { .. } => simulate_wave(cfg, out),
        Command::Verify { criteria } => verify(criteria, out),
    }
}

fn solve(cfg: &RunConfig, out: &mut Artifacts) -> Result<String> {
    let report = solve_wave(cfg)?;
    write_solution(out, cfg, &report)?;
    Ok(format!(
        "converged in {} iterations, residual {:.3e}, norm {:.10}",
        report.iterations,
        report.residual,
        report.solution.norm()
    ))
}

#[derive(Serialize)]
struct StabilityReport<'a> {
    verdicts: &'a [Option<srrwave::floquet::StabilityVerdict>],
    segments: &'a [StabilitySegment],
    errors: &'a [(usize, String)],
}

fn branch(cfg: &RunConfig, out: &mut Artifacts) -> Result<String> {
    let start = solve_wave(cfg)?.solution;
    let c = &cfg.continuation;
    let mut branch = continue_branch(&start, &cfg.model, c.parameter, (c.lower, c.upper), cfg.step_control())?;
    if c.stability {
        let st = stability_along_branch(&branch, &cfg.coupling()?, cfg.floquet_options());
        out.json("stability.json", &StabilityReport { verdicts: &st.verdicts, segments: &st.segments, errors: &st.errors })?;
        branch = st.branch;
    }
    let path = out.path("branch.csv");
    export::write_branch_csv(&path, &branch)?;
    out.json("branch.json", &branch)?;
    Ok(format!(
        "{} points in {}, {} folds, termination {:?}",
        branch.points.len(),
        c.parameter,
        branch.folds.len(),
        branch.termination
    ))
}

#[derive(Serialize)]
struct VerdictReport {
    max_modulus: f64,
    stable: bool,
    #[serde(rename = "type")]
    kind: InstabilityKind,
    dominant_re: f64,
    dominant_im: f64,
    determinant: f64,
    expected_determinant: f64,
}

fn floquet(cfg: &RunConfig, out: &mut Artifacts) -> Result<String> {
    let report = solve_wave(cfg)?;
    write_solution(out, cfg, &report)?;
    let opts = cfg.floquet_options();
    let m = monodromy(&report.solution, &cfg.model, &cfg.coupling()?, opts)?;
    let v = classify(&m, opts.tolerance);
    let path = out.path("multipliers.csv");
    export::write_multipliers_csv(&path, &m.multipliers)?;
    out.json(
        "verdict.json",
        &VerdictReport {
            max_modulus: v.max_modulus,
            stable: v.stable,
            kind: v.kind,
            dominant_re: v.dominant_re,
            dominant_im: v.dominant_im,
            determinant: m.determinant,
            expected_determinant: m.expected_determinant,
        },
    )?;
    Ok(format!("max |multiplier| {:.10}, {}", v.max_modulus, if v.stable { "stable" } else { "unstable" }))
}

fn melnikov(cfg: &RunConfig, out: &mut Artifacts) -> Result<String> {
    let p = &cfg.model;
    let drive = DriveSpec::new(p.delta)?;
    let grid = cfg.melnikov.grid;
    let (curve, threshold) = if cfg.melnikov.homoclinic {
        let curve = find_simple_zeros(|a| melnikov_homoclinic_closed(p.beta, p.omega, p.gamma, drive, a), grid)?;
        (curve, damping_threshold_homoclinic(p.beta, p.omega, p.delta)?)
    } else {
        let orbit = orbit_for_period(cfg.wave.t_bar, p.beta, cfg.discretization.n_samples)?;
        let idx = SubharmonicIndex::new(cfg.melnikov.u, cfg.wave.t_bar)?;
        let curve = find_simple_zeros(|a| melnikov_subharmonic_numeric(&orbit, idx, p.gamma, drive, a), grid)?;
        (curve, damping_threshold_periodic(&orbit, idx, drive)?.gamma_star)
    };
    let path = out.path("melnikov.csv");
    export::write_curve_csv(&path, &curve)?;
    let summary = MelnikovSummary { zeros: curve.zeros.clone(), threshold, persistence_predicted: p.gamma.abs() < threshold };
    out.json("melnikov.json", &summary)?;
    Ok(format!("threshold {threshold:.16e}, {} simple zeros", summary.zeros.len()))
}

fn simulate_wave(cfg: &RunConfig, out: &mut Artifacts) -> Result<String> {
    let report = solve_wave(cfg)?;
    write_solution(out, cfg, &report)?;
    let sol: &FourierSolution = &report.solution;
    let s = &cfg.simulation;
    let mut state = seed_from_wave(sol, &cfg.model, cfg.discretization.sites)?;
    if s.perturbation > 0.0 {
        state = state.perturbed(s.perturbation, s.seed);
    }
    let period = sol.period / cfg.model.omega;
    let dt = period / cfg.discretization.steps_per_period as f64;
    let field = simulate(&state, &cfg.model, &cfg.coupling()?, s.periods * period, dt, s.sample_every)?;
    let path = out.path("field.csv");
    export::write_field_csv(&path, &field)?;
    out.json("field.json", &FieldMetadata { params: cfg.model, dt: field.dt, blowup: field.blowup })?;
    Ok(match field.blowup {
        Some(b) => format!("blow-up at t = {:.6} on site {}", b.time, b.site),
        None => format!("{} frames, no blow-up", field.times.len()),
    })
}

fn verify(criteria: &[usize], out: &mut Artifacts) -> Result<String> {
    let ids: Vec<usize> = if criteria.is_empty() { (1..=acceptance::COUNT).collect() } else { criteria.to_vec() };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > acceptance::COUNT) {
        return Err(Error::InvalidParameter(format!("no acceptance criterion {bad} (1..={})", acceptance::COUNT)));
    }
    let mut outcomes = Vec::new();
    for id in ids {
        let o = acceptance::run(id);
        println!("{o}");
        outcomes.push(o);
    }
    out.json("verify.json", &outcomes)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(Error::NoSolution(format!("{failed} of {} acceptance criteria failed", outcomes.len())));
    }
    Ok(format!("{} acceptance criteria passed", outcomes.len()))
}
