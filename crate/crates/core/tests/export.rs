use nalgebra::Complex;
use srrwave::config::RunConfig;
use srrwave::export::*;
use srrwave::floquet::build_mass;
use srrwave::lattice::{simulate, LatticeState};
use srrwave::melnikov::{find_simple_zeros, melnikov_homoclinic_closed, DriveSpec};
use srrwave::orbits::orbit_for_period;
use srrwave::wavesolver::*;
use std::f64::consts::PI;

#[test]
fn solution_record_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let params = ModelParams { lambda: 0.1, delta: 0.01, ..Default::default() };
    let sol = newton_solve(&linear_response_guess(&params, 2.0 * PI, 16).unwrap(), &params, NewtonOptions::default())
        .unwrap()
        .solution;
    let path = dir.path().join("solution.json");
    write_json(&path, &SolutionRecord::new(&sol, &params)).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"L\"") && text.contains("\"A\"") && text.contains("\"B\""));
    let back: SolutionRecord = read_json(&path).unwrap();
    assert_eq!(back.solution().unwrap(), sol);
    assert_eq!(back.params, params);
}

#[test]
fn branch_table_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let zero = FourierSolution::zeros(2.0 * PI, 8).unwrap();
    let params = ModelParams { lambda: 0.1, ..Default::default() };
    let ctl = StepControl { initial: 0.01, ..Default::default() };
    let mut branch = continue_branch(&zero, &params, Parameter::Delta, (0.0, 0.03), ctl).unwrap();
    branch.points[0].stable = Some(true);
    branch.points[1].stable = Some(false);
    let path = dir.path().join("branch.csv");
    write_branch_csv(&path, &branch).unwrap();
    let rows = read_branch_csv(&path).unwrap();
    assert_eq!(rows.len(), branch.points.len());
    for (r, p) in rows.iter().zip(&branch.points) {
        assert_eq!((r.param, r.norm, r.stable, r.fold), (p.param, p.norm, p.stable, p.fold));
    }
    let json = dir.path().join("branch.json");
    write_json(&json, &branch).unwrap();
    assert_eq!(read_json::<BifurcationBranch>(&json).unwrap(), branch);
}

#[test]
fn multipliers_and_field_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let zs = vec![Complex::new(0.1, -0.7), Complex::new(1.0 / 3.0, 0.0)];
    let path = dir.path().join("multipliers.csv");
    write_multipliers_csv(&path, &zs).unwrap();
    assert_eq!(read_multipliers_csv(&path).unwrap(), zs);

    let params = ModelParams { delta: 0.1, gamma: 0.1, ..Default::default() };
    let field = simulate(&LatticeState::at_rest(4), &params, &build_mass(4, 0.0).unwrap(), 1.0, 0.01, 10).unwrap();
    let path = dir.path().join("field.csv");
    write_field_csv(&path, &field).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,q0,q1,q2,q3\n") && !text.contains('\r'));
    let (times, frames) = read_field_csv(&path).unwrap();
    assert_eq!((times, frames), (field.times.clone(), field.frames.clone()));
}

#[test]
fn curve_and_orbit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let drive = DriveSpec::new(1.0).unwrap();
    let curve = find_simple_zeros(|a| melnikov_homoclinic_closed(1.0, 1.0, 0.1, drive, a), 64).unwrap();
    let path = dir.path().join("curve.csv");
    write_curve_csv(&path, &curve).unwrap();
    assert_eq!(read_curve_csv(&path).unwrap(), (curve.phases.clone(), curve.values.clone()));

    let orbit = orbit_for_period(4.0 * PI, 1.0, 128).unwrap();
    let path = dir.path().join("orbit.csv");
    write_orbit_csv(&path, &orbit).unwrap();
    let t = read_orbit_csv(&path).unwrap();
    assert_eq!((t.beta, t.c0, t.period), (orbit.level.beta, orbit.level.c0, orbit.period));
    assert_eq!((t.u, t.du), (orbit.u.clone(), orbit.du.clone()));
}

#[test]
fn configuration_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let cfg = RunConfig::default();
    std::fs::write(&path, cfg.to_toml()).unwrap();
    assert_eq!(srrwave::config::parse_config(&path).unwrap(), cfg);
    std::fs::write(&path, "[model]\nlambda = 0.6\n").unwrap();
    let err = srrwave::config::parse_config(&path).unwrap_err().to_string();
    assert!(err.contains("run.toml") && err.contains("1/2"), "{err}");
}
