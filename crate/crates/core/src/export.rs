//! CSV and JSON artifacts with matching importers.
//!
//! CSV files are comma-separated with a header row and LF line endings; lines starting with
//! `#` carry metadata. Floats are written with 17 significant digits. JSON uses struct field
//! order, and serde_json's shortest round-trip float representation.

use nalgebra::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{BlowUp, SpaceTimeField};
use crate::melnikov::{MelnikovCurve, SimpleZero};
use crate::orbits::PeriodicOrbit;
use crate::wavesolver::{BifurcationBranch, FourierSolution, ModelParams};

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

fn write_csv<I>(path: &Path, metadata: &[(&str, f64)], header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut file = File::create(path)?;
    for (key, value) in metadata {
        writeln!(file, "# {key}={}", fmt_float(*value))?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    w.write_record(header).map_err(|e| format_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| format_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

struct Table {
    metadata: Vec<(String, f64)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let mut metadata = Vec::new();
        for line in BufReader::new(File::open(path)?).lines() {
            let line = line?;
            let Some(rest) = line.strip_prefix('#') else { break };
            let (key, value) = rest.trim().split_once('=').ok_or_else(|| format_err(path, format!("bad metadata line '{line}'")))?;
            metadata.push((key.to_string(), parse_float(path, value)?));
        }
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(|e| format_err(path, e))?;
        let header = r.headers().map_err(|e| format_err(path, e))?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()).map_err(|e| format_err(path, e)))
            .collect::<Result<_>>()?;
        Ok(Self { metadata, header, rows })
    }

    fn expect_header(&self, path: &Path, want: &[String]) -> Result<()> {
        if self.header != want {
            return Err(format_err(path, format!("expected columns {want:?}, found {:?}", self.header)));
        }
        Ok(())
    }

    fn meta(&self, path: &Path, key: &str) -> Result<f64> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| format_err(path, format!("missing metadata '{key}'")))
    }

    fn floats(&self, path: &Path) -> Result<Vec<Vec<f64>>> {
        self.rows.iter().map(|row| row.iter().map(|v| parse_float(path, v)).collect()).collect()
    }
}

fn parse_float(path: &Path, s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| format_err(path, format!("not a number: '{s}'")))
}

fn names(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// One row of a branch table. `stable` is absent when no verdict was computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRow {
    pub param: f64,
    pub norm: f64,
    pub stable: Option<bool>,
    pub fold: bool,
}

const BRANCH_COLUMNS: [&str; 4] = ["param", "norm", "stable", "fold_flag"];

pub fn write_branch_csv(path: &Path, branch: &BifurcationBranch) -> Result<()> {
    let rows = branch.points.iter().map(|p| {
        let stable = match p.stable {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        vec![fmt_float(p.param), fmt_float(p.norm), stable.into(), if p.fold { "1" } else { "0" }.into()]
    });
    write_csv(path, &[], &names(&BRANCH_COLUMNS), rows)
}

pub fn read_branch_csv(path: &Path) -> Result<Vec<BranchRow>> {
    let t = Table::read(path)?;
    t.expect_header(path, &names(&BRANCH_COLUMNS))?;
    let flag = |s: &str| match s {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(format_err(path, format!("bad flag '{other}'"))),
    };
    t.rows
        .iter()
        .map(|r| {
            Ok(BranchRow {
                param: parse_float(path, &r[0])?,
                norm: parse_float(path, &r[1])?,
                stable: if r[2].is_empty() { None } else { Some(flag(&r[2])?) },
                fold: flag(&r[3])?,
            })
        })
        .collect()
}

/// A wave with the parameters it solves: `U(z) = A₀ + Σ Aₘcos(2πmz/L) + Bₘsin(2πmz/L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    #[serde(rename = "L")]
    pub period: f64,
    #[serde(rename = "A")]
    pub cos: Vec<f64>,
    #[serde(rename = "B")]
    pub sin: Vec<f64>,
    pub params: ModelParams,
}

impl SolutionRecord {
    pub fn new(sol: &FourierSolution, params: &ModelParams) -> Self {
        Self { period: sol.period, cos: sol.cos.clone(), sin: sol.sin.clone(), params: *params }
    }

    pub fn solution(&self) -> Result<FourierSolution> {
        FourierSolution::new(self.period, self.cos.clone(), self.sin.clone())
    }
}

const MULTIPLIER_COLUMNS: [&str; 3] = ["re", "im", "modulus"];

pub fn write_multipliers_csv(path: &Path, multipliers: &[Complex<f64>]) -> Result<()> {
    let rows = multipliers.iter().map(|z| vec![fmt_float(z.re), fmt_float(z.im), fmt_float(z.norm())]);
    write_csv(path, &[], &names(&MULTIPLIER_COLUMNS), rows)
}

pub fn read_multipliers_csv(path: &Path) -> Result<Vec<Complex<f64>>> {
    let t = Table::read(path)?;
    t.expect_header(path, &names(&MULTIPLIER_COLUMNS))?;
    Ok(t.floats(path)?.into_iter().map(|r| Complex::new(r[0], r[1])).collect())
}

fn field_columns(sites: usize) -> Vec<String> {
    std::iter::once("t".to_string()).chain((0..sites).map(|n| format!("q{n}"))).collect()
}

/// Rows are recorded times, columns `t, q0, …, q{N−1}`.
pub fn write_field_csv(path: &Path, field: &SpaceTimeField) -> Result<()> {
    let rows = field
        .times
        .iter()
        .zip(&field.frames)
        .map(|(&t, q)| std::iter::once(t).chain(q.iter().copied()).map(fmt_float).collect());
    write_csv(path, &[], &field_columns(field.last.sites()), rows)
}

/// Times and frames of a space-time table.
pub fn read_field_csv(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let t = Table::read(path)?;
    let sites = t.header.len().saturating_sub(1);
    t.expect_header(path, &field_columns(sites))?;
    let rows = t.floats(path)?;
    Ok(rows.into_iter().map(|mut r| (r.remove(0), r)).unzip())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMetadata {
    pub params: ModelParams,
    pub dt: f64,
    pub blowup: Option<BlowUp>,
}

const CURVE_COLUMNS: [&str; 2] = ["a", "M"];

pub fn write_curve_csv(path: &Path, curve: &MelnikovCurve) -> Result<()> {
    let rows = curve.phases.iter().zip(&curve.values).map(|(&a, &m)| vec![fmt_float(a), fmt_float(m)]);
    write_csv(path, &[], &names(&CURVE_COLUMNS), rows)
}

/// Phases and values of a Melnikov curve table.
pub fn read_curve_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = Table::read(path)?;
    t.expect_header(path, &names(&CURVE_COLUMNS))?;
    Ok(t.floats(path)?.into_iter().map(|r| (r[0], r[1])).unzip())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelnikovSummary {
    pub zeros: Vec<SimpleZero>,
    pub threshold: f64,
    pub persistence_predicted: bool,
}

const ORBIT_COLUMNS: [&str; 3] = ["z", "U", "Uprime"];

/// A sampled orbit read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTable {
    pub beta: f64,
    pub c0: f64,
    pub period: f64,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

pub fn write_orbit_csv(path: &Path, orbit: &PeriodicOrbit) -> Result<()> {
    let meta = [("beta", orbit.level.beta), ("c0", orbit.level.c0), ("period", orbit.period)];
    let rows = (0..orbit.n_samples()).map(|i| vec![fmt_float(orbit.z(i)), fmt_float(orbit.u[i]), fmt_float(orbit.du[i])]);
    write_csv(path, &meta, &names(&ORBIT_COLUMNS), rows)
}

pub fn read_orbit_csv(path: &Path) -> Result<OrbitTable> {
    let t = Table::read(path)?;
    t.expect_header(path, &names(&ORBIT_COLUMNS))?;
    let rows = t.floats(path)?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect();
    Ok(OrbitTable {
        beta: t.meta(path, "beta")?,
        c0: t.meta(path, "c0")?,
        period: t.meta(path, "period")?,
        z: col(0),
        u: col(1),
        du: col(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn malformed_tables_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "re,im\n1,2\n").unwrap();
        assert!(matches!(read_multipliers_csv(&path), Err(Error::Format(_))));
        std::fs::write(&path, "re,im,modulus\n1,x,2\n").unwrap();
        assert!(matches!(read_multipliers_csv(&path), Err(Error::Format(_))));
    }
}
