//! CSV and JSON emitters. All numbers print with 17 significant decimal
//! digits ('.' separator, no locale), enough to round-trip f64 exactly, so
//! repeat runs of the same scenario are bit-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use pmelab::solver::SolutionTrajectory;
use pmelab::verifier::VerificationReport;

use crate::scenario::Scenario;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Per-point records of every check, one row per verified point.
pub fn write_points_csv(path: &Path, reports: &[VerificationReport]) -> Result<()> {
    let mut out = String::from("check,t,r,u,f,U,X,Y,Z,bound,margin,regime\n");
    for rep in reports {
        for p in &rep.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                rep.check,
                num(p.t),
                num(p.r),
                num(p.u),
                num(p.f),
                num(p.big_u),
                num(p.x),
                num(p.y),
                num(p.z),
                num(p.bound),
                num(p.margin),
                p.regime
            );
        }
    }
    write_file(path, &out)
}

/// One record per check plus the scenario parameters; returns overall pass.
pub fn write_summary_json(
    path: &Path,
    label: &str,
    scenario: &Scenario,
    reports: &[VerificationReport],
) -> Result<bool> {
    let all_pass = reports.iter().all(|r| r.pass);
    let checks: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            serde_json::json!({
                "id": r.check.as_str(),
                "pass": r.pass,
                "points": r.points.len(),
                "min_margin": r.min_margin,
                "min_scaled_margin": r.min_scaled_margin,
                "tol_scale": r.tol_scale,
                "notes": r.notes,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "scenario": label,
        "params": {
            "m": scenario.m,
            "manifold": scenario.manifold,
            "grid": scenario.grid,
            "time": scenario.time,
        },
        "pass": all_pass,
        "checks": checks,
    });
    let text = serde_json::to_string_pretty(&doc).context("serializing summary")?;
    write_file(path, &(text + "\n"))?;
    Ok(all_pass)
}

/// Raw solution values, one row per (snapshot, cell).
pub fn write_trajectory_csv(path: &Path, traj: &SolutionTrajectory) -> Result<()> {
    let mut out = String::from("t,r,u\n");
    for (k, &t) in traj.times.iter().enumerate() {
        for (i, r) in traj.grid.nodes().enumerate() {
            let _ = writeln!(out, "{},{},{}", num(t), num(r), num(traj.snapshots[k][i]));
        }
    }
    write_file(path, &out)
}

/// Closed-form bound functions over a (t, y) sweep.
pub fn write_bounds_csv(path: &Path, rows: &[[f64; 6]]) -> Result<()> {
    let mut out = String::from("t,y,w,C,dC_dy,Q\n");
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| num(x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    write_file(path, &out)
}

/// Per-level convergence data; `sat_headers` name the per-check columns.
pub fn write_convergence_csv(
    path: &Path,
    sat_headers: &[String],
    rows: &[ConvergenceRow],
) -> Result<()> {
    let mut out = String::from("level,cells,dt,res_y,res_u,res_z");
    for h in sat_headers {
        let _ = write!(out, ",sat:{h},min_margin:{h}");
    }
    out.push('\n');
    for row in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            row.level,
            row.cells,
            num(row.dt),
            num(row.res_y),
            num(row.res_u),
            num(row.res_z)
        );
        for (sat, min_margin) in &row.per_check {
            let _ = write!(out, ",{},{}", num(*sat), num(*min_margin));
        }
        out.push('\n');
    }
    write_file(path, &out)
}

pub struct ConvergenceRow {
    pub level: usize,
    pub cells: usize,
    pub dt: f64,
    pub res_y: f64,
    pub res_u: f64,
    pub res_z: f64,
    /// (max |scaled margin|, min margin) per check, scenario order.
    pub per_check: Vec<(f64, f64)>,
}
