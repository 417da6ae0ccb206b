//! Command implementations and the error-to-exit-code policy.
//!
//! Exit codes: 0 all checks pass, 1 at least one check fails, 2
//! configuration error, 3 solver failure.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pmelab::bounds::{big_q, cap_c, dc_dy, n_effective, w_fn};
use pmelab::exact::{
    barenblatt, fast_diffusion_selfsimilar, gaussian_heat_kernel, SelfSimilarParams,
};
use pmelab::grid::RadialGrid;
use pmelab::hopf::{evolution_residuals, FtMode};
use pmelab::numerics::observed_order;
use pmelab::solver::{mass, pde_residual, solve, OuterBc, SolutionTrajectory, SolverConfig};
use pmelab::verifier::run_check;
use pmelab::PmeError;

use crate::report::{self, ConvergenceRow};
use crate::scenario::{BoundarySection, Driver, InitialSection, Scenario};

const BUILTINS: &[(&str, &str)] = &[
    ("barenblatt-saturation", include_str!("../builtins/barenblatt-saturation.toml")),
    ("constant-trivial", include_str!("../builtins/constant-trivial.toml")),
    ("gaussian-convergence", include_str!("../builtins/gaussian-convergence.toml")),
    ("hyperbolic-fast-diffusion", include_str!("../builtins/hyperbolic-fast-diffusion.toml")),
    ("hyperbolic-slow-diffusion", include_str!("../builtins/hyperbolic-slow-diffusion.toml")),
];

/// Map an error chain to its exit code: solver blow-ups are 3, everything
/// else (bad files, bad ranges, bad combinations) is a configuration error.
pub fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(pme) = cause.downcast_ref::<PmeError>() {
            return match pme {
                PmeError::NewtonDivergence { .. } | PmeError::PositivityLoss { .. } => 3,
                _ => 2,
            };
        }
    }
    2
}

/// Resolve `--scenario`: an existing path wins, then the builtin table.
pub fn load_scenario(name: &str) -> Result<(String, String)> {
    let path = Path::new(name);
    if path.exists() {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok((name.to_string(), text));
    }
    if let Some((_, text)) = BUILTINS.iter().find(|(n, _)| *n == name) {
        return Ok((name.to_string(), text.to_string()));
    }
    let known: Vec<&str> = BUILTINS.iter().map(|(n, _)| *n).collect();
    Err(anyhow!(
        "scenario '{name}' is neither a file nor a builtin; builtins: {}",
        known.join(", ")
    ))
}

fn parse_and_validate(raw: &str) -> Result<Scenario> {
    let scenario = Scenario::from_toml(raw)?;
    scenario.validate()?;
    Ok(scenario)
}

fn family_params(s: &Scenario) -> Result<Option<SelfSimilarParams>> {
    match &s.initial {
        InitialSection::Barenblatt { b0, .. } | InitialSection::FastDiffusionSs { b0, .. } => {
            Ok(Some(SelfSimilarParams::new(s.manifold.n, s.m, *b0)?))
        }
        _ => Ok(None),
    }
}

fn sampled_times(s: &Scenario) -> Vec<f64> {
    let steps = ((s.time.t1 - s.time.t0) / s.time.dt).round().max(1.0) as usize;
    SolutionTrajectory::uniform_times(s.time.t0, s.time.t1, steps)
}

fn build_sampled(s: &Scenario) -> Result<SolutionTrajectory> {
    let model = s.model()?;
    let grid = RadialGrid::new(s.grid.r_max, s.grid.cells)?;
    let times = sampled_times(s);
    let traj = match &s.initial {
        InitialSection::Barenblatt { .. } => {
            let p = family_params(s)?.expect("family initial");
            SolutionTrajectory::sample(grid, model, s.m, &times, |t, r| barenblatt(&p, t, r))
                .context(
                    "the compact-support family must stay positive on the grid; keep r_max \
                     below the support radius over the whole time window",
                )?
        }
        InitialSection::FastDiffusionSs { .. } => {
            let p = family_params(s)?.expect("family initial");
            SolutionTrajectory::sample(grid, model, s.m, &times, |t, r| {
                fast_diffusion_selfsimilar(&p, t, r)
            })?
        }
        InitialSection::Gaussian {} => {
            let n = s.manifold.n;
            SolutionTrajectory::sample(grid, model, s.m, &times, |t, r| {
                gaussian_heat_kernel(n, t, r)
            })?
        }
        other => bail!(
            "initial kind {:?} has no closed form; use the solver (`solve`/`verify`)",
            other
        ),
    };
    Ok(traj)
}

fn initial_profile(s: &Scenario) -> Result<Box<dyn Fn(f64) -> f64>> {
    let t0 = s.time.t0;
    let n = s.manifold.n;
    let profile: Box<dyn Fn(f64) -> f64> = match &s.initial {
        InitialSection::Constant { value } => {
            let v = *value;
            Box::new(move |_| v)
        }
        InitialSection::Bump { floor, amplitude, width } => {
            let (f, a, w) = (*floor, *amplitude, *width);
            Box::new(move |r| f + a * (-(r / w) * (r / w)).exp())
        }
        InitialSection::Barenblatt { clip, .. } => {
            let p = family_params(s)?.expect("family initial");
            if clip.is_none() && s.grid.r_max >= p.support_radius(t0) {
                bail!(
                    "compact-support initial data reaches zero inside the grid; give \
                     [initial] a positive clip or shrink r_max below {:.6}",
                    p.support_radius(t0)
                );
            }
            let c = clip.unwrap_or(0.0);
            Box::new(move |r| barenblatt(&p, t0, r).max(c))
        }
        InitialSection::FastDiffusionSs { clip, .. } => {
            let p = family_params(s)?.expect("family initial");
            let c = clip.unwrap_or(0.0);
            Box::new(move |r| fast_diffusion_selfsimilar(&p, t0, r).max(c))
        }
        InitialSection::Gaussian {} => Box::new(move |r| gaussian_heat_kernel(n, t0, r)),
    };
    Ok(profile)
}

fn build_solved(s: &Scenario) -> Result<SolutionTrajectory> {
    let model = s.model()?;
    let grid = RadialGrid::new(s.grid.r_max, s.grid.cells)?;
    let profile = initial_profile(s)?;
    let initial = grid.sample(&profile);
    let mut config = SolverConfig::new(s.time.t0, s.time.t1, s.time.dt);
    config.scheme = s.time.scheme.into();
    config.outer_bc = match &s.boundary {
        BoundarySection::Neumann => OuterBc::NeumannZero,
        BoundarySection::Dirichlet { value } => {
            OuterBc::DirichletPositive(value.unwrap_or_else(|| profile(grid.r_max())))
        }
    };
    let traj = solve(&initial, &config, s.m, &model, &grid)?;
    Ok(traj)
}

fn build_trajectory(s: &Scenario) -> Result<SolutionTrajectory> {
    match s.initial.driver() {
        Driver::Sampled => build_sampled(s),
        Driver::Solver => build_solved(s),
    }
}

fn effective_mode(s: &Scenario) -> FtMode {
    match s.verify.mode {
        Some(m) => m.into(),
        None => match s.initial.driver() {
            Driver::Sampled => FtMode::PdeIdentity,
            Driver::Solver => FtMode::TemporalDifference,
        },
    }
}

/// Snapshots a check may use: positive age, and interior in time when the
/// derivative comes from temporal differences.
fn effective_ks(s: &Scenario, traj: &SolutionTrajectory, mode: FtMode) -> Result<Vec<usize>> {
    let len = traj.len();
    let usable = |k: usize| {
        traj.age(k) > 0.0
            && match mode {
                FtMode::PdeIdentity => true,
                FtMode::TemporalDifference => k >= 1 && k + 1 < len,
            }
    };
    let ks: Vec<usize> = if s.verify.snapshots.is_empty() {
        (0..len).filter(|&k| usable(k)).collect()
    } else {
        for &k in &s.verify.snapshots {
            if k >= len {
                bail!("snapshot index {k} out of range; trajectory has {len} snapshots");
            }
            if !usable(k) {
                bail!(
                    "snapshot {k} (t = {}) is unusable: checks need positive age and, with \
                     temporal differences, both neighbors",
                    traj.times[k]
                );
            }
        }
        s.verify.snapshots.clone()
    };
    if ks.is_empty() {
        bail!("no usable snapshots to check (trajectory has {len})");
    }
    Ok(ks)
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

pub fn cmd_verify(name: &str, out: &Path, tol_override: Option<f64>) -> Result<u8> {
    let (label, raw) = load_scenario(name)?;
    let scenario = parse_and_validate(&raw)?;
    let ids = scenario.check_ids()?;
    if ids.is_empty() {
        bail!("scenario requests no checks; add [verify] checks = [...]");
    }
    let traj = build_trajectory(&scenario)?;
    let mode = effective_mode(&scenario);
    let ks = effective_ks(&scenario, &traj, mode)?;
    let mask = scenario.mask.params();
    let tol = tol_override.unwrap_or(scenario.verify.tol_scale);

    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        let report = run_check(&traj, id, &ks, mode, &mask, tol)?;
        println!("{}", report.summary_line());
        reports.push(report);
    }
    ensure_out_dir(out)?;
    report::write_points_csv(&out.join("points.csv"), &reports)?;
    let all_pass =
        report::write_summary_json(&out.join("summary.json"), &label, &scenario, &reports)?;
    println!("{label}: {}", if all_pass { "PASS" } else { "FAIL" });
    Ok(if all_pass { 0 } else { 1 })
}

pub fn cmd_solve(name: &str, out: &Path) -> Result<u8> {
    let (label, raw) = load_scenario(name)?;
    let scenario = parse_and_validate(&raw)?;
    let traj = build_solved(&scenario)?;
    ensure_out_dir(out)?;
    report::write_trajectory_csv(&out.join("trajectory.csv"), &traj)?;
    let model = traj.model;
    let m0 = mass(&traj.grid, &model, &traj.snapshots[0]);
    let drift = traj
        .snapshots
        .windows(2)
        .map(|p| (mass(&traj.grid, &model, &p[1]) - mass(&traj.grid, &model, &p[0])).abs())
        .fold(0.0f64, f64::max);
    println!(
        "{label}: {} steps to t = {}, initial mass {m0:.6e}, worst step drift {drift:.3e}",
        traj.len() - 1,
        traj.times.last().expect("nonempty trajectory"),
    );
    Ok(0)
}

pub fn cmd_exact(name: &str, out: &Path) -> Result<u8> {
    let (label, raw) = load_scenario(name)?;
    let scenario = parse_and_validate(&raw)?;
    if scenario.initial.driver() != Driver::Sampled {
        bail!("`exact` needs a closed-form initial kind (barenblatt, fast-diffusion-ss, gaussian)");
    }
    let traj = build_sampled(&scenario)?;
    ensure_out_dir(out)?;
    report::write_trajectory_csv(&out.join("trajectory.csv"), &traj)?;
    let residual = pde_residual(&traj)?;
    if let Some(p) = family_params(&scenario)? {
        println!(
            "{label}: alpha = {:.6}, N = {:.6}, profile k = {:.6e}",
            p.alpha(),
            p.effective_dimension(),
            p.profile_k()
        );
        if scenario.m > 1.0 {
            println!(
                "support radius: {:.6} at t0, {:.6} at t1",
                p.support_radius(scenario.time.t0),
                p.support_radius(scenario.time.t1)
            );
        }
    }
    println!(
        "{label}: {} snapshots x {} cells, worst interior equation residual {residual:.3e}",
        traj.len(),
        traj.grid.cells()
    );
    Ok(0)
}

pub fn cmd_bounds(name: &str, out: &Path) -> Result<u8> {
    let (label, raw) = load_scenario(name)?;
    let scenario = parse_and_validate(&raw)?;
    let b = scenario
        .bounds
        .as_ref()
        .ok_or_else(|| anyhow!("scenario has no [bounds] sweep section"))?;
    let n_eff = n_effective(scenario.manifold.n, scenario.m)?;
    if b.t.is_empty() {
        bail!("[bounds] needs at least one time");
    }
    if b.y_count < 2 {
        bail!("[bounds] y_count must be >= 2, got {}", b.y_count);
    }
    let y_min = b.y_min.unwrap_or(-n_eff * b.r_sup / 4.0);
    let y_max = b.y_max.unwrap_or(4.0 * (n_eff * b.r_sup).max(1.0));
    if !(y_max > y_min) {
        bail!("[bounds] needs y_max > y_min, got [{y_min}, {y_max}]");
    }
    let mut rows = Vec::with_capacity(b.t.len() * b.y_count);
    for &t in &b.t {
        for j in 0..b.y_count {
            let y = y_min + (y_max - y_min) * j as f64 / (b.y_count - 1) as f64;
            rows.push([
                t,
                y,
                w_fn(t, y, n_eff, b.r_sup)?,
                cap_c(t, y, n_eff, b.r_sup)?,
                dc_dy(t, y, n_eff, b.r_sup)?,
                big_q(t, y, n_eff, b.r_sup)?,
            ]);
        }
    }
    ensure_out_dir(out)?;
    report::write_bounds_csv(&out.join("bounds.csv"), &rows)?;
    println!(
        "{label}: tabulated {} rows (N = {n_eff:.6}, R = {}, y in [{y_min:.6}, {y_max:.6}])",
        rows.len(),
        b.r_sup
    );
    Ok(0)
}

pub fn cmd_convergence(name: &str, out: &Path, levels: usize) -> Result<u8> {
    if levels < 2 {
        bail!("convergence needs at least 2 levels, got {levels}");
    }
    let (label, raw) = load_scenario(name)?;
    let base = parse_and_validate(&raw)?;
    let ids = base.check_ids()?;
    let mask = base.mask.params();

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    let mut all_pass = true;
    for level in 0..levels {
        let mut s = base.clone();
        s.grid.cells = base.grid.cells << level;
        s.time.dt = base.time.dt / f64::powi(2.0, level as i32);
        let traj = build_trajectory(&s)?;
        let mode = effective_mode(&s);
        let ks = effective_ks(&s, &traj, mode)?;

        // Residuals need both time neighbors regardless of mode.
        let mid = (traj.len() / 2).clamp(1, traj.len().saturating_sub(2));
        let res = evolution_residuals(&traj, mid, mode)?;

        let mut per_check = Vec::with_capacity(ids.len());
        for &id in &ids {
            let report = run_check(&traj, id, &ks, mode, &mask, s.verify.tol_scale)?;
            let sat = report
                .points
                .iter()
                .map(|p| (p.margin / p.scale).abs())
                .fold(0.0f64, f64::max);
            per_check.push((sat, report.min_margin));
            all_pass &= report.pass;
        }
        println!(
            "level {level}: cells={} dt={:.6e} res_y={:.6e} res_u={:.6e} res_z={:.6e}",
            s.grid.cells, s.time.dt, res.res_y, res.res_u, res.res_z
        );
        rows.push(ConvergenceRow {
            level,
            cells: s.grid.cells,
            dt: s.time.dt,
            res_y: res.res_y,
            res_u: res.res_u,
            res_z: res.res_z,
            per_check,
        });
    }

    let sat_headers: Vec<String> = ids.iter().map(|id| id.to_string()).collect();
    ensure_out_dir(out)?;
    report::write_convergence_csv(&out.join("convergence.csv"), &sat_headers, &rows)?;

    // Residuals carry units of the fields; scaled margins are dimensionless
    // and their rounding noise grows like 1/h^2 under refinement, so they
    // count as saturated once below 1e-8.
    const RESIDUAL_FLOOR: f64 = 1e-11;
    const SAT_FLOOR: f64 = 1e-8;
    let series: Vec<(String, f64, Vec<f64>)> = {
        let mut v = vec![
            ("res_y".to_string(), RESIDUAL_FLOOR, rows.iter().map(|r| r.res_y).collect::<Vec<_>>()),
            ("res_u".to_string(), RESIDUAL_FLOOR, rows.iter().map(|r| r.res_u).collect()),
            ("res_z".to_string(), RESIDUAL_FLOOR, rows.iter().map(|r| r.res_z).collect()),
        ];
        for (j, h) in sat_headers.iter().enumerate() {
            v.push((
                format!("sat:{h}"),
                SAT_FLOOR,
                rows.iter().map(|r| r.per_check[j].0).collect(),
            ));
        }
        v
    };
    for (name, floor, values) in &series {
        let orders: Vec<String> = values
            .windows(2)
            .map(|pair| format!("{:.2}", observed_order(pair[0], pair[1], *floor)))
            .collect();
        println!("observed order {name}: {}", orders.join(" "));
    }
    println!("{label}: {}", if all_pass { "PASS" } else { "FAIL" });
    Ok(if all_pass { 0 } else { 1 })
}
