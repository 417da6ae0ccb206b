//! Acceptance gate: every headline guarantee of the laboratory, each pinned
//! at its stated tolerance and reported with one PASS line.
//!
//! The oracles are closed-form solutions whose ratio fields are quadratic in
//! r, so the centered stencils reproduce them to rounding and saturation of
//! the sharp bounds is testable at tight tolerances. Solver-generated
//! scenarios exercise the inequalities off the extremal profiles, where
//! margins must be strictly positive and stable under refinement.

use std::time::Instant;

use pmelab::bounds::{cap_c, dc_dy, n_effective, riccati_residual};
use pmelab::exact::{
    barenblatt, fast_diffusion_selfsimilar, gaussian_heat_kernel, gaussian_logdens_dt,
    gaussian_logdens_grad_sq, SelfSimilarParams,
};
use pmelab::geometry::{cd_defect, gamma2_radial, radial_laplacian, ManifoldModel};
use pmelab::grid::RadialGrid;
use pmelab::hopf::{compute_fields, evolution_residuals, FtMode};
use pmelab::numerics::observed_order;
use pmelab::solver::{mass, solve, step, OuterBc, SolutionTrajectory, SolverConfig};
use pmelab::verifier::{
    check_aronson_benilan, check_fast_diffusion, check_initial_bound_decay, check_li_yau,
    check_slow_diffusion, MaskParams,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CELLS: usize = 2048;

fn pass(name: &str, detail: &str) {
    println!("[PASS] {name}: {detail}");
}

/// Smooth positive bump over a constant floor; the standard solver scenario.
fn bump_profile(floor: f64, amp: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| floor + amp * (-(r / width) * (r / width)).exp()
}

fn solver_scenario(
    model: ManifoldModel,
    m: f64,
    t0: f64,
    t1: f64,
    dt: f64,
    cells: usize,
    dirichlet: bool,
) -> SolutionTrajectory {
    let grid = RadialGrid::new(2.0, cells).unwrap();
    let init = bump_profile(0.3, 0.7, 0.5);
    let initial = grid.sample(&init);
    let mut config = SolverConfig::new(t0, t1, dt);
    if dirichlet {
        config.outer_bc = OuterBc::DirichletPositive(init(grid.r_max()));
    }
    solve(&initial, &config, m, &model, &grid).unwrap()
}

/// Classical decay bound Z <= N/(2t) saturates on the self-similar families
/// in flat space: |2tZ/N - 1| <= 1e-2 and scaled margin >= -1e-3 at 2048
/// cells, each case in under ten seconds.
#[test]
fn saturation_of_classical_decay_bound() {
    let mask = MaskParams { boundary_cells: 2, support_frac: 0.1 };
    let mut worst_sat: f64 = 0.0;
    let mut worst_margin = f64::INFINITY;

    // (n, m, family label); b0 = 1 throughout.
    let cases: [(usize, f64, &str); 4] =
        [(1, 2.0, "pme"), (2, 2.0, "pme"), (3, 2.0, "pme"), (3, 0.8, "fd")];
    for (n, m, family) in cases {
        let clock = Instant::now();
        let p = SelfSimilarParams::new(n, m, 1.0).unwrap();
        let times = SolutionTrajectory::uniform_times(0.95, 1.05, 2);
        let r_max = if family == "pme" { 0.9 * p.support_radius(0.95) } else { 4.0 };
        let grid = RadialGrid::new(r_max, CELLS).unwrap();
        let model = ManifoldModel::euclidean(n).unwrap();
        let traj = SolutionTrajectory::sample(grid, model, m, &times, |t, r| {
            if family == "pme" { barenblatt(&p, t, r) } else { fast_diffusion_selfsimilar(&p, t, r) }
        })
        .unwrap();
        let report =
            check_aronson_benilan(&traj, &[0, 1, 2], FtMode::PdeIdentity, &mask, 1e-3).unwrap();
        assert!(report.pass, "{}", report.summary_line());
        for pt in &report.points {
            let sat = (pt.z / pt.bound - 1.0).abs();
            assert!(sat <= 1e-2, "n={n} m={m}: saturation defect {sat:.3e} at r={}", pt.r);
            worst_sat = worst_sat.max(sat);
        }
        worst_margin = worst_margin.min(report.min_scaled_margin);
        let elapsed = clock.elapsed();
        assert!(elapsed.as_secs_f64() < 10.0, "n={n} m={m}: took {elapsed:?}");
    }
    pass(
        "classical decay saturation",
        &format!("worst |2tZ/N - 1| = {worst_sat:.3e}, worst scaled margin = {worst_margin:.3e}"),
    );
}

/// The heat kernel saturates the logarithmic gradient bound: equality to
/// 1e-3 through grid derivatives at 2048 cells and to 1e-6 through the
/// closed-form derivatives.
#[test]
fn heat_kernel_logarithmic_equality() {
    let mut worst_grid: f64 = 0.0;
    for n in 1..=3usize {
        let grid = RadialGrid::new(4.0, CELLS).unwrap();
        let model = ManifoldModel::euclidean(n).unwrap();
        let times = [0.5, 0.8, 1.25, 2.0];
        let traj = SolutionTrajectory::sample(grid, model, 1.0, &times, |t, r| {
            gaussian_heat_kernel(n, t, r)
        })
        .unwrap();
        let report = check_li_yau(
            &traj,
            &[0, 1, 2, 3],
            FtMode::PdeIdentity,
            &MaskParams::default(),
            1e-3,
        )
        .unwrap();
        assert!(report.pass, "{}", report.summary_line());
        for pt in &report.points {
            let defect = (pt.z / pt.bound - 1.0).abs();
            assert!(defect <= 1e-3, "n={n}: grid-derivative defect {defect:.3e}");
            worst_grid = worst_grid.max(defect);
        }
    }

    let mut worst_analytic: f64 = 0.0;
    for n in 1..=3usize {
        for i in 0..=6 {
            let t = 0.5 + 0.25 * i as f64;
            for j in 0..=12 {
                let r = 0.25 * j as f64;
                let gap = gaussian_logdens_grad_sq(t, r) - gaussian_logdens_dt(n, t, r);
                let defect = (gap * 2.0 * t / n as f64 - 1.0).abs();
                assert!(defect <= 1e-6, "n={n} t={t} r={r}: analytic defect {defect:.3e}");
                worst_analytic = worst_analytic.max(defect);
            }
        }
    }
    pass(
        "heat kernel logarithmic equality",
        &format!("grid defect {worst_grid:.3e}, analytic defect {worst_analytic:.3e}"),
    );
}

/// Fast-diffusion curvature bound on hyperbolic space, solver-generated
/// scenario with a Dirichlet floor: scaled margins >= -1e-3 on all checked
/// space-time points and no degradation (factor > 2 toward negative) under
/// one grid/time refinement.
#[test]
fn fast_diffusion_curvature_bound_on_hyperbolic_runs() {
    let mask = MaskParams::default();
    for kappa in [0.25, 1.0] {
        let model = ManifoldModel::hyperbolic(3, kappa).unwrap();
        let base = solver_scenario(model, 0.75, 0.1, 1.0, 0.005, 96, true);
        let ks_base = [20usize, 60, 100, 140, 175];
        let report_base =
            check_fast_diffusion(&base, &ks_base, FtMode::TemporalDifference, &mask, 1e-3)
                .unwrap();
        assert!(report_base.pass, "kappa={kappa}: {}", report_base.summary_line());

        let fine = solver_scenario(model, 0.75, 0.1, 1.0, 0.0025, 192, true);
        let ks_fine: Vec<usize> = ks_base.iter().map(|k| 2 * k).collect();
        let report_fine =
            check_fast_diffusion(&fine, &ks_fine, FtMode::TemporalDifference, &mask, 1e-3)
                .unwrap();
        assert!(report_fine.pass, "kappa={kappa} refined: {}", report_fine.summary_line());
        if report_base.min_scaled_margin < 0.0 {
            assert!(
                report_fine.min_scaled_margin >= 2.0 * report_base.min_scaled_margin,
                "kappa={kappa}: margin degraded under refinement: {} -> {}",
                report_base.min_scaled_margin,
                report_fine.min_scaled_margin
            );
        }
        pass(
            "fast-diffusion curvature bound (hyperbolic solver run)",
            &format!(
                "kappa={kappa}: scaled margins base {:.3e}, refined {:.3e}",
                report_base.min_scaled_margin, report_fine.min_scaled_margin
            ),
        );
    }
}

/// Initial-level decay: the saturation chain c = max Z(t0) keeps the bound
/// exactly on the self-similar families (|margin| <= 1e-2 N/(2t) pointwise),
/// while a generic bump stays strictly inside it.
#[test]
fn initial_level_decay_saturation_and_slack() {
    // Heat kernel, m = 1, n = 2.
    let grid = RadialGrid::new(4.0, CELLS).unwrap();
    let model = ManifoldModel::euclidean(2).unwrap();
    let times = SolutionTrajectory::uniform_times(0.5, 1.0, 4);
    let gauss = SolutionTrajectory::sample(grid, model, 1.0, &times, |t, r| {
        gaussian_heat_kernel(2, t, r)
    })
    .unwrap();

    // Compact-support family, m = 2, n = 2.
    let p = SelfSimilarParams::new(2, 2.0, 1.0).unwrap();
    let grid = RadialGrid::new(0.85 * p.support_radius(0.9), CELLS).unwrap();
    let times = SolutionTrajectory::uniform_times(0.9, 1.1, 4);
    let pme = SolutionTrajectory::sample(grid, model, 2.0, &times, |t, r| barenblatt(&p, t, r))
        .unwrap();

    let mask = MaskParams { boundary_cells: 2, support_frac: 0.1 };
    let mut worst: f64 = 0.0;
    for (traj, label) in [(&gauss, "heat"), (&pme, "pme")] {
        let n_eff = n_effective(traj.model.dim(), traj.m).unwrap();
        let report =
            check_initial_bound_decay(traj, FtMode::PdeIdentity, &mask, 1e-2).unwrap();
        assert!(report.pass, "{label}: {}", report.summary_line());
        for pt in &report.points {
            let scale = n_eff / (2.0 * pt.t);
            let dev = pt.margin.abs() / scale;
            assert!(dev <= 1e-2, "{label}: saturation chain broke: |margin| = {dev:.3e} scaled");
            worst = worst.max(dev);
        }
    }

    // Generic bump via the solver: strictly positive margins.
    let model = ManifoldModel::euclidean(2).unwrap();
    let bump = solver_scenario(model, 2.0, 0.5, 1.0, 0.005, 96, false);
    let report = check_initial_bound_decay(
        &bump,
        FtMode::TemporalDifference,
        &MaskParams::default(),
        1e-3,
    )
    .unwrap();
    assert!(report.pass, "{}", report.summary_line());
    assert!(
        report.min_margin > 0.0,
        "bump scenario should sit strictly inside the bound, got {}",
        report.min_margin
    );
    pass(
        "initial-level decay",
        &format!(
            "saturation chain within {worst:.3e}, bump min margin {:.3e}",
            report.min_margin
        ),
    );
}

/// Two-regime slow-diffusion bound on hyperbolic space: the regimes
/// partition the masked points and scaled margins stay above -1e-3; at
/// kappa = 0 the check reproduces the classical decay margins identically.
#[test]
fn two_regime_bound_hyperbolic_and_flat_reduction() {
    let model = ManifoldModel::hyperbolic(3, 1.0).unwrap();
    let traj = solver_scenario(model, 2.0, 0.25, 0.75, 0.005, 96, true);
    let ks = [15usize, 40, 65, 90];
    let mask = MaskParams::default();
    let report =
        check_slow_diffusion(&traj, &ks, FtMode::TemporalDifference, &mask, 1e-3).unwrap();
    assert!(report.pass, "{}", report.summary_line());
    let expected: usize =
        ks.iter().map(|&k| mask_len(&mask, &traj.snapshots[k])).sum();
    assert_eq!(report.points.len(), expected, "regime masks must cover every masked point");
    assert!(report.points.iter().all(|p| p.regime == 1 || p.regime == 2));
    assert!(report.points.iter().all(|p| p.bound.is_finite()));

    // Flat reduction: R = 0 collapses both regimes onto Z <= N/(2t).
    let p = SelfSimilarParams::new(2, 2.0, 1.0).unwrap();
    let grid = RadialGrid::new(0.9 * p.support_radius(0.95), CELLS).unwrap();
    let flat_model = ManifoldModel::euclidean(2).unwrap();
    let times = SolutionTrajectory::uniform_times(0.95, 1.05, 2);
    let flat =
        SolutionTrajectory::sample(grid, flat_model, 2.0, &times, |t, r| barenblatt(&p, t, r))
            .unwrap();
    let two = check_slow_diffusion(&flat, &[0, 1, 2], FtMode::PdeIdentity, &mask, 1e-3).unwrap();
    let ab = check_aronson_benilan(&flat, &[0, 1, 2], FtMode::PdeIdentity, &mask, 1e-3).unwrap();
    assert_eq!(two.points.len(), ab.points.len());
    let mut worst_gap: f64 = 0.0;
    for (a, b) in two.points.iter().zip(&ab.points) {
        let gap = (a.margin - b.margin).abs();
        assert!(gap <= 1e-12 * b.scale, "reduction gap {gap:.3e} at r = {}", a.r);
        worst_gap = worst_gap.max(gap / b.scale);
    }
    pass(
        "two-regime bound",
        &format!(
            "hyperbolic min scaled margin {:.3e}; flat reduction gap {worst_gap:.3e}",
            report.min_scaled_margin
        ),
    );
}

fn mask_len(mask: &MaskParams, u: &[f64]) -> usize {
    let umax = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (mask.boundary_cells..u.len() - mask.boundary_cells)
        .filter(|&i| u[i] >= mask.support_frac * umax)
        .count()
}

/// Closed-form bound analytics: the sharp bound solves its Riccati equation
/// to 1e-8, its slope matches central differences to 1e-6 relative, and the
/// limit values at the admissibility edge are exact to 1e-8.
#[test]
fn closed_form_bound_analytics() {
    let t_grid: Vec<f64> = (0..100).map(|i| 0.1 + 9.9 * i as f64 / 99.0).collect();
    let mut worst_riccati: f64 = 0.0;
    for (n_eff, r_sup, y) in [(2.0, 1.0, 0.0), (3.0, 0.5, 1.0), (2.0, 1.0, -0.5 + 1e-6)] {
        let res = riccati_residual(&t_grid, y, n_eff, r_sup).unwrap();
        assert!(res <= 1e-8, "(N={n_eff}, R={r_sup}, y={y}): residual {res:.3e}");
        worst_riccati = worst_riccati.max(res);
    }

    let (n_eff, r_sup, t) = (2.4, 0.8, 1.3);
    let y_min = -n_eff * r_sup / 4.0;
    let mut worst_slope: f64 = 0.0;
    for i in 0..100 {
        let y = y_min + 0.001 + 0.12 * i as f64;
        let d = 1e-6 * (1.0 + y.abs()); // stays above y_min: sweep starts 0.001 in
        let fd = (cap_c(t, y + d, n_eff, r_sup).unwrap()
            - cap_c(t, y - d, n_eff, r_sup).unwrap())
            / (2.0 * d);
        let slope = dc_dy(t, y, n_eff, r_sup).unwrap();
        let rel = (slope - fd).abs() / slope.abs().max(1e-300);
        assert!(rel <= 1e-6, "slope mismatch at y = {y}: {slope} vs {fd} (rel {rel:.3e})");
        worst_slope = worst_slope.max(rel);
    }

    let mut worst_limit: f64 = 0.0;
    for (n_eff, r_sup) in [(2.0, 1.0), (3.0, 0.5)] {
        let y_min = -n_eff * r_sup / 4.0;
        for t in [0.3, 1.0, 4.0] {
            let c_lim = cap_c(t, y_min, n_eff, r_sup).unwrap();
            let c_expect = n_eff * r_sup / 2.0 + n_eff / (2.0 * t);
            let dev_c = (c_lim - c_expect).abs() / c_expect;
            let s_lim = dc_dy(t, y_min, n_eff, r_sup).unwrap();
            let s_expect = 2.0 * r_sup * t / 3.0;
            let dev_s = (s_lim - s_expect).abs() / s_expect;
            assert!(dev_c <= 1e-8 && dev_s <= 1e-8, "limit values off: {dev_c:.3e}, {dev_s:.3e}");
            worst_limit = worst_limit.max(dev_c.max(dev_s));
        }
    }
    pass(
        "bound analytics",
        &format!(
            "Riccati residual {worst_riccati:.3e}, slope mismatch {worst_slope:.3e}, \
             limit deviation {worst_limit:.3e}"
        ),
    );
}

/// Evolution identities converge at observed order >= 1.8 over three
/// refinement levels on both closed-form families, and the discrete
/// curvature-dimension defect stays nonnegative at every level.
#[test]
fn evolution_identity_convergence_and_cd_defect() {
    let levels = [(64usize, 4usize), (128, 8), (256, 16)];
    let span = 0.08;

    let gaussian_level = |cells: usize, steps: usize| {
        let grid = RadialGrid::new(3.0, cells).unwrap();
        let model = ManifoldModel::euclidean(2).unwrap();
        let times = SolutionTrajectory::uniform_times(1.0 - span / 2.0, 1.0 + span / 2.0, steps);
        SolutionTrajectory::sample(grid, model, 1.0, &times, |t, r| gaussian_heat_kernel(2, t, r))
            .unwrap()
    };
    let barenblatt_level = |cells: usize, steps: usize| {
        let p = SelfSimilarParams::new(2, 2.0, 1.0).unwrap();
        let grid =
            RadialGrid::new(0.6 * p.support_radius(1.0 - span / 2.0), cells).unwrap();
        let model = ManifoldModel::euclidean(2).unwrap();
        let times = SolutionTrajectory::uniform_times(1.0 - span / 2.0, 1.0 + span / 2.0, steps);
        SolutionTrajectory::sample(grid, model, 2.0, &times, |t, r| barenblatt(&p, t, r)).unwrap()
    };

    for (label, build) in [
        ("heat", &gaussian_level as &dyn Fn(usize, usize) -> SolutionTrajectory),
        ("pme", &barenblatt_level),
    ] {
        let mut residuals = Vec::new();
        for &(cells, steps) in &levels {
            let traj = build(cells, steps);
            let res = evolution_residuals(&traj, steps / 2, FtMode::PdeIdentity).unwrap();
            residuals.push([res.res_y, res.res_u, res.res_z]);

            // The CD defect is exactly nonnegative at the discrete level;
            // its tolerance does not even need the second-order budget the
            // gate allows.
            let fields = compute_fields(&traj, steps / 2, FtMode::PdeIdentity).unwrap();
            let defect = cd_defect(&traj.model, &traj.grid, &fields.f).unwrap();
            let gamma2 = gamma2_radial(&traj.model, &traj.grid, &fields.f).unwrap();
            let lap = radial_laplacian(&traj.model, &traj.grid, &fields.f).unwrap();
            for i in traj.grid.interior_range(2) {
                let scale = 1.0 + gamma2[i].abs() + lap[i] * lap[i] / 2.0;
                assert!(defect[i] >= -1e-10 * scale, "{label}: defect {} at {i}", defect[i]);
            }
        }
        for (j, name) in ["res_y", "res_u", "res_z"].iter().enumerate() {
            for lv in 0..2 {
                let order = observed_order(residuals[lv][j], residuals[lv + 1][j], 1e-11);
                assert!(
                    order >= 1.8,
                    "{label} {name}: order {order:.2} between levels {lv} and {}",
                    lv + 1
                );
            }
        }
        pass(
            "evolution identity convergence",
            &format!(
                "{label}: residual triples {:?} -> {:?} -> {:?}",
                residuals[0], residuals[1], residuals[2]
            ),
        );
    }
}

/// Solver quality gates: per-step mass conservation to 1e-10 under zero-flux
/// boundaries, heat steps matching a dense direct solve to 1e-12, and the
/// comparison principle on twenty seeded ordered pairs.
#[test]
fn solver_quality_gates() {
    // Mass conservation, curved model included.
    let grid = RadialGrid::new(1.5, 48).unwrap();
    let model = ManifoldModel::hyperbolic(3, 0.5).unwrap();
    let initial = grid.sample(bump_profile(0.2, 1.0, 0.4));
    let config = SolverConfig::new(0.5, 0.6, 1e-3);
    let traj = solve(&initial, &config, 2.0, &model, &grid).unwrap();
    let m0 = mass(&grid, &model, &traj.snapshots[0]);
    let mut worst_drift: f64 = 0.0;
    for pair in traj.snapshots.windows(2) {
        let drift = (mass(&grid, &model, &pair[1]) - mass(&grid, &model, &pair[0])).abs();
        assert!(drift <= 1e-10 * m0, "mass drift {drift:.3e} in one step");
        worst_drift = worst_drift.max(drift / m0);
    }

    // Heat step against a dense direct solve of the same linear system.
    let grid = RadialGrid::new(1.0, 16).unwrap();
    let model = ManifoldModel::euclidean(2).unwrap();
    let u0 = grid.sample(|r| 1.0 + 0.5 * (std::f64::consts::PI * r).cos());
    let dt = 1e-3;
    let config = SolverConfig::new(1.0, 2.0, dt);
    let stepped = step(&u0, 1.0, dt, 1.0, &model, &grid, &config).unwrap();

    let n = grid.cells();
    let h = grid.spacing();
    let area = |r: f64| model.warping(r); // n = 2: A(r)^(n-1) = r
    let face_w: Vec<f64> = (0..=n).map(|j| area(grid.face(j))).collect();
    let vol: Vec<f64> = grid.nodes().map(|r| area(r) * h).collect();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        let w_lo = if i == 0 { 0.0 } else { face_w[i] };
        let w_hi = if i + 1 == n { 0.0 } else { face_w[i + 1] };
        let scale = dt / (vol[i] * h);
        a[i][i] = 1.0 + scale * (w_lo + w_hi);
        if i > 0 {
            a[i][i - 1] = -scale * w_lo;
        }
        if i + 1 < n {
            a[i][i + 1] = -scale * w_hi;
        }
        b[i] = u0[i];
    }
    let dense = dense_solve(a, b);
    let mut worst_gap: f64 = 0.0;
    for (x, y) in stepped.iter().zip(&dense) {
        worst_gap = worst_gap.max((x - y).abs());
    }
    assert!(worst_gap <= 1e-12, "heat step deviates from dense solve by {worst_gap:.3e}");

    // Comparison principle on seeded ordered pairs.
    let grid = RadialGrid::new(1.5, 32).unwrap();
    let model = ManifoldModel::euclidean(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..20 {
        let base: Vec<f64> = grid.sample(|_| 0.0);
        let mut lo = base.clone();
        let mut hi = base;
        let (a1, w1, a2, w2, gap): (f64, f64, f64, f64, f64) = (
            rng.gen_range(0.2..1.0),
            rng.gen_range(0.3..1.0),
            rng.gen_range(0.0..0.8),
            rng.gen_range(0.3..1.0),
            rng.gen_range(0.0..0.5),
        );
        for (i, r) in grid.nodes().enumerate() {
            lo[i] = 0.2 + a1 * (-(r / w1) * (r / w1)).exp();
            hi[i] = lo[i] + gap + a2 * (-(r / w2) * (r / w2)).exp();
        }
        let m = if case % 2 == 0 { 2.0 } else { 0.8 };
        let config = SolverConfig::new(0.5, 0.55, 5e-3);
        let lo_t = solve(&lo, &config, m, &model, &grid).unwrap();
        let hi_t = solve(&hi, &config, m, &model, &grid).unwrap();
        for (x, y) in lo_t
            .snapshots
            .last()
            .unwrap()
            .iter()
            .zip(hi_t.snapshots.last().unwrap())
        {
            assert!(*x <= y + 1e-9, "case {case}: ordering violated ({x} > {y})");
        }
    }
    pass(
        "solver quality",
        &format!("mass drift {worst_drift:.3e}/step, dense-solve gap {worst_gap:.3e}, 20 ordered pairs kept order"),
    );
}

#[allow(clippy::needless_range_loop)] // index form keeps the elimination legible
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for col in row + 1..n {
            acc -= a[row][col] * x[col];
        }
        x[row] = acc / a[row][row];
    }
    x
}
