//! Pressure-type transform of positive solutions and its ratio fields.
//!
//! For a positive solution u of u_t = Delta(u^m) the transform
//!
//!   f = m (u^(m-1) - 1) / (m - 1)      (f = log u at m = 1)
//!
//! linearizes the degeneracy: with U = (m-1) f + m = m u^(m-1) > 0 the
//! equation becomes f_t = U (Delta f + |grad f|^2 / U), and the dimensionless
//! ratio fields
//!
//!   X = |grad f|^2 / U,    Y = f_t / U,    Z = X - Y = -Delta f
//!
//! satisfy exact evolution identities under the degenerate elliptic operator
//!
//!   A g = U Delta g + 2m <grad f, grad g>:
//!
//!   (A - d_t) Y = -(m-1) Y^2
//!   (A - d_t) U = (2m-1)(m-1) U X
//!   (A - d_t) Z = 2 Gamma_2(f, f) + (m-1) Z^2
//!
//! and, after inserting the curvature-dimension bound CD(n, -K), the
//! coercivity inequality
//!
//!   (A - d_t) Z >= (2/N) Z^2 - 2 K |grad f|^2,      N = 2 / (2/n + m - 1).
//!
//! The curvature term is linear in |grad f|^2 = U (Z + Y); a variant with
//! that factor squared circulates in print, so `evolution_residuals` reports
//! the margins of both forms side by side. Only the linear one is dimensionally
//! consistent with the derivation and is the one the verifier enforces.
//!
//! Everything here is discrete: spatial derivatives come from the centered
//! stencils in `grid`, f_t either from centered differences of neighboring
//! snapshots (`FtMode::TemporalDifference`, the only choice for solver
//! output) or from the PDE identity itself (`FtMode::PdeIdentity`, preferred
//! for sampled closed-form solutions, where it avoids time-stencil error).

use crate::bounds::n_effective;
use crate::error::{PmeError, Result};
use crate::geometry::{gamma2_radial, radial_laplacian, ManifoldModel};
use crate::grid::RadialGrid;
use crate::solver::SolutionTrajectory;

/// Source of the time derivative f_t.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtMode {
    /// Centered difference of f between the neighboring snapshots; needs
    /// 1 <= k <= len - 2.
    TemporalDifference,
    /// f_t = U (Delta_h f + X); exact up to spatial stencil error whenever
    /// the snapshot solves the PDE.
    PdeIdentity,
}

/// Pressure-type transform of a single positive value.
pub fn hopf_transform(u: f64, m: f64) -> f64 {
    debug_assert!(u > 0.0, "transform needs u > 0, got {u}");
    if m == 1.0 {
        u.ln()
    } else {
        // m (u^(m-1) - 1)/(m-1) via expm1 keeps precision through m -> 1.
        m * ((m - 1.0) * u.ln()).exp_m1() / (m - 1.0)
    }
}

/// All derived fields of one snapshot.
#[derive(Debug, Clone)]
pub struct HopfFields {
    pub t: f64,
    pub m: f64,
    /// Transformed solution f.
    pub f: Vec<f64>,
    /// U = m u^(m-1), the degenerate-ellipticity weight.
    pub big_u: Vec<f64>,
    /// Radial derivative f' (signed).
    pub df: Vec<f64>,
    /// |grad f|^2 = f'^2.
    pub grad_f_sq: Vec<f64>,
    /// Discrete Delta f.
    pub lap_f: Vec<f64>,
    /// X = |grad f|^2 / U >= 0.
    pub x: Vec<f64>,
    /// Y = f_t / U.
    pub y: Vec<f64>,
    /// Z = X - Y; equals -Delta f up to time-stencil error.
    pub z: Vec<f64>,
}

fn transform_snapshot(u: &[f64], m: f64) -> Result<Vec<f64>> {
    for (i, &v) in u.iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            return Err(PmeError::NonPositiveInput { min: v, index: i });
        }
    }
    Ok(u.iter().map(|&v| hopf_transform(v, m)).collect())
}

/// Assemble the ratio fields of snapshot `k` of a trajectory.
pub fn compute_fields(traj: &SolutionTrajectory, k: usize, mode: FtMode) -> Result<HopfFields> {
    let last = traj.len().checked_sub(1).ok_or_else(|| {
        PmeError::InvalidConfig("trajectory has no snapshots".into())
    })?;
    if k > last {
        return Err(PmeError::IndexOutOfRange { index: k, lo: 0, hi: last });
    }
    let m = traj.m;
    let grid = &traj.grid;
    let u = &traj.snapshots[k];
    let f = transform_snapshot(u, m)?;
    let big_u: Vec<f64> = if m == 1.0 {
        vec![1.0; u.len()]
    } else {
        u.iter().map(|&v| m * v.powf(m - 1.0)).collect()
    };
    let df = grid.deriv1(&f)?;
    let grad_f_sq: Vec<f64> = df.iter().map(|d| d * d).collect();
    let lap_f = radial_laplacian(&traj.model, grid, &f)?;
    let x: Vec<f64> = grad_f_sq.iter().zip(&big_u).map(|(g, uu)| g / uu).collect();

    let ft: Vec<f64> = match mode {
        FtMode::PdeIdentity => big_u
            .iter()
            .zip(lap_f.iter().zip(&x))
            .map(|(uu, (l, xx))| uu * (l + xx))
            .collect(),
        FtMode::TemporalDifference => {
            if k == 0 || k == last {
                return Err(PmeError::IndexOutOfRange { index: k, lo: 1, hi: last.max(1) - 1 });
            }
            let f_prev = transform_snapshot(&traj.snapshots[k - 1], m)?;
            let f_next = transform_snapshot(&traj.snapshots[k + 1], m)?;
            let dt_lo = traj.times[k] - traj.times[k - 1];
            let dt_hi = traj.times[k + 1] - traj.times[k];
            (0..f.len())
                .map(|i| {
                    (dt_lo * dt_lo * f_next[i] - dt_hi * dt_hi * f_prev[i]
                        - (dt_lo * dt_lo - dt_hi * dt_hi) * f[i])
                        / (dt_lo * dt_hi * (dt_lo + dt_hi))
                })
                .collect()
        }
    };
    let y: Vec<f64> = ft.iter().zip(&big_u).map(|(v, uu)| v / uu).collect();
    let z: Vec<f64> = x.iter().zip(&y).map(|(xx, yy)| xx - yy).collect();
    Ok(HopfFields { t: traj.times[k], m, f, big_u, df, grad_f_sq, lap_f, x, y, z })
}

/// Apply the degenerate elliptic operator A g = U Delta_h g + 2m f' g' using
/// the weight and drift of already-computed fields.
pub fn apply_a(
    fields: &HopfFields,
    model: &ManifoldModel,
    grid: &RadialGrid,
    g: &[f64],
) -> Result<Vec<f64>> {
    let lap_g = radial_laplacian(model, grid, g)?;
    let dg = grid.deriv1(g)?;
    Ok((0..g.len())
        .map(|i| fields.big_u[i] * lap_g[i] + 2.0 * fields.m * fields.df[i] * dg[i])
        .collect())
}

/// Worst-case defects of the exact evolution identities at snapshot `k`,
/// together with the margins of the coercivity inequality in its linear and
/// squared curvature variants.
#[derive(Debug, Clone, Copy)]
pub struct EvolutionResiduals {
    /// max |(A - d_t) Y + (m-1) Y^2|
    pub res_y: f64,
    /// max |(A - d_t) U - (2m-1)(m-1) U X|
    pub res_u: f64,
    /// max |(A - d_t) Z - 2 Gamma_2(f,f) - (m-1) Z^2|
    pub res_z: f64,
    /// min [(A - d_t) Z - (2/N) Z^2 + 2 K |grad f|^2]; the consistent form.
    pub coercivity_margin_linear: f64,
    /// Same with the curvature term 2 K U (Z+Y)^2; kept for comparison with
    /// the squared variant found in print.
    pub coercivity_margin_squared: f64,
}

/// Evaluate the evolution identity defects of snapshot `k`. Fields at
/// k-1, k, k+1 are built in the given mode, so `TemporalDifference` needs
/// 2 <= k <= len - 3 while `PdeIdentity` needs 1 <= k <= len - 2.
///
/// Derived fields are differentiated once more in space, so the maxima skip
/// four cells at each end rather than the usual two.
pub fn evolution_residuals(
    traj: &SolutionTrajectory,
    k: usize,
    mode: FtMode,
) -> Result<EvolutionResiduals> {
    let len = traj.len();
    let needed = match mode {
        FtMode::PdeIdentity => 1,
        FtMode::TemporalDifference => 2,
    };
    if len < 2 * needed + 1 || k < needed || k > len - 1 - needed {
        return Err(PmeError::IndexOutOfRange {
            index: k,
            lo: needed,
            hi: len.saturating_sub(needed + 1),
        });
    }
    let prev = compute_fields(traj, k - 1, mode)?;
    let here = compute_fields(traj, k, mode)?;
    let next = compute_fields(traj, k + 1, mode)?;
    let m = traj.m;
    let model = &traj.model;
    let grid = &traj.grid;
    let n_eff = n_effective(model.dim(), m)?;
    let cd_k = model.cd_constant();

    let a_y = apply_a(&here, model, grid, &here.y)?;
    let a_u = apply_a(&here, model, grid, &here.big_u)?;
    let a_z = apply_a(&here, model, grid, &here.z)?;
    let gamma2 = gamma2_radial(model, grid, &here.f)?;

    let dt_lo = here.t - prev.t;
    let dt_hi = next.t - here.t;
    let ddt = |lo: f64, mid: f64, hi: f64| {
        (dt_lo * dt_lo * hi - dt_hi * dt_hi * lo - (dt_lo * dt_lo - dt_hi * dt_hi) * mid)
            / (dt_lo * dt_hi * (dt_lo + dt_hi))
    };

    let mut res = EvolutionResiduals {
        res_y: 0.0,
        res_u: 0.0,
        res_z: 0.0,
        coercivity_margin_linear: f64::INFINITY,
        coercivity_margin_squared: f64::INFINITY,
    };
    for i in grid.interior_range(4) {
        let y = here.y[i];
        let u = here.big_u[i];
        let x = here.x[i];
        let z = here.z[i];
        let dy_dt = ddt(prev.y[i], y, next.y[i]);
        let du_dt = ddt(prev.big_u[i], u, next.big_u[i]);
        let dz_dt = ddt(prev.z[i], z, next.z[i]);

        res.res_y = res.res_y.max((a_y[i] - dy_dt + (m - 1.0) * y * y).abs());
        res.res_u = res
            .res_u
            .max((a_u[i] - du_dt - (2.0 * m - 1.0) * (m - 1.0) * u * x).abs());
        let lhs_z = a_z[i] - dz_dt;
        res.res_z = res
            .res_z
            .max((lhs_z - 2.0 * gamma2[i] - (m - 1.0) * z * z).abs());

        let quad = 2.0 / n_eff * z * z;
        let margin_lin = lhs_z - quad + 2.0 * cd_k * here.grad_f_sq[i];
        let margin_sq = lhs_z - quad + 2.0 * cd_k * u * (z + y) * (z + y);
        res.coercivity_margin_linear = res.coercivity_margin_linear.min(margin_lin);
        res.coercivity_margin_squared = res.coercivity_margin_squared.min(margin_sq);
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{barenblatt, gaussian_heat_kernel, SelfSimilarParams};

    fn gaussian_traj(n: usize, cells: usize, t_mid: f64, dt: f64, r_max: f64) -> SolutionTrajectory {
        let grid = RadialGrid::new(r_max, cells).unwrap();
        let model = ManifoldModel::euclidean(n).unwrap();
        let times = [t_mid - dt, t_mid, t_mid + dt];
        SolutionTrajectory::sample(grid, model, 1.0, &times, |t, r| gaussian_heat_kernel(n, t, r))
            .unwrap()
    }

    #[test]
    fn transform_frozen_values() {
        assert_eq!(hopf_transform(1.0, 2.0), 0.0);
        assert_eq!(hopf_transform(1.0, 0.75), 0.0);
        assert!((hopf_transform(3.0, 2.0) - 4.0).abs() < 1e-14);
        // m = 1/2, u = 4: (1/2)(1/2 - 1)/(-1/2) = 1/2.
        assert!((hopf_transform(4.0, 0.5) - 0.5).abs() < 1e-14);
        assert!((hopf_transform(std::f64::consts::E, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transform_continuous_through_heat_exponent() {
        let u = std::f64::consts::E;
        for m in [1.0 - 1e-8, 1.0 + 1e-8] {
            let f = hopf_transform(u, m);
            assert!((f - 1.0).abs() < 1e-6, "m = {m}: f = {f}");
        }
        // Monotone in u for fixed m.
        for &m in &[0.6, 1.0, 2.0, 3.0] {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..50 {
                let f = hopf_transform(0.1 * i as f64, m);
                assert!(f > prev);
                prev = f;
            }
        }
    }

    #[test]
    fn constant_solution_has_null_ratio_fields() {
        let grid = RadialGrid::new(2.0, 24).unwrap();
        let model = ManifoldModel::hyperbolic(3, 0.5).unwrap();
        let times = SolutionTrajectory::uniform_times(1.0, 1.4, 4);
        let traj = SolutionTrajectory::sample(grid, model, 2.0, &times, |_, _| 0.7).unwrap();
        for mode in [FtMode::TemporalDifference, FtMode::PdeIdentity] {
            let fields = compute_fields(&traj, 2, mode).unwrap();
            for i in 0..fields.f.len() {
                assert!(fields.x[i].abs() < 1e-13);
                assert!(fields.y[i].abs() < 1e-12);
                assert!(fields.z[i].abs() < 1e-12);
                assert!((fields.big_u[i] - 2.0 * 0.7f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ratio_fields_satisfy_construction_identities() {
        let p = SelfSimilarParams::new(2, 2.0, 1.0).unwrap();
        let grid = RadialGrid::new(0.7 * p.support_radius(1.0), 128).unwrap();
        let model = ManifoldModel::euclidean(2).unwrap();
        let times = SolutionTrajectory::uniform_times(0.9, 1.1, 4);
        let traj =
            SolutionTrajectory::sample(grid, model, 2.0, &times, |t, r| barenblatt(&p, t, r))
                .unwrap();
        let fields = compute_fields(&traj, 2, FtMode::PdeIdentity).unwrap();
        for i in 0..fields.f.len() {
            // Z + Y = X by construction.
            let scale = fields.x[i].abs() + fields.y[i].abs() + 1.0;
            assert!((fields.z[i] + fields.y[i] - fields.x[i]).abs() < 1e-13 * scale);
            // X >= 0 and U > 0.
            assert!(fields.x[i] >= 0.0 && fields.big_u[i] > 0.0);
            // In PdeIdentity mode Z = -Delta_h f to rounding.
            assert!(
                (fields.z[i] + fields.lap_f[i]).abs() < 1e-10 * (1.0 + fields.lap_f[i].abs())
            );
        }
    }

    #[test]
    fn gaussian_sharp_gap_in_both_modes() {
        // X - Y = n/(2t) for the heat kernel; PdeIdentity is exact on the
        // quadratic log-density, the time stencil adds O(dt^2).
        let traj = gaussian_traj(2, 256, 1.0, 0.01, 3.0);
        let exact = 2.0 / (2.0 * 1.0);
        let pde = compute_fields(&traj, 1, FtMode::PdeIdentity).unwrap();
        let td = compute_fields(&traj, 1, FtMode::TemporalDifference).unwrap();
        for i in traj.grid.interior_range(2) {
            assert!((pde.z[i] - exact).abs() < 1e-10, "pde z = {}", pde.z[i]);
            assert!((td.z[i] - exact).abs() < 1e-3, "td z = {}", td.z[i]);
        }
    }

    #[test]
    fn modes_agree_at_second_order_in_dt() {
        let worst_gap = |dt: f64| {
            let traj = gaussian_traj(2, 128, 1.0, dt, 3.0);
            let pde = compute_fields(&traj, 1, FtMode::PdeIdentity).unwrap();
            let td = compute_fields(&traj, 1, FtMode::TemporalDifference).unwrap();
            traj.grid
                .interior_range(2)
                .map(|i| (pde.y[i] - td.y[i]).abs())
                .fold(0.0, f64::max)
        };
        let coarse = worst_gap(0.02);
        let fine = worst_gap(0.01);
        assert!(fine < 0.35 * coarse, "mode gap not O(dt^2): {coarse} vs {fine}");
    }

    #[test]
    fn barenblatt_saturates_effective_dimension() {
        let p = SelfSimilarParams::new(3, 2.0, 1.0).unwrap();
        let t = 1.0;
        let grid = RadialGrid::new(0.8 * p.support_radius(t), 512).unwrap();
        let model = ManifoldModel::euclidean(3).unwrap();
        let times = SolutionTrajectory::uniform_times(0.95, 1.05, 2);
        let traj =
            SolutionTrajectory::sample(grid, model, 2.0, &times, |tt, r| barenblatt(&p, tt, r))
                .unwrap();
        let fields = compute_fields(&traj, 1, FtMode::PdeIdentity).unwrap();
        let expected = p.effective_dimension() / (2.0 * t);
        let mut umax: f64 = 0.0;
        for &v in &traj.snapshots[1] {
            umax = umax.max(v);
        }
        for i in traj.grid.interior_range(2) {
            if traj.snapshots[1][i] >= 0.1 * umax {
                assert!(
                    (fields.z[i] - expected).abs() < 1e-10 * expected,
                    "z = {} vs {expected}",
                    fields.z[i]
                );
            }
        }
    }

    #[test]
    fn operator_identity_on_f_itself() {
        // A f = U (Y - X) + 2m U X, an algebraic identity of the stored
        // fields in PdeIdentity mode.
        let traj = gaussian_traj(3, 128, 1.0, 0.01, 2.5);
        let fields = compute_fields(&traj, 1, FtMode::PdeIdentity).unwrap();
        let af = apply_a(&fields, &traj.model, &traj.grid, &fields.f).unwrap();
        for (i, &av) in af.iter().enumerate() {
            let rhs = fields.big_u[i] * (fields.y[i] - fields.x[i])
                + 2.0 * fields.m * fields.big_u[i] * fields.x[i];
            assert!((av - rhs).abs() < 1e-10 * (1.0 + rhs.abs()), "{av} vs {rhs}");
        }
        let zero = apply_a(&fields, &traj.model, &traj.grid, &vec![3.0; fields.f.len()]).unwrap();
        for v in zero {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn index_preconditions_are_enforced() {
        let traj = gaussian_traj(2, 32, 1.0, 0.01, 2.0);
        assert!(matches!(
            compute_fields(&traj, 0, FtMode::TemporalDifference),
            Err(PmeError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            compute_fields(&traj, 2, FtMode::TemporalDifference),
            Err(PmeError::IndexOutOfRange { .. })
        ));
        assert!(compute_fields(&traj, 0, FtMode::PdeIdentity).is_ok());
        assert!(matches!(
            evolution_residuals(&traj, 0, FtMode::PdeIdentity),
            Err(PmeError::IndexOutOfRange { .. })
        ));
        // TemporalDifference residuals need two spare snapshots per side.
        assert!(matches!(
            evolution_residuals(&traj, 1, FtMode::TemporalDifference),
            Err(PmeError::IndexOutOfRange { .. })
        ));
    }

    fn barenblatt_traj(cells: usize, steps: usize, span: f64) -> SolutionTrajectory {
        let p = SelfSimilarParams::new(2, 2.0, 1.0).unwrap();
        let grid = RadialGrid::new(0.6 * p.support_radius(1.0 - span / 2.0), cells).unwrap();
        let model = ManifoldModel::euclidean(2).unwrap();
        let times = SolutionTrajectory::uniform_times(1.0 - span / 2.0, 1.0 + span / 2.0, steps);
        SolutionTrajectory::sample(grid, model, 2.0, &times, |t, r| barenblatt(&p, t, r)).unwrap()
    }

    #[test]
    fn evolution_residuals_second_order_on_barenblatt() {
        // Halve h and dt together: each defect must drop by ~4x.
        let coarse = {
            let traj = barenblatt_traj(64, 4, 0.08);
            evolution_residuals(&traj, 2, FtMode::PdeIdentity).unwrap()
        };
        let fine = {
            let traj = barenblatt_traj(128, 8, 0.08);
            evolution_residuals(&traj, 4, FtMode::PdeIdentity).unwrap()
        };
        for (a, b, name) in [
            (coarse.res_y, fine.res_y, "res_y"),
            (coarse.res_u, fine.res_u, "res_u"),
            (coarse.res_z, fine.res_z, "res_z"),
        ] {
            assert!(
                b < 0.35 * a || (a < 1e-12 && b < 1e-12),
                "{name} did not converge: {a:.3e} -> {b:.3e}"
            );
        }
        // Flat space: the coercivity inequality margin stays nonnegative.
        assert!(coarse.coercivity_margin_linear > -1e-10);
        // K = 0 makes the linear and squared variants coincide.
        assert_eq!(coarse.coercivity_margin_linear, coarse.coercivity_margin_squared);
    }

    #[test]
    fn fields_continuous_in_m_near_one() {
        let grid = RadialGrid::new(2.5, 96).unwrap();
        let model = ManifoldModel::euclidean(2).unwrap();
        let times = SolutionTrajectory::uniform_times(0.95, 1.05, 2);
        let build = |m: f64| {
            let traj =
                SolutionTrajectory::sample(grid.clone(), model, m, &times, |t, r| {
                    gaussian_heat_kernel(2, t, r)
                })
                .unwrap();
            compute_fields(&traj, 1, FtMode::PdeIdentity).unwrap()
        };
        let base = build(1.0);
        for m in [1.0 - 1e-6, 1.0 + 1e-6] {
            let pert = build(m);
            for i in grid.interior_range(2) {
                assert!((pert.f[i] - base.f[i]).abs() < 1e-4);
                assert!((pert.x[i] - base.x[i]).abs() < 1e-4);
                assert!((pert.y[i] - base.y[i]).abs() < 1e-4);
                assert!((pert.z[i] - base.z[i]).abs() < 1e-4);
            }
        }
    }
}
