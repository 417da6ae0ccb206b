//! Pointwise verification of gradient estimates over discrete ratio fields.
//!
//! Each check walks masked interior points of one or more snapshots, computes
//! the applicable bound, and records `margin = bound - estimated quantity`.
//! A check passes when the worst margin, scaled by
//! `max(|bound|, N/(2t))` pointwise, stays above `-tol_scale`; this keeps a
//! true inequality from failing on discretization noise while still flagging
//! genuine violations.
//!
//! Masking follows two rules: skip `boundary_cells` at each end of the grid
//! (stencil pollution) and, for compactly supported profiles, skip points
//! with u below `support_frac` of the snapshot maximum (the transform
//! degenerates at the free boundary).

use std::fmt;
use std::str::FromStr;

use crate::bounds::{
    big_q, cap_c, dc_dy, decay_from_initial_bound, fast_diffusion_rhs, n_effective, regime2_rhs,
};
use crate::error::{PmeError, Result};
use crate::geometry::cd_defect;
use crate::hopf::{compute_fields, FtMode, HopfFields};
use crate::solver::SolutionTrajectory;

/// Default relative tolerance for pass/fail decisions.
pub const DEFAULT_TOL_SCALE: f64 = 1e-3;

/// The estimates this laboratory knows how to verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckId {
    /// Z <= N/(2t) on flat models (classical semiconvexity decay).
    AronsonBenilan,
    /// |grad log u|^2 - (log u)_t <= n/(2t) for the heat equation, flat.
    LiYau,
    /// X - Y <= N/(2t) + curvature term, fast diffusion 1/2 < m < 1.
    FastDiffusionCurvature,
    /// Z <= (2t/N + 1/c)^(-1) given Z <= c initially, flat.
    InitialBoundDecay,
    /// Two-regime bound for m > 1 under CD(n, -K).
    SlowDiffusionCurvature,
    /// Tangent-line family C(t,y0) + C'(t,y0)(Y - y0) >= Z for y0 >= -NR/4.
    FamilyBound,
    /// Discrete Gamma_2 >= (1/n)(Lf)^2 - K |grad f|^2.
    CurvatureDimension,
}

impl CheckId {
    pub const ALL: [CheckId; 7] = [
        CheckId::AronsonBenilan,
        CheckId::LiYau,
        CheckId::FastDiffusionCurvature,
        CheckId::InitialBoundDecay,
        CheckId::SlowDiffusionCurvature,
        CheckId::FamilyBound,
        CheckId::CurvatureDimension,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::AronsonBenilan => "aronson-benilan",
            CheckId::LiYau => "li-yau",
            CheckId::FastDiffusionCurvature => "fast-diffusion-curvature",
            CheckId::InitialBoundDecay => "initial-bound-decay",
            CheckId::SlowDiffusionCurvature => "slow-diffusion-curvature",
            CheckId::FamilyBound => "family-bound",
            CheckId::CurvatureDimension => "curvature-dimension",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = PmeError;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = CheckId::ALL.iter().map(|c| c.as_str()).collect();
                PmeError::InvalidConfig(format!(
                    "unknown check '{s}'; known checks: {}",
                    known.join(", ")
                ))
            })
    }
}

/// Which grid points a check may use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskParams {
    /// Cells dropped at each end of the grid.
    pub boundary_cells: usize,
    /// Points with u below this fraction of the snapshot max are dropped.
    pub support_frac: f64,
}

impl Default for MaskParams {
    fn default() -> Self {
        MaskParams { boundary_cells: 2, support_frac: 0.05 }
    }
}

impl MaskParams {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.support_frac) {
            return Err(PmeError::InvalidConfig(format!(
                "support fraction must lie in [0, 1), got {}",
                self.support_frac
            )));
        }
        Ok(())
    }

    fn indices(&self, u: &[f64]) -> Vec<usize> {
        let len = u.len();
        if 2 * self.boundary_cells >= len {
            return Vec::new();
        }
        let umax = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (self.boundary_cells..len - self.boundary_cells)
            .filter(|&i| u[i] >= self.support_frac * umax)
            .collect()
    }
}

/// One verified space-time point.
#[derive(Debug, Clone, Copy)]
pub struct PointRecord {
    pub t: f64,
    pub r: f64,
    pub u: f64,
    pub f: f64,
    pub big_u: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// The bound the estimate asserts at this point.
    pub bound: f64,
    /// bound minus the estimated quantity; nonnegative when the estimate holds.
    pub margin: f64,
    /// Normalization used for the pass decision.
    pub scale: f64,
    /// 0 for single-regime checks; regime or sweep index otherwise.
    pub regime: u8,
}

/// Outcome of one check over one trajectory.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub check: CheckId,
    pub tol_scale: f64,
    pub points: Vec<PointRecord>,
    pub min_margin: f64,
    pub min_scaled_margin: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn summary_line(&self) -> String {
        format!(
            "{} {}: points={} min_margin={:.6e} min_scaled_margin={:.6e} tol={:.1e}",
            self.check,
            if self.pass { "PASS" } else { "FAIL" },
            self.points.len(),
            self.min_margin,
            self.min_scaled_margin,
            self.tol_scale
        )
    }
}

fn finalize(
    check: CheckId,
    tol_scale: f64,
    points: Vec<PointRecord>,
    notes: Vec<String>,
) -> Result<VerificationReport> {
    if points.is_empty() {
        return Err(PmeError::InvalidConfig(format!(
            "check {check}: no points passed the applicability mask"
        )));
    }
    if !(tol_scale >= 0.0) {
        return Err(PmeError::InvalidConfig(format!(
            "tolerance must be >= 0, got {tol_scale}"
        )));
    }
    let mut min_margin = f64::INFINITY;
    let mut min_scaled = f64::INFINITY;
    for p in &points {
        min_margin = min_margin.min(p.margin);
        min_scaled = min_scaled.min(p.margin / p.scale);
    }
    Ok(VerificationReport {
        check,
        tol_scale,
        points,
        min_margin,
        min_scaled_margin: min_scaled,
        pass: min_scaled >= -tol_scale,
        notes,
    })
}

fn require_flat(traj: &SolutionTrajectory, what: &str) -> Result<()> {
    if !traj.model.is_flat() {
        return Err(PmeError::ModelNotFlat(format!(
            "{what} needs a flat model, got K = {}",
            traj.model.cd_constant()
        )));
    }
    Ok(())
}

fn require_snapshots(ks: &[usize]) -> Result<()> {
    if ks.is_empty() {
        return Err(PmeError::InvalidConfig("no snapshots requested".into()));
    }
    Ok(())
}

/// Elapsed time since the trajectory's birth, which is what the 1/t-type
/// decay bounds blow up in. The birth snapshot itself carries no bound.
fn positive_age(traj: &SolutionTrajectory, k: usize) -> Result<f64> {
    let age = traj.age(k);
    if !(age > 0.0) {
        return Err(PmeError::OutOfRange(format!(
            "snapshot {k} (t = {}) is not past the trajectory's birth time {}; \
             decay bounds need positive elapsed time",
            traj.times[k], traj.birth
        )));
    }
    Ok(age)
}

fn point_at(traj: &SolutionTrajectory, fields: &HopfFields, i: usize) -> PointRecord {
    PointRecord {
        t: fields.t,
        r: traj.grid.node(i),
        u: 0.0, // filled by callers that know the snapshot index
        f: fields.f[i],
        big_u: fields.big_u[i],
        x: fields.x[i],
        y: fields.y[i],
        z: fields.z[i],
        bound: 0.0,
        margin: 0.0,
        scale: 1.0,
        regime: 0,
    }
}

/// Classical semiconvexity decay Z <= N/(2t) on flat models, with t the
/// elapsed time since the trajectory's birth.
pub fn check_aronson_benilan(
    traj: &SolutionTrajectory,
    ks: &[usize],
    mode: FtMode,
    mask: &MaskParams,
    tol_scale: f64,
) -> Result<VerificationReport> {
    require_flat(traj, "the classical decay bound")?;
    require_snapshots(ks)?;
    mask.validate()?;
    let n_eff = n_effective(traj.model.dim(), traj.m)?;
    let mut points = Vec::new();
    for &k in ks {
        let age = positive_age(traj, k)?;
        let fields = compute_fields(traj, k, mode)?;
        let u = &traj.snapshots[k];
        for i in mask.indices(u) {
            let bound = n_eff / (2.0 * age);
            let mut p = point_at(traj, &fields, i);
            p.u = u[i];
            p.bound = bound;
            p.margin = bound - fields.z[i];
            p.scale = bound;
            points.push(p);
        }
    }
    finalize(CheckId::AronsonBenilan, tol_scale, points, vec![format!("N = {n_eff:.12}")])
}

/// Sharp logarithmic gradient bound for the heat equation on flat models.
pub fn check_li_yau(
    traj: &SolutionTrajectory,
    ks: &[usize],
    mode: FtMode,
    mask: &MaskParams,
    tol_scale: f64,
) -> Result<VerificationReport> {
    if traj.m != 1.0 {
        return Err(PmeError::OutOfRange(format!(
            "the logarithmic gradient bound needs m = 1, got m = {}",
            traj.m
        )));
    }
    require_flat(traj, "the logarithmic gradient bound")?;
    require_snapshots(ks)?;
    mask.validate()?;
    let n = traj.model.dim() as f64;
    let mut points = Vec::new();
    for &k in ks {
        let age = positive_age(traj, k)?;
        let fields = compute_fields(traj, k, mode)?;
        let u = &traj.snapshots[k];
        for i in mask.indices(u) {
            let bound = n / (2.0 * age);
            let mut p = point_at(traj, &fields, i);
            p.u = u[i];
            p.bound = bound;
            // With U = 1 the quantity X - Y is |grad f|^2 - f_t itself.
            p.margin = bound - fields.z[i];
            p.scale = bound;
            points.push(p);
        }
    }
    finalize(CheckId::LiYau, tol_scale, points, Vec::new())
}

/// Fast-diffusion gradient bound with curvature correction, 1/2 < m < 1.
pub fn check_fast_diffusion(
    traj: &SolutionTrajectory,
    ks: &[usize],
    mode: FtMode,
    mask: &MaskParams,
    tol_scale: f64,
) -> Result<VerificationReport> {
    require_snapshots(ks)?;
    mask.validate()?;
    let m = traj.m;
    let n = traj.model.dim();
    let cd_k = traj.model.cd_constant();
    let n_eff = n_effective(n, m)?;
    let mut points = Vec::new();
    // Worst disagreement between X - Y and its u-variable form
    // m |grad u|^2 / u^(3-m) - u_t/u, recovered algebraically from the
    // stored fields; pure algebra, so this stays at rounding level.
    let mut u_form_dev: f64 = 0.0;
    for &k in ks {
        let age = positive_age(traj, k)?;
        let fields = compute_fields(traj, k, mode)?;
        let u = &traj.snapshots[k];
        for i in mask.indices(u) {
            let bound = fast_diffusion_rhs(age, u[i], m, n, cd_k)?;
            let mut p = point_at(traj, &fields, i);
            p.u = u[i];
            p.bound = bound;
            p.margin = bound - fields.z[i];
            p.scale = bound.abs().max(n_eff / (2.0 * age));
            points.push(p);

            let grad_u = fields.df[i] * u[i].powf(2.0 - m) / m;
            let alt = m * grad_u * grad_u * u[i].powf(m - 3.0) - fields.y[i];
            u_form_dev = u_form_dev.max((alt - fields.z[i]).abs());
        }
    }
    finalize(
        CheckId::FastDiffusionCurvature,
        tol_scale,
        points,
        vec![format!(
            "u-variable form m|grad u|^2/u^(3-m) - u_t/u agrees with X - Y to {u_form_dev:.2e}"
        )],
    )
}

/// Decay of an initial semiconvexity level on flat models: with
/// c = max Z over the first snapshot's masked interior,
/// Z(t) <= (2(t - t0)/N + 1/c)^(-1) for every later snapshot.
///
/// The level c always comes from `FtMode::PdeIdentity` fields of snapshot 0
/// (Z = -Delta_h f, the quantity the hypothesis constrains); `mode` governs
/// the later snapshots only.
pub fn check_initial_bound_decay(
    traj: &SolutionTrajectory,
    mode: FtMode,
    mask: &MaskParams,
    tol_scale: f64,
) -> Result<VerificationReport> {
    require_flat(traj, "the initial-level decay bound")?;
    mask.validate()?;
    let n_eff = n_effective(traj.model.dim(), traj.m)?;
    let len = traj.len();
    let first = compute_fields(traj, 0, FtMode::PdeIdentity)?;
    let mask0 = mask.indices(&traj.snapshots[0]);
    if mask0.is_empty() {
        return Err(PmeError::InvalidConfig(
            "initial snapshot has no masked points to estimate the level c".into(),
        ));
    }
    let c_raw = mask0.iter().map(|&i| first.z[i]).fold(f64::NEG_INFINITY, f64::max);
    let c = c_raw.max(0.0);
    let t0 = traj.times[0];

    let last_k = match mode {
        FtMode::PdeIdentity => len.checked_sub(1),
        FtMode::TemporalDifference => len.checked_sub(2),
    }
    .unwrap_or(0);
    if last_k < 1 {
        return Err(PmeError::InvalidConfig(
            "need at least one usable snapshot after the initial one".into(),
        ));
    }

    let mut points = Vec::new();
    let mut final_bound = f64::NAN;
    let mut final_elapsed = f64::NAN;
    for k in 1..=last_k {
        let fields = compute_fields(traj, k, mode)?;
        let u = &traj.snapshots[k];
        let elapsed = fields.t - t0;
        let bound = decay_from_initial_bound(elapsed, c, n_eff)?;
        final_bound = bound;
        final_elapsed = elapsed;
        for i in mask.indices(u) {
            let mut p = point_at(traj, &fields, i);
            p.u = u[i];
            p.bound = bound;
            p.margin = bound - fields.z[i];
            p.scale = bound.abs().max(if fields.t > 0.0 {
                n_eff / (2.0 * fields.t)
            } else {
                0.0
            });
            points.push(p);
        }
    }
    let mut notes = vec![format!(
        "initial level c = {c:.6e} (raw max Z over first snapshot = {c_raw:.6e})"
    )];
    // An alternate printed form of the same bound circulates as
    // c / (1 + c N/(2t)); it differs from the adopted (2t/N + 1/c)^(-1)
    // and does not recover N/(2t) as c -> infinity. Recorded for comparison.
    let alt = if c.is_finite() {
        c / (1.0 + c * n_eff / (2.0 * final_elapsed))
    } else {
        f64::INFINITY
    };
    notes.push(format!(
        "at final elapsed time {final_elapsed:.6e}: adopted bound {final_bound:.6e}, \
         alternate form c/(1 + cN/(2t)) = {alt:.6e}"
    ));
    finalize(CheckId::InitialBoundDecay, tol_scale, points, notes)
}

/// Two-regime gradient bound for slow diffusion (m > 1) under CD(n, -K):
/// with R = K sup U, points with Y > -NR/4 must satisfy X <= Q(t, Y) and the
/// rest Z <= N/(2t) + NR/2, t again elapsed since birth. Every masked point
/// lands in exactly one regime.
pub fn check_slow_diffusion(
    traj: &SolutionTrajectory,
    ks: &[usize],
    mode: FtMode,
    mask: &MaskParams,
    tol_scale: f64,
) -> Result<VerificationReport> {
    if !(traj.m > 1.0) {
        return Err(PmeError::OutOfRange(format!(
            "the two-regime bound needs m > 1, got m = {}",
            traj.m
        )));
    }
    require_snapshots(ks)?;
    mask.validate()?;
    let n_eff = n_effective(traj.model.dim(), traj.m)?;
    let cd_k = traj.model.cd_constant();

    // R approximates the global sup of K U by the masked space-time grid sup;
    // scenarios with a constant Dirichlet floor make this the true sup.
    let all_fields: Vec<(usize, HopfFields)> = ks
        .iter()
        .map(|&k| compute_fields(traj, k, mode).map(|f| (k, f)))
        .collect::<Result<_>>()?;
    let mut r_sup: f64 = 0.0;
    for (k, fields) in &all_fields {
        for i in mask.indices(&traj.snapshots[*k]) {
            r_sup = r_sup.max(cd_k * fields.big_u[i]);
        }
    }

    let threshold = -n_eff * r_sup / 4.0;
    let mut points = Vec::new();
    let (mut n1, mut n2) = (0usize, 0usize);
    let (mut min1, mut min2) = (f64::INFINITY, f64::INFINITY);
    for (k, fields) in &all_fields {
        let age = positive_age(traj, *k)?;
        let u = &traj.snapshots[*k];
        for i in mask.indices(u) {
            let mut p = point_at(traj, fields, i);
            p.u = u[i];
            if fields.y[i] > threshold {
                p.regime = 1;
                p.bound = big_q(age, fields.y[i], n_eff, r_sup)?;
                p.margin = p.bound - fields.x[i];
                n1 += 1;
                min1 = min1.min(p.margin);
            } else {
                p.regime = 2;
                p.bound = regime2_rhs(age, n_eff, r_sup)?;
                p.margin = p.bound - fields.z[i];
                n2 += 1;
                min2 = min2.min(p.margin);
            }
            p.scale = p.bound.abs().max(n_eff / (2.0 * age));
            points.push(p);
        }
    }
    let fmt_min = |n: usize, m: f64| {
        if n > 0 { format!("{m:.6e}") } else { "none".to_string() }
    };
    let notes = vec![
        format!("R = K sup U = {r_sup:.6e} (masked space-time grid sup), threshold -NR/4 = {threshold:.6e}"),
        format!("regime 1: {n1} points, min margin {}", fmt_min(n1, min1)),
        format!("regime 2: {n2} points, min margin {}", fmt_min(n2, min2)),
    ];
    finalize(CheckId::SlowDiffusionCurvature, tol_scale, points, notes)
}

/// Tangent-line family: for each y0 >= -NR/4,
/// Z <= C(t, y0) + C'(t, y0) (Y - y0) pointwise. At y0 = Y this reproduces
/// regime 1 of the two-regime bound. Empty `y_samples` selects the default
/// sweep {-NR/4, 0, NR, 4NR} (collapsing to {0} when R = 0).
pub fn check_family_bound(
    traj: &SolutionTrajectory,
    k: usize,
    mode: FtMode,
    y_samples: &[f64],
    mask: &MaskParams,
    tol_scale: f64,
) -> Result<VerificationReport> {
    if !(traj.m > 1.0) {
        return Err(PmeError::OutOfRange(format!(
            "the tangent-line family needs m > 1, got m = {}",
            traj.m
        )));
    }
    mask.validate()?;
    let n_eff = n_effective(traj.model.dim(), traj.m)?;
    let cd_k = traj.model.cd_constant();
    let fields = compute_fields(traj, k, mode)?;
    let u = &traj.snapshots[k];
    let idx = mask.indices(u);
    let r_sup = idx
        .iter()
        .map(|&i| cd_k * fields.big_u[i])
        .fold(0.0f64, f64::max);

    let sweep: Vec<f64> = if y_samples.is_empty() {
        if r_sup == 0.0 {
            vec![0.0]
        } else {
            let nr = n_eff * r_sup;
            vec![-nr / 4.0, 0.0, nr, 4.0 * nr]
        }
    } else {
        y_samples.to_vec()
    };

    let mut points = Vec::new();
    let age = positive_age(traj, k)?;
    for (j, &y0) in sweep.iter().enumerate() {
        let c0 = cap_c(age, y0, n_eff, r_sup)?;
        let slope = dc_dy(age, y0, n_eff, r_sup)?;
        for &i in &idx {
            let mut p = point_at(traj, &fields, i);
            p.u = u[i];
            p.bound = c0 + slope * (fields.y[i] - y0);
            p.margin = p.bound - fields.z[i];
            p.scale = p.bound.abs().max(n_eff / (2.0 * age));
            p.regime = (j + 1).min(u8::MAX as usize) as u8;
            points.push(p);
        }
    }
    let notes = vec![format!(
        "R = {r_sup:.6e}; tangent lines anchored at y0 in {sweep:?}"
    )];
    finalize(CheckId::FamilyBound, tol_scale, points, notes)
}

/// Discrete curvature-dimension inequality on the transformed field:
/// Gamma_2(f, f) >= (1/n)(Delta_h f)^2 - K |grad f|^2. The margin is the
/// shared-stencil defect from `geometry`, which is exactly nonnegative for
/// smooth data; the recorded bound column is assembled from the same fields.
pub fn check_curvature_dimension(
    traj: &SolutionTrajectory,
    ks: &[usize],
    mask: &MaskParams,
    tol_scale: f64,
) -> Result<VerificationReport> {
    require_snapshots(ks)?;
    mask.validate()?;
    let n = traj.model.dim() as f64;
    let cd_k = traj.model.cd_constant();
    let mut points = Vec::new();
    for &k in ks {
        let fields = compute_fields(traj, k, FtMode::PdeIdentity)?;
        let defect = cd_defect(&traj.model, &traj.grid, &fields.f)?;
        let u = &traj.snapshots[k];
        for i in mask.indices(u) {
            let mut p = point_at(traj, &fields, i);
            p.u = u[i];
            p.bound = fields.lap_f[i] * fields.lap_f[i] / n - cd_k * fields.grad_f_sq[i];
            p.margin = defect[i];
            p.scale = p.bound.abs().max(1.0);
            points.push(p);
        }
    }
    finalize(CheckId::CurvatureDimension, tol_scale, points, Vec::new())
}

/// Dispatch a check by id with uniform arguments. `FamilyBound` anchors at
/// the middle requested snapshot with the default sweep; `InitialBoundDecay`
/// ignores `ks` (it always spans the whole trajectory).
pub fn run_check(
    traj: &SolutionTrajectory,
    id: CheckId,
    ks: &[usize],
    mode: FtMode,
    mask: &MaskParams,
    tol_scale: f64,
) -> Result<VerificationReport> {
    match id {
        CheckId::AronsonBenilan => check_aronson_benilan(traj, ks, mode, mask, tol_scale),
        CheckId::LiYau => check_li_yau(traj, ks, mode, mask, tol_scale),
        CheckId::FastDiffusionCurvature => check_fast_diffusion(traj, ks, mode, mask, tol_scale),
        CheckId::InitialBoundDecay => check_initial_bound_decay(traj, mode, mask, tol_scale),
        CheckId::SlowDiffusionCurvature => check_slow_diffusion(traj, ks, mode, mask, tol_scale),
        CheckId::FamilyBound => {
            require_snapshots(ks)?;
            let k = ks[ks.len() / 2];
            check_family_bound(traj, k, mode, &[], mask, tol_scale)
        }
        CheckId::CurvatureDimension => check_curvature_dimension(traj, ks, mask, tol_scale),
    }
}
