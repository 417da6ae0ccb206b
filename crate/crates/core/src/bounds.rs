//! Closed-form sharp bound functions for second-order gradient estimates.
//!
//! The estimates bound the ratio fields of a positive solution (see `hopf`)
//! in terms of the effective dimension N = 2 / (2/n + m - 1) and the
//! curvature level R = K sup(m u^(m-1)). The central object is
//!
//!   C(t, y) = NR/2 + sqrt(NR) sqrt(y + NR/4) coth(w/2),
//!   w(t, y) = (4t/N) sqrt(NR) sqrt(y + NR/4),
//!
//! defined for y >= -NR/4, which solves the Riccati equation
//!
//!   dC/dt + (2/N) C^2 - 2R (C + y) = 0,    C(0+) = +infinity,
//!
//! and decreases in t toward its equilibrium while increasing in y. The
//! gradient bound itself is Q(t, y) = C(t, y) + y, and the y-derivative
//!
//!   dC/dy = 2tR (e^{2w} - 1 - 2w e^w) / ((e^w - 1)^2 w) >= 0
//!
//! turns the curve y -> Q into a family of tangent-line upper bounds. As
//! printed, that quotient cancels catastrophically for small w; the
//! implementation evaluates the algebraically identical form
//! (sinh w - w) / (2 w sinh^2(w/2)) with a short series below w = 1e-4.
//!
//! Degenerate limits used throughout the tests:
//!
//!   y -> -NR/4:  C -> NR/2 + N/(2t),  dC/dy -> 2Rt/3
//!   R -> 0:      C -> N/(2t),         Q -> y + N/(2t)
//!   t -> inf:    C -> NR/2 + sqrt(NR) sqrt(y + NR/4)

use crate::error::{PmeError, Result};
use crate::numerics::sinh_minus_x;

/// Effective dimension N = 2n / (2 + n(m-1)); errors when the exponent falls
/// outside the supercritical window m > 1 - 2/n.
pub fn n_effective(n: usize, m: f64) -> Result<f64> {
    if n == 0 {
        return Err(PmeError::OutOfRange("dimension n must be >= 1".into()));
    }
    let n = n as f64;
    let denom = 2.0 + n * (m - 1.0);
    if denom <= 0.0 {
        return Err(PmeError::OutOfRange(format!(
            "effective dimension needs m > 1 - 2/n; n = {n}, m = {m}"
        )));
    }
    Ok(2.0 * n / denom)
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(PmeError::OutOfRange(format!("time must be positive and finite, got {t}")));
    }
    Ok(())
}

fn check_level(n_eff: f64, r_sup: f64) -> Result<()> {
    if !(n_eff > 0.0) || !n_eff.is_finite() {
        return Err(PmeError::OutOfRange(format!("effective dimension must be positive, got {n_eff}")));
    }
    if !(r_sup >= 0.0) || !r_sup.is_finite() {
        return Err(PmeError::OutOfRange(format!("curvature level R must be >= 0, got {r_sup}")));
    }
    Ok(())
}

/// sqrt(NR) sqrt(y + NR/4); errors for y below the domain edge -NR/4.
fn shifted_root(y: f64, n_eff: f64, r_sup: f64) -> Result<f64> {
    let radicand = y + n_eff * r_sup / 4.0;
    if radicand < 0.0 {
        return Err(PmeError::OutOfRange(format!(
            "bound functions need y >= -NR/4; y = {y}, NR/4 = {}",
            n_eff * r_sup / 4.0
        )));
    }
    Ok((n_eff * r_sup).sqrt() * radicand.sqrt())
}

/// Phase argument w(t, y) = (4t/N) sqrt(NR) sqrt(y + NR/4).
pub fn w_fn(t: f64, y: f64, n_eff: f64, r_sup: f64) -> Result<f64> {
    check_time(t)?;
    check_level(n_eff, r_sup)?;
    Ok(4.0 * t / n_eff * shifted_root(y, n_eff, r_sup)?)
}

/// Riccati solution C(t, y) with C(0+) = +infinity.
pub fn cap_c(t: f64, y: f64, n_eff: f64, r_sup: f64) -> Result<f64> {
    check_time(t)?;
    check_level(n_eff, r_sup)?;
    let s = shifted_root(y, n_eff, r_sup)?;
    let x = 2.0 * t * s / n_eff; // w/2
    let head = n_eff * r_sup / 2.0;
    // s coth(x) with s/x = N/(2t) held exactly; Laurent tail below the
    // branch point, clamp far above it, plain quotient in between.
    let tail = if x < 5e-5 {
        n_eff / (2.0 * t) * (1.0 + x * x / 3.0 - x.powi(4) / 45.0)
    } else if x > 30.0 {
        s
    } else {
        s / x.tanh()
    };
    Ok(head + tail)
}

/// Slope dC/dy of the Riccati solution; nonnegative on the whole domain.
pub fn dc_dy(t: f64, y: f64, n_eff: f64, r_sup: f64) -> Result<f64> {
    check_time(t)?;
    check_level(n_eff, r_sup)?;
    let s = shifted_root(y, n_eff, r_sup)?;
    let w = 4.0 * t * s / n_eff;
    // ratio(w) = (e^{2w} - 1 - 2w e^w)/((e^w - 1)^2 w) = (sinh w - w)/(2w sinh^2(w/2)),
    // even in w with series 1/3 - w^2/90 + w^4/2520 - ...
    let ratio = if w < 1e-4 {
        1.0 / 3.0 - w * w / 90.0
    } else if w <= 60.0 {
        let half = 0.5 * w;
        sinh_minus_x(w) / (2.0 * w * half.sinh() * half.sinh())
    } else {
        // exp(-w) form never overflows; beyond w = 60 it is 1/w to 26 digits.
        let e = (-w).exp();
        (1.0 - e * e - 2.0 * w * e) / (w * (1.0 - e) * (1.0 - e))
    };
    Ok(2.0 * t * r_sup * ratio)
}

/// Gradient bound Q(t, y) = C(t, y) + y.
pub fn big_q(t: f64, y: f64, n_eff: f64, r_sup: f64) -> Result<f64> {
    Ok(cap_c(t, y, n_eff, r_sup)? + y)
}

/// Flat-regime bound N/(2t) + NR/2 used where y <= -NR/4.
pub fn regime2_rhs(t: f64, n_eff: f64, r_sup: f64) -> Result<f64> {
    check_time(t)?;
    check_level(n_eff, r_sup)?;
    Ok(n_eff / (2.0 * t) + n_eff * r_sup / 2.0)
}

/// Maximum deviation between the closed form C and a numerical integration
/// of its Riccati equation started from the closed form at `t_grid[0]`.
///
/// Classic fixed-substep RK4; the substep 1e-4 keeps the accumulated error
/// orders of magnitude below the 1e-8 the tests demand on [0.1, 10].
pub fn riccati_residual(t_grid: &[f64], y: f64, n_eff: f64, r_sup: f64) -> Result<f64> {
    if t_grid.len() < 2 {
        return Err(PmeError::InvalidConfig("riccati residual needs at least two times".into()));
    }
    for pair in t_grid.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(PmeError::InvalidConfig("time grid must increase strictly".into()));
        }
    }
    check_time(t_grid[0])?;
    let rhs = |c: f64| -2.0 / n_eff * c * c + 2.0 * r_sup * (c + y);
    let mut c = cap_c(t_grid[0], y, n_eff, r_sup)?;
    let mut worst: f64 = 0.0;
    for pair in t_grid.windows(2) {
        let span = pair[1] - pair[0];
        let substeps = (span / 1e-4).ceil().max(1.0) as usize;
        let h = span / substeps as f64;
        for _ in 0..substeps {
            let k1 = rhs(c);
            let k2 = rhs(c + 0.5 * h * k1);
            let k3 = rhs(c + 0.5 * h * k2);
            let k4 = rhs(c + h * k3);
            c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        worst = worst.max((c - cap_c(pair[1], y, n_eff, r_sup)?).abs());
    }
    Ok(worst)
}

/// Right-hand side of the fast-diffusion gradient estimate on CD(n, -K)
/// spaces: N/(2t) + 2 K m u^(m-1) / ((1-m)(2m-1)) for 1/2 < m < 1.
pub fn fast_diffusion_rhs(t: f64, u_val: f64, m: f64, n: usize, cd_k: f64) -> Result<f64> {
    check_time(t)?;
    if !(m > 0.5 && m < 1.0) {
        return Err(PmeError::OutOfRange(format!(
            "fast-diffusion estimate needs 1/2 < m < 1, got m = {m}"
        )));
    }
    let n_eff = n_effective(n, m)?;
    if !(u_val > 0.0) {
        return Err(PmeError::NonPositiveInput { min: u_val, index: 0 });
    }
    if !(cd_k >= 0.0) || !cd_k.is_finite() {
        return Err(PmeError::OutOfRange(format!("curvature constant K must be >= 0, got {cd_k}")));
    }
    Ok(n_eff / (2.0 * t)
        + 2.0 * cd_k * m * u_val.powf(m - 1.0) / ((1.0 - m) * (2.0 * m - 1.0)))
}

/// Flat-space decay bound (2t/N + 1/c)^(-1) from an initial concavity level
/// c = sup(-Delta f) at t = 0; c = +infinity recovers N/(2t), c = 0 gives 0.
pub fn decay_from_initial_bound(t: f64, c: f64, n_eff: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(PmeError::OutOfRange(format!("elapsed time must be >= 0, got {t}")));
    }
    if !(c >= 0.0) {
        return Err(PmeError::OutOfRange(format!("initial level c must be >= 0, got {c}")));
    }
    check_level(n_eff, 0.0)?;
    Ok((2.0 * t / n_eff + 1.0 / c).recip())
}
