//! Closed-form reference solutions on flat space.
//!
//! The porous medium / fast diffusion equation u_t = Delta(u^m) on R^n has a
//! two-parameter family of radially symmetric self-similar solutions
//!
//!   u(t, r) = t^(-alpha) (b0 - k r^2 t^(-2 alpha / n))^(1/(m-1)),
//!   alpha = n / (n (m - 1) + 2),      k = alpha (m - 1) / (2 m n),
//!
//! valid whenever n (m - 1) + 2 > 0. For m > 1 the base is clamped at zero
//! (compactly supported source solution); for m < 1 the coefficient k is
//! negative, the base stays positive, and the profile decays algebraically.
//! At m = 1 the family degenerates to the Gaussian heat kernel.
//!
//! These solutions are the saturation oracles of the crate: writing
//! f = m (u^(m-1) - 1)/(m - 1), every member satisfies
//!
//!   -Delta f = alpha / t = N / (2 t),      N = 2 / (2/n + m - 1),
//!
//! exactly in the interior of its support, which is the equality case of the
//! sharp second-order estimate the verifier checks. f is a quadratic
//! polynomial in r there, so even discrete difference operators reproduce the
//! identity to rounding.

use crate::error::{PmeError, Result};

/// Parameters of the self-similar family: dimension, exponent, and the free
/// profile constant b0 (b0 parametrizes total mass).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarParams {
    n: usize,
    m: f64,
    b0: f64,
}

impl SelfSimilarParams {
    /// Requires n >= 1, m > 0 with n (m - 1) + 2 > 0, and b0 > 0.
    pub fn new(n: usize, m: f64, b0: f64) -> Result<Self> {
        if n == 0 {
            return Err(PmeError::OutOfRange("dimension n must be >= 1".into()));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(PmeError::OutOfRange(format!("exponent m must be positive, got {m}")));
        }
        if n as f64 * (m - 1.0) + 2.0 <= 0.0 {
            return Err(PmeError::OutOfRange(format!(
                "self-similar family needs n(m-1)+2 > 0; n = {n}, m = {m}"
            )));
        }
        if !(b0 > 0.0) || !b0.is_finite() {
            return Err(PmeError::OutOfRange(format!("profile constant b0 must be positive, got {b0}")));
        }
        Ok(Self { n, m, b0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn exponent(&self) -> f64 {
        self.m
    }

    pub fn profile_constant(&self) -> f64 {
        self.b0
    }

    /// Similarity exponent alpha = n / (n (m - 1) + 2) = N / 2.
    pub fn alpha(&self) -> f64 {
        let n = self.n as f64;
        n / (n * (self.m - 1.0) + 2.0)
    }

    /// Profile curvature k = alpha (m - 1) / (2 m n); negative for m < 1.
    pub fn profile_k(&self) -> f64 {
        self.alpha() * (self.m - 1.0) / (2.0 * self.m * self.n as f64)
    }

    /// Effective dimension N = 2 alpha of the saturated estimate.
    pub fn effective_dimension(&self) -> f64 {
        2.0 * self.alpha()
    }

    /// Free boundary radius of the compactly supported branch (m > 1).
    pub fn support_radius(&self, t: f64) -> f64 {
        debug_assert!(self.m > 1.0 && t > 0.0);
        (self.b0 / self.profile_k()).sqrt() * t.powf(self.alpha() / self.n as f64)
    }

    /// Raw family value at (t, r); base clamped at zero when m > 1.
    fn value(&self, t: f64, r: f64) -> f64 {
        debug_assert!(t > 0.0, "self-similar solutions need t > 0, got {t}");
        let alpha = self.alpha();
        let scale = t.powf(-2.0 * alpha / self.n as f64);
        let base = self.b0 - self.profile_k() * r * r * scale;
        if self.m > 1.0 {
            if base <= 0.0 {
                return 0.0;
            }
            t.powf(-alpha) * base.powf(1.0 / (self.m - 1.0))
        } else {
            // k < 0 here, so base >= b0 > 0 and the negative exponent decays.
            t.powf(-alpha) * base.powf(1.0 / (self.m - 1.0))
        }
    }
}

/// Compactly supported source solution of the porous medium equation (m > 1).
pub fn barenblatt(params: &SelfSimilarParams, t: f64, r: f64) -> f64 {
    assert!(params.m > 1.0, "barenblatt branch needs m > 1, got {}", params.m);
    params.value(t, r)
}

/// Globally positive self-similar solution of the fast diffusion equation
/// (1 - 2/n < m < 1).
pub fn fast_diffusion_selfsimilar(params: &SelfSimilarParams, t: f64, r: f64) -> f64 {
    assert!(
        params.m < 1.0,
        "fast diffusion branch needs m < 1, got {}",
        params.m
    );
    params.value(t, r)
}

/// Heat kernel (4 pi t)^(-n/2) exp(-r^2 / 4t), the m = 1 member.
pub fn gaussian_heat_kernel(n: usize, t: f64, r: f64) -> f64 {
    debug_assert!(n >= 1 && t > 0.0);
    let n = n as f64;
    (4.0 * std::f64::consts::PI * t).powf(-n / 2.0) * (-r * r / (4.0 * t)).exp()
}

/// |grad log u|^2 of the heat kernel, analytically.
pub fn gaussian_logdens_grad_sq(t: f64, r: f64) -> f64 {
    let g = r / (2.0 * t);
    g * g
}

/// d/dt log u of the heat kernel, analytically.
pub fn gaussian_logdens_dt(n: usize, t: f64, r: f64) -> f64 {
    -(n as f64) / (2.0 * t) + r * r / (4.0 * t * t)
}
