//! Small numerical helpers shared across modules.

/// Hyperbolic cotangent, stable across the whole positive axis.
///
/// Near zero the direct quotient cosh/sinh loses nothing, but 1/x dominates
/// and the Laurent tail keeps full precision: coth(x) = 1/x + x/3 - x^3/45 + ...
/// For large arguments coth approaches 1 from above faster than f64 can
/// resolve, so we clamp.
pub fn coth(x: f64) -> f64 {
    debug_assert!(x > 0.0, "coth helper expects x > 0, got {x}");
    if x < 1e-4 {
        1.0 / x + x / 3.0
    } else if x > 30.0 {
        // coth(30) - 1 < 2e-26, below resolution at magnitude 1.
        1.0
    } else {
        1.0 / x.tanh()
    }
}

/// sinh(x) - x without cancellation for small arguments.
///
/// The Taylor series has positive terms only, so summing it is stable; nine
/// terms reach f64 precision for x < 1. Above 1 the direct difference keeps
/// at least 15 digits.
pub fn sinh_minus_x(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 1.0 {
        let x2 = x * x;
        let mut term = x * x2 / 6.0; // x^3/3!
        let mut sum = term;
        for k in 2..=9 {
            let p = 2 * k + 1;
            term *= x2 / ((p - 1) as f64 * p as f64);
            sum += term;
        }
        sum
    } else {
        x.sinh() - x
    }
}

/// log2 of the error ratio between two refinement levels: the observed
/// convergence order. Pairs of residuals at rounding level count as
/// converged and report +infinity.
pub fn observed_order(coarse: f64, fine: f64, floor: f64) -> f64 {
    if coarse.abs() <= floor && fine.abs() <= floor {
        f64::INFINITY
    } else {
        (coarse / fine).log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coth_matches_exponential_form() {
        // coth(x) = (e^{2x} + 1)/(e^{2x} - 1), evaluated independently.
        for &x in &[1e-3f64, 0.5, 1.0, 4.0, 20.0] {
            let e2x = (2.0 * x).exp();
            let oracle = (e2x + 1.0) / (e2x - 1.0);
            let rel = (coth(x) - oracle).abs() / oracle;
            assert!(rel < 1e-13, "x = {x}: coth = {}, oracle = {oracle}", coth(x));
        }
    }

    #[test]
    fn coth_branches_agree_at_switch_points() {
        // Series vs direct quotient, evaluated at the same switch argument.
        let x = 1e-4;
        let series = 1.0 / x + x / 3.0;
        assert!(((series - coth(x)) / coth(x)).abs() < 1e-12);
        assert!((coth(x) - 1.0 / x.tanh()).abs() < 1e-10);
        // Past 30 the quotient itself has rounded to 1, so the clamp is exact.
        assert_eq!(coth(29.999), 1.0);
        assert_eq!(coth(30.001), 1.0);
    }

    #[test]
    fn sinh_minus_x_small_argument_precision() {
        // Leading term x^3/6; series and direct evaluation must agree in the
        // overlap region, and the series must not cancel for tiny x.
        let x = 1e-6;
        let rel = (sinh_minus_x(x) - x.powi(3) / 6.0).abs() / (x.powi(3) / 6.0);
        assert!(rel < 1e-12);
        for &x in &[0.9, 1.0, 1.1] {
            let rel = (sinh_minus_x(x) - (x.sinh() - x)).abs() / sinh_minus_x(x);
            assert!(rel < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn observed_order_handles_converged_pairs() {
        assert!((observed_order(4.0e-3, 1.0e-3, 1e-14) - 2.0).abs() < 1e-12);
        assert!(observed_order(1e-16, 2e-16, 1e-14).is_infinite());
    }
}
