//! Bracketed inversion of monotone functions.

use crate::{Error, Result};

/// Finds x in `[lo, hi]` with f(x) = target for monotone f.
///
/// Illinois-style false position with a forced bisection every few steps,
/// stopping at residual `1e-12 * max(1, |target|)` or when the bracket
/// collapses to floating-point resolution.
///
/// # Example
/// ```
/// use obf_core::numerics::invert_monotone;
/// let x = invert_monotone(|x| 1.0 - (-x).exp(), 0.75, 0.0, 10.0).unwrap();
/// assert!((x - 4.0_f64.ln()).abs() < 1e-10);
/// ```
pub fn invert_monotone<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, hi: f64) -> Result<f64> {
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::Domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    let tol = 1e-12 * target.abs().max(1.0);
    let flo = f(lo) - target;
    if flo.abs() <= tol {
        return Ok(lo);
    }
    let fhi = f(hi) - target;
    if fhi.abs() <= tol {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::Bracket(format!(
            "target {target} not enclosed by f on [{lo}, {hi}]"
        )));
    }
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, flo, fhi);
    for iter in 0..200 {
        let (low, high) = if a < b { (a, b) } else { (b, a) };
        let mut x = b - fb * (b - a) / (fb - fa);
        if !x.is_finite() || x <= low || x >= high || iter % 5 == 4 {
            x = 0.5 * (low + high);
        }
        let fx = f(x) - target;
        let collapsed = high - low <= 1e-15 * (low.abs() + high.abs() + 1.0);
        if fx.abs() <= tol || collapsed {
            return Ok(x);
        }
        if fx * fb < 0.0 {
            a = b;
            fa = fb;
        } else {
            // Illinois weighting keeps the stale endpoint moving
            fa *= 0.5;
        }
        b = x;
        fb = fx;
    }
    Err(Error::NonConvergence(format!(
        "invert_monotone stalled before reaching |f(x) - {target}| <= {tol}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::regularized_lower_gamma;

    #[test]
    fn identity_function() {
        let x = invert_monotone(|x| x, 0.3, 0.0, 1.0).unwrap();
        assert!((x - 0.3).abs() < 1e-12);
    }

    #[test]
    fn exponential_cdf() {
        let x = invert_monotone(|x| 1.0 - (-x).exp(), 0.75, 0.0, 50.0).unwrap();
        assert!((x - 1.3862943611198906).abs() < 1e-10);
    }

    #[test]
    fn gamma_cdf_median() {
        // Gamma(shape 2, scale 1/2) CDF is P(2, 2x); median from an
        // independent high-precision evaluation
        let f = |x: f64| regularized_lower_gamma(2.0, 2.0 * x).unwrap();
        let x = invert_monotone(f, 0.5, 0.0, 20.0).unwrap();
        assert!((x - 0.8391734950083306).abs() < 1e-10);
    }

    #[test]
    fn decreasing_function() {
        let x = invert_monotone(|x| (-x).exp(), 0.5, 0.0, 10.0).unwrap();
        assert!((x - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn bracket_errors() {
        assert!(matches!(
            invert_monotone(|x| x, 2.0, 0.0, 1.0),
            Err(Error::Bracket(_))
        ));
        assert!(invert_monotone(|x| x, 0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn endpoint_hits() {
        assert_eq!(invert_monotone(|x| x, 0.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(invert_monotone(|x| x, 1.0, 0.0, 1.0).unwrap(), 1.0);
    }
}
