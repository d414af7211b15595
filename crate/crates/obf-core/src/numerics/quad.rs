//! Adaptive Simpson quadrature with Richardson correction.

use crate::{Error, Result};

/// Tolerances and budget for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-9,
            absolute_tolerance: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    /// Tighter tolerances for derivative checks and certification scans.
    pub fn tight() -> Self {
        Self {
            relative_tolerance: 1e-12,
            absolute_tolerance: 1e-14,
            max_subdivisions: 20000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.relative_tolerance > 0.0 && self.absolute_tolerance > 0.0 && self.max_subdivisions >= 1
        {
            Ok(())
        } else {
            Err(Error::Domain(
                "quadrature spec needs positive tolerances and at least one subdivision".into(),
            ))
        }
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// Infinite upper limits are never passed here; callers remove them by the
/// substitution u = F(x) first. Reversed limits flip the sign.
///
/// # Example
/// ```
/// use obf_core::numerics::{integrate, QuadratureSpec};
/// let v = integrate(|x| x * x, 0.0, 1.0, &QuadratureSpec::default()).unwrap();
/// assert!((v - 1.0 / 3.0).abs() < 1e-10);
/// ```
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, spec).map(|v| -v);
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    if !fa.is_finite() || !fm.is_finite() || !fb.is_finite() {
        return Err(Error::NonConvergence(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    let whole = simpson(a, b, fa, fm, fb);
    let tol = spec
        .absolute_tolerance
        .max(spec.relative_tolerance * whole.abs());
    let mut splits = 0usize;
    adapt(&f, a, b, fa, fm, fb, whole, tol, 0, &mut splits, spec.max_subdivisions)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    splits: &mut usize,
    max_splits: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() || !frm.is_finite() {
        return Err(Error::NonConvergence(format!(
            "integrand is not finite near {lm} or {rm}"
        )));
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // depth 52 means the interval has shrunk to the last representable bit
    if delta.abs() <= 15.0 * tol || depth >= 52 {
        return Ok(left + right + delta / 15.0);
    }
    *splits += 1;
    if *splits > max_splits {
        return Err(Error::NonConvergence(format!(
            "quadrature exceeded {max_splits} subdivisions"
        )));
    }
    let half = 0.5 * tol;
    Ok(
        adapt(f, a, m, fa, flm, fm, left, half, depth + 1, splits, max_splits)?
            + adapt(f, m, b, fm, frm, fb, right, half, depth + 1, splits, max_splits)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_integrals() {
        let spec = QuadratureSpec::default();
        assert!((integrate(|x| x, 0.0, 1.0, &spec).unwrap() - 0.5).abs() < 1e-12);
        assert!((integrate(|_| 1.0, 0.0, 1.0, &spec).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(integrate(|x| x, 2.0, 2.0, &spec).unwrap(), 0.0);
    }

    #[test]
    fn polynomials_up_to_degree_six() {
        let spec = QuadratureSpec::default();
        // 7x^6 - 3x^2 + 2 integrates to x^7 - x^3 + 2x
        let v = integrate(|x| 7.0 * x.powi(6) - 3.0 * x * x + 2.0, 0.0, 1.0, &spec).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        let w = integrate(|x| x.powi(5), -1.0, 3.0, &spec).unwrap();
        assert!((w - (729.0 - 1.0) / 6.0).abs() < 1e-8);
    }

    #[test]
    fn smooth_transcendental() {
        let spec = QuadratureSpec::default();
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, &spec).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let spec = QuadratureSpec::default();
        let v = integrate(|x| x * x, 1.0, 0.0, &spec).unwrap();
        assert!((v + 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let spec = QuadratureSpec {
            relative_tolerance: 1e-15,
            absolute_tolerance: 1e-300,
            max_subdivisions: 3,
        };
        let r = integrate(|x| (50.0 * x).sin().abs(), 0.0, 10.0, &spec);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }

    #[test]
    fn rejects_bad_limits() {
        let spec = QuadratureSpec::default();
        assert!(integrate(|x| x, 0.0, f64::INFINITY, &spec).is_err());
        assert!(integrate(|x| x, f64::NAN, 1.0, &spec).is_err());
    }

    #[test]
    fn deterministic_for_identical_inputs() {
        let spec = QuadratureSpec::default();
        let a = integrate(|x| (x * x).exp_m1(), 0.0, 1.0, &spec).unwrap();
        let b = integrate(|x| (x * x).exp_m1(), 0.0, 1.0, &spec).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
