//! Exact rate evaluation by quadrature: the two-user beam rate, its
//! budget-plane restriction and derivative, the homogeneous n-user rate,
//! and the conditional rates used when two users are varied against a fixed
//! best-competitor SINR.
//!
//! Every integral of the form int ln(1+x) dF^k(x) is evaluated after the
//! substitution u = F(x), which removes the infinite endpoint and leaves a
//! smooth integrand k u^(k-1) ln(1 + F^-1(u)) on a finite interval.

use crate::numerics::{integrate, QuadratureSpec};
use crate::sinr::SinrModel;
use crate::{Error, Result};

const RANGE_TOL: f64 = 1e-12;

/// ln(1 + F^-1(u)) evaluator. Rayleigh models invert in closed form; other
/// families go through the cached interpolation table so that quadrature
/// does not pay a root-find per node.
struct InverseLogRate<'a> {
    model: &'a SinrModel,
    table: Option<std::sync::Arc<crate::sinr::InverseCdfTable>>,
}

impl<'a> InverseLogRate<'a> {
    fn new(model: &'a SinrModel) -> Self {
        Self {
            model,
            table: model.inverse_table(),
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        match &self.table {
            Some(t) => t.eval(u),
            None => self.model.quantile_raw(u),
        }
    }

    fn log_rate(&self, u: f64) -> f64 {
        self.quantile(u).ln_1p()
    }

    /// Integrates over [a, b] in u. With a table in play the integrand has a
    /// second-derivative break at every table node, which starves the
    /// adaptive rule's subdivision budget; splitting at the nodes leaves a
    /// smooth integrand on every piece.
    fn integrate_u<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let table = match &self.table {
            None => return integrate(f, a, b, &QuadratureSpec::default()),
            Some(t) => t,
        };
        let piece_spec = QuadratureSpec {
            relative_tolerance: 1e-9,
            absolute_tolerance: 1e-15,
            max_subdivisions: 2000,
        };
        let nodes = table.nodes();
        let first = nodes.partition_point(|&u| u <= a);
        let last = nodes.partition_point(|&u| u < b);
        let mut total = 0.0;
        let mut lo = a;
        for &u in &nodes[first..last] {
            total += integrate(&f, lo, u, &piece_spec)?;
            lo = u;
        }
        total += integrate(&f, lo, b, &piece_spec)?;
        Ok(total)
    }
}

/// int_{u0}^{1} 2u ln(1 + F^-1(u)) du, the tail rate of the better of two
/// i.i.d. users above the probability level u0.
fn tail_two(inv: &InverseLogRate, u0: f64) -> Result<f64> {
    inv.integrate_u(|u| 2.0 * u * inv.log_rate(u), u0, 1.0)
}

/// int_{a}^{b} ln(1 + F^-1(u)) du, the single-user rate mass between two
/// probability levels.
fn band_one(inv: &InverseLogRate, a: f64, b: f64) -> Result<f64> {
    inv.integrate_u(|u| inv.log_rate(u), a, b)
}

/// Rate on one beam of a two-user system with thresholds (tau1, tau2):
/// the better user wins above the larger threshold, and only the
/// lower-threshold user contributes in between. Symmetric in its arguments.
pub fn rate_two_user_beam(model: &SinrModel, tau1: f64, tau2: f64) -> Result<f64> {
    if !(tau1 >= 0.0) || !(tau2 >= 0.0) {
        return Err(Error::Domain(format!(
            "thresholds must be >= 0, got ({tau1}, {tau2})"
        )));
    }
    let inv = InverseLogRate::new(model);
    let u_hi = model.cdf_raw(tau1.max(tau2));
    let u_lo = model.cdf_raw(tau1.min(tau2));
    Ok(tail_two(&inv, u_hi)? + u_hi * band_one(&inv, u_lo, u_hi)?)
}

fn check_plane_point(lambda: f64, p2: f64) -> Result<()> {
    if !(0.0..=2.0).contains(&lambda) {
        return Err(Error::Domain(format!("budget must lie in [0, 2], got {lambda}")));
    }
    let lo = (lambda - 1.0).max(0.0);
    let hi = lambda / 2.0;
    if p2 < lo - RANGE_TOL || p2 > hi + RANGE_TOL {
        return Err(Error::Domain(format!(
            "p2 = {p2} outside [{lo}, {hi}] for budget {lambda}"
        )));
    }
    Ok(())
}

/// Two-user beam rate along the fixed-budget line p1 + p2 = lambda,
/// parameterized by the smaller probability p2 in [max(0, lambda-1),
/// lambda/2].
pub fn rate_two_user_on_plane(model: &SinrModel, lambda: f64, p2: f64) -> Result<f64> {
    check_plane_point(lambda, p2)?;
    let p2 = p2.clamp((lambda - 1.0).max(0.0), lambda / 2.0);
    let inv = InverseLogRate::new(model);
    let u_hi = 1.0 - p2;
    let u_lo = 1.0 - (lambda - p2);
    Ok(tail_two(&inv, u_hi)? + u_hi * band_one(&inv, u_lo, u_hi)?)
}

/// Derivative of [`rate_two_user_on_plane`] in p2:
/// int F(x)/(1+x) dx between the two thresholds, minus
/// (lambda - 2 p2) ln(1 + lower threshold).
pub fn rate_two_user_derivative(model: &SinrModel, lambda: f64, p2: f64) -> Result<f64> {
    check_plane_point(lambda, p2)?;
    let p2 = p2.clamp((lambda - 1.0).max(0.0), lambda / 2.0);
    let x_lo = model.quantile_raw(1.0 - (lambda - p2));
    let x_hi = model.quantile_raw(1.0 - p2);
    let spec = QuadratureSpec::default();
    let band = integrate(|x| model.cdf_raw(x) / (1.0 + x), x_lo, x_hi, &spec)?;
    Ok(band - (lambda - 2.0 * p2) * x_lo.ln_1p())
}

/// Per-beam rate of n i.i.d. users sharing one threshold:
/// int_tau^inf ln(1+x) dF^n(x).
pub fn rate_homogeneous(model: &SinrModel, n: usize, tau: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("need at least one user".into()));
    }
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("threshold must be >= 0, got {tau}")));
    }
    let inv = InverseLogRate::new(model);
    let u0 = model.cdf_raw(tau);
    if u0 >= 1.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    inv.integrate_u(|u| nf * u.powf(nf - 1.0) * inv.log_rate(u), u0, 1.0)
}

/// Conditioning floor above both thresholds: the pair only matters when one
/// of them beats gamma_bar outright.
pub fn conditional_rate_r0(model: &SinrModel, gamma_bar: f64) -> Result<f64> {
    if !(gamma_bar >= 0.0) {
        return Err(Error::Domain(format!("gamma_bar must be >= 0, got {gamma_bar}")));
    }
    let inv = InverseLogRate::new(model);
    let u = model.cdf_raw(gamma_bar);
    Ok(u * u * gamma_bar.ln_1p() + tail_two(&inv, u)?)
}

/// Conditioning floor below both thresholds: the plain two-user beam rate
/// plus the floor rate carried by the pair's joint silence.
pub fn conditional_rate_r1(
    model: &SinrModel,
    tau_hi: f64,
    tau_lo: f64,
    gamma_bar: f64,
) -> Result<f64> {
    if !(0.0 <= gamma_bar && gamma_bar <= tau_lo && tau_lo <= tau_hi) {
        return Err(Error::Domain(format!(
            "need 0 <= gamma_bar <= tau_lo <= tau_hi, got ({gamma_bar}, {tau_lo}, {tau_hi})"
        )));
    }
    let base = rate_two_user_beam(model, tau_lo, tau_hi)?;
    Ok(base + gamma_bar.ln_1p() * model.cdf_raw(tau_lo) * model.cdf_raw(tau_hi))
}

/// Conditioning floor between the thresholds: the lower threshold is masked
/// by the floor, so only tau_hi and gamma_bar enter.
pub fn conditional_rate_r2(model: &SinrModel, tau_hi: f64, gamma_bar: f64) -> Result<f64> {
    if !(0.0 <= gamma_bar && gamma_bar <= tau_hi) {
        return Err(Error::Domain(format!(
            "need 0 <= gamma_bar <= tau_hi, got ({gamma_bar}, {tau_hi})"
        )));
    }
    let inv = InverseLogRate::new(model);
    let u_g = model.cdf_raw(gamma_bar);
    let u_hi = model.cdf_raw(tau_hi);
    Ok(gamma_bar.ln_1p() * u_g * u_hi
        + u_hi * band_one(&inv, u_g, u_hi)?
        + tail_two(&inv, u_hi)?)
}

/// One point on the conditional-rate curve: a pair of users with request
/// probabilities (lambda_i - q, q) evaluated against the floor gamma_bar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalRateInput {
    pub gamma_bar: f64,
    pub tau_hi: f64,
    pub tau_lo: f64,
    pub q: f64,
    pub lambda_i: f64,
}

impl ConditionalRateInput {
    pub fn new(gamma_bar: f64, tau_hi: f64, tau_lo: f64, q: f64, lambda_i: f64) -> Result<Self> {
        if !(gamma_bar >= 0.0) {
            return Err(Error::Domain(format!("gamma_bar must be >= 0, got {gamma_bar}")));
        }
        if !(tau_lo >= 0.0) || tau_lo > tau_hi {
            return Err(Error::Domain(format!(
                "need 0 <= tau_lo <= tau_hi, got ({tau_lo}, {tau_hi})"
            )));
        }
        if !(0.0..=2.0).contains(&lambda_i) {
            return Err(Error::Domain(format!(
                "pair budget must lie in [0, 2], got {lambda_i}"
            )));
        }
        let lo = (lambda_i - 1.0).max(0.0);
        if q < lo - RANGE_TOL || q > lambda_i / 2.0 + RANGE_TOL {
            return Err(Error::Domain(format!(
                "q = {q} outside [{lo}, {}]",
                lambda_i / 2.0
            )));
        }
        Ok(Self { gamma_bar, tau_hi, tau_lo, q, lambda_i })
    }

    /// Derives the thresholds from (q, lambda_i) through the quantile map.
    pub fn from_budget(model: &SinrModel, gamma_bar: f64, q: f64, lambda_i: f64) -> Result<Self> {
        let q_checked = Self::new(gamma_bar, f64::INFINITY, 0.0, q, lambda_i)?;
        let tau_hi = model.quantile_raw(1.0 - q_checked.q);
        let tau_lo = model.quantile_raw(1.0 - (lambda_i - q_checked.q));
        Self::new(gamma_bar, tau_hi, tau_lo, q, lambda_i)
    }
}

/// Selects among the three conditional rates by where the floor gamma_bar
/// sits relative to the pair's thresholds, in probability space.
pub fn conditional_rate_piecewise(model: &SinrModel, input: &ConditionalRateInput) -> Result<f64> {
    let s = 1.0 - model.cdf_raw(input.gamma_bar);
    if input.q > s {
        conditional_rate_r0(model, input.gamma_bar)
    } else if input.lambda_i - input.q > s {
        conditional_rate_r2(model, input.tau_hi, input.gamma_bar)
    } else {
        conditional_rate_r1(model, input.tau_hi, input.tau_lo, input.gamma_bar)
    }
}
