//! The marginal SINR distribution family (F, f, f', F^-1) and the joint
//! per-user SINR-vector sampler.
//!
//! Rayleigh fading supports any beam count M; Nakagami and Rician fading are
//! single-beam models. Beamforming vectors are never materialized: for
//! i.i.d. circularly symmetric Gaussian channels the beam-power projections
//! are i.i.d. unit exponentials, so the sampler draws powers directly.

use crate::numerics::special::lambert_w0_ln_arg;
use crate::numerics::{invert_monotone, marcum_q1, regularized_lower_gamma};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma as GammaDist, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

/// Quantile arguments at or above this are clamped to avoid tail overflow.
pub const QUANTILE_CLAMP: f64 = 1.0 - 1e-12;

/// Distribution family with its parameters. Nakagami spread and Rician line
/// power are fixed to one, so the mean SINR is rho in every family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Rayleigh { m: usize, rho: f64 },
    Nakagami { mu: f64, rho: f64 },
    Rician { k: f64, rho: f64 },
}

/// A validated SINR distribution model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinrModel {
    family: Family,
}

/// System-level dimensions: user count, beams, per-beam SNR, and transmit
/// antennas. The antenna count is informational; the SINR law depends only
/// on M and rho.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub n_t: usize,
}

impl SystemConfig {
    pub fn new(n: usize, m: usize, rho: f64, n_t: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("need at least one user".into()));
        }
        if m < 1 || m > n_t {
            return Err(Error::Domain(format!(
                "need 1 <= M <= N_t, got M={m}, N_t={n_t}"
            )));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("need rho > 0, got {rho}")));
        }
        Ok(Self { n, m, rho, n_t })
    }
}

impl SinrModel {
    /// Rayleigh fading with `m` orthonormal beams at per-beam SNR `rho`.
    pub fn rayleigh(m: usize, rho: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("rayleigh needs at least one beam".into()));
        }
        check_rho(rho)?;
        Ok(Self {
            family: Family::Rayleigh { m, rho },
        })
    }

    /// Nakagami fading with shape `mu`, single beam.
    pub fn nakagami(mu: f64, rho: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!("nakagami needs mu > 0, got {mu}")));
        }
        check_rho(rho)?;
        Ok(Self {
            family: Family::Nakagami { mu, rho },
        })
    }

    /// Rician fading with line-of-sight factor `k >= 0`, single beam.
    pub fn rician(k: f64, rho: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("rician needs K >= 0, got {k}")));
        }
        check_rho(rho)?;
        Ok(Self {
            family: Family::Rician { k, rho },
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Number of beams (always 1 for Nakagami and Rician).
    pub fn beams(&self) -> usize {
        match self.family {
            Family::Rayleigh { m, .. } => m,
            _ => 1,
        }
    }

    pub fn rho(&self) -> f64 {
        match self.family {
            Family::Rayleigh { rho, .. }
            | Family::Nakagami { rho, .. }
            | Family::Rician { rho, .. } => rho,
        }
    }

    /// Marginal SINR distribution function F(x).
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("cdf needs x >= 0, got {x}")));
        }
        Ok(self.cdf_raw(x))
    }

    pub(crate) fn cdf_raw(&self, x: f64) -> f64 {
        match self.family {
            Family::Rayleigh { m, rho } => {
                let ln_tail = -x / rho - (m as f64 - 1.0) * x.ln_1p();
                -ln_tail.exp_m1()
            }
            Family::Nakagami { mu, rho } => regularized_lower_gamma(mu, mu * x / rho)
                .expect("arguments validated at construction"),
            Family::Rician { k, rho } => {
                let a = (2.0 * k).sqrt();
                let b = (2.0 * x * (1.0 + k) / rho).sqrt();
                1.0 - marcum_q1(a, b).expect("arguments validated at construction")
            }
        }
    }

    /// Marginal SINR density f(x).
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("pdf needs x >= 0, got {x}")));
        }
        Ok(self.pdf_raw(x))
    }

    pub(crate) fn pdf_raw(&self, x: f64) -> f64 {
        match self.family {
            Family::Rayleigh { m, rho } => {
                let mf = m as f64;
                let t = (-x / rho - mf * x.ln_1p()).exp();
                t * ((1.0 + x) / rho + mf - 1.0)
            }
            Family::Nakagami { mu, rho } => {
                if x == 0.0 {
                    return match mu {
                        m if m < 1.0 => f64::INFINITY,
                        m if m == 1.0 => 1.0 / rho,
                        _ => 0.0,
                    };
                }
                let theta = rho / mu;
                ((mu - 1.0) * x.ln() - x / theta - crate::numerics::ln_gamma(mu) - mu * theta.ln())
                    .exp()
            }
            Family::Rician { k, rho } => {
                let beta = (1.0 + k) / rho;
                let s = (x * beta).sqrt();
                let root_k = k.sqrt();
                let d = root_k - s;
                beta * (-d * d).exp() * crate::numerics::scaled_bessel_i0(2.0 * root_k * s)
            }
        }
    }

    /// Derivative of the density, f'(x). Closed form for Rayleigh and
    /// Nakagami; Richardson-extrapolated finite differences of the density
    /// for Rician (step max(1e-6, 1e-4 x)).
    pub fn pdf_derivative(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("pdf_derivative needs x >= 0, got {x}")));
        }
        match self.family {
            Family::Rayleigh { m, rho } => {
                let mf = m as f64;
                let t = (-x / rho - mf * x.ln_1p()).exp();
                let a = (1.0 + x) / rho + mf - 1.0;
                Ok(t * (a * (-1.0 / rho - mf / (1.0 + x)) + 1.0 / rho))
            }
            Family::Nakagami { mu, rho } => {
                if x == 0.0 {
                    return Ok(if mu < 1.0 {
                        f64::NEG_INFINITY
                    } else if mu == 1.0 {
                        -1.0 / (rho * rho)
                    } else if mu < 2.0 {
                        f64::INFINITY
                    } else if mu == 2.0 {
                        (2.0 / rho) * (2.0 / rho)
                    } else {
                        0.0
                    });
                }
                Ok(self.pdf_raw(x) * ((mu - 1.0) / x - mu / rho))
            }
            Family::Rician { .. } => {
                let h = (1e-4 * x).max(1e-6);
                let f = |y: f64| self.pdf_raw(y);
                if x >= 2.0 * h {
                    // five-point central stencil, O(h^4)
                    Ok((f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h))
                        / (12.0 * h))
                } else {
                    // one-sided stencil near the support boundary, O(h^4)
                    Ok((-25.0 * f(x) + 48.0 * f(x + h) - 36.0 * f(x + 2.0 * h)
                        + 16.0 * f(x + 3.0 * h)
                        - 3.0 * f(x + 4.0 * h))
                        / (12.0 * h))
                }
            }
        }
    }

    /// Quantile F^-1(u). Arguments at or above `QUANTILE_CLAMP` are clamped
    /// to it, so u = 1 maps to the finite point F^-1(1 - 1e-12).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("quantile needs u in [0, 1], got {u}")));
        }
        Ok(self.quantile_raw(u))
    }

    pub(crate) fn quantile_raw(&self, u: f64) -> f64 {
        let u = u.min(QUANTILE_CLAMP);
        if u <= 0.0 {
            return 0.0;
        }
        match self.family {
            Family::Rayleigh { m: 1, rho } => -rho * (-u).ln_1p(),
            Family::Rayleigh { m, rho } => {
                let c = (m as f64 - 1.0) * rho;
                let ln_arg = 1.0 / c - c.ln() - (-u).ln_1p() / (m as f64 - 1.0);
                -1.0 + c * lambert_w0_ln_arg(ln_arg)
            }
            _ => {
                let hi = self.bracket_upper(u);
                invert_monotone(|x| self.cdf_raw(x), u, 0.0, hi)
                    .expect("cdf is continuous and strictly increasing on the bracket")
            }
        }
    }

    fn bracket_upper(&self, u: f64) -> f64 {
        let mut hi = self.rho().max(1.0);
        for _ in 0..400 {
            if self.cdf_raw(hi) >= u {
                return hi;
            }
            hi *= 2.0;
        }
        hi
    }

    /// One joint draw of (gamma_1, ..., gamma_M) for a single user.
    pub fn sample_sinr_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.beams()];
        self.sample_sinr_vector_into(rng, &mut out);
        out
    }

    /// Allocation-free variant of [`sample_sinr_vector`](Self::sample_sinr_vector).
    pub fn sample_sinr_vector_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.beams());
        match self.family {
            Family::Rayleigh { rho, .. } => {
                let mut total = 1.0 / rho;
                for slot in out.iter_mut() {
                    let e: f64 = rng.sample(Exp1);
                    *slot = e;
                    total += e;
                }
                for slot in out.iter_mut() {
                    *slot /= total - *slot;
                }
            }
            Family::Nakagami { mu, rho } => {
                let g = GammaDist::new(mu, 1.0 / mu).expect("shape validated at construction");
                out[0] = rho * g.sample(rng);
            }
            Family::Rician { k, rho } => {
                let sigma2 = 1.0 / (2.0 * (1.0 + k));
                let mean = (2.0 * k).sqrt();
                let n1: f64 = rng.sample(StandardNormal);
                let n2: f64 = rng.sample(StandardNormal);
                out[0] = rho * sigma2 * ((n1 + mean) * (n1 + mean) + n2 * n2);
            }
        }
    }

    /// Cached piecewise-cubic inverse CDF used inside rate integrands, where
    /// an exact inversion per quadrature node would dominate the runtime.
    /// Rayleigh models invert in closed form and bypass the table.
    pub(crate) fn inverse_table(&self) -> Option<Arc<InverseCdfTable>> {
        if matches!(self.family, Family::Rayleigh { .. }) {
            return None;
        }
        static CACHE: OnceLock<Mutex<HashMap<ModelKey, Arc<InverseCdfTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = self.key();
        if let Some(hit) = cache.lock().unwrap().get(&key) {
            return Some(hit.clone());
        }
        let table = Arc::new(InverseCdfTable::build(self));
        cache.lock().unwrap().insert(key, table.clone());
        Some(table)
    }

    fn key(&self) -> ModelKey {
        match self.family {
            Family::Rayleigh { m, rho } => (0, m as u64, rho.to_bits()),
            Family::Nakagami { mu, rho } => (1, mu.to_bits(), rho.to_bits()),
            Family::Rician { k, rho } => (2, k.to_bits(), rho.to_bits()),
        }
    }
}

type ModelKey = (u8, u64, u64);

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("need rho > 0, got {rho}")))
    }
}

/// Monotone cubic Hermite interpolant of F^-1 with exact nodes and slopes
/// 1/f, the latter limited where needed to keep the interpolant monotone.
/// Nodes are log-spaced in u toward 0 and in 1-u toward 1, so both steep
/// tails are resolved.
pub(crate) struct InverseCdfTable {
    us: Vec<f64>,
    xs: Vec<f64>,
    slopes: Vec<f64>,
}

impl InverseCdfTable {
    fn build(model: &SinrModel) -> Self {
        const HALF: usize = 2048;
        let mut us = Vec::with_capacity(2 * HALF);
        let lo_span = (0.5f64 / 1e-13).ln();
        for i in 0..HALF {
            us.push(1e-13 * (lo_span * i as f64 / HALF as f64).exp());
        }
        let hi_span = (0.5f64 / 1e-12).ln();
        for i in 0..HALF {
            us.push(1.0 - 0.5 * (-hi_span * i as f64 / (HALF - 1) as f64).exp());
        }
        let x_max = model.quantile_raw(1.0);
        let mut xs = Vec::with_capacity(us.len());
        let mut slopes = Vec::with_capacity(us.len());
        let mut prev = 0.0;
        for &u in &us {
            let x = invert_monotone(|x| model.cdf_raw(x), u, prev, x_max)
                .unwrap_or_else(|_| model.quantile_raw(u));
            let f = model.pdf_raw(x);
            xs.push(x);
            slopes.push(if f > 0.0 { 1.0 / f } else { 0.0 });
            prev = x;
        }
        // Fritsch-Carlson clamp. The raw slopes 1/f are exact wherever the
        // nodes resolve the curve, but where the cdf underflows and
        // neighboring nodes collapse to the same x they can reach 1/f ~ 1e23
        // and the cubic swings wildly negative. Capping at three times the
        // adjacent secants keeps the interpolant monotone and leaves
        // well-resolved regions untouched.
        let n = us.len();
        let secant =
            |j: usize| ((xs[j + 1] - xs[j]) / (us[j + 1] - us[j])).max(0.0);
        for j in 0..n {
            let d = if j == 0 {
                secant(0)
            } else if j == n - 1 {
                secant(n - 2)
            } else {
                secant(j - 1).min(secant(j))
            };
            let cap = 3.0 * d;
            if !(slopes[j] >= 0.0) || slopes[j] > cap {
                slopes[j] = cap;
            }
        }
        Self { us, xs, slopes }
    }

    /// Node locations in u, ascending. Integrands built on `eval` are only
    /// C1 across these points, so quadrature should split on them.
    pub(crate) fn nodes(&self) -> &[f64] {
        &self.us
    }

    pub(crate) fn eval(&self, u: f64) -> f64 {
        let n = self.us.len();
        if u <= self.us[0] {
            return self.xs[0] * (u / self.us[0]).max(0.0);
        }
        if u >= self.us[n - 1] {
            return self.xs[n - 1];
        }
        let j = match self.us.binary_search_by(|p| p.partial_cmp(&u).unwrap()) {
            Ok(j) => return self.xs[j],
            Err(j) => j - 1,
        };
        let h = self.us[j + 1] - self.us[j];
        let t = (u - self.us[j]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        self.xs[j] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * self.slopes[j] * (t3 - 2.0 * t2 + t)
            + self.xs[j + 1] * (-2.0 * t3 + 3.0 * t2)
            + h * self.slopes[j + 1] * (t3 - t2)
    }
}

impl fmt::Display for SinrModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Rayleigh { m, rho } => write!(f, "rayleigh M={m} rho={rho}"),
            Family::Nakagami { mu, rho } => write!(f, "nakagami mu={mu} rho={rho}"),
            Family::Rician { k, rho } => write!(f, "rician K={k} rho={rho}"),
        }
    }
}

/// Model grammar: a family name followed by key=value parameters, e.g.
/// `rayleigh M=2 rho_db=10`, `nakagami mu=2 rho_db=0`, `rician K=10 rho=5`.
/// Exactly one of `rho` (linear) and `rho_db` must be given.
impl FromStr for SinrModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| Error::Parse("empty model spec".into()))?
            .to_ascii_lowercase();
        let mut kv: HashMap<String, f64> = HashMap::new();
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad numeric value in `{part}`")))?;
            if kv.insert(key.to_ascii_lowercase(), value).is_some() {
                return Err(Error::Parse(format!("duplicate key `{key}`")));
            }
        }
        let mut take = |key: &str| kv.remove(key);
        let rho = match (take("rho"), take("rho_db")) {
            (Some(linear), None) => linear,
            (None, Some(db)) => 10f64.powf(db / 10.0),
            (Some(_), Some(_)) => {
                return Err(Error::Parse("give rho or rho_db, not both".into()));
            }
            (None, None) => return Err(Error::Parse("missing rho or rho_db".into())),
        };
        let model = match name.as_str() {
            "rayleigh" => {
                let m = take("m").unwrap_or(1.0);
                if m.fract() != 0.0 || m < 1.0 {
                    return Err(Error::Parse(format!("M must be a positive integer, got {m}")));
                }
                SinrModel::rayleigh(m as usize, rho)
            }
            "nakagami" => {
                let mu = take("mu").ok_or_else(|| Error::Parse("nakagami needs mu=".into()))?;
                SinrModel::nakagami(mu, rho)
            }
            "rician" => {
                let k = take("k").ok_or_else(|| Error::Parse("rician needs K=".into()))?;
                SinrModel::rician(k, rho)
            }
            other => return Err(Error::Parse(format!("unknown family `{other}`"))),
        };
        if let Some(key) = kv.keys().next() {
            return Err(Error::Parse(format!("unrecognized key `{key}`")));
        }
        model.map_err(|e| Error::Parse(e.to_string()))
    }
}
