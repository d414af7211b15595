//! Feedback policy representations and the maps between thresholds, request
//! probabilities, and feedback load.
//!
//! Two threshold modes exist: GTFP (a user requests every beam whose SINR
//! clears its threshold) and MTFP (a user requests only its best beam, and
//! only when that beam clears the threshold). General policies describe the
//! single-beam feedback region as a union of intervals.

use crate::mc::SinrMatrix;
use crate::sinr::SinrModel;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMode {
    Gtfp,
    Mtfp,
}

/// Per-user SINR thresholds with a mode flag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub thresholds: Vec<f64>,
    pub mode: ThresholdMode,
}

impl ThresholdPolicy {
    pub fn gtfp(thresholds: Vec<f64>) -> Result<Self> {
        Self::new(thresholds, ThresholdMode::Gtfp)
    }

    pub fn mtfp(thresholds: Vec<f64>) -> Result<Self> {
        Self::new(thresholds, ThresholdMode::Mtfp)
    }

    fn new(thresholds: Vec<f64>, mode: ThresholdMode) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Domain("policy needs at least one user".into()));
        }
        for &tau in &thresholds {
            if !(tau >= 0.0) || !tau.is_finite() {
                return Err(Error::Domain(format!("thresholds must be finite and >= 0, got {tau}")));
            }
        }
        Ok(Self { thresholds, mode })
    }

    pub fn n(&self) -> usize {
        self.thresholds.len()
    }
}

/// A finite union of disjoint half-open intervals [a, b) of SINR. The upper
/// endpoint may be infinite. Touching intervals are merged on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if !(a >= 0.0) || a.is_nan() || b.is_nan() || a >= b {
                return Err(Error::Domain(format!("bad interval [{a}, {b})")));
            }
        }
        intervals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a < last.1 => {
                    return Err(Error::Domain(format!(
                        "overlapping intervals at [{a}, {b})"
                    )));
                }
                Some(last) if a == last.1 => last.1 = b,
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn from_threshold(tau: f64) -> Self {
        Self {
            intervals: vec![(tau, f64::INFINITY)],
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| x >= a && x < b)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Probability mass of the union under the model's SINR law.
    pub fn measure(&self, model: &SinrModel) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| {
                if b.is_infinite() {
                    1.0 - model.cdf_raw(a)
                } else {
                    model.cdf_raw(b) - model.cdf_raw(a)
                }
            })
            .sum()
    }
}

/// Per-user interval feedback regions; single-beam systems only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralPolicy {
    pub regions: Vec<IntervalUnion>,
}

impl GeneralPolicy {
    pub fn new(regions: Vec<IntervalUnion>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Domain("policy needs at least one user".into()));
        }
        Ok(Self { regions })
    }

    pub fn n(&self) -> usize {
        self.regions.len()
    }
}

/// Either policy kind, for interfaces that accept both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Policy {
    Threshold(ThresholdPolicy),
    General(GeneralPolicy),
}

impl Policy {
    pub fn n(&self) -> usize {
        match self {
            Policy::Threshold(t) => t.n(),
            Policy::General(g) => g.n(),
        }
    }
}

impl From<ThresholdPolicy> for Policy {
    fn from(p: ThresholdPolicy) -> Self {
        Policy::Threshold(p)
    }
}

impl From<GeneralPolicy> for Policy {
    fn from(p: GeneralPolicy) -> Self {
        Policy::General(p)
    }
}

/// Per-user feedback probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Domain("probability vector must be nonempty".into()));
        }
        for &v in &p {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("probabilities must lie in [0, 1], got {v}")));
            }
        }
        Ok(Self { p })
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Average number of users feeding back per beam, the constraint side of the
/// sum-rate optimization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackBudget {
    pub lambda: f64,
}

impl FeedbackBudget {
    /// The upper bound lambda <= n is enforced where the user count is known.
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("budget must be finite and >= 0, got {lambda}")));
        }
        Ok(Self { lambda })
    }
}

/// Requests received per beam: (user index, reported SINR) pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackOutcome {
    pub beams: Vec<Vec<(usize, f64)>>,
}

/// Evaluates a policy on one SINR matrix and returns the per-beam request
/// sets. Reported SINR always equals the matrix entry.
pub fn apply_policy(policy: &Policy, gamma: &SinrMatrix) -> Result<FeedbackOutcome> {
    let m = gamma.beams();
    let n = gamma.users();
    if policy.n() != n {
        return Err(Error::Dimension(format!(
            "policy covers {} users but the matrix has {n}",
            policy.n()
        )));
    }
    let mut beams = vec![Vec::new(); m];
    match policy {
        Policy::Threshold(t) => match t.mode {
            ThresholdMode::Gtfp => {
                for (i, &tau) in t.thresholds.iter().enumerate() {
                    for (k, requests) in beams.iter_mut().enumerate() {
                        let g = gamma.get(k, i);
                        if g >= tau {
                            requests.push((i, g));
                        }
                    }
                }
            }
            ThresholdMode::Mtfp => {
                for (i, &tau) in t.thresholds.iter().enumerate() {
                    let (mut best_beam, mut best) = (0usize, gamma.get(0, i));
                    for k in 1..m {
                        let g = gamma.get(k, i);
                        if g > best {
                            best = g;
                            best_beam = k;
                        }
                    }
                    if best >= tau {
                        beams[best_beam].push((i, best));
                    }
                }
            }
        },
        Policy::General(gp) => {
            if m != 1 {
                return Err(Error::Dimension(format!(
                    "interval policies are single-beam, got M = {m}"
                )));
            }
            for (i, region) in gp.regions.iter().enumerate() {
                let g = gamma.get(0, i);
                if region.contains(g) {
                    beams[0].push((i, g));
                }
            }
        }
    }
    Ok(FeedbackOutcome { beams })
}

/// Per-user probability of requesting beam 1.
///
/// GTFP thresholds map through the marginal law exactly. MTFP with several
/// beams uses beam symmetry, Pr{request beam 1} = Pr{best >= tau} / M, with
/// the best-beam exceedance measured by a fixed-seed simulation since the
/// joint best-beam law has no closed form.
pub fn beam1_request_probabilities(model: &SinrModel, policy: &Policy) -> Result<Vec<f64>> {
    match policy {
        Policy::Threshold(t) => {
            let m = model.beams();
            if matches!(t.mode, ThresholdMode::Mtfp) && m > 1 {
                let maxima = best_beam_samples(model);
                Ok(t.thresholds
                    .iter()
                    .map(|&tau| exceedance_fraction(&maxima, tau) / m as f64)
                    .collect())
            } else {
                Ok(t.thresholds.iter().map(|&tau| 1.0 - model.cdf_raw(tau)).collect())
            }
        }
        Policy::General(gp) => {
            if model.beams() != 1 {
                return Err(Error::Dimension(
                    "interval policies are single-beam".into(),
                ));
            }
            Ok(gp.regions.iter().map(|r| r.measure(model)).collect())
        }
    }
}

const BEST_BEAM_SAMPLES: usize = 2_000_000;
const BEST_BEAM_SEED: u64 = 0x4D54_4650;

/// Sorted draws of the per-user best-beam SINR, cached per model.
fn best_beam_samples(model: &SinrModel) -> Arc<Vec<f64>> {
    type Key = (u64, u64, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<f64>>>>> = OnceLock::new();
    let key = match model.family() {
        crate::sinr::Family::Rayleigh { m, rho } => (0, m as u64, rho.to_bits()),
        crate::sinr::Family::Nakagami { mu, rho } => (1, mu.to_bits(), rho.to_bits()),
        crate::sinr::Family::Rician { k, rho } => (2, k.to_bits(), rho.to_bits()),
    };
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(BEST_BEAM_SEED);
    let mut buf = vec![0.0; model.beams()];
    let mut maxima = Vec::with_capacity(BEST_BEAM_SAMPLES);
    for _ in 0..BEST_BEAM_SAMPLES {
        model.sample_sinr_vector_into(&mut rng, &mut buf);
        maxima.push(buf.iter().cloned().fold(f64::MIN, f64::max));
    }
    maxima.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let arc = Arc::new(maxima);
    cache.lock().unwrap().insert(key, arc.clone());
    arc
}

fn exceedance_fraction(sorted: &[f64], tau: f64) -> f64 {
    let below = sorted.partition_point(|&x| x < tau);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

/// Total feedback load: the sum of per-user beam-1 request probabilities.
pub fn feedback_load(model: &SinrModel, policy: &Policy) -> Result<f64> {
    Ok(beam1_request_probabilities(model, policy)?.iter().sum())
}

/// Probability that no user requests beam 1 (users are independent).
pub fn outage_probability(model: &SinrModel, policy: &Policy) -> Result<f64> {
    Ok(beam1_request_probabilities(model, policy)?
        .iter()
        .map(|p| 1.0 - p)
        .product())
}

/// tau_i = F^-1(1 - p_i). A zero probability maps through the quantile clamp
/// to a large finite threshold the user essentially never clears.
pub fn probabilities_to_thresholds(model: &SinrModel, p: &ProbabilityVector) -> Vec<f64> {
    p.values().iter().map(|&pi| model.quantile_raw(1.0 - pi)).collect()
}

/// p_i = 1 - F(tau_i).
pub fn thresholds_to_probabilities(model: &SinrModel, tau: &[f64]) -> Result<ProbabilityVector> {
    let p = tau
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(Error::Domain(format!("thresholds must be >= 0, got {t}")));
            }
            Ok(1.0 - model.cdf_raw(t))
        })
        .collect::<Result<Vec<f64>>>()?;
    ProbabilityVector::new(p)
}

/// The equal-threshold GTFP that spends the whole budget: every user gets
/// tau = F^-1(1 - lambda/n).
pub fn homogeneous_policy(
    model: &SinrModel,
    n: usize,
    budget: FeedbackBudget,
) -> Result<ThresholdPolicy> {
    if n == 0 {
        return Err(Error::Domain("need at least one user".into()));
    }
    if budget.lambda > n as f64 {
        return Err(Error::Domain(format!(
            "budget {} exceeds the user count {n}",
            budget.lambda
        )));
    }
    let tau = model.quantile(1.0 - budget.lambda / n as f64)?;
    ThresholdPolicy::gtfp(vec![tau; n])
}

/// The GTFP whose per-user feedback probability matches the interval
/// policy's region mass exactly, so the load carries over.
pub fn matched_gtfp(model: &SinrModel, general: &GeneralPolicy) -> Result<ThresholdPolicy> {
    let taus = general
        .regions
        .iter()
        .map(|r| model.quantile_raw(1.0 - r.measure(model)))
        .collect();
    ThresholdPolicy::gtfp(taus)
}

/// Symbolic policy specification, resolved against a model to get numeric
/// thresholds. Grammar:
///
/// - `gtfp tau=0.5,1.2` or `gtfp p=0.25,0.25`
/// - `mtfp tau=...` or `mtfp p=...`
/// - `general u1=[0,0.7)+[1.4,inf) u2=[2,inf)`
///
/// Probabilities convert through tau = F^-1(1 - p). For MTFP with several
/// beams the realized beam-1 request probability is measured from the
/// best-beam law, not p itself.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicySpec {
    Threshold {
        mode: ThresholdMode,
        taus: Option<Vec<f64>>,
        probabilities: Option<Vec<f64>>,
    },
    General(Vec<IntervalUnion>),
}

impl PolicySpec {
    pub fn resolve(&self, model: &SinrModel) -> Result<Policy> {
        match self {
            PolicySpec::Threshold { mode, taus, probabilities } => {
                let taus = match (taus, probabilities) {
                    (Some(t), None) => t.clone(),
                    (None, Some(p)) => {
                        let p = ProbabilityVector::new(p.clone())?;
                        probabilities_to_thresholds(model, &p)
                    }
                    _ => unreachable!("constructor enforces exactly one of tau/p"),
                };
                let policy = match mode {
                    ThresholdMode::Gtfp => ThresholdPolicy::gtfp(taus)?,
                    ThresholdMode::Mtfp => ThresholdPolicy::mtfp(taus)?,
                };
                Ok(policy.into())
            }
            PolicySpec::General(regions) => Ok(GeneralPolicy::new(regions.clone())?.into()),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            PolicySpec::Threshold { taus: Some(t), .. } => t.len(),
            PolicySpec::Threshold { probabilities: Some(p), .. } => p.len(),
            PolicySpec::Threshold { .. } => 0,
            PolicySpec::General(regions) => regions.len(),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| Error::Parse("empty policy spec".into()))?
            .to_ascii_lowercase();
        match name.as_str() {
            "gtfp" | "mtfp" => {
                let mode = if name == "gtfp" { ThresholdMode::Gtfp } else { ThresholdMode::Mtfp };
                let body = parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("{name} needs tau=... or p=...")))?;
                if let Some(extra) = parts.next() {
                    return Err(Error::Parse(format!("unexpected token `{extra}`")));
                }
                let (key, list) = body
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected key=value, got `{body}`")))?;
                let values = list
                    .split(',')
                    .map(|v| {
                        v.parse::<f64>()
                            .map_err(|_| Error::Parse(format!("bad numeric value `{v}`")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                if values.is_empty() {
                    return Err(Error::Parse("empty value list".into()));
                }
                match key.to_ascii_lowercase().as_str() {
                    "tau" => {
                        if values.iter().any(|&t| !(t >= 0.0)) {
                            return Err(Error::Parse("thresholds must be >= 0".into()));
                        }
                        Ok(PolicySpec::Threshold { mode, taus: Some(values), probabilities: None })
                    }
                    "p" => {
                        if values.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                            return Err(Error::Parse("probabilities must lie in [0, 1]".into()));
                        }
                        Ok(PolicySpec::Threshold { mode, taus: None, probabilities: Some(values) })
                    }
                    other => Err(Error::Parse(format!("unknown key `{other}`"))),
                }
            }
            "general" => {
                let mut regions: Vec<(usize, IntervalUnion)> = Vec::new();
                for part in parts {
                    let (key, value) = part
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("expected uK=..., got `{part}`")))?;
                    let index: usize = key
                        .strip_prefix('u')
                        .and_then(|d| d.parse().ok())
                        .filter(|&i| i >= 1)
                        .ok_or_else(|| Error::Parse(format!("expected user key uK, got `{key}`")))?;
                    regions.push((index, parse_interval_union(value)?));
                }
                if regions.is_empty() {
                    return Err(Error::Parse("general policy needs at least u1=...".into()));
                }
                regions.sort_by_key(|&(i, _)| i);
                let expect: Vec<usize> = (1..=regions.len()).collect();
                let got: Vec<usize> = regions.iter().map(|&(i, _)| i).collect();
                if got != expect {
                    return Err(Error::Parse(format!(
                        "user keys must be u1..u{} without gaps",
                        regions.len()
                    )));
                }
                Ok(PolicySpec::General(regions.into_iter().map(|(_, r)| r).collect()))
            }
            other => Err(Error::Parse(format!("unknown policy kind `{other}`"))),
        }
    }
}

fn parse_interval_union(s: &str) -> Result<IntervalUnion> {
    let mut intervals = Vec::new();
    for term in s.split('+') {
        let inner = term
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("expected [a,b), got `{term}`")))?;
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected two endpoints in `{term}`")))?;
        let a: f64 = a
            .parse()
            .map_err(|_| Error::Parse(format!("bad endpoint `{a}`")))?;
        let b: f64 = if b.eq_ignore_ascii_case("inf") {
            f64::INFINITY
        } else {
            b.parse()
                .map_err(|_| Error::Parse(format!("bad endpoint `{b}`")))?
        };
        intervals.push((a, b));
    }
    IntervalUnion::new(intervals).map_err(|e| Error::Parse(e.to_string()))
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Threshold { mode, taus, probabilities } => {
                let name = match mode {
                    ThresholdMode::Gtfp => "gtfp",
                    ThresholdMode::Mtfp => "mtfp",
                };
                let (key, values) = match (taus, probabilities) {
                    (Some(t), _) => ("tau", t),
                    (_, Some(p)) => ("p", p),
                    _ => unreachable!(),
                };
                let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "{name} {key}={}", list.join(","))
            }
            PolicySpec::General(regions) => {
                write!(f, "general")?;
                for (i, region) in regions.iter().enumerate() {
                    let terms: Vec<String> = region
                        .intervals()
                        .iter()
                        .map(|&(a, b)| {
                            if b.is_infinite() {
                                format!("[{a},inf)")
                            } else {
                                format!("[{a},{b})")
                            }
                        })
                        .collect();
                    write!(f, " u{}={}", i + 1, terms.join("+"))?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::SinrMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const LN4: f64 = 1.3862943611198906;

    fn ray1() -> SinrModel {
        SinrModel::rayleigh(1, 1.0).unwrap()
    }

    #[test]
    fn gtfp_requests_every_clearing_beam() {
        let policy: Policy = ThresholdPolicy::gtfp(vec![1.0, 2.0]).unwrap().into();
        let gamma = SinrMatrix::new(1, 2, vec![1.5, 1.5]).unwrap();
        let out = apply_policy(&policy, &gamma).unwrap();
        assert_eq!(out.beams, vec![vec![(0, 1.5)]]);

        let policy: Policy = ThresholdPolicy::gtfp(vec![0.4]).unwrap().into();
        let gamma = SinrMatrix::new(2, 1, vec![2.0, 0.5]).unwrap();
        let out = apply_policy(&policy, &gamma).unwrap();
        assert_eq!(out.beams, vec![vec![(0, 2.0)], vec![(0, 0.5)]]);
    }

    #[test]
    fn mtfp_requests_best_beam_only() {
        let policy: Policy = ThresholdPolicy::mtfp(vec![1.0]).unwrap().into();
        let gamma = SinrMatrix::new(2, 1, vec![2.0, 0.5]).unwrap();
        let out = apply_policy(&policy, &gamma).unwrap();
        assert_eq!(out.beams, vec![vec![(0, 2.0)], vec![]]);

        // below threshold: silent everywhere
        let gamma = SinrMatrix::new(2, 1, vec![0.9, 0.5]).unwrap();
        let out = apply_policy(&policy, &gamma).unwrap();
        assert_eq!(out.beams, vec![vec![], vec![]]);

        // tied best beams resolve to the lowest beam index
        let gamma = SinrMatrix::new(2, 1, vec![1.5, 1.5]).unwrap();
        let out = apply_policy(&policy, &gamma).unwrap();
        assert_eq!(out.beams, vec![vec![(0, 1.5)], vec![]]);
    }

    #[test]
    fn general_policy_uses_interval_membership() {
        let region = IntervalUnion::new(vec![(0.0, 0.7), (1.4, f64::INFINITY)]).unwrap();
        let policy: Policy = GeneralPolicy::new(vec![region]).unwrap().into();
        for (gamma, requests) in [(0.5, true), (0.7, false), (1.0, false), (1.4, true), (9.0, true)] {
            let m = SinrMatrix::new(1, 1, vec![gamma]).unwrap();
            let out = apply_policy(&policy, &m).unwrap();
            assert_eq!(!out.beams[0].is_empty(), requests, "gamma = {gamma}");
        }
        let two_beams = SinrMatrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(apply_policy(&policy, &two_beams).is_err());
    }

    #[test]
    fn apply_policy_checks_dimensions() {
        let policy: Policy = ThresholdPolicy::gtfp(vec![1.0]).unwrap().into();
        let gamma = SinrMatrix::new(1, 2, vec![1.0, 2.0]).unwrap();
        assert!(apply_policy(&policy, &gamma).is_err());
    }

    #[test]
    fn interval_union_validation() {
        assert!(IntervalUnion::new(vec![(0.5, 0.5)]).is_err());
        assert!(IntervalUnion::new(vec![(-0.1, 0.5)]).is_err());
        assert!(IntervalUnion::new(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
        let merged = IntervalUnion::new(vec![(1.0, 2.0), (0.0, 1.0)]).unwrap();
        assert_eq!(merged.intervals(), &[(0.0, 2.0)]);
    }

    #[test]
    fn threshold_probability_round_trip() {
        let model = ray1();
        let p = ProbabilityVector::new(vec![0.25, 0.25]).unwrap();
        let tau = probabilities_to_thresholds(&model, &p);
        assert!((tau[0] - LN4).abs() < 1e-12);
        let back = thresholds_to_probabilities(&model, &tau).unwrap();
        for (&got, &want) in back.values().iter().zip(p.values()) {
            assert!((got - want).abs() < 1e-9);
        }
        // tau = 0 means certain feedback
        let all = thresholds_to_probabilities(&model, &[0.0]).unwrap();
        assert_eq!(all.values(), &[1.0]);
        // p = 0 maps through the quantile clamp to a finite threshold
        let silent = ProbabilityVector::new(vec![0.0]).unwrap();
        assert!(probabilities_to_thresholds(&model, &silent)[0].is_finite());
    }

    #[test]
    fn nakagami_threshold_probability() {
        let model = SinrModel::nakagami(2.0, 1.0).unwrap();
        let p = thresholds_to_probabilities(&model, &[1.0]).unwrap();
        assert!((p.values()[0] - 0.40600584970983844).abs() < 1e-11);
    }

    #[test]
    fn load_of_homogeneous_probabilities() {
        let model = ray1();
        let p = ProbabilityVector::new(vec![0.3; 4]).unwrap();
        let tau = probabilities_to_thresholds(&model, &p);
        let policy: Policy = ThresholdPolicy::gtfp(tau).unwrap().into();
        assert!((feedback_load(&model, &policy).unwrap() - 1.2).abs() < 1e-9);

        let zero_tau: Policy = ThresholdPolicy::gtfp(vec![0.0; 5]).unwrap().into();
        assert!((feedback_load(&model, &zero_tau).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_policy_reference_values() {
        let model = ray1();
        let policy = homogeneous_policy(&model, 2, FeedbackBudget::new(0.5).unwrap()).unwrap();
        for &tau in &policy.thresholds {
            assert!((tau - LN4).abs() < 1e-12);
        }
        let all = homogeneous_policy(&model, 3, FeedbackBudget::new(3.0).unwrap()).unwrap();
        assert!(all.thresholds.iter().all(|&t| t == 0.0));
        let big = homogeneous_policy(&model, 150, FeedbackBudget::new(5.0).unwrap()).unwrap();
        assert!((big.thresholds[0] - 30f64.ln()).abs() < 1e-12);
        assert!(homogeneous_policy(&model, 2, FeedbackBudget::new(2.5).unwrap()).is_err());
    }

    #[test]
    fn matched_gtfp_preserves_load() {
        let model = ray1();
        // a plain threshold region maps to itself
        let already = GeneralPolicy::new(vec![IntervalUnion::from_threshold(0.8)]).unwrap();
        let t = matched_gtfp(&model, &already).unwrap();
        assert!((t.thresholds[0] - 0.8).abs() < 1e-10);

        let split = GeneralPolicy::new(vec![IntervalUnion::new(vec![
            (0.0, 2f64.ln()),
            (LN4, f64::INFINITY),
        ])
        .unwrap()])
        .unwrap();
        let t = matched_gtfp(&model, &split).unwrap();
        assert!((t.thresholds[0] - (4f64 / 3.0).ln()).abs() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let mut cuts: Vec<f64> = (0..4).map(|_| rand::Rng::gen_range(&mut rng, 0.0..3.0)).collect();
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let region = IntervalUnion::new(vec![(cuts[0], cuts[1]), (cuts[2], f64::INFINITY)])
                .or_else(|_| IntervalUnion::new(vec![(cuts[0], cuts[3])]))
                .unwrap();
            let general = GeneralPolicy::new(vec![region]).unwrap();
            let load_general =
                feedback_load(&model, &Policy::General(general.clone())).unwrap();
            let matched = matched_gtfp(&model, &general).unwrap();
            let load_matched = feedback_load(&model, &matched.into()).unwrap();
            assert!(
                (load_general - load_matched).abs() < 1e-12,
                "{load_general} vs {load_matched}"
            );
        }
    }

    #[test]
    fn outage_probability_values() {
        let model = ray1();
        let p = ProbabilityVector::new(vec![0.25, 0.25]).unwrap();
        let tau = probabilities_to_thresholds(&model, &p);
        let policy: Policy = ThresholdPolicy::gtfp(tau).unwrap().into();
        assert!((outage_probability(&model, &policy).unwrap() - 0.5625).abs() < 1e-9);

        let certain: Policy = ThresholdPolicy::gtfp(vec![0.0, 3.0]).unwrap().into();
        assert_eq!(outage_probability(&model, &certain).unwrap(), 0.0);
    }

    #[test]
    fn mtfp_load_uses_best_beam_law() {
        let model = SinrModel::rayleigh(2, 1.0).unwrap();
        let tau = 0.8;
        let mtfp: Policy = ThresholdPolicy::mtfp(vec![tau]).unwrap().into();
        let p_mtfp = beam1_request_probabilities(&model, &mtfp).unwrap()[0];
        // the best of two beams clears tau more often than one beam alone
        let marginal = 1.0 - model.cdf_raw(tau);
        assert!(p_mtfp > marginal / 2.0);
        assert!(p_mtfp < marginal);
        // above SINR 1 at most one beam clears, so the beam exceedance
        // events are disjoint and the MTFP beam-1 probability equals the
        // full marginal, as for GTFP
        let high: Policy = ThresholdPolicy::mtfp(vec![1.3]).unwrap().into();
        let p_high = beam1_request_probabilities(&model, &high).unwrap()[0];
        let marginal_high = 1.0 - model.cdf_raw(1.3);
        assert!((p_high - marginal_high).abs() < 1e-3, "{p_high} vs {marginal_high}");
    }

    #[test]
    fn gtfp_and_mtfp_agree_above_unit_thresholds() {
        for m in [2usize, 3] {
            let model = SinrModel::rayleigh(m, 1.0).unwrap();
            let taus = vec![1.2, 1.05, 1.6];
            let gtfp: Policy = ThresholdPolicy::gtfp(taus.clone()).unwrap().into();
            let mtfp: Policy = ThresholdPolicy::mtfp(taus).unwrap().into();
            let mut rng = ChaCha8Rng::seed_from_u64(41 + m as u64);
            for _ in 0..100_000 {
                let gamma = SinrMatrix::sample(&model, 3, &mut rng);
                let a = apply_policy(&gtfp, &gamma).unwrap();
                let b = apply_policy(&mtfp, &gamma).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn policy_spec_round_trip() {
        let cases = [
            "gtfp tau=0.5,1.2",
            "mtfp p=0.25,0.25",
            "general u1=[0,0.7)+[1.4,inf) u2=[2,inf)",
        ];
        for text in cases {
            let spec: PolicySpec = text.parse().unwrap();
            let redisplayed: PolicySpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, redisplayed);
        }
        let model = ray1();
        let spec: PolicySpec = "gtfp p=0.25,0.25".parse().unwrap();
        if let Policy::Threshold(t) = spec.resolve(&model).unwrap() {
            assert!((t.thresholds[0] - LN4).abs() < 1e-12);
        } else {
            panic!("expected threshold policy");
        }
    }

    #[test]
    fn policy_spec_rejects_malformed_input() {
        for bad in [
            "",
            "gtfp",
            "gtfp tau=",
            "gtfp q=0.5",
            "gtfp tau=-1",
            "gtfp p=1.5",
            "mtfp tau=0.5 extra",
            "general",
            "general u2=[0,1)",
            "general u1=[1,0)",
            "general u1=(0,1)",
            "unknown tau=1",
        ] {
            assert!(bad.parse::<PolicySpec>().is_err(), "accepted `{bad}`");
        }
    }

    #[test]
    fn probability_vector_validation() {
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![1.2]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1]).is_err());
        assert!(FeedbackBudget::new(-0.5).is_err());
        assert!(FeedbackBudget::new(f64::INFINITY).is_err());
    }
}
