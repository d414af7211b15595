//! Monte-Carlo estimation of ergodic sum-rate and feedback load, the
//! per-beam scheduling rule, and classification of rate events when one
//! user's feedback rule is swapped for its matched threshold rule.
//!
//! Estimates are bit-reproducible for a fixed (seed, samples) pair no matter
//! how many worker threads run: samples are split into fixed blocks, each
//! block draws from its own counter-indexed substream, and block partials
//! are folded in block order.

use crate::policies::{FeedbackOutcome, IntervalUnion, Policy, ThresholdMode};
use crate::sinr::SinrModel;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const BLOCK: u64 = 8192;
const Z_95: f64 = 1.959963984540054;

/// An M x n matrix of SINR draws, one column per user.
#[derive(Clone, Debug, PartialEq)]
pub struct SinrMatrix {
    beams: usize,
    users: usize,
    /// column-major: entry (beam k, user i) at data[i * beams + k]
    data: Vec<f64>,
}

impl SinrMatrix {
    pub fn new(beams: usize, users: usize, data: Vec<f64>) -> Result<Self> {
        if beams == 0 || users == 0 || data.len() != beams * users {
            return Err(Error::Dimension(format!(
                "need beams * users = {} entries, got {}",
                beams * users,
                data.len()
            )));
        }
        if data.iter().any(|&g| !(g >= 0.0)) {
            return Err(Error::Domain("SINR entries must be >= 0".into()));
        }
        Ok(Self { beams, users, data })
    }

    pub fn sample<R: Rng + ?Sized>(model: &SinrModel, users: usize, rng: &mut R) -> Self {
        let beams = model.beams();
        let mut data = vec![0.0; beams * users];
        for column in data.chunks_exact_mut(beams) {
            model.sample_sinr_vector_into(rng, column);
        }
        Self { beams, users, data }
    }

    pub fn beams(&self) -> usize {
        self.beams
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn get(&self, beam: usize, user: usize) -> f64 {
        self.data[user * self.beams + beam]
    }
}

/// A sample-mean estimate with a 95% confidence half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Picks the winner on one beam: the requester with the highest reported
/// SINR, ties to the lowest user index. `None` marks an outage (no
/// requester), which contributes zero rate.
pub fn schedule_beam(outcome: &FeedbackOutcome, beam: usize) -> (Option<usize>, f64) {
    let mut winner = None;
    let mut best = 0.0;
    for &(user, gamma) in &outcome.beams[beam] {
        if winner.is_none() || gamma > best {
            winner = Some(user);
            best = gamma;
        }
    }
    (winner, if winner.is_some() { best } else { 0.0 })
}

/// Sum over beams of ln(1 + winner SINR), zero on outage beams.
pub fn instantaneous_rate(outcome: &FeedbackOutcome) -> f64 {
    (0..outcome.beams.len())
        .map(|beam| schedule_beam(outcome, beam).1.ln_1p())
        .sum()
}

/// Winner rate computed straight from a column-major draw buffer, without
/// materializing request lists. Must match `instantaneous_rate` composed
/// with `apply_policy` exactly; a test enforces that.
fn rate_from_columns(policy: &Policy, beams: usize, data: &[f64]) -> f64 {
    match policy {
        Policy::Threshold(t) => match t.mode {
            ThresholdMode::Gtfp => {
                let mut total = 0.0;
                for k in 0..beams {
                    let mut best = 0.0;
                    for (column, &tau) in data.chunks_exact(beams).zip(&t.thresholds) {
                        let g = column[k];
                        if g >= tau && g > best {
                            best = g;
                        }
                    }
                    total += best.ln_1p();
                }
                total
            }
            ThresholdMode::Mtfp => {
                let mut winners = vec![0.0; beams];
                for (column, &tau) in data.chunks_exact(beams).zip(&t.thresholds) {
                    let (mut best_beam, mut best) = (0usize, column[0]);
                    for (k, &g) in column.iter().enumerate().skip(1) {
                        if g > best {
                            best = g;
                            best_beam = k;
                        }
                    }
                    if best >= tau && best > winners[best_beam] {
                        winners[best_beam] = best;
                    }
                }
                winners.iter().map(|w| w.ln_1p()).sum()
            }
        },
        Policy::General(gp) => {
            let mut best = 0.0;
            for (column, region) in data.chunks_exact(beams).zip(&gp.regions) {
                let g = column[0];
                if region.contains(g) && g > best {
                    best = g;
                }
            }
            best.ln_1p()
        }
    }
}

/// Number of users requesting beam 1 in one draw.
fn beam1_requests_from_columns(policy: &Policy, beams: usize, data: &[f64]) -> f64 {
    match policy {
        Policy::Threshold(t) => match t.mode {
            ThresholdMode::Gtfp => data
                .chunks_exact(beams)
                .zip(&t.thresholds)
                .filter(|(column, &tau)| column[0] >= tau)
                .count() as f64,
            ThresholdMode::Mtfp => data
                .chunks_exact(beams)
                .zip(&t.thresholds)
                .filter(|(column, &tau)| {
                    // ties go to the lowest beam index, so beam 1 is chosen
                    // iff its entry is weakly largest
                    column[0] >= tau && column[1..].iter().all(|&g| g <= column[0])
                })
                .count() as f64,
        },
        Policy::General(gp) => data
            .chunks_exact(beams)
            .zip(&gp.regions)
            .filter(|(column, region)| region.contains(column[0]))
            .count() as f64,
    }
}

fn check_policy(model: &SinrModel, policy: &Policy) -> Result<()> {
    if matches!(policy, Policy::General(_)) && model.beams() != 1 {
        return Err(Error::Dimension("interval policies are single-beam".into()));
    }
    Ok(())
}

fn block_estimate<F>(samples: u64, seed: u64, per_sample: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    let partials: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b + 1);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..count {
                let r = per_sample(&mut rng);
                sum += r;
                sumsq += r * r;
            }
            (sum, sumsq)
        })
        .collect();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for (s, sq) in partials {
        sum += s;
        sumsq += sq;
    }
    let n = samples as f64;
    let mean = sum / n;
    let half_width = if samples > 1 {
        let var = ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0);
        Z_95 * (var / n).sqrt()
    } else {
        f64::INFINITY
    };
    (mean, half_width)
}

/// Sample mean of the instantaneous sum-rate over i.i.d. SINR draws.
pub fn estimate_rate(
    model: &SinrModel,
    policy: &Policy,
    samples: u64,
    seed: u64,
) -> Result<RateEstimate> {
    if samples < 1 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    check_policy(model, policy)?;
    let beams = model.beams();
    let n = policy.n();
    let (mean, half_width_95) = block_estimate(samples, seed, |rng| {
        let mut data = vec![0.0; beams * n];
        for column in data.chunks_exact_mut(beams) {
            model.sample_sinr_vector_into(rng, column);
        }
        rate_from_columns(policy, beams, &data)
    });
    Ok(RateEstimate { mean, half_width_95, samples, seed })
}

/// Sample mean of the number of users requesting beam 1 per draw.
pub fn estimate_load(
    model: &SinrModel,
    policy: &Policy,
    samples: u64,
    seed: u64,
) -> Result<RateEstimate> {
    if samples < 1 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    check_policy(model, policy)?;
    let beams = model.beams();
    let n = policy.n();
    let (mean, half_width_95) = block_estimate(samples, seed, |rng| {
        let mut data = vec![0.0; beams * n];
        for column in data.chunks_exact_mut(beams) {
            model.sample_sinr_vector_into(rng, column);
        }
        beam1_requests_from_columns(policy, beams, &data)
    });
    Ok(RateEstimate { mean, half_width_95, samples, seed })
}

/// Rate outcome of swapping user 1's interval rule for its matched
/// threshold rule on one realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwitchEvent {
    Loss,
    Gain,
    Neutral,
}

/// Compares the single-beam winner rate when user 1 follows its interval
/// region against the rate when user 1 follows the matched threshold
/// `tau1`, with every other user unchanged.
pub fn classify_switch_event(
    user1_region: &IntervalUnion,
    tau1: f64,
    gamma: &SinrMatrix,
    others: &[IntervalUnion],
) -> Result<SwitchEvent> {
    if gamma.beams() != 1 {
        return Err(Error::Dimension("switch events are single-beam".into()));
    }
    if gamma.users() != others.len() + 1 {
        return Err(Error::Dimension(format!(
            "matrix has {} users but {} regions were given",
            gamma.users(),
            others.len() + 1
        )));
    }
    let g1 = gamma.get(0, 0);
    let mut competitor = 0.0;
    for (i, region) in others.iter().enumerate() {
        let g = gamma.get(0, i + 1);
        if region.contains(g) && g > competitor {
            competitor = g;
        }
    }
    let before = if user1_region.contains(g1) { g1.max(competitor) } else { competitor };
    let after = if g1 >= tau1 { g1.max(competitor) } else { competitor };
    Ok(if after < before {
        SwitchEvent::Loss
    } else if after > before {
        SwitchEvent::Gain
    } else {
        SwitchEvent::Neutral
    })
}
