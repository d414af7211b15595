//! Optimal threshold selection: exhaustive two-user search with
//! golden-section refinement, homogeneous-policy tradeoff curves, and the
//! closed-form limiting ratio. This is the figure-reproduction engine.

use crate::analytic::{rate_homogeneous, rate_two_user_on_plane};
use crate::policies::{homogeneous_policy, FeedbackBudget, ProbabilityVector};
use crate::schur::{check_theorem5, default_lambda_grid, default_q_grid, Argmin};
use crate::sinr::{Family, SinrModel};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_RESOLUTION: usize = 2001;

const INVPHI: f64 = 0.618_033_988_749_894_9;
const GOLDEN_TOL: f64 = 1e-6;
const SNAP_TOL: f64 = 1e-11;

/// Outcome of the two-user search at one budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptResult {
    pub p_star: ProbabilityVector,
    pub rate_star: f64,
    pub rate_homogeneous: f64,
    pub gap: f64,
    pub ratio: f64,
}

/// One point of the optimality-gap curve over SNR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapPoint {
    pub rho_db: f64,
    pub gap: f64,
    pub ratio: f64,
}

/// One point of the optimal second-user probability curve over SNR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct P2Point {
    pub rho: f64,
    pub p2_star: f64,
}

/// One cell of the thresholding-vs-no-thresholding tradeoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub n: usize,
    pub lambda: f64,
    pub ratio: f64,
}

/// One point of the homogeneous-over-optimal ratio curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioPoint {
    pub family: Family,
    pub ratio: f64,
}

fn golden_max<F>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Exhaustive search over the smaller probability p2 on the budget line,
/// grid scan then golden-section refinement in the best bracket. Ties at
/// grid scale resolve toward the homogeneous point lambda/2.
pub fn optimal_two_user(model: &SinrModel, lambda: f64, resolution: usize) -> Result<OptResult> {
    if !(0.0..=2.0).contains(&lambda) {
        return Err(Error::Domain(format!("two-user budget must lie in [0, 2], got {lambda}")));
    }
    let lo = (lambda - 1.0).max(0.0);
    let hi = lambda / 2.0;
    let rate_homo = rate_two_user_on_plane(model, lambda, hi)?;
    if lambda == 0.0 || hi - lo <= GOLDEN_TOL {
        // degenerate line: empty budget or the single feasible point
        return Ok(OptResult {
            p_star: ProbabilityVector::new(vec![lambda - hi, hi])?,
            rate_star: rate_homo,
            rate_homogeneous: rate_homo,
            gap: 0.0,
            ratio: 1.0,
        });
    }

    let n = resolution.max(3);
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let rates: Vec<f64> = grid
        .par_iter()
        .map(|&p2| rate_two_user_on_plane(model, lambda, p2))
        .collect::<Result<_>>()?;
    let mut best = 0usize;
    for (i, &r) in rates.iter().enumerate() {
        if r >= rates[best] {
            best = i;
        }
    }

    let bracket_lo = grid[best.saturating_sub(1)];
    let bracket_hi = grid[(best + 1).min(n - 1)];
    let eval = |p2: f64| rate_two_user_on_plane(model, lambda, p2);
    let (golden_p2, golden_rate) = golden_max(eval, bracket_lo, bracket_hi)?;

    let mut p_star = grid[best];
    let mut rate_star = rates[best];
    if golden_rate > rate_star {
        p_star = golden_p2;
        rate_star = golden_rate;
    }
    if rate_homo >= rate_star - SNAP_TOL * rate_star.abs().max(1.0) {
        p_star = hi;
        rate_star = rate_homo;
    }

    let ratio = if rate_star > 0.0 { rate_homo / rate_star } else { 1.0 };
    Ok(OptResult {
        p_star: ProbabilityVector::new(vec![lambda - p_star, p_star])?,
        rate_star,
        rate_homogeneous: rate_homo,
        gap: rate_star - rate_homo,
        ratio,
    })
}

/// Gap and ratio of the homogeneous point against the two-user optimum for
/// single-beam Rayleigh fading across an SNR grid in dB.
pub fn optimality_gap_curve(rho_db_grid: &[f64], lambda: f64) -> Result<Vec<GapPoint>> {
    rho_db_grid
        .iter()
        .map(|&rho_db| {
            let model = SinrModel::rayleigh(1, 10f64.powf(rho_db / 10.0))?;
            let opt = optimal_two_user(&model, lambda, DEFAULT_RESOLUTION)?;
            Ok(GapPoint { rho_db, gap: opt.gap, ratio: opt.ratio })
        })
        .collect()
}

/// Optimal second-user probability for single-beam Rayleigh fading across a
/// linear SNR grid.
pub fn p2_star_vs_rho(rho_grid: &[f64], lambda: f64) -> Result<Vec<P2Point>> {
    rho_grid
        .iter()
        .map(|&rho| {
            let model = SinrModel::rayleigh(1, rho)?;
            let opt = optimal_two_user(&model, lambda, DEFAULT_RESOLUTION)?;
            Ok(P2Point { rho, p2_star: opt.p_star.values()[1] })
        })
        .collect()
}

/// Ratio of the rate under the budget-matched homogeneous threshold to the
/// rate without thresholding, per user count and budget. Meaningful only
/// where the homogeneous point is known optimal, so this refuses models the
/// plane condition does not certify.
pub fn tradeoff_curve(
    model: &SinrModel,
    n_list: &[usize],
    lambda_grid: &[f64],
) -> Result<Vec<TradeoffPoint>> {
    let report = check_theorem5(model, &default_lambda_grid(), &default_q_grid())?;
    if !report.holds {
        let at = match report.argmin {
            Argmin::PlanePoint { q, lambda } => format!("q = {q:.6}, lambda = {lambda:.4}"),
            Argmin::SupportPoint { x } => format!("x = {x:.6}"),
        };
        return Err(Error::NotCertified(format!(
            "homogeneous thresholds are only known optimal when the plane \
             condition holds; it fails for this model with margin {:.3e} at {at}",
            report.min_margin
        )));
    }
    let cells: Vec<(usize, f64)> = n_list
        .iter()
        .flat_map(|&n| lambda_grid.iter().map(move |&l| (n, l)))
        .collect();
    cells
        .into_par_iter()
        .map(|(n, lambda)| {
            let policy = homogeneous_policy(model, n, FeedbackBudget::new(lambda)?)?;
            let with = rate_homogeneous(model, n, policy.thresholds[0])?;
            let without = rate_homogeneous(model, n, 0.0)?;
            Ok(TradeoffPoint { n, lambda, ratio: with / without })
        })
        .collect()
}

/// Homogeneous-over-optimal two-user rate ratio for each model.
pub fn ratio_homo_vs_opt(models: &[SinrModel], lambda: f64) -> Result<Vec<RatioPoint>> {
    models
        .iter()
        .map(|model| {
            let opt = optimal_two_user(model, lambda, DEFAULT_RESOLUTION)?;
            Ok(RatioPoint { family: model.family(), ratio: opt.ratio })
        })
        .collect()
}

/// Limit of the homogeneous-over-optimal ratio as SNR (or line power)
/// grows: 1 - lambda/4 up to budget one, lambda - lambda^2/4 beyond.
pub fn limiting_ratio(lambda: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&lambda) {
        return Err(Error::Domain(format!("two-user budget must lie in [0, 2], got {lambda}")));
    }
    if lambda <= 1.0 {
        Ok(1.0 - lambda / 4.0)
    } else {
        Ok(lambda - lambda * lambda / 4.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn limiting_ratio_branches() {
        assert_eq!(limiting_ratio(0.0).unwrap(), 1.0);
        assert_eq!(limiting_ratio(1.0).unwrap(), 0.75);
        assert!((limiting_ratio(1.0 + 1e-12).unwrap() - 0.75).abs() < 1e-11);
        assert_eq!(limiting_ratio(2.0).unwrap(), 1.0);
        assert!(limiting_ratio(2.5).is_err());
        assert!(limiting_ratio(-0.1).is_err());
    }

    #[test]
    fn low_snr_optimum_is_homogeneous() {
        let model = SinrModel::rayleigh(1, 1.0).unwrap();
        let opt = optimal_two_user(&model, 0.5, DEFAULT_RESOLUTION).unwrap();
        assert_eq!(opt.p_star.values(), &[0.25, 0.25]);
        assert!(opt.gap.abs() <= 1e-9, "gap {}", opt.gap);
        assert_eq!(opt.ratio, 1.0);
    }

    #[test]
    fn high_snr_optimum_leaves_the_homogeneous_point() {
        let model = SinrModel::rayleigh(1, 10.0).unwrap();
        let opt = optimal_two_user(&model, 0.5, DEFAULT_RESOLUTION).unwrap();
        let p2 = opt.p_star.values()[1];
        assert!((p2 - 0.077231).abs() < 1e-3, "p2* {}", p2);
        assert!((opt.rate_star - 1.398192005).abs() < 5e-6, "rate* {}", opt.rate_star);
        assert!(
            (opt.rate_homogeneous - 1.389888621).abs() < 5e-6,
            "homo {}",
            opt.rate_homogeneous
        );
        assert!((opt.gap - 0.008303).abs() < 2e-5, "gap {}", opt.gap);
        assert!(opt.ratio < 1.0 && opt.ratio > 0.99);
    }

    #[test]
    fn zero_budget_is_trivial() {
        let model = SinrModel::rayleigh(1, 1.0).unwrap();
        let opt = optimal_two_user(&model, 0.0, DEFAULT_RESOLUTION).unwrap();
        assert_eq!(opt.p_star.values(), &[0.0, 0.0]);
        assert_eq!(opt.rate_star, 0.0);
        assert_eq!(opt.ratio, 1.0);
    }

    #[test]
    fn no_random_feasible_point_beats_the_search() {
        let model = SinrModel::rayleigh(1, 10.0).unwrap();
        let lambda = 0.5;
        let opt = optimal_two_user(&model, lambda, DEFAULT_RESOLUTION).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p2 = rng.gen_range(0.0..=lambda / 2.0);
            let rate = rate_two_user_on_plane(&model, lambda, p2).unwrap();
            assert!(rate <= opt.rate_star + 1e-9, "missed {rate} at p2 = {p2}");
        }
    }

    #[test]
    fn gap_curve_crossover_and_growth() {
        let points = optimality_gap_curve(&[0.0, 3.0, 6.7, 8.0, 10.0], 0.5).unwrap();
        assert!(points[0].gap.abs() <= 1e-9, "0 dB gap {}", points[0].gap);
        assert!(points[1].gap.abs() <= 1e-7, "3 dB gap {}", points[1].gap);
        assert!(
            points[2].gap > 1e-4 && points[2].gap < 1.5e-4,
            "6.7 dB gap {}",
            points[2].gap
        );
        assert!(points[3].gap > points[2].gap);
        assert!(points[4].gap > points[3].gap);
        for p in &points {
            assert!(p.ratio <= 1.0 + 1e-12 && p.ratio > 0.95);
        }
    }

    #[test]
    fn p2_star_shrinks_with_snr() {
        let points = p2_star_vs_rho(&[0.5, 1.0, 10.0, 100.0], 0.5).unwrap();
        assert!((points[0].p2_star - 0.25).abs() < 1e-6);
        assert!((points[1].p2_star - 0.25).abs() < 1e-6);
        for w in points.windows(2) {
            assert!(w[1].p2_star <= w[0].p2_star + 1e-3);
        }
        assert!((points[2].p2_star - 0.077231).abs() < 1e-3);
        assert!(points[3].p2_star < 0.03, "p2*(100) = {}", points[3].p2_star);
    }

    #[test]
    fn tradeoff_matches_frozen_curve() {
        let model = SinrModel::rayleigh(1, 1.0).unwrap();
        let lambdas = [0.5, 1.0, 2.0, 3.0, 5.0, 8.0];
        let points = tradeoff_curve(&model, &[10], &lambdas).unwrap();
        let expected = [0.48955, 0.73336, 0.9319, 0.98501, 0.99965, 1.0];
        for (p, e) in points.iter().zip(expected) {
            assert!((p.ratio - e).abs() < 2e-4, "lambda {}: {} vs {e}", p.lambda, p.ratio);
        }
        let full = tradeoff_curve(&model, &[10], &[10.0]).unwrap();
        assert_eq!(full[0].ratio, 1.0);
    }

    #[test]
    fn tradeoff_converges_in_user_count() {
        let model = SinrModel::rayleigh(1, 1.0).unwrap();
        let points = tradeoff_curve(&model, &[10, 150, 300], &[5.0]).unwrap();
        let expected = [0.999650, 0.995221, 0.994775];
        for (p, e) in points.iter().zip(expected) {
            assert!((p.ratio - e).abs() < 2e-4, "n {}: {} vs {e}", p.n, p.ratio);
            assert!(p.ratio >= 0.99);
        }
        assert!(points[0].ratio > points[1].ratio && points[1].ratio > points[2].ratio);
    }

    #[test]
    fn tradeoff_refuses_uncertified_models() {
        let model = SinrModel::rayleigh(1, 10.0).unwrap();
        let err = tradeoff_curve(&model, &[10], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::NotCertified(_)), "{err}");
    }

    #[test]
    fn rician_ratio_tails_toward_the_limit() {
        let models = [
            SinrModel::rician(50.0, 1000.0).unwrap(),
            SinrModel::rician(0.0, 1000.0).unwrap(),
            SinrModel::rician(10.0, 0.05).unwrap(),
        ];
        let points = ratio_homo_vs_opt(&models, 1.0).unwrap();
        assert!((points[0].ratio - 0.76952).abs() < 1e-4, "K=50: {}", points[0].ratio);
        assert!((points[1].ratio - 0.87397).abs() < 1e-4, "K=0: {}", points[1].ratio);
        let limit = limiting_ratio(1.0).unwrap();
        assert!(points[0].ratio >= limit - 0.02);
        // strong line power keeps the homogeneous point suboptimal even at
        // low SNR
        assert!(points[2].ratio < 0.999 && points[2].ratio > 0.8, "K=10: {}", points[2].ratio);
    }
}
