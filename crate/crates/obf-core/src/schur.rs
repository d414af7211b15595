//! Grid certification of the sufficient conditions under which the sum-rate
//! is Schur-concave in the feedback probabilities, plus the boundary
//! functions used to reason about where those conditions fail.
//!
//! The certified object is always a finite grid scan, refined around the
//! worst point; verdicts mean "grid-certified", not "proved". The plane
//! checker additionally screens for the thin negative sliver that opens
//! next to the homogeneous line q = lambda/2 when G > 0 somewhere: the
//! derivative of U along q vanishes at the line, so a coarse grid can step
//! straight over the dip. Where the screen flags positive G the checker
//! probes a geometric ladder of offsets approaching the line.

use crate::analytic::rate_two_user_derivative;
use crate::numerics::special::lambert_w0_ln_arg;
use crate::sinr::SinrModel;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// A "holds" verdict requires the worst margin to clear this floor.
pub const CERTIFICATION_TOLERANCE: f64 = 1e-10;

const SLIVER_SCREEN_POINTS: usize = 1001;
const SLIVER_SCREEN_THRESHOLD: f64 = 1e-9;
const SLIVER_PROBE_CANDIDATES: usize = 20;
const SLIVER_LADDER: [f64; 10] =
    [0.05, 0.02, 0.01, 0.005, 0.002, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5];

/// Location of the worst margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Argmin {
    PlanePoint { q: f64, lambda: f64 },
    SupportPoint { x: f64 },
}

/// Resolution the verdict was computed at.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRecord {
    pub lambda_points: usize,
    pub q_points: usize,
    pub x_points: usize,
    pub refinement: usize,
    pub label: String,
}

impl GridRecord {
    fn plane(lambda_points: usize, q_points: usize) -> Self {
        Self {
            lambda_points,
            q_points,
            x_points: 0,
            refinement: 10,
            label: "grid-certified".into(),
        }
    }

    fn support(x_points: usize) -> Self {
        Self {
            lambda_points: 0,
            q_points: 0,
            x_points,
            refinement: 10,
            label: "grid-certified".into(),
        }
    }
}

/// Outcome of one condition check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub holds: bool,
    pub min_margin: f64,
    pub argmin: Argmin,
    pub grid: GridRecord,
}

/// 101 budgets covering [0, 2].
pub fn default_lambda_grid() -> Vec<f64> {
    linear_grid(0.0, 2.0, 101)
}

/// 201 relative q coordinates in [0, 1], quadratically clustered toward 1
/// (the homogeneous end of each budget line, where the sliver lives).
pub fn default_q_grid() -> Vec<f64> {
    clustered_unit_grid(201)
}

/// 201 probability levels in [0, 0.995].
pub fn default_x_grid() -> Vec<f64> {
    linear_grid(0.0, 0.995, 201)
}

fn linear_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn clustered_unit_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let back = (n - 1 - i) as f64 / (n - 1) as f64;
            1.0 - back * back
        })
        .collect()
}

/// Derivative of the two-user plane rate in the smaller probability q; the
/// plane rate is nondecreasing toward the homogeneous point exactly when
/// this is nonnegative on max(0, lambda-1) <= q <= lambda/2.
pub fn u_function(model: &SinrModel, q: f64, lambda: f64) -> Result<f64> {
    rate_two_user_derivative(model, lambda, q)
}

fn q_range(lambda: f64) -> (f64, f64) {
    ((lambda - 1.0).max(0.0), lambda / 2.0)
}

struct PlaneScan {
    min_margin: f64,
    arg_lambda: f64,
    arg_q: f64,
    arg_r: f64,
}

fn scan_plane<M>(lambda_grid: &[f64], q_grid: &[f64], margin: &M) -> Result<PlaneScan>
where
    M: Fn(f64, f64) -> Result<f64> + Sync,
{
    let rows: Vec<Result<(f64, f64, f64)>> = lambda_grid
        .par_iter()
        .map(|&lambda| {
            let (lo, hi) = q_range(lambda);
            let mut best = (f64::INFINITY, lo, 0.0);
            for &r in q_grid {
                let q = lo + (hi - lo) * r;
                let m = margin(q, lambda)?;
                if m < best.0 {
                    best = (m, q, r);
                }
            }
            Ok(best)
        })
        .collect();
    let mut out = PlaneScan {
        min_margin: f64::INFINITY,
        arg_lambda: lambda_grid[0],
        arg_q: 0.0,
        arg_r: 0.0,
    };
    for (row, &lambda) in rows.into_iter().zip(lambda_grid) {
        let (m, q, r) = row?;
        if m < out.min_margin {
            out.min_margin = m;
            out.arg_lambda = lambda;
            out.arg_q = q;
            out.arg_r = r;
        }
    }
    Ok(out)
}

/// Re-scans a 10x finer local window around the argmin.
fn refine_plane<M>(scan: &mut PlaneScan, lambda_grid: &[f64], q_grid: &[f64], margin: &M) -> Result<()>
where
    M: Fn(f64, f64) -> Result<f64> + Sync,
{
    let d_lambda = if lambda_grid.len() > 1 {
        (lambda_grid[lambda_grid.len() - 1] - lambda_grid[0]) / (lambda_grid.len() - 1) as f64
    } else {
        0.0
    };
    let d_r = if q_grid.len() > 1 { 1.0 / (q_grid.len() - 1) as f64 } else { 0.0 };
    let lambda_lo = (scan.arg_lambda - d_lambda).max(0.0);
    let lambda_hi = (scan.arg_lambda + d_lambda).min(2.0);
    let r_lo = (scan.arg_r - d_r).max(0.0);
    let r_hi = (scan.arg_r + d_r).min(1.0);
    let local_lambda = linear_grid(lambda_lo, lambda_hi, 21);
    let local_r = linear_grid(r_lo, r_hi, 21);
    let refined = scan_plane(&local_lambda, &local_r, margin)?;
    if refined.min_margin < scan.min_margin {
        scan.min_margin = refined.min_margin;
        scan.arg_lambda = refined.arg_lambda;
        scan.arg_q = refined.arg_q;
        scan.arg_r = refined.arg_r;
    }
    Ok(())
}

/// Checks U(q, lambda) >= 0 over the budget plane. `q_grid` holds relative
/// coordinates in [0, 1] mapped onto [max(0, lambda-1), lambda/2] per
/// budget. Includes the sliver screen along q = lambda/2.
pub fn check_theorem5(
    model: &SinrModel,
    lambda_grid: &[f64],
    q_grid: &[f64],
) -> Result<ConditionReport> {
    let margin = |q: f64, lambda: f64| u_function(model, q, lambda);
    let mut scan = scan_plane(lambda_grid, q_grid, &margin)?;

    // screen the homogeneous boundary for positive G, which signals a
    // negative dip in U too close to q = lambda/2 for any fixed grid
    let mut flagged: Vec<(f64, f64)> = Vec::new();
    for i in 1..SLIVER_SCREEN_POINTS {
        let lambda = 2.0 * i as f64 / (SLIVER_SCREEN_POINTS - 1) as f64;
        let g = capital_g(model, 1.0 - lambda / 2.0)?;
        if g > SLIVER_SCREEN_THRESHOLD {
            flagged.push((g, lambda));
        }
    }
    flagged.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let probes: Vec<Result<(f64, f64, f64)>> = flagged
        .iter()
        .take(SLIVER_PROBE_CANDIDATES)
        .flat_map(|&(_, lambda)| SLIVER_LADDER.iter().map(move |&d| (lambda, d)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(lambda, d)| {
            let (lo, hi) = q_range(lambda);
            let q = hi - (hi - lo) * d;
            Ok((margin(q, lambda)?, q, lambda))
        })
        .collect();
    for probe in probes {
        let (m, q, lambda) = probe?;
        if m < scan.min_margin {
            scan.min_margin = m;
            scan.arg_lambda = lambda;
            scan.arg_q = q;
            let (lo, hi) = q_range(lambda);
            scan.arg_r = if hi > lo { (q - lo) / (hi - lo) } else { 0.0 };
        }
    }

    refine_plane(&mut scan, lambda_grid, q_grid, &margin)?;
    Ok(ConditionReport {
        holds: scan.min_margin >= -CERTIFICATION_TOLERANCE,
        min_margin: scan.min_margin,
        argmin: Argmin::PlanePoint { q: scan.arg_q, lambda: scan.arg_lambda },
        grid: GridRecord::plane(lambda_grid.len(), q_grid.len()),
    })
}

/// Checks the cruder lower bound
/// (1+q-lambda) ln(1+F^-1(1-q)) - (1-q) ln(1+F^-1(1+q-lambda)) >= 0.
pub fn check_condition19(
    model: &SinrModel,
    lambda_grid: &[f64],
    q_grid: &[f64],
) -> Result<ConditionReport> {
    let margin = |q: f64, lambda: f64| -> Result<f64> {
        let x_hi = model.quantile_raw(1.0 - q);
        let x_lo = model.quantile_raw(1.0 + q - lambda);
        Ok((1.0 + q - lambda) * x_hi.ln_1p() - (1.0 - q) * x_lo.ln_1p())
    };
    let mut scan = scan_plane(lambda_grid, q_grid, &margin)?;
    refine_plane(&mut scan, lambda_grid, q_grid, &margin)?;
    Ok(ConditionReport {
        holds: scan.min_margin >= -CERTIFICATION_TOLERANCE,
        min_margin: scan.min_margin,
        argmin: Argmin::PlanePoint { q: scan.arg_q, lambda: scan.arg_lambda },
        grid: GridRecord::plane(lambda_grid.len(), q_grid.len()),
    })
}

/// Checks the density-shape condition f'(y) + f(y)/(1+y) <= 0 at
/// y = F^-1(x) over the probability grid, plus boundedness of f at the
/// origin. The margin is the negated left side, so positive means satisfied.
pub fn check_theorem6(model: &SinrModel, x_grid: &[f64]) -> Result<ConditionReport> {
    if !model.pdf(0.0)?.is_finite() {
        return Ok(ConditionReport {
            holds: false,
            min_margin: f64::NEG_INFINITY,
            argmin: Argmin::SupportPoint { x: 0.0 },
            grid: GridRecord::support(x_grid.len()),
        });
    }
    let margin = |x: f64| -> Result<f64> {
        let y = model.quantile_raw(x);
        let f = model.pdf_raw(y);
        let d = model.pdf_derivative(y)?;
        Ok(-(d + f / (1.0 + y)))
    };
    let scan_grid = |grid: &[f64]| -> Result<(f64, f64)> {
        let mut best = (f64::INFINITY, grid[0]);
        for &x in grid {
            let m = margin(x)?;
            if m < best.0 {
                best = (m, x);
            }
        }
        Ok(best)
    };
    let (mut min_margin, mut arg_x) = scan_grid(x_grid)?;
    let dx = if x_grid.len() > 1 {
        (x_grid[x_grid.len() - 1] - x_grid[0]) / (x_grid.len() - 1) as f64
    } else {
        0.0
    };
    let local = linear_grid((arg_x - dx).max(0.0), (arg_x + dx).min(0.999999), 21);
    let refined = scan_grid(&local)?;
    if refined.0 < min_margin {
        min_margin = refined.0;
        arg_x = refined.1;
    }
    Ok(ConditionReport {
        holds: min_margin >= -CERTIFICATION_TOLERANCE,
        min_margin,
        argmin: Argmin::SupportPoint { x: arg_x },
        grid: GridRecord::support(x_grid.len()),
    })
}

/// G(x) = ln(1 + F^-1(x)) (1 + F^-1(x)) f(F^-1(x)) - x. Zero at the origin
/// in the limit; strictly decreasing when the density-shape condition
/// holds.
pub fn capital_g(model: &SinrModel, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("need x in [0, 1), got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let y = model.quantile_raw(x);
    Ok(y.ln_1p() * (1.0 + y) * model.pdf_raw(y) - x)
}

/// g(x) = 1 + (1 + y) f'(y)/f(y) at y = F^-1(x); same sign as the
/// density-shape condition's left side.
pub fn little_g(model: &SinrModel, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("need x in [0, 1), got {x}")));
    }
    let y = model.quantile_raw(x);
    let f = model.pdf_raw(y);
    if !f.is_finite() || f < 1e-280 {
        return Err(Error::Indeterminate(format!(
            "density {f} at quantile {y} leaves g undefined"
        )));
    }
    Ok(1.0 + (1.0 + y) * model.pdf_derivative(y)? / f)
}

/// Closed form of g for Rayleigh fading with at least two beams, through
/// the same Lambert branch as the quantile:
/// -((M-1) W^2 + (2M-3) W + (M-1)) / (W + 1).
pub fn rayleigh_g_closed_form(m: usize, rho: f64, x: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("need at least two beams, got {m}")));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("need rho > 0, got {rho}")));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("need x in [0, 1), got {x}")));
    }
    let mf = m as f64;
    let c = (mf - 1.0) * rho;
    let ln_arg = 1.0 / c - c.ln() - (-x).ln_1p() / (mf - 1.0);
    let w = lambert_w0_ln_arg(ln_arg);
    Ok(-((mf - 1.0) * w * w + (2.0 * mf - 3.0) * w + (mf - 1.0)) / (w + 1.0))
}

/// Families covered by the optimality region maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MapFamily {
    Nakagami,
    Rician,
}

/// One cell of an optimality region map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionCell {
    pub param: f64,
    pub rho: f64,
    pub theorem5: bool,
    pub theorem6: bool,
    pub margin5: f64,
    pub margin6: f64,
}

/// Runs both checkers over a (shape parameter) x (SNR) grid with per-cell
/// resolutions coarse enough to keep whole-map runs fast. The two verdict
/// regions nest: the density-shape region sits inside the plane region.
pub fn optimality_region_map(
    family: MapFamily,
    param_grid: &[f64],
    rho_grid: &[f64],
) -> Result<Vec<RegionCell>> {
    let lambda_grid = linear_grid(0.0, 2.0, 41);
    let q_grid = clustered_unit_grid(101);
    let x_grid = linear_grid(0.0, 0.995, 101);
    let cells: Vec<(f64, f64)> = param_grid
        .iter()
        .flat_map(|&p| rho_grid.iter().map(move |&r| (p, r)))
        .collect();
    cells
        .into_par_iter()
        .map(|(param, rho)| {
            let model = match family {
                MapFamily::Nakagami => SinrModel::nakagami(param, rho)?,
                MapFamily::Rician => SinrModel::rician(param, rho)?,
            };
            let t5 = check_theorem5(&model, &lambda_grid, &q_grid)?;
            let t6 = check_theorem6(&model, &x_grid)?;
            Ok(RegionCell {
                param,
                rho,
                theorem5: t5.holds,
                theorem6: t6.holds,
                margin5: t5.min_margin,
                margin6: t6.min_margin,
            })
        })
        .collect()
}

/// CSV rendering of a region map, one row per cell.
pub fn region_map_csv(cells: &[RegionCell]) -> String {
    let mut out = String::from("param,rho,theorem5,theorem6,margin5,margin6\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.param, c.rho, c.theorem5 as u8, c.theorem6 as u8, c.margin5, c.margin6
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::rate_two_user_on_plane;
    use crate::mc::estimate_rate;
    use crate::policies::{probabilities_to_thresholds, Policy, ProbabilityVector, ThresholdPolicy};

    fn rayleigh(rho: f64) -> SinrModel {
        SinrModel::rayleigh(1, rho).unwrap()
    }

    #[test]
    fn u_function_is_the_plane_derivative() {
        let model = rayleigh(1.0);
        let u = u_function(&model, 0.1, 0.5).unwrap();
        let d = rate_two_user_derivative(&model, 0.5, 0.1).unwrap();
        assert_eq!(u.to_bits(), d.to_bits());
        assert!(u > 0.0);
        assert_eq!(u_function(&model, 0.25, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn plane_condition_verdicts_for_rayleigh() {
        let lambda = default_lambda_grid();
        let q = default_q_grid();
        let unit = check_theorem5(&rayleigh(1.0), &lambda, &q).unwrap();
        assert!(unit.holds, "margin {}", unit.min_margin);
        let high = check_theorem5(&rayleigh(10.0), &lambda, &q).unwrap();
        assert!(!high.holds, "margin {}", high.min_margin);
        for rho in [0.1, 1.0, 100.0] {
            let multi = SinrModel::rayleigh(2, rho).unwrap();
            let report = check_theorem5(&multi, &lambda, &q).unwrap();
            assert!(report.holds, "M=2 rho={rho}: margin {}", report.min_margin);
        }
    }

    #[test]
    fn plane_checker_catches_the_near_homogeneous_sliver() {
        // just past rho = 1 the violation is a dip of depth ~1e-6 within
        // ~1e-3 of q = lambda/2; a plain uniform grid misses it
        let lambda = default_lambda_grid();
        let q = default_q_grid();
        let report = check_theorem5(&rayleigh(1.2), &lambda, &q).unwrap();
        assert!(!report.holds, "margin {}", report.min_margin);
        assert!(report.min_margin <= -1e-8, "margin {}", report.min_margin);
        if let Argmin::PlanePoint { q, lambda } = report.argmin {
            assert!((lambda / 2.0 - q).abs() < 0.05, "argmin q={q} lambda={lambda}");
        } else {
            panic!("expected a plane argmin");
        }
    }

    #[test]
    fn lower_bound_condition_and_implication() {
        let lambda = default_lambda_grid();
        let q = default_q_grid();
        for rho in [0.5, 0.8] {
            let model = rayleigh(rho);
            let bound = check_condition19(&model, &lambda, &q).unwrap();
            assert!(bound.holds, "rho={rho}: margin {}", bound.min_margin);
            let plane = check_theorem5(&model, &lambda, &q).unwrap();
            assert!(plane.holds, "implication broken at rho={rho}");
        }
    }

    #[test]
    fn density_shape_verdicts() {
        let x = default_x_grid();
        let unit = check_theorem6(&rayleigh(1.0), &x).unwrap();
        assert!(unit.holds, "margin {}", unit.min_margin);
        let above = check_theorem6(&rayleigh(1.5), &x).unwrap();
        assert!(!above.holds);
        if let Argmin::SupportPoint { x } = above.argmin {
            assert!(x < 0.1, "violation should sit near the origin, got {x}");
        }
        let multi = check_theorem6(&SinrModel::rayleigh(3, 5.0).unwrap(), &x).unwrap();
        assert!(multi.holds, "margin {}", multi.min_margin);

        // heavy shape: unbounded density at zero fails outright
        let nak_heavy = check_theorem6(&SinrModel::nakagami(0.5, 0.5).unwrap(), &x).unwrap();
        assert!(!nak_heavy.holds);
        assert_eq!(nak_heavy.min_margin, f64::NEG_INFINITY);
        // light shape: density rises from zero, so the condition flips sign
        let nak_light = check_theorem6(&SinrModel::nakagami(3.0, 0.5).unwrap(), &x).unwrap();
        assert!(!nak_light.holds);
        let rician = check_theorem6(&SinrModel::rician(2.0, 4.0).unwrap(), &x).unwrap();
        assert!(!rician.holds);
    }

    #[test]
    fn boundary_function_reference_behavior() {
        let model = rayleigh(1.0);
        assert_eq!(capital_g(&model, 0.0).unwrap(), 0.0);
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let x = i as f64 / 100.0 * 0.99;
            let g = capital_g(&model, x).unwrap();
            assert!(g <= 1e-12, "G({x}) = {g}");
            if i > 0 {
                assert!(g < prev, "G must decrease under the shape condition");
            }
            prev = g;
        }
    }

    #[test]
    fn little_g_closed_forms() {
        let model = rayleigh(2.0);
        for x in [0.0, 0.3, 0.8, 0.99] {
            let y = model.quantile(x).unwrap();
            let direct = little_g(&model, x).unwrap();
            let simplified = 1.0 - (1.0 + y) / 2.0;
            assert!((direct - simplified).abs() < 1e-10, "x={x}: {direct} vs {simplified}");
        }
        for rho in [0.1, 1.0, 10.0] {
            let multi = SinrModel::rayleigh(2, rho).unwrap();
            for i in 0..50 {
                let x = i as f64 / 50.0 * 0.999;
                let direct = little_g(&multi, x).unwrap();
                let closed = rayleigh_g_closed_form(2, rho, x).unwrap();
                assert!(
                    (direct - closed).abs() <= 1e-9 * direct.abs().max(1.0),
                    "rho={rho} x={x}: {direct} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn little_g_sign_matches_density_shape_condition() {
        let model = rayleigh(0.8);
        for i in 0..40 {
            let x = i as f64 / 40.0 * 0.99;
            let g = little_g(&model, x).unwrap();
            let y = model.quantile(x).unwrap();
            let lhs = model.pdf_derivative(y).unwrap() + model.pdf_raw(y) / (1.0 + y);
            assert_eq!(g <= 0.0, lhs <= 0.0, "sign mismatch at x={x}");
        }
    }

    #[test]
    fn multi_beam_g_strictly_negative() {
        for m in [2usize, 3, 4] {
            for rho in [0.01, 0.1, 1.0, 10.0, 100.0] {
                for i in 0..=100 {
                    let x = i as f64 / 100.0 * 0.9999;
                    let g = rayleigh_g_closed_form(m, rho, x).unwrap();
                    assert!(g < 0.0, "g({x}) = {g} at M={m} rho={rho}");
                }
            }
        }
    }

    #[test]
    fn robin_hood_transfers_never_hurt_when_certified() {
        // rho = 0.9 sits inside the certified region
        let model = rayleigh(0.9);
        let cases = [(0.5, 0.1, 0.05), (0.8, 0.2, 0.1), (1.2, 0.45, 0.1)];
        for (lambda, p2, step) in cases {
            let before = rate_two_user_on_plane(&model, lambda, p2).unwrap();
            let after = rate_two_user_on_plane(&model, lambda, p2 + step).unwrap();
            assert!(after >= before - 1e-9, "transfer hurt: {before} -> {after}");
        }

        // three users, Monte-Carlo guard
        let p_before = ProbabilityVector::new(vec![0.7, 0.2, 0.1]).unwrap();
        let p_after = ProbabilityVector::new(vec![0.65, 0.25, 0.1]).unwrap();
        let before: Policy = ThresholdPolicy::gtfp(probabilities_to_thresholds(&model, &p_before))
            .unwrap()
            .into();
        let after: Policy = ThresholdPolicy::gtfp(probabilities_to_thresholds(&model, &p_after))
            .unwrap()
            .into();
        let est_before = estimate_rate(&model, &before, 400_000, 61).unwrap();
        let est_after = estimate_rate(&model, &after, 400_000, 62).unwrap();
        let z = 1.959963984540054;
        let guard = 3.0
            * ((est_before.half_width_95 / z).powi(2) + (est_after.half_width_95 / z).powi(2))
                .sqrt();
        assert!(
            est_after.mean >= est_before.mean - guard,
            "{} -> {} (guard {guard})",
            est_before.mean,
            est_after.mean
        );
    }

    #[test]
    fn region_map_small_slice() {
        let cells =
            optimality_region_map(MapFamily::Nakagami, &[1.0], &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(cells.len(), 3);
        let by_rho: Vec<bool> = cells.iter().map(|c| c.theorem6).collect();
        assert_eq!(by_rho, vec![true, true, false], "{cells:?}");
        for cell in &cells {
            assert!(!cell.theorem6 || cell.theorem5, "nesting violated: {cell:?}");
        }
        let csv = region_map_csv(&cells);
        assert!(csv.starts_with("param,rho,theorem5,theorem6,margin5,margin6\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
