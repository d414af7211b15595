//! Subcommand implementations.

use crate::config::{parse_f64_list, parse_usize_list, Settings};
use crate::output::{emit, Cell, Table};
use crate::{CliError, OutputFormat};
use clap::Args;
use obf_core::analytic::{
    rate_homogeneous, rate_two_user_beam, rate_two_user_derivative, rate_two_user_on_plane,
};
use obf_core::mc::{
    classify_switch_event, estimate_load, estimate_rate, SinrMatrix, SwitchEvent,
};
use obf_core::optimize::{
    optimal_two_user, optimality_gap_curve, p2_star_vs_rho, tradeoff_curve, DEFAULT_RESOLUTION,
};
use obf_core::policies::{
    apply_policy, feedback_load, matched_gtfp, outage_probability, GeneralPolicy, IntervalUnion,
    Policy, PolicySpec, ThresholdMode, ThresholdPolicy,
};
use obf_core::schur::{
    capital_g, check_condition19, check_theorem5, check_theorem6, default_lambda_grid,
    default_q_grid, default_x_grid, optimality_region_map, rayleigh_g_closed_form, MapFamily,
};
use obf_core::sinr::SinrModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::process::ExitCode;

const Z_95: f64 = 1.959963984540054;

#[derive(Args)]
pub struct OutArgs {
    /// Output file; standard output when absent
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv (default) or json
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl OutArgs {
    fn resolve(&self, cfg: &Settings) -> Result<(Option<PathBuf>, OutputFormat), CliError> {
        let output = match &self.output {
            Some(p) => Some(p.clone()),
            None => cfg.get("output").map(PathBuf::from),
        };
        let format = match self.format {
            Some(f) => f,
            None => match cfg.get("format") {
                None | Some("csv") => OutputFormat::Csv,
                Some("json") => OutputFormat::Json,
                Some(other) => {
                    return Err(CliError::Usage(format!("unknown format {other}")));
                }
            },
        };
        Ok((output, format))
    }
}

fn parse_model(cfg: &Settings, flag: Option<String>) -> Result<SinrModel, CliError> {
    let raw: String = cfg.require(flag, "model")?;
    Ok(raw.parse::<SinrModel>()?)
}

#[derive(Args)]
pub struct RateArgs {
    /// Model spec, e.g. "rayleigh M=2 rho_db=10"
    #[arg(long)]
    model: Option<String>,
    /// Policy spec, e.g. "gtfp tau=0.5,1.2" or "mtfp p=0.25,0.25"
    #[arg(long)]
    policy: Option<String>,
    /// Monte-Carlo draws, scientific notation accepted
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

/// Analytic sum-rate where a closed path exists: threshold policies whose
/// per-beam behavior matches the general-threshold marginal (any GTFP, or
/// MTFP with a single beam), via the two-user or homogeneous integrals.
fn analytic_rate(model: &SinrModel, policy: &Policy) -> Result<Option<f64>, CliError> {
    let beams = model.beams() as f64;
    if let Policy::Threshold(t) = policy {
        let gtfp_like = matches!(t.mode, ThresholdMode::Gtfp) || model.beams() == 1;
        if !gtfp_like {
            return Ok(None);
        }
        if t.thresholds.len() == 2 {
            let per_beam = rate_two_user_beam(model, t.thresholds[0], t.thresholds[1])?;
            return Ok(Some(beams * per_beam));
        }
        let first = t.thresholds[0];
        if t.thresholds.iter().all(|&tau| tau == first) {
            let per_beam = rate_homogeneous(model, t.thresholds.len(), first)?;
            return Ok(Some(beams * per_beam));
        }
    }
    Ok(None)
}

pub fn rate(args: RateArgs, cfg: &Settings) -> Result<ExitCode, CliError> {
    let (output, format) = args.out.resolve(cfg)?;
    let model = parse_model(cfg, args.model)?;
    let spec: PolicySpec = cfg.require::<String>(args.policy, "policy")?.parse()?;
    let policy = spec.resolve(&model)?;
    let samples = cfg.samples(args.samples, 1_000_000)?;
    let seed = cfg.seed(args.seed)?;

    let mc = estimate_rate(&model, &policy, samples, seed)?;
    let load = feedback_load(&model, &policy)?;
    let outage = outage_probability(&model, &policy)?;
    let analytic = analytic_rate(&model, &policy)?;

    let mut table = Table::new(vec!["analytic_rate", "mc_mean", "mc_halfwidth", "load", "outage"])
        .tag("model", &model)
        .tag("policy", &spec)
        .tag("seed", seed)
        .tag("samples", samples);
    table.push(vec![
        analytic.map(Cell::Num).unwrap_or(Cell::Empty),
        Cell::Num(mc.mean),
        Cell::Num(mc.half_width_95),
        Cell::Num(load),
        Cell::Num(outage),
    ]);
    emit(&table, format, output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    model: Option<String>,
    /// Two-user feedback budget in [0, 2]
    #[arg(long)]
    lambda: Option<f64>,
    /// Grid points for the exhaustive scan
    #[arg(long)]
    resolution: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

pub fn optimize(args: OptimizeArgs, cfg: &Settings) -> Result<ExitCode, CliError> {
    let (output, format) = args.out.resolve(cfg)?;
    let model = parse_model(cfg, args.model)?;
    let lambda: f64 = cfg.require(args.lambda, "lambda")?;
    let resolution = cfg.resolve_or(args.resolution, "resolution", DEFAULT_RESOLUTION)?;
    let opt = optimal_two_user(&model, lambda, resolution)?;
    let mut table =
        Table::new(vec!["p1", "p2", "rate_star", "rate_homogeneous", "gap", "ratio"])
            .tag("model", &model)
            .tag("lambda", lambda)
            .tag("grid", resolution);
    table.push(vec![
        Cell::Num(opt.p_star.values()[0]),
        Cell::Num(opt.p_star.values()[1]),
        Cell::Num(opt.rate_star),
        Cell::Num(opt.rate_homogeneous),
        Cell::Num(opt.gap),
        Cell::Num(opt.ratio),
    ]);
    emit(&table, format, output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct GapArgs {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rho_db_min: Option<f64>,
    #[arg(long)]
    rho_db_max: Option<f64>,
    #[arg(long)]
    rho_db_step: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

fn db_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || max < min {
        return Err(CliError::Usage(format!("bad dB grid: [{min}, {max}] step {step}")));
    }
    let count = ((max - min) / step).round() as usize + 1;
    Ok((0..count).map(|i| min + step * i as f64).collect())
}

pub fn gap(args: GapArgs, cfg: &Settings) -> Result<ExitCode, CliError> {
    let (output, format) = args.out.resolve(cfg)?;
    let lambda = cfg.resolve_or(args.lambda, "lambda", 0.5)?;
    let min = cfg.resolve_or(args.rho_db_min, "rho_db_min", 0.0)?;
    let max = cfg.resolve_or(args.rho_db_max, "rho_db_max", 10.0)?;
    let step = cfg.resolve_or(args.rho_db_step, "rho_db_step", 0.1)?;
    let grid = db_grid(min, max, step)?;
    let points = optimality_gap_curve(&grid, lambda)?;
    let mut table = Table::new(vec!["rho_db", "gap", "ratio"])
        .tag("model", "rayleigh M=1")
        .tag("lambda", lambda)
        .tag("grid", format!("{min}:{max}:{step} dB"));
    for p in points {
        table.push(vec![Cell::Num(p.rho_db), Cell::Num(p.gap), Cell::Num(p.ratio)]);
    }
    emit(&table, format, output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct SchurMapArgs {
    /// nakagami or rician
    #[arg(long)]
    family: Option<String>,
    /// Comma-separated shape parameters (mu or K)
    #[arg(long)]
    param_grid: Option<String>,
    /// Comma-separated mean SNR values
    #[arg(long)]
    rho_grid: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

const NAKAGAMI_PARAMS: &[f64] = &[0.5, 0.75, 1.0, 2.0, 3.0];
const NAKAGAMI_RHOS: &[f64] = &[0.25, 0.5, 1.0, 2.0, 4.0];
const RICIAN_PARAMS: &[f64] = &[0.0, 0.5, 1.0, 2.0, 10.0];
const RICIAN_RHOS: &[f64] = &[0.25, 0.5, 0.8, 1.25, 2.0, 4.0];

pub fn schur_map(args: SchurMapArgs, cfg: &Settings) -> Result<ExitCode, CliError> {
    let (output, format) = args.out.resolve(cfg)?;
    let family_raw = cfg.resolve_or(args.family, "family", "nakagami".to_string())?;
    let (family, default_params, default_rhos) = match family_raw.as_str() {
        "nakagami" => (MapFamily::Nakagami, NAKAGAMI_PARAMS, NAKAGAMI_RHOS),
        "rician" => (MapFamily::Rician, RICIAN_PARAMS, RICIAN_RHOS),
        other => return Err(CliError::Usage(format!("unknown family {other}"))),
    };
    let params = match cfg.resolve(args.param_grid, "param_grid")? {
        Some(raw) => parse_f64_list(&raw, "param grid")?,
        None => default_params.to_vec(),
    };
    let rhos = match cfg.resolve(args.rho_grid, "rho_grid")? {
        Some(raw) => parse_f64_list(&raw, "rho grid")?,
        None => default_rhos.to_vec(),
    };
    let cells = optimality_region_map(family, &params, &rhos)?;
    let mut table = Table::new(vec!["param", "rho", "theorem5", "theorem6", "margin5", "margin6"])
        .tag("family", family_raw)
        .tag("grid", "41x101 plane, 101 support per cell");
    for c in cells {
        table.push(vec![
            Cell::Num(c.param),
            Cell::Num(c.rho),
            Cell::Int(c.theorem5 as u64),
            Cell::Int(c.theorem6 as u64),
            Cell::Num(c.margin5),
            Cell::Num(c.margin6),
        ]);
    }
    emit(&table, format, output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct TradeoffArgs {
    #[arg(long)]
    model: Option<String>,
    /// Comma-separated user counts
    #[arg(long)]
    n_list: Option<String>,
    /// Comma-separated budgets
    #[arg(long)]
    lambda_grid: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

pub fn tradeoff(args: TradeoffArgs, cfg: &Settings) -> Result<ExitCode, CliError> {
    let (output, format) = args.out.resolve(cfg)?;
    let model: SinrModel = cfg
        .resolve_or(args.model, "model", "rayleigh M=1 rho=1".to_string())?
        .parse()?;
    let n_list = match cfg.resolve(args.n_list, "n_list")? {
        Some(raw) => parse_usize_list(&raw, "user counts")?,
        None => vec![10, 150, 300],
    };
    let lambdas = match cfg.resolve(args.lambda_grid, "lambda_grid")? {
        Some(raw) => parse_f64_list(&raw, "lambda grid")?,
        None => (1..=32).map(|i| 0.25 * i as f64).collect(),
    };
    let points = tradeoff_curve(&model, &n_list, &lambdas)?;
    let mut table = Table::new(vec!["n", "lambda", "ratio"]).tag("model", &model);
    for p in points {
        table.push(vec![Cell::Int(p.n as u64), Cell::Num(p.lambda), Cell::Num(p.ratio)]);
    }
    emit(&table, format, output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct FiguresArgs {
    /// Directory receiving the CSV set
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Subset of figures, e.g. "fig5a,fig11"
    #[arg(long)]
    only: Option<String>,
}

fn sweep_table(rho: f64, lambda: f64) -> Result<Table, CliError> {
    let model = SinrModel::rayleigh(1, rho)?;
    let lo = (lambda - 1.0).max(0.0);
    let hi = lambda / 2.0;
    let mut table = Table::new(vec!["p2", "rate"])
        .tag("model", &model)
        .tag("lambda", lambda)
        .tag("grid", 101);
    for i in 0..101 {
        let p2 = lo + (hi - lo) * i as f64 / 100.0;
        table.push(vec![Cell::Num(p2), Cell::Num(rate_two_user_on_plane(&model, lambda, p2)?)]);
    }
    Ok(table)
}

fn region_table(family: MapFamily, name: &str, params: &[f64], rhos: &[f64]) -> Result<Table, CliError> {
    let cells = optimality_region_map(family, params, rhos)?;
    let mut table = Table::new(vec!["param", "rho", "theorem5", "theorem6", "margin5", "margin6"])
        .tag("family", name)
        .tag("grid", "41x101 plane, 101 support per cell");
    for c in cells {
        table.push(vec![
            Cell::Num(c.param),
            Cell::Num(c.rho),
            Cell::Int(c.theorem5 as u64),
            Cell::Int(c.theorem6 as u64),
            Cell::Num(c.margin5),
            Cell::Num(c.margin6),
        ]);
    }
    Ok(table)
}

pub fn figures(args: FiguresArgs, cfg: &Settings) -> Result<ExitCode, CliError> {
    let out_dir = match args.out_dir {
        Some(p) => p,
        None => PathBuf::from(cfg.get("out_dir").unwrap_or("figures")),
    };
    let only: Option<Vec<String>> = args
        .only
        .or_else(|| cfg.get("only").map(String::from))
        .map(|raw| raw.split(',').map(|s| s.trim().to_string()).collect());
    let wanted = |key: &str| only.as_ref().map_or(true, |list| list.iter().any(|k| k == key));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut written = 0usize;
    let mut write = |name: &str, table: Table| -> Result<(), CliError> {
        let path = out_dir.join(name);
        emit(&table, OutputFormat::Csv, Some(&path))?;
        println!("wrote {}", path.display());
        written += 1;
        Ok(())
    };

    if wanted("fig5a") {
        write("fig5a.csv", sweep_table(1.0, 0.5)?)?;
    }
    if wanted("fig5b") {
        write("fig5b.csv", sweep_table(10.0, 0.5)?)?;
    }
    if wanted("fig6") {
        let grid = db_grid(0.0, 10.0, 0.1)?;
        let points = optimality_gap_curve(&grid, 0.5)?;
        let mut table = Table::new(vec!["rho_db", "gap", "ratio"])
            .tag("model", "rayleigh M=1")
            .tag("lambda", 0.5)
            .tag("grid", "0:10:0.1 dB");
        for p in points {
            table.push(vec![Cell::Num(p.rho_db), Cell::Num(p.gap), Cell::Num(p.ratio)]);
        }
        write("fig6_gap.csv", table)?;
    }
    if wanted("fig7") {
        let model = SinrModel::rayleigh(1, 1.0)?;
        let lambdas: Vec<f64> = (1..=32).map(|i| 0.25 * i as f64).collect();
        let points = tradeoff_curve(&model, &[10, 150, 300], &lambdas)?;
        let mut table = Table::new(vec!["n", "lambda", "ratio"]).tag("model", &model);
        for p in points {
            table.push(vec![Cell::Int(p.n as u64), Cell::Num(p.lambda), Cell::Num(p.ratio)]);
        }
        write("fig7_tradeoff.csv", table)?;
    }
    if wanted("fig8") {
        write(
            "fig8_nakagami_region.csv",
            region_table(MapFamily::Nakagami, "nakagami", NAKAGAMI_PARAMS, NAKAGAMI_RHOS)?,
        )?;
    }
    if wanted("fig9") {
        write(
            "fig9_rician_region.csv",
            region_table(MapFamily::Rician, "rician", RICIAN_PARAMS, RICIAN_RHOS)?,
        )?;
    }
    if wanted("fig10") {
        let dbs = db_grid(-10.0, 20.0, 1.0)?;
        let rhos: Vec<f64> = dbs.iter().map(|db| 10f64.powf(db / 10.0)).collect();
        let points = p2_star_vs_rho(&rhos, 0.5)?;
        let mut table = Table::new(vec!["rho_db", "p2_star"])
            .tag("model", "rayleigh M=1")
            .tag("lambda", 0.5)
            .tag("grid", "-10:20:1 dB");
        for (db, p) in dbs.iter().zip(points) {
            table.push(vec![Cell::Num(*db), Cell::Num(p.p2_star)]);
        }
        write("fig10_p2star.csv", table)?;
    }
    if wanted("fig11") {
        let ks = [0.0, 2.0, 10.0, 50.0];
        let dbs = db_grid(-10.0, 30.0, 5.0)?;
        let mut table = Table::new(vec!["k", "rho_db", "ratio"])
            .tag("model", "rician M=1")
            .tag("lambda", 1.0)
            .tag("grid", "-10:30:5 dB");
        for &k in &ks {
            for &db in &dbs {
                let model = SinrModel::rician(k, 10f64.powf(db / 10.0))?;
                let opt = optimal_two_user(&model, 1.0, 801)?;
                table.push(vec![Cell::Num(k), Cell::Num(db), Cell::Num(opt.ratio)]);
            }
        }
        write("fig11_ratio.csv", table)?;
    }

    if written == 0 {
        return Err(CliError::Usage("no figure matched --only".into()));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct VerifyArgs {
    /// all, analytic, switching, equivalence, or schur
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Negative control: flips a sign inside the analytic plane derivative
    /// so the derivative check must fail
    #[arg(long)]
    inject_fault: bool,
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn sigma(est_half_width: f64) -> f64 {
    est_half_width / Z_95
}

fn analytic_suite(
    checks: &mut Vec<Check>,
    samples: u64,
    seed: u64,
    inject_fault: bool,
) -> Result<(), CliError> {
    let model = SinrModel::rayleigh(1, 1.0)?;
    let taus = [0.5, 1.2];

    let exact = rate_two_user_beam(&model, taus[0], taus[1])?;
    let policy: Policy = ThresholdPolicy::gtfp(taus.to_vec())?.into();
    let mc = estimate_rate(&model, &policy, samples, seed)?;
    let gap = (exact - mc.mean).abs();
    let guard = 3.0 * sigma(mc.half_width_95);
    checks.push(Check {
        name: "analytic/two-user-rate-vs-mc",
        pass: gap <= guard,
        detail: format!("analytic {exact:.6}, mc {:.6} +- {:.6}", mc.mean, mc.half_width_95),
    });

    let n = 5;
    let homo = obf_core::policies::homogeneous_policy(
        &model,
        n,
        obf_core::policies::FeedbackBudget::new(1.0)?,
    )?;
    let tau = homo.thresholds[0];
    let exact_homo = rate_homogeneous(&model, n, tau)?;
    let policy_homo: Policy = homo.into();
    let mc_homo = estimate_rate(&model, &policy_homo, samples, seed + 1)?;
    checks.push(Check {
        name: "analytic/homogeneous-rate-vs-mc",
        pass: (exact_homo - mc_homo.mean).abs() <= 3.0 * sigma(mc_homo.half_width_95),
        detail: format!("analytic {exact_homo:.6}, mc {:.6}", mc_homo.mean),
    });

    let load_exact = feedback_load(&model, &policy)?;
    let load_mc = estimate_load(&model, &policy, samples, seed + 2)?;
    checks.push(Check {
        name: "analytic/load-vs-mc",
        pass: (load_exact - load_mc.mean).abs() <= 3.0 * sigma(load_mc.half_width_95),
        detail: format!("analytic {load_exact:.6}, mc {:.6}", load_mc.mean),
    });

    let (lambda, q, h) = (0.5, 0.1, 1e-4);
    let mut derivative = rate_two_user_derivative(&model, lambda, q)?;
    if inject_fault {
        let x_lo = model.quantile(1.0 + q - lambda)?;
        derivative += 2.0 * (lambda - 2.0 * q) * x_lo.ln_1p();
    }
    let fd = (rate_two_user_on_plane(&model, lambda, q + h)?
        - rate_two_user_on_plane(&model, lambda, q - h)?)
        / (2.0 * h);
    checks.push(Check {
        name: "analytic/derivative-mismatch",
        pass: (derivative - fd).abs() <= 1e-5,
        detail: format!("analytic {derivative:.8}, finite difference {fd:.8}"),
    });
    Ok(())
}

fn switching_suite(checks: &mut Vec<Check>, samples: u64, seed: u64) -> Result<(), CliError> {
    let model = SinrModel::rayleigh(1, 1.0)?;
    let region = IntervalUnion::new(vec![(0.3, 0.8), (1.5, f64::INFINITY)])?;
    let others = vec![IntervalUnion::from_threshold(0.9)];
    let tau1 = model.quantile(1.0 - region.measure(&model))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0u64;
    let draws = samples.min(100_000);
    for _ in 0..draws {
        let gamma = SinrMatrix::sample(&model, 2, &mut rng);
        let event = classify_switch_event(&region, tau1, &gamma, &others)?;
        let g1 = gamma.get(0, 0);
        let in_region = region.contains(g1);
        let above = g1 >= tau1;
        let mut competitor = 0.0f64;
        for (i, r) in others.iter().enumerate() {
            let g = gamma.get(0, i + 1);
            if r.contains(g) && g > competitor {
                competitor = g;
            }
        }
        // set characterization: only one-sided membership can move the
        // rate, and only when user 1 actually beats the best competitor
        let expected = match (in_region, above) {
            (true, true) | (false, false) => SwitchEvent::Neutral,
            (true, false) if g1 > competitor => SwitchEvent::Loss,
            (false, true) if g1 > competitor => SwitchEvent::Gain,
            _ => SwitchEvent::Neutral,
        };
        if event != expected {
            mismatches += 1;
        }
    }
    checks.push(Check {
        name: "switching/event-classification",
        pass: mismatches == 0,
        detail: format!("{mismatches} mismatches over {draws} draws"),
    });

    let general = GeneralPolicy::new(vec![region, others[0].clone()])?;
    let matched: Policy = matched_gtfp(&model, &general)?.into();
    let general_policy: Policy = general.into();
    let load_general = feedback_load(&model, &general_policy)?;
    let load_matched = feedback_load(&model, &matched)?;
    let mc_general = estimate_rate(&model, &general_policy, samples, seed + 3)?;
    let mc_matched = estimate_rate(&model, &matched, samples, seed + 4)?;
    let guard = 3.0
        * (sigma(mc_general.half_width_95).powi(2) + sigma(mc_matched.half_width_95).powi(2)).sqrt();
    checks.push(Check {
        name: "switching/matched-threshold-dominates",
        pass: (load_general - load_matched).abs() <= 1e-12
            && mc_matched.mean >= mc_general.mean - guard,
        detail: format!(
            "matched {:.6} vs general {:.6}, loads {:.9}/{:.9}",
            mc_matched.mean, mc_general.mean, load_matched, load_general
        ),
    });
    Ok(())
}

fn equivalence_suite(checks: &mut Vec<Check>, samples: u64, seed: u64) -> Result<(), CliError> {
    for m in [2usize, 3] {
        let model = SinrModel::rayleigh(m, 1.0)?;
        let taus = vec![1.01; 3];
        let gtfp: Policy = ThresholdPolicy::gtfp(taus.clone())?.into();
        let mtfp: Policy = ThresholdPolicy::mtfp(taus)?.into();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + m as u64);
        let draws = samples.min(10_000);
        let mut mismatches = 0u64;
        for _ in 0..draws {
            let gamma = SinrMatrix::sample(&model, 3, &mut rng);
            let a = apply_policy(&gtfp, &gamma)?;
            let b = apply_policy(&mtfp, &gamma)?;
            for beam in 0..m {
                let users_a: Vec<usize> = a.beams[beam].iter().map(|r| r.0).collect();
                let users_b: Vec<usize> = b.beams[beam].iter().map(|r| r.0).collect();
                if users_a != users_b {
                    mismatches += 1;
                }
            }
        }
        checks.push(Check {
            name: if m == 2 {
                "equivalence/gtfp-mtfp-two-beams"
            } else {
                "equivalence/gtfp-mtfp-three-beams"
            },
            pass: mismatches == 0,
            detail: format!("{mismatches} request-set mismatches over {draws} draws"),
        });
    }
    Ok(())
}

fn schur_suite(checks: &mut Vec<Check>) -> Result<(), CliError> {
    let lambda_grid = default_lambda_grid();
    let q_grid = default_q_grid();
    let x_grid = default_x_grid();

    let unit = check_theorem5(&SinrModel::rayleigh(1, 1.0)?, &lambda_grid, &q_grid)?;
    checks.push(Check {
        name: "schur/plane-holds-at-unit-snr",
        pass: unit.holds,
        detail: format!("margin {:.3e}", unit.min_margin),
    });

    let high = check_theorem5(&SinrModel::rayleigh(1, 10.0)?, &lambda_grid, &q_grid)?;
    checks.push(Check {
        name: "schur/plane-fails-at-high-snr",
        pass: !high.holds,
        detail: format!("margin {:.3e}", high.min_margin),
    });

    let sliver = check_theorem5(&SinrModel::rayleigh(1, 1.2)?, &lambda_grid, &q_grid)?;
    checks.push(Check {
        name: "schur/plane-sliver-regression",
        pass: !sliver.holds && sliver.min_margin <= -1e-8,
        detail: format!("margin {:.3e}", sliver.min_margin),
    });

    let shape_unit = check_theorem6(&SinrModel::rayleigh(1, 1.0)?, &x_grid)?;
    let shape_above = check_theorem6(&SinrModel::rayleigh(1, 1.5)?, &x_grid)?;
    checks.push(Check {
        name: "schur/shape-boundary",
        pass: shape_unit.holds && !shape_above.holds,
        detail: format!(
            "margins {:.3e} (rho 1.0), {:.3e} (rho 1.5)",
            shape_unit.min_margin, shape_above.min_margin
        ),
    });

    let low = SinrModel::rayleigh(1, 0.5)?;
    let bound = check_condition19(&low, &lambda_grid, &q_grid)?;
    let plane = check_theorem5(&low, &lambda_grid, &q_grid)?;
    checks.push(Check {
        name: "schur/bound-implies-plane",
        pass: !bound.holds || plane.holds,
        detail: format!("bound {:.3e}, plane {:.3e}", bound.min_margin, plane.min_margin),
    });

    let mut worst: f64 = f64::NEG_INFINITY;
    for m in [2usize, 3] {
        for rho in [0.1, 1.0, 10.0] {
            for i in 0..=50 {
                let x = i as f64 / 50.0 * 0.9999;
                worst = worst.max(rayleigh_g_closed_form(m, rho, x)?);
            }
        }
    }
    checks.push(Check {
        name: "schur/multi-beam-negative-g",
        pass: worst < 0.0,
        detail: format!("largest g {worst:.3e}"),
    });

    let g0 = capital_g(&SinrModel::rayleigh(1, 1.0)?, 0.0)?;
    checks.push(Check {
        name: "schur/g-vanishes-at-origin",
        pass: g0 == 0.0,
        detail: format!("G(0) = {g0:.3e}"),
    });
    Ok(())
}

pub fn verify(args: VerifyArgs, cfg: &Settings) -> Result<ExitCode, CliError> {
    let suite = cfg.resolve_or(args.suite, "suite", "all".to_string())?;
    let samples = cfg.samples(args.samples, 200_000)?;
    let seed = cfg.seed(args.seed)?;

    let mut checks = Vec::new();
    let run_all = suite == "all";
    let mut known = false;
    if run_all || suite == "analytic" {
        known = true;
        analytic_suite(&mut checks, samples, seed, args.inject_fault)?;
    }
    if run_all || suite == "switching" {
        known = true;
        switching_suite(&mut checks, samples, seed)?;
    }
    if run_all || suite == "equivalence" {
        known = true;
        equivalence_suite(&mut checks, samples, seed)?;
    }
    if run_all || suite == "schur" {
        known = true;
        schur_suite(&mut checks)?;
    }
    if !known {
        return Err(CliError::Usage(format!("unknown suite {suite}")));
    }

    for check in &checks {
        let verdict = if check.pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] {}: {}", check.name, check.detail);
    }
    match checks.iter().find(|c| !c.pass) {
        None => {
            println!("all {} checks passed", checks.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(first) => {
            println!("first failure: {}", first.name);
            Ok(ExitCode::from(4))
        }
    }
}
