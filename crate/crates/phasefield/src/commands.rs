//! One function per subcommand. Each returns the JSON summary body and
//! whether the run counts as a partial failure.

use phasefield_core::exec::Executor;
use phasefield_core::experiments::{
    liouville_excursion_experiment, regime_sweep, ExcursionStripe, RegimeSweepConfig, MAX_FAILURE_FRACTION,
};
use phasefield_core::homog::{calibrate_nu, quantity_samples, HomogenizedConstants, TailEstimate, TailModel};
use phasefield_core::media::{
    build_liouville_stripe, run_length_tail, sample_checkerboard, sample_lamp_stripe, torus_membership_estimate,
    Cell, CellLaw, LampOptions, LawAtom, Lattice, Medium1D, MediumSpec, RationalPoint, RunTailRow,
};
use phasefield_core::numeric::linear_fit;
use phasefield_core::rng::derive_seed;
use phasefield_core::solver::{homogenized_reference, minimize_cell_problem, rare_event_reference, CellProblem1D};
use phasefield_core::wells::{sigma_w, SigmaMethod};
use serde_json::{json, Value};

use crate::config::{LampConfig, LiouvilleConfig, NuSetting, SigmaConfig, SolveConfig, SolveMedium, TailsConfig};
use crate::error::CliError;
use crate::output::{fmt, fmt_opt, sig6, svg_plot, RunDir, Series};

pub struct Outcome {
    pub summary: Value,
    pub partial_failure: bool,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Outcome { summary, partial_failure: false }
    }
}

/// The three reference tensions of a well and a law.
pub struct SigmaValues {
    pub sigma_w: f64,
    pub sigma_bar: f64,
    pub sigma_rare: f64,
}

pub fn sigma_values(cfg: &SigmaConfig) -> Result<SigmaValues, CliError> {
    let s = sigma_w(&cfg.well, SigmaMethod::Equipartition)?;
    let consts = HomogenizedConstants::from_law(&cfg.law);
    Ok(SigmaValues {
        sigma_w: s,
        sigma_bar: homogenized_reference(&consts, &cfg.well)?,
        sigma_rare: rare_event_reference(&cfg.law.bounds(), s),
    })
}

pub const SIGMA_OUTPUTS: &[&str] = &["summary.json"];

pub fn sigma(cfg: &SigmaConfig) -> Result<Outcome, CliError> {
    let v = sigma_values(cfg)?;
    println!("sigma_w    {}", sig6(v.sigma_w));
    println!("sigma_bar  {}", sig6(v.sigma_bar));
    println!("sigma_rare {}", sig6(v.sigma_rare));
    Ok(Outcome::ok(json!({
        "sigma_w": v.sigma_w,
        "sigma_bar": v.sigma_bar,
        "sigma_rare": v.sigma_rare,
        "display": [sig6(v.sigma_w), sig6(v.sigma_bar), sig6(v.sigma_rare)],
    })))
}

pub const SOLVE_OUTPUTS: &[&str] = &["profile.csv", "profile.dat", "profile.svg", "medium.json", "summary.json"];

/// Medium for a single solve, sampled over the cells met by `center ± ρ`.
pub fn solve_medium(cfg: &SolveConfig) -> Result<Medium1D, CliError> {
    let (lo, hi) = ((cfg.center - cfg.rho) / cfg.delta, (cfg.center + cfg.rho) / cfg.delta);
    let window = |lat: Lattice| [lat.index(lo) - 1, lat.index(hi) + 1];
    let m = match &cfg.medium {
        SolveMedium::Constant { a, theta } => {
            MediumSpec::Constant { cell: Cell { a: *a, theta: *theta }, window: window(Lattice::CENTERED), lattice: Lattice::CENTERED }
                .realize()?
        }
        SolveMedium::Checkerboard { law } => sample_checkerboard(cfg.seed, window(Lattice::CENTERED), law)?,
        SolveMedium::Lamp { alpha } => {
            let mut s = sample_lamp_stripe(cfg.seed, *alpha, window(Lattice::SITES), &LampOptions::default())?;
            s.seed = cfg.seed;
            s.to_medium()
        }
        SolveMedium::Spec { spec } => spec.realize()?,
    };
    Ok(m)
}

pub fn solve(cfg: &SolveConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let medium = solve_medium(cfg)?;
    dir.write_json("medium.json", &medium.spec)?;
    let problem = CellProblem1D::new(cfg.eps, cfg.delta, cfg.rho, cfg.center, &medium, cfg.well)?;
    let report = minimize_cell_problem(&problem, &cfg.minimize)?;
    let p = &report.profile;
    let rows: Vec<Vec<String>> = p.grid.iter().zip(&p.values).map(|(x, u)| vec![fmt(*x), fmt(*u)]).collect();
    dir.write_csv("profile.csv", &["x", "u"], &rows)?;
    let dat: Vec<Vec<f64>> = p.grid.iter().zip(&p.values).map(|(x, u)| vec![*x, *u]).collect();
    dir.write_dat("profile.dat", &["x", "u"], &dat)?;
    let series = [Series { label: "minimizer", points: p.grid.iter().copied().zip(p.values.iter().copied()).collect() }];
    dir.write_bytes("profile.svg", svg_plot("cell problem minimizer", "x", "u", &series, false, false).as_bytes())?;
    let s = sigma_w(&cfg.well, SigmaMethod::Equipartition)?;
    Ok(Outcome::ok(json!({
        "energy": report.energy,
        "datum_energy": report.datum_energy,
        "lower_bound": report.lower_bound,
        "residual": report.residual_sup,
        "tolerance": report.tolerance,
        "iterations": report.iterations,
        "nodes": p.grid.len(),
        "best_start": report.best_start,
        "starts": report.starts_used,
        "sigma_w": s,
        "sigma_rare": rare_event_reference(&medium.bounds, s),
        "rel_to_sigma_w": report.energy / s - 1.0,
        "outside_regime": problem.outside_regime(),
        "invariants_ok": report.invariants_hold(),
    })))
}

pub const SWEEP_OUTPUTS: &[&str] = &["samples.csv", "rows.csv", "sweep.dat", "sweep.svg", "summary.json"];

pub fn sweep<E: Executor>(exec: &E, cfg: &RegimeSweepConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let res = regime_sweep(exec, cfg)?;
    let samples: Vec<Vec<String>> = res
        .samples
        .iter()
        .map(|s| {
            vec![
                fmt(s.eps),
                fmt(s.delta),
                s.sample.to_string(),
                s.seed.to_string(),
                fmt_opt(s.energy),
                fmt_opt(s.datum_energy),
                fmt_opt(s.lower_bound),
                fmt_opt(s.residual),
                s.nodes.map(|n| n.to_string()).unwrap_or_default(),
                s.invariants_ok.to_string(),
                s.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    dir.write_csv(
        "samples.csv",
        &["eps", "delta", "sample", "seed", "energy", "datum_energy", "lower_bound", "residual", "nodes", "invariants_ok", "error"],
        &samples,
    )?;
    let rows: Vec<Vec<String>> = res
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.eps),
                fmt(r.delta),
                r.n_ok.to_string(),
                r.n_failed.to_string(),
                fmt(r.median),
                fmt(r.q1),
                fmt(r.q3),
                fmt(r.rel_to_homogenized),
                fmt(r.rel_to_rare),
            ]
        })
        .collect();
    dir.write_csv(
        "rows.csv",
        &["eps", "delta", "n_ok", "n_failed", "median", "q1", "q3", "rel_to_homogenized", "rel_to_rare"],
        &rows,
    )?;
    let dat: Vec<Vec<f64>> =
        res.rows.iter().map(|r| vec![r.eps, r.median, r.q1, r.q3, res.sigma_bar, res.sigma_rare]).collect();
    dir.write_dat("sweep.dat", &["eps", "median", "q1", "q3", "sigma_bar", "sigma_rare"], &dat)?;
    let eps: Vec<f64> = res.rows.iter().map(|r| r.eps).collect();
    let series = [
        Series { label: "median energy", points: res.rows.iter().map(|r| (r.eps, r.median)).collect() },
        Series { label: "homogenized", points: eps.iter().map(|&e| (e, res.sigma_bar)).collect() },
        Series { label: "rare events", points: eps.iter().map(|&e| (e, res.sigma_rare)).collect() },
    ];
    dir.write_bytes("sweep.svg", svg_plot(&res.scaling, "eps", "energy", &series, true, false).as_bytes())?;
    let partial = res.too_many_failures;
    Ok(Outcome {
        summary: json!({
            "sigma_w": res.sigma_w,
            "sigma_bar": res.sigma_bar,
            "sigma_rare": res.sigma_rare,
            "scaling": res.scaling,
            "rows": res.rows,
            "verdict": res.verdict,
            "invariants_ok": res.invariants_hold(),
            "max_failure_fraction": MAX_FAILURE_FRACTION,
            "too_many_failures": res.too_many_failures,
        }),
        partial_failure: partial,
    })
}

pub const TAILS_OUTPUTS: &[&str] = &["tails.csv", "tails.dat", "tails.svg", "summary.json"];

/// Tail table and the fit of `−log P̂` against `r`.
pub struct TailsResult {
    pub nu: f64,
    pub calibrated: bool,
    pub in_range: bool,
    pub estimates: Vec<TailEstimate>,
    pub fit: Option<phasefield_core::numeric::LineFit>,
}

pub fn tails_compute<E: Executor>(exec: &E, cfg: &TailsConfig) -> Result<TailsResult, CliError> {
    let r_max = cfg.r_max.unwrap_or(2.0 * cfg.radii.iter().copied().fold(0.0, f64::max));
    let samples: Vec<Vec<f64>> = cfg
        .radii
        .iter()
        .map(|&r| quantity_samples(exec, cfg.quantity, &cfg.law, r, r_max, cfg.n_samples, cfg.seed0))
        .collect::<Result<_, _>>()?;
    let (nu, calibrated) = match cfg.nu {
        NuSetting::Value(v) => (v, false),
        NuSetting::Keyword(_) => {
            // calibrate on the largest radius, whatever the input order
            let mut order: Vec<usize> = (0..cfg.radii.len()).collect();
            order.sort_by(|&i, &j| cfg.radii[i].total_cmp(&cfg.radii[j]));
            let sorted: Vec<Vec<f64>> = order.iter().map(|&i| samples[i].clone()).collect();
            (calibrate_nu(&sorted, cfg.target, cfg.p_range[0], cfg.p_range[1])?.nu, true)
        }
    };
    let estimates: Vec<TailEstimate> = cfg
        .radii
        .iter()
        .zip(&samples)
        .map(|(&r, v)| TailEstimate::from_samples(cfg.quantity, r, nu, v, cfg.seed0))
        .collect();
    let in_range = estimates.iter().all(|e| (cfg.p_range[0]..=cfg.p_range[1]).contains(&e.p_hat));
    let pts: Vec<(f64, f64)> = estimates.iter().filter(|e| e.hits > 0).map(|e| (e.r, -e.p_hat.ln())).collect();
    let fit = if pts.len() == estimates.len() {
        linear_fit(&pts.iter().map(|p| p.0).collect::<Vec<_>>(), &pts.iter().map(|p| p.1).collect::<Vec<_>>())
    } else {
        None
    };
    Ok(TailsResult { nu, calibrated, in_range, estimates, fit })
}

pub fn tails<E: Executor>(exec: &E, cfg: &TailsConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let t = tails_compute(exec, cfg)?;
    let rows: Vec<Vec<String>> = t
        .estimates
        .iter()
        .map(|e| {
            vec![
                e.quantity.name().to_string(),
                fmt(e.r),
                fmt(e.nu),
                e.n.to_string(),
                e.hits.to_string(),
                fmt(e.p_hat),
                fmt(e.ci_lo),
                fmt(e.ci_hi),
                fmt(-e.p_hat.ln()),
                e.seed0.to_string(),
            ]
        })
        .collect();
    dir.write_csv("tails.csv", &["quantity", "r", "nu", "n", "hits", "p_hat", "ci_lo", "ci_hi", "neg_log_p", "seed0"], &rows)?;
    let dat: Vec<Vec<f64>> = t.estimates.iter().map(|e| vec![e.r, e.p_hat, -e.p_hat.ln()]).collect();
    dir.write_dat("tails.dat", &["r", "p_hat", "neg_log_p"], &dat)?;
    let series = [Series { label: "-log P", points: t.estimates.iter().map(|e| (e.r, -e.p_hat.ln())).collect() }];
    dir.write_bytes("tails.svg", svg_plot("tail probabilities", "r", "-log P", &series, false, false).as_bytes())?;
    let model = t.fit.map(|f| TailModel::from_fit(&f, 1));
    Ok(Outcome::ok(json!({
        "quantity": cfg.quantity,
        "nu": t.nu,
        "nu_calibrated": t.calibrated,
        "p_in_range": t.in_range,
        "estimates": t.estimates,
        "fit": t.fit,
        "model": model,
        "slope_positive": t.fit.map(|f| f.slope > 0.0),
    })))
}

pub const LIOUVILLE_OUTPUTS: &[&str] = &["convergents.csv", "times.csv", "excursions.csv", "summary.json"];

pub fn liouville(cfg: &LiouvilleConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let stripe = build_liouville_stripe(cfg.n_max, &cfg.strip_indices)?;
    let mut conv_rows = Vec::new();
    let mut time_rows = Vec::new();
    let mut area_sum = 0.0;
    for n in 1..=cfg.n_max as u32 {
        let c = stripe.convergent(n)?;
        conv_rows.push(vec![n.to_string(), c.p.to_string(), c.q.to_string(), fmt(c.gap())]);
        let t = stripe.excursion_time(n)?;
        let area = stripe.strip_area(n)?;
        area_sum += area;
        time_rows.push(vec![n.to_string(), fmt(t.value), t.digits(12), fmt(stripe.speed(n)?.mid_f64()), fmt(area)]);
    }
    dir.write_csv("convergents.csv", &["n", "p", "q", "gap"], &conv_rows)?;
    dir.write_csv("times.csv", &["n", "t_n", "t_n_digits", "speed", "strip_area"], &time_rows)?;
    let x = RationalPoint::from_f64(cfg.base_point[0], cfg.base_point[1])?;
    let report = liouville_excursion_experiment(ExcursionStripe::Liouville { stripe: &stripe, x: &x }, cfg.rho, &cfg.m_list)?;
    let mut exc_rows = Vec::new();
    for row in &report.rows {
        for c in &row.cases {
            exc_rows.push(vec![
                c.m.to_string(),
                c.n.to_string(),
                fmt(c.eps),
                fmt(c.delta),
                fmt_opt(c.s),
                fmt_opt(c.excursion_length),
                c.ok.to_string(),
                c.error.clone().unwrap_or_default(),
            ]);
        }
    }
    dir.write_csv("excursions.csv", &["m", "n", "eps", "delta", "s", "length", "ok", "error"], &exc_rows)?;
    let torus = (cfg.torus_points > 0).then(|| {
        let (hits, n) = torus_membership_estimate(&stripe, cfg.torus_points, derive_seed(cfg.seed0, 0x544f, 0));
        json!({ "hits": hits, "n": n, "fraction": hits as f64 / n as f64 })
    });
    let thresholds: Vec<Value> =
        report.rows.iter().map(|r| json!({ "m": r.m, "threshold": r.threshold, "verified_down_to": r.verified_down_to })).collect();
    Ok(Outcome::ok(json!({
        "n_max": cfg.n_max,
        "strip_indices": stripe.strip_indices,
        "lambda": stripe.lambda().mid_f64(),
        "times": (1..=cfg.n_max as u32).map(|n| stripe.excursion_time(n).map(|t| t.value)).collect::<Result<Vec<_>, _>>()?,
        "strip_area_sum": area_sum,
        "torus_estimate": torus,
        "thresholds": thresholds,
        "thresholds_decrease": report.thresholds_decrease(),
    })))
}

pub const LAMP_OUTPUTS: &[&str] = &["lamp.csv", "lamp.dat", "lamp.svg", "summary.json"];

/// Lamp and matched i.i.d. run-length tables with their fits.
pub struct LampResult {
    pub lit_fraction: f64,
    pub lamp: Vec<RunTailRow>,
    pub iid: Vec<RunTailRow>,
    /// `log P̂` against `log N` for the lamp field.
    pub lamp_loglog: Option<phasefield_core::numeric::LineFit>,
    /// `log P̂` against `N` for the control.
    pub iid_semilog: Option<phasefield_core::numeric::LineFit>,
    pub iid_loglog: Option<phasefield_core::numeric::LineFit>,
}

fn fit_rows(rows: &[RunTailRow], x: impl Fn(f64) -> f64) -> Option<phasefield_core::numeric::LineFit> {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.events > 0).map(|r| (x(r.n as f64), r.p_hat.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    linear_fit(&pts.iter().map(|p| p.0).collect::<Vec<_>>(), &pts.iter().map(|p| p.1).collect::<Vec<_>>())
}

pub fn lamp_compute<E: Executor>(exec: &E, cfg: &LampConfig) -> Result<LampResult, CliError> {
    let window = [0, cfg.window_len - 1];
    let lamp_seed = |i: usize| derive_seed(cfg.seed0, 0x4c41, i as u64);
    let opts = LampOptions::default();
    let counts = exec.map(cfg.n_windows, |i| {
        sample_lamp_stripe(lamp_seed(i), cfg.alpha, window, &opts).map(|s| s.lit().iter().filter(|&&b| b).count())
    });
    let mut lit = 0usize;
    for c in counts {
        lit += c?;
    }
    let lit_fraction = lit as f64 / (cfg.n_windows as f64 * cfg.window_len as f64);
    let lamp = run_length_tail(exec, cfg.n_windows, &cfg.lengths, |i| Ok(sample_lamp_stripe(lamp_seed(i), cfg.alpha, window, &opts)?.lit()))?;
    let control = CellLaw::new(
        vec![LawAtom { a: 1.0, theta: 1.0, weight: lit_fraction }, LawAtom { a: 1.0, theta: 2.0, weight: 1.0 - lit_fraction }],
        None,
    )?;
    let iid = run_length_tail(exec, cfg.n_windows, &cfg.lengths, |i| {
        let m = sample_checkerboard(derive_seed(cfg.seed0, 0x4949, i as u64), window, &control)?;
        Ok(m.flags(|c| c.theta == 1.0))
    })?;
    Ok(LampResult {
        lit_fraction,
        lamp_loglog: fit_rows(&lamp, f64::ln),
        iid_semilog: fit_rows(&iid, |n| n),
        iid_loglog: fit_rows(&iid, f64::ln),
        lamp,
        iid,
    })
}

pub fn lamp<E: Executor>(exec: &E, cfg: &LampConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let r = lamp_compute(exec, cfg)?;
    let mut rows = Vec::new();
    for (field, table) in [("lamp", &r.lamp), ("iid", &r.iid)] {
        for t in table.iter() {
            rows.push(vec![
                field.to_string(),
                t.n.to_string(),
                t.events.to_string(),
                t.trials.to_string(),
                fmt(t.p_hat),
                fmt(t.ci_lo),
                fmt(t.ci_hi),
            ]);
        }
    }
    dir.write_csv("lamp.csv", &["field", "n", "events", "trials", "p_hat", "ci_lo", "ci_hi"], &rows)?;
    let dat: Vec<Vec<f64>> = r.lamp.iter().zip(&r.iid).map(|(a, b)| vec![a.n as f64, a.p_hat, b.p_hat]).collect();
    dir.write_dat("lamp.dat", &["n", "p_lamp", "p_iid"], &dat)?;
    let series = [
        Series { label: "lamp", points: r.lamp.iter().map(|t| (t.n as f64, t.p_hat)).collect() },
        Series { label: "iid control", points: r.iid.iter().map(|t| (t.n as f64, t.p_hat)).collect() },
    ];
    dir.write_bytes("lamp.svg", svg_plot("run-length tails", "N", "P", &series, true, true).as_bytes())?;
    Ok(Outcome::ok(json!({
        "alpha": cfg.alpha,
        "lit_fraction": r.lit_fraction,
        "lamp": r.lamp,
        "iid": r.iid,
        "lamp_loglog_fit": r.lamp_loglog,
        "iid_semilog_fit": r.iid_semilog,
        "iid_loglog_fit": r.iid_loglog,
        "target_loglog_slope": -(1.0 + cfg.alpha),
    })))
}
