//! Acceptance gate: one PASS/FAIL line per criterion. Runtime limits count
//! as part of each criterion. The process fails on any failure outside
//! `EXPECTED_FAIL`.

use std::path::Path;
use std::time::{Duration, Instant};

use phasefield::commands;
use phasefield::config::{self, RunConfig};
use phasefield::exec::RayonExecutor;
use phasefield::output::RunDir;
use phasefield_core::exec::Sequential;
use phasefield_core::experiments::{
    block_count_experiment, calibrate_lambda_dev, ld_rate_compare, ld_rate_machinery, liouville_excursion_experiment,
    planted_stretch_energy, regime_sweep, window_profile, ExcursionStripe, ThetaLaw,
};
use phasefield_core::homog::{h_minus_one_norm, Domain, HomogenizedConstants, TailQuantity};
use phasefield_core::media::{
    build_liouville_stripe, cycle_gap, cycle_length, sample_checkerboard, torus_membership_estimate, CellLaw, RationalPoint,
};
use phasefield_core::wells::{homogeneous_kink, sigma_w, DoubleWell, SigmaMethod};

/// Criteria allowed to fail; each is analyzed in the design notes.
const EXPECTED_FAIL: &[u32] = &[10];

const SIGMA_QUARTIC: f64 = 1.885_618_083_164_126_7;
const SIGMA_TOL: f64 = 1e-3;
const TANH_TOL: f64 = 1e-3;
const HMINUS_TOL: f64 = 1e-4;
const CONSTANTS_REL_TOL: f64 = 0.01;
const SWEEP_REL_TOL: f64 = 0.05;
const OMEGA_MAX: f64 = 0.05;
const BLOCK_Z_MAX: f64 = 3.0;
const BLOCK_MIN_PAIRS: usize = 20;
const TAIL_R2_MIN: f64 = 0.9;
const LD_REL_TOL: f64 = 0.3;
const LAMP_SLOPE_TOL: f64 = 0.3;
const IID_SEMILOG_R2_MIN: f64 = 0.9;
const TORUS_MAX: f64 = 0.52;

struct Check {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

fn timed<F: FnOnce() -> Result<(bool, String), String>>(id: u32, name: &'static str, limit_s: u64, f: F) -> Check {
    let t = Instant::now();
    let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    let elapsed = t.elapsed();
    let limit = Duration::from_secs(limit_s);
    Check { id, name, pass: ok && elapsed <= limit, detail, elapsed, limit }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8)
}

fn four_point() -> CellLaw {
    CellLaw::four_point(1.0, 4.0, 1.0, 2.0).unwrap()
}

fn c1() -> Result<(bool, String), String> {
    let w = DoubleWell::Quartic;
    let eq = sigma_w(&w, SigmaMethod::Equipartition).map_err(err)?;
    let var = sigma_w(&w, SigmaMethod::Variational).map_err(err)?;
    let ok = (eq - SIGMA_QUARTIC).abs() <= SIGMA_TOL && (var - SIGMA_QUARTIC).abs() <= SIGMA_TOL;
    Ok((ok, format!("equipartition {eq:.9}, variational {var:.9}")))
}

fn c2() -> Result<(bool, String), String> {
    let k = homogeneous_kink(&DoubleWell::Quartic, 20.0, 40_000).map_err(err)?;
    let e = k
        .profile
        .grid
        .iter()
        .zip(&k.profile.values)
        .filter(|(s, _)| s.abs() <= 10.0)
        .map(|(s, u)| (u - (std::f64::consts::SQRT_2 * s).tanh()).abs())
        .fold(0.0, f64::max);
    Ok((e <= TANH_TOL, format!("sup error {e:.3e}")))
}

fn c3() -> Result<(bool, String), String> {
    let n = 4096;
    let f: Vec<f64> = (0..n).map(|i| (std::f64::consts::PI * i as f64 / (n - 1) as f64).sin()).collect();
    let v = h_minus_one_norm(&f, Domain::Interval { a: 0.0, b: 1.0 }).map_err(err)?;
    let exact = 1.0 / (std::f64::consts::PI * 2f64.sqrt());
    Ok(((v - exact).abs() <= HMINUS_TOL, format!("norm {v:.7} vs {exact:.7}")))
}

fn c4() -> Result<(bool, String), String> {
    let m = sample_checkerboard(4, [0, 999_999], &four_point()).map_err(err)?;
    let c = HomogenizedConstants::from_medium(&m).map_err(err)?;
    let (ra, rt) = ((c.a_bar / 1.6 - 1.0).abs(), (c.theta_bar / 1.5 - 1.0).abs());
    Ok((ra <= CONSTANTS_REL_TOL && rt <= CONSTANTS_REL_TOL, format!("a_bar {:.5}, theta_bar {:.5}", c.a_bar, c.theta_bar)))
}

/// Sweep of the shipped configuration; also feeds criterion 12.
fn c5(invariants: &mut Vec<(String, bool)>) -> Result<(bool, String), String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/homog.json");
    let doc = config::load(&path).map_err(err)?;
    let RunConfig::Sweep(cfg) = doc.run else { return Err("homog.json is not a sweep".into()) };
    let exec = RayonExecutor::new(jobs()).map_err(err)?;
    let res = regime_sweep(&exec, &cfg).map_err(err)?;
    invariants.push(("sweep".into(), res.invariants_hold()));
    let rel: Vec<f64> = res.rows.iter().map(|r| r.rel_to_homogenized).collect();
    let last_ok = rel.last().is_some_and(|r| r.abs() <= SWEEP_REL_TOL);
    let monotone = rel.windows(2).all(|w| w[1].abs() <= w[0].abs());
    let medians: Vec<String> = res.rows.iter().map(|r| format!("{:.4}", r.median)).collect();
    Ok((
        last_ok && monotone && !res.too_many_failures,
        format!("medians [{}] vs {:.4}, rel [{}], verdict {:?}", medians.join(", "), res.sigma_bar, fmt_list(&rel), res.verdict),
    ))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:+.4}")).collect::<Vec<_>>().join(", ")
}

fn c6(invariants: &mut Vec<(String, bool)>) -> Result<(bool, String), String> {
    let law = four_point();
    let mut omega = Vec::new();
    for m in [2.0, 5.0, 10.0] {
        let r = planted_stretch_energy(&law, &DoubleWell::Quartic, 0.05, 0.0025, 0.5, m, 3, &Default::default()).map_err(err)?;
        invariants.push((format!("planted M={m}"), r.invariants_ok));
        omega.push(r.omega);
    }
    let ok = omega.windows(2).all(|w| w[1] < w[0]) && omega[2] <= OMEGA_MAX;
    Ok((ok, format!("omega(2,5,10) = {:.3e}, {:.3e}, {:.3e}", omega[0], omega[1], omega[2])))
}

fn c7() -> Result<(bool, String), String> {
    let law = four_point();
    let mut pairs = 0;
    let mut worst = 0.0f64;
    let mut bound_checked = 0;
    let mut ok = true;
    for big_r in [20.0, 40.0, 80.0, 160.0, 320.0] {
        for gamma in [1.0, 0.5, 1.0 / 3.0, 0.25] {
            let rep = block_count_experiment(&Sequential, &law, big_r, 1.0, gamma, 4000, 17).map_err(err)?;
            pairs += 1;
            worst = worst.max(rep.z_floor.abs());
            ok &= rep.z_floor.abs() <= BLOCK_Z_MAX && rep.bound_holds;
            bound_checked += rep.bound_applicable as usize;
        }
    }
    ok &= pairs >= BLOCK_MIN_PAIRS;
    Ok((ok, format!("{pairs} pairs, max |z| {worst:.2}, second-moment bound checked on {bound_checked}")))
}

fn c8() -> Result<(bool, String), String> {
    let cfg = config::TailsConfig {
        quantity: TailQuantity::Osc,
        law: four_point(),
        radii: vec![8.0, 16.0, 32.0],
        r_max: None,
        nu: config::NuSetting::Keyword(config::NuKeyword::Auto),
        n_samples: 4000,
        target: 0.01,
        p_range: [1e-3, 0.5],
        seed0: 8,
    };
    let exec = RayonExecutor::new(jobs()).map_err(err)?;
    let t = commands::tails_compute(&exec, &cfg).map_err(err)?;
    let fit = t.fit.ok_or("no fit (a radius had zero hits)")?;
    let p: Vec<f64> = t.estimates.iter().map(|e| e.p_hat).collect();
    let ok = t.in_range && fit.slope > 0.0 && fit.r_squared >= TAIL_R2_MIN;
    Ok((ok, format!("nu {:.4}, P [{}], slope {:.4}, R2 {:.4}", t.nu, fmt_list(&p), fit.slope, fit.r_squared)))
}

fn c9() -> Result<(bool, String), String> {
    let law = CellLaw::product(&[1.0], &[1.0, 2.0]).map_err(err)?;
    let well = DoubleWell::Quartic;
    let r = 5.0;
    let q = window_profile(&well, 1.5, r, 8192).map_err(err)?;
    let exec = RayonExecutor::new(jobs()).map_err(err)?;
    let cal = calibrate_lambda_dev(&exec, &law, &q, &well, r, 1.0 / 20.0, 100_000, 9, 1.5e-4).map_err(err)?;
    let grid: Vec<f64> = (0..100).map(|i| -20.0 + 40.0 * i as f64 / 99.0).collect();
    let ld = ld_rate_machinery(&ThetaLaw::from_cell_law(&law), &q, &well, r, &grid, &[cal.lambda_dev]).map_err(err)?;
    let cmp = ld_rate_compare(&exec, &law, &q, &well, r, &[1.0 / 40.0], cal.lambda_dev, 100_000, 9).map_err(err)?;
    let row = cmp.row(1.0 / 40.0, "tilted").ok_or("missing tilted row")?;
    let plain = cmp.row(1.0 / 40.0, "plain").ok_or("missing plain row")?;
    let ok = ld.hoeffding_holds && row.rel_error <= LD_REL_TOL;
    Ok((
        ok,
        format!(
            "lambda_dev {:.4}, rate {:.5}, gamma log P {:.5} (rel {:.3}, plain hits {}), hoeffding {}",
            cal.lambda_dev, cmp.rate, row.gamma_log_p, row.rel_error, plain.hits, ld.hoeffding_holds
        ),
    ))
}

fn c10() -> Result<(bool, String), String> {
    let cfg = config::LampConfig {
        alpha: 1.0,
        window_len: 100_000,
        n_windows: 200,
        lengths: vec![4, 5, 6, 8, 10, 12, 16, 20, 24, 28, 32],
        seed0: 10,
    };
    let exec = RayonExecutor::new(jobs()).map_err(err)?;
    let r = commands::lamp_compute(&exec, &cfg).map_err(err)?;
    let lamp = r.lamp_loglog.ok_or("no lamp fit")?;
    let iid = r.iid_semilog.ok_or("no control fit")?;
    let target = -(1.0 + cfg.alpha);
    let ok = (lamp.slope - target).abs() <= LAMP_SLOPE_TOL && iid.r_squared >= IID_SEMILOG_R2_MIN;
    Ok((
        ok,
        format!(
            "lamp log-log slope {:.3} (target {target} +- {LAMP_SLOPE_TOL}), control semilog slope {:.3} R2 {:.4}, lit fraction {:.4}",
            lamp.slope, iid.slope, iid.r_squared, r.lit_fraction
        ),
    ))
}

fn c11() -> Result<(bool, String), String> {
    let stripe = build_liouville_stripe(4, &[]).map_err(err)?;
    let mut ok = cycle_length(5, 6) == 6 && (cycle_gap(5, 6).1 - 1.0 / 61f64.sqrt()).abs() < 1e-15;
    for c in &stripe.convergents {
        let p: u64 = c.p.to_string().parse().map_err(err)?;
        let q: u64 = c.q.to_string().parse().map_err(err)?;
        ok &= cycle_length(p, q) == q && (cycle_gap(p, q).1 / c.gap() - 1.0).abs() < 1e-12;
    }
    let area: f64 = (1..=4).map(|n| stripe.strip_area(n)).collect::<Result<Vec<_>, _>>().map_err(err)?.iter().sum();
    let (hits, n) = torus_membership_estimate(&stripe, 1_000_000, 11);
    let frac = hits as f64 / n as f64;
    let x = RationalPoint::from_f64(0.1, 0.2).map_err(err)?;
    let t2 = stripe.excursion_time(2).map_err(err)?.value;
    let exc = stripe.locate_excursion(&x, 2, 1e3).map_err(err)?;
    let rep = liouville_excursion_experiment(ExcursionStripe::Liouville { stripe: &stripe, x: &x }, 1.0, &[1, 2, 3]).map_err(err)?;
    ok &= area <= 0.5 && frac <= TORUS_MAX && exc.length >= 0.5 * t2 * (1.0 - 1e-12) && exc.probes.len() == 3;
    Ok((
        ok,
        format!(
            "sum |E_N| {area:.4}, torus {frac:.4}, excursion at s = {:.4} of length {:.4} (T_2/2 = {:.4}), thresholds decrease {}",
            exc.s,
            exc.length,
            0.5 * t2,
            rep.thresholds_decrease()
        ),
    ))
}

fn c12(invariants: &[(String, bool)]) -> Result<(bool, String), String> {
    let bad: Vec<&str> = invariants.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect();
    let text = br#"{"schema": 1, "command": "sweep",
        "law": {"atoms": [{"a": 1, "theta": 1, "weight": 1}, {"a": 1, "theta": 2, "weight": 1},
                          {"a": 4, "theta": 1, "weight": 1}, {"a": 4, "theta": 2, "weight": 1}]},
        "eps_grid": [0.2, 0.1], "scaling": {"family": "power", "beta": 2},
        "rho": 0.25, "n_samples": 8, "seed0": 12}"#;
    let doc = config::parse_document(text).map_err(err)?;
    let RunConfig::Sweep(cfg) = &doc.run else { unreachable!() };
    let root = std::env::temp_dir().join(format!("phasefield-accept-{}", std::process::id()));
    let mut csvs = Vec::new();
    for j in [1, 8] {
        let dir = RunDir::create(root.join(format!("jobs{j}"))).map_err(err)?;
        let exec = RayonExecutor::new(j).map_err(err)?;
        let out = commands::sweep(&exec, cfg, &dir).map_err(err)?;
        if out.summary["invariants_ok"] != true {
            return Ok((false, format!("invariants fail at jobs {j}")));
        }
        csvs.push((std::fs::read(dir.file("samples.csv")).map_err(err)?, std::fs::read(dir.file("rows.csv")).map_err(err)?));
    }
    let _ = std::fs::remove_dir_all(&root);
    let same = csvs[0] == csvs[1];
    Ok((
        bad.is_empty() && same,
        format!("{} solve groups checked, failing {:?}, jobs 1 vs 8 identical {}", invariants.len() + 2, bad, same),
    ))
}

fn main() {
    let mut invariants = Vec::new();
    let mut checks = vec![
        timed(1, "sigma_w consistency", 5, c1),
        timed(2, "profile oracle", 5, c2),
        timed(3, "H^-1 oracle", 1, c3),
        timed(4, "homogenized constants", 60, c4),
    ];
    checks.push(timed(5, "homogenization trend", 20 * 60, || c5(&mut invariants)));
    checks.push(timed(6, "planted stretch bound", 120, || c6(&mut invariants)));
    checks.push(timed(7, "block-count law", 120, c7));
    checks.push(timed(8, "Osc tail fit", 600, c8));
    checks.push(timed(9, "large-deviation rate", 300, c9));
    checks.push(timed(10, "lamp vs iid separation", 300, c10));
    checks.push(timed(11, "Liouville construction", 120, c11));
    checks.push(timed(12, "universal invariants", 600, || c12(&invariants)));
    let mut unexpected = 0;
    for c in &checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        let note = match (c.pass, EXPECTED_FAIL.contains(&c.id)) {
            (false, true) => " (expected)",
            (true, true) => " (expected to fail, passed)",
            (false, false) => {
                unexpected += 1;
                ""
            }
            _ => "",
        };
        println!(
            "criterion {:>2} {status}{note}: {} | {} | {:.1}s of {}s",
            c.id,
            c.name,
            c.detail,
            c.elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    if unexpected > 0 {
        eprintln!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}
