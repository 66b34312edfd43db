//! Closed-form and independently computed reference values.

use phasefield_core::exec::Sequential;
use phasefield_core::experiments::{block_count_experiment, planted_stretch_energy};
use phasefield_core::homog::{h_minus_one_norm, Domain, HomogenizedConstants};
use phasefield_core::media::{
    build_liouville_stripe, cycle_gap, cycle_length, sample_checkerboard, CellLaw, LampStripe,
};
use phasefield_core::solver::{homogenized_reference, minimize_cell_problem, CellProblem1D};
use phasefield_core::wells::{homogeneous_kink, sigma_w, DoubleWell, SigmaMethod};

const SIGMA_QUARTIC: f64 = 1.885_618_083_164_126_7; // 4√2/3

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn quartic_sigma_both_routes() {
    let w = DoubleWell::Quartic;
    let eq = sigma_w(&w, SigmaMethod::Equipartition).unwrap();
    let var = sigma_w(&w, SigmaMethod::Variational).unwrap();
    assert!((eq - 4.0 * 2f64.sqrt() / 3.0).abs() < 1e-12);
    assert!((var - SIGMA_QUARTIC).abs() < 1e-3);
}

#[test]
fn tilted_sigma_routes_agree() {
    let w = DoubleWell::TILTED_DEFAULT;
    let eq = sigma_w(&w, SigmaMethod::Equipartition).unwrap();
    let var = sigma_w(&w, SigmaMethod::Variational).unwrap();
    assert!(rel(var, eq) < 1e-3, "{eq} vs {var}");
}

#[test]
fn kink_is_tanh() {
    let k = homogeneous_kink(&DoubleWell::Quartic, 20.0, 40_000).unwrap();
    let err = k
        .profile
        .grid
        .iter()
        .zip(&k.profile.values)
        .filter(|(s, _)| s.abs() <= 10.0)
        .map(|(s, u)| (u - (std::f64::consts::SQRT_2 * s).tanh()).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-3, "{err}");
}

#[test]
fn sine_h_minus_one() {
    let n = 4096;
    let f: Vec<f64> = (0..n).map(|i| (std::f64::consts::PI * i as f64 / (n - 1) as f64).sin()).collect();
    let v = h_minus_one_norm(&f, Domain::Interval { a: 0.0, b: 1.0 }).unwrap();
    assert!((v - 1.0 / (std::f64::consts::PI * 2f64.sqrt())).abs() < 1e-4, "{v}");
}

#[test]
fn four_point_constants() {
    let law = CellLaw::four_point(1.0, 4.0, 1.0, 2.0).unwrap();
    let c = HomogenizedConstants::from_law(&law);
    assert!((c.a_bar - 1.6).abs() < 1e-14);
    assert!((c.theta_bar - 1.5).abs() < 1e-14);
    let s = homogenized_reference(&c, &DoubleWell::Quartic).unwrap();
    assert!((s - SIGMA_QUARTIC * 2.4f64.sqrt()).abs() < 1e-12);
    let m = sample_checkerboard(9, [0, 999_999], &law).unwrap();
    let e = HomogenizedConstants::from_medium(&m).unwrap();
    assert!(rel(e.a_bar, 1.6) < 0.01 && rel(e.theta_bar, 1.5) < 0.01);
}

#[test]
fn constant_medium_energy_is_sigma() {
    let law = CellLaw::point(1.0, 1.0).unwrap();
    let m = sample_checkerboard(0, [-30, 30], &law).unwrap();
    // δ = 1/40 keeps ρ/δ = 20 inside the window
    let p = CellProblem1D::new(0.05, 0.025, 0.5, 0.0, &m, DoubleWell::Quartic).unwrap();
    let r = minimize_cell_problem(&p, &Default::default()).unwrap();
    assert!(rel(r.energy, SIGMA_QUARTIC) < 0.02);
    assert!(r.invariants_hold());
}

#[test]
fn liouville_times_frozen() {
    let s = build_liouville_stripe(4, &[]).unwrap();
    assert!((s.lambda().mid_f64() - 0.765_625_059_604_644_8).abs() < 1e-15);
    let expected = [0.790_234_846_642_165, 2.238_990_693_498_910_8, 12_227.921_153_068_166, 1.231_887_466_846_332_8e27];
    for (n, t) in (1..=4).zip(expected) {
        let v = s.excursion_time(n).unwrap().value;
        assert!(rel(v, t) < 1e-12, "T_{n} = {v}");
    }
}

#[test]
fn liouville_times_outgrow_geometric() {
    let s = build_liouville_stripe(4, &[]).unwrap();
    let t: Vec<f64> = (1..=4).map(|n| s.excursion_time(n).unwrap().value).collect();
    // T_2/T_1 ≈ 2.83, so the factor 3 only sets in from N = 3
    assert!(t[1] > 2.0 * t[0]);
    assert!(t[2] > 3.0 * t[1] && t[3] > 3.0 * t[2]);
    for m in [2.0, 3.0] {
        let trend = s.growth_trend(m).unwrap();
        assert!(trend[1..].windows(2).all(|w| w[1] > w[0]), "{trend:?}");
    }
}

#[test]
fn cycle_length_and_gap() {
    assert_eq!(cycle_length(5, 6), 6);
    let (k, r) = cycle_gap(5, 6);
    assert_eq!(k, 1);
    assert!((r - 1.0 / 61f64.sqrt()).abs() < 1e-15);
    let s = build_liouville_stripe(3, &[]).unwrap();
    for c in &s.convergents {
        let (p, q) = (c.p.to_string().parse::<u64>().unwrap(), c.q.to_string().parse::<u64>().unwrap());
        assert_eq!(cycle_length(p, q), q);
        assert!(rel(cycle_gap(p, q).1, c.gap()) < 1e-15);
    }
}

#[test]
fn strip_areas_sum_below_half() {
    let s = build_liouville_stripe(4, &[]).unwrap();
    let total: f64 = (1..=4).map(|n| s.strip_area(n).unwrap()).sum();
    assert!(total <= 0.5);
}

#[test]
fn single_lamp_lights_its_range() {
    let n = 5;
    let s = LampStripe::from_ranges(1.0, [-20, 20], 0, vec![n]).unwrap();
    for k in -20..=20 {
        assert_eq!(s.marker(k), Some(if (k as i64).abs() <= n { 1 } else { 2 }));
    }
    let dark = LampStripe::from_ranges(1.0, [-5, 5], -10, vec![-1; 21]).unwrap();
    assert!(dark.markers.iter().all(|&m| m == 2));
}

#[test]
fn block_mean_matches_closed_form() {
    let law = CellLaw::four_point(1.0, 4.0, 1.0, 2.0).unwrap();
    let rep = block_count_experiment(&Sequential, &law, 40.0, 1.0, 0.5, 400, 3).unwrap();
    // 2r/γ = 4 cells per block, each favorable with probability 1/4
    assert_eq!(rep.block_cells, 4);
    assert!((rep.p_block - 4f64.powi(-4)).abs() < 1e-15);
    assert!((rep.mean - rep.expected_exact).abs() <= 4.0 * rep.std_error);
}

#[test]
fn planted_stretch_error_shrinks() {
    let law = CellLaw::four_point(1.0, 4.0, 1.0, 2.0).unwrap();
    let omega: Vec<f64> = [2.0, 5.0, 10.0]
        .iter()
        .map(|&m| planted_stretch_energy(&law, &DoubleWell::Quartic, 0.05, 0.0025, 0.5, m, 3, &Default::default()).unwrap().omega)
        .collect();
    assert!(omega[0] > omega[1] && omega[1] > omega[2] && omega[2] <= 0.05, "{omega:?}");
}
