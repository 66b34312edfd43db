use phasefield_core::exec::Sequential;
use phasefield_core::experiments::ThetaLaw;
use phasefield_core::homog::{radius_grid, HomogenizedConstants};
use phasefield_core::media::{
    checkerboard_cell, run_length_tail, sample_checkerboard, CellLaw, LampStripe, LawAtom,
};
use phasefield_core::numeric::wilson_interval;
use phasefield_core::solver::{minimize_cell_problem, rare_event_reference, CellProblem1D};
use phasefield_core::wells::{sigma_w, surface_tension, DoubleWell, SigmaMethod};
use proptest::prelude::*;

fn law_strategy() -> impl Strategy<Value = CellLaw> {
    prop::collection::vec((0.5f64..5.0, 0.5f64..3.0, 0.05f64..1.0), 1..5).prop_map(|atoms| {
        CellLaw::new(atoms.into_iter().map(|(a, theta, weight)| LawAtom { a, theta, weight }).collect(), None).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn checkerboard_cells_do_not_depend_on_window(seed in any::<u64>(), lo in -500i64..0, len in 1i64..400, law in law_strategy()) {
        let m = sample_checkerboard(seed, [lo, lo + len], &law).unwrap();
        for (i, c) in m.cells.iter().enumerate() {
            prop_assert_eq!(*c, checkerboard_cell(seed, lo + i as i64, &law));
        }
    }

    #[test]
    fn rare_reference_below_homogenized(law in law_strategy()) {
        let s = sigma_w(&DoubleWell::Quartic, SigmaMethod::Equipartition).unwrap();
        let c = HomogenizedConstants::from_law(&law);
        let bar = s * (c.a_bar * c.theta_bar).sqrt();
        prop_assert!(rare_event_reference(&law.bounds(), s) <= bar * (1.0 + 1e-12));
    }

    #[test]
    fn surface_tension_scales_with_root_of_coefficients(l in 0.1f64..10.0, t in 0.1f64..10.0) {
        let w = DoubleWell::Quartic;
        let s = sigma_w(&w, SigmaMethod::Equipartition).unwrap();
        let st = surface_tension(&w, l, t).unwrap();
        prop_assert!((st - s * (l * t).sqrt()).abs() <= 1e-10 * st);
    }

    #[test]
    fn radius_grid_closed_under_doubling(k in 1u32..64, j in 0u32..4, extra in 1u32..4) {
        let r = (k as f64) * 2f64.powi(j as i32);
        let r_max = r * 2f64.powi(extra as i32);
        let g = radius_grid(r, r_max);
        prop_assert_eq!(g[0], r);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        let mut x = r;
        while x <= r_max {
            prop_assert!(g.contains(&x), "{} missing", x);
            x *= 2.0;
        }
    }

    #[test]
    fn wilson_interval_brackets_frequency(n in 1u64..10_000, frac in 0.0f64..=1.0) {
        let hits = ((n as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_interval(hits, n, 1.96);
        let p = hits as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn run_tails_decrease_in_length(seed in any::<u64>(), p in 0.3f64..0.95) {
        let law = CellLaw::new(vec![LawAtom { a: 1.0, theta: 1.0, weight: p }, LawAtom { a: 1.0, theta: 2.0, weight: 1.0 - p }], None).unwrap();
        let rows = run_length_tail(&Sequential, 3, &[1, 2, 4, 8], |i| {
            Ok(sample_checkerboard(seed.wrapping_add(i as u64), [0, 999], &law)?.flags(|c| c.theta == 1.0))
        }).unwrap();
        prop_assert!(rows.windows(2).all(|w| w[1].events <= w[0].events));
    }

    #[test]
    fn lamps_only_add_light(ranges in prop::collection::vec(-5i64..12, 1..30), extra in 0usize..30) {
        let base = LampStripe::from_ranges(1.0, [0, 40], -5, ranges.clone()).unwrap();
        let mut more = ranges.clone();
        let i = extra % more.len();
        more[i] = more[i].max(0) + 3;
        let brighter = LampStripe::from_ranges(1.0, [0, 40], -5, more).unwrap();
        for (a, b) in base.markers.iter().zip(&brighter.markers) {
            prop_assert!(*b <= *a);
        }
    }

    #[test]
    fn log_mgf_below_hoeffding(lo in 0.5f64..2.0, gap in 0.1f64..3.0, p in 0.05f64..0.95, xi in -20.0f64..20.0) {
        let law = ThetaLaw::new(vec![lo, lo + gap], vec![p, 1.0 - p]).unwrap();
        prop_assert!(law.log_mgf(xi) <= law.hoeffding() * xi * xi + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solver_invariants_on_random_checkerboards(seed in any::<u64>(), eps in 0.08f64..0.2, ratio in 0.05f64..0.5) {
        let law = CellLaw::four_point(1.0, 4.0, 1.0, 2.0).unwrap();
        let delta = eps * ratio;
        let m = sample_checkerboard(seed, [-(0.5 / delta) as i64 - 2, (0.5 / delta) as i64 + 2], &law).unwrap();
        let p = CellProblem1D::new(eps, delta, 0.5, 0.0, &m, DoubleWell::Quartic).unwrap();
        let r = minimize_cell_problem(&p, &Default::default()).unwrap();
        prop_assert!(r.invariants_hold());
        prop_assert!(r.profile.min_value() >= -1.0 && r.profile.max_value() <= 1.0);
    }
}
