use phasefield::commands::lamp_compute;
use phasefield::config::LampConfig;
use phasefield_core::exec::Sequential;

#[test]
fn lamp_tail_separates_from_matched_iid() {
    let cfg = LampConfig { alpha: 1.0, window_len: 100_000, n_windows: 200, lengths: vec![4, 8, 16, 24, 32], seed0: 4 };
    let r = lamp_compute(&Sequential, &cfg).unwrap();
    let ratio: Vec<f64> = r.lamp.iter().zip(&r.iid).map(|(a, b)| a.p_hat / b.p_hat).collect();
    // about 3.8 at N = 16 and 19 at N = 32
    assert!(ratio.windows(2).all(|w| w[1] > w[0]), "{ratio:?}");
    assert!(ratio[2] > 2.0 && ratio[4] >= 10.0, "{ratio:?}");
}
