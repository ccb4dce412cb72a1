mod common;

use common::{factorization_deviation, link_deviation, oracle_point, random_link_case, rel_err};
use mirelay::link;
use mirelay::CircuitParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn hundred_random_links_match_the_transcribed_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11_4b);
    for n in 0..100 {
        let case = random_link_case(&mut rng);
        let (err, what) = link_deviation(&case);
        assert!(err <= 1e-12, "case {n}: relative deviation {err:e} in {what}\n{case:?}");
    }
}

#[test]
fn active_gain_is_the_product_of_the_hop_gains() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x22_4b);
    for _ in 0..100 {
        let model = random_link_case(&mut rng).build();
        assert!(factorization_deviation(&model) <= 1e-12);
    }
}

#[test]
fn resonance_removes_the_reactance() {
    let c = CircuitParams::tuned(6.5e-3, 2.0, 2.0, 1e4).unwrap();
    let z = mirelay::medium::circuit_impedance(&c, 1e4).unwrap();
    assert!(z.im.abs() < 1e-9 * z.re);
    assert!(rel_err(z.re, 4.0) < 1e-15);
}

#[test]
fn removing_the_relay_coupling_decouples_the_chain() {
    let c = CircuitParams::tuned(6.5e-3, 2.0, 2.0, 1e4).unwrap();
    for f in [5e3, 1e4, 1.3e4] {
        assert_eq!(link::channel_gain_rd(&c, 1e-6, 0.0, f), 0.0);
        assert_eq!(link::channel_gain_sd_passive(&c, 1e-6, 0.0, f), 0.0);
        let o = oracle_point(c.inductance, c.wire_resistance, c.load_resistance, c.capacitance, 0.0, 0.0, 290.0, f);
        assert_eq!(o.g_sr, 0.0);
        // without coupling P_Rn is the thermal noise of an isolated circuit
        let z2 = 16.0 + (2.0 * std::f64::consts::PI * f * c.inductance
            - 1.0 / (2.0 * std::f64::consts::PI * f * c.capacitance))
            .powi(2);
        let isolated = 4.0 * common::KB * 290.0 * 8.0 / (2.0 * z2);
        assert!(rel_err(o.n_relay, isolated) < 1e-12);
    }
}
