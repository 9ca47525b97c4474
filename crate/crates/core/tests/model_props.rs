use std::f64::consts::PI;

use isl_limits::model::*;
use isl_limits::scenario::{baseline_hardware, table_array};
use proptest::prelude::*;

fn array(n: u32, theta_deg: f64, frac_bw: f64) -> ArrayConfig {
    let mut c = table_array();
    c.n_tx = n;
    c.n_rx = n;
    c.steer_angle_rad = theta_deg.to_radians();
    c.bandwidth_hz = frac_bw * c.carrier_hz;
    c
}

/// Midpoint rule with many panels, used as a slow independent reference.
fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn eta_average_matches_brute_force() {
    for (n, th, bw) in [(64, 30.0, 0.143), (16, 10.0, 0.05), (128, 60.0, 0.1)] {
        let c = array(n, th, bw);
        let x = PI * c.active_aperture_wavelengths() * c.steer_angle_rad.sin() / c.carrier_hz;
        let reference = midpoint(
            |f| {
                let u = x * f;
                if u == 0.0 { 1.0 } else { (u.sin() / u).powi(4) }
            },
            0.0,
            0.5 * c.bandwidth_hz,
            400_000,
        ) / (0.5 * c.bandwidth_hz);
        let got = eta_bsq_avg(&c, EtaMethod::Numeric).unwrap();
        assert!((got - reference).abs() < 1e-8, "{got} vs {reference}");
    }
}

#[test]
fn table_gain_factors() {
    let g = gain_breakdown(&table_array(), &baseline_hardware()).unwrap();
    assert_eq!(g.g_ideal, 4096.0);
    // 4-bit phase shifters: sinc^2(pi/16)
    let x = PI / 16.0;
    assert!((g.rho_q - (x.sin() / x).powi(2)).abs() < 1e-15);
    assert!((g.rho_a - (-0.01f64).exp()).abs() < 1e-15);
}

#[test]
fn zero_impairments_give_unity() {
    let c = array(64, 0.0, 0.143);
    let g = gain_breakdown(&c, &HardwareProfile::ideal()).unwrap();
    assert_eq!(g.eta_bsq_avg, 1.0);
    assert_eq!(g.rho_ape, 1.0);
    assert_eq!(g.rho_a, 1.0);
    assert_eq!(g.rho_pn, 1.0);
    assert!(1.0 - g.rho_q < 1e-15);
    assert!((g.g_sig_avg - 4096.0).abs() < 1e-9);
}

#[test]
fn squint_nulls_are_zeros() {
    let c = array(64, 30.0, 0.143);
    let nulls = squint_nulls(&c);
    assert!(!nulls.is_empty());
    for f in nulls {
        assert!(f.abs() <= 0.5 * c.bandwidth_hz);
        assert!(eta_bsq(f, &c) < 1e-20);
    }
}

#[test]
fn amplitude_squared_integrates_to_average_gain() {
    let c = table_array();
    let hw = baseline_hardware();
    let g = gain_breakdown(&c, &hw).unwrap();
    let half = 0.5 * c.bandwidth_hz;
    let integral = 2.0 * midpoint(|f| amplitude_profile(f, &c, &hw).powi(2), 0.0, half, 400_000);
    let want = c.bandwidth_hz * g.g_ideal * g.rho_static() * g.eta_bsq_avg;
    assert!((integral / want - 1.0).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn factorization(n in 2u32..200, th in 0.0f64..70.0, bw in 0.005f64..0.2, ps in 1u32..8, sa in 0.0f64..0.3, st in 0.0f64..1e-3) {
        let c = array(n, th, bw);
        let hw = HardwareProfile { ps_bits: ps, amp_err_rms: sa, point_err_rad: st, ..baseline_hardware() };
        let g = gain_breakdown(&c, &hw).unwrap();
        let product = g.g_ideal * g.eta_bsq_avg * g.rho_q * g.rho_ape * g.rho_a * g.rho_pn;
        prop_assert!((g.g_sig_avg - product).abs() <= 1e-15 * product);
        for r in [g.rho_q, g.rho_ape, g.rho_a, g.rho_pn, g.eta_bsq_avg] {
            prop_assert!(r > 0.0 && r <= 1.0);
        }
    }

    #[test]
    fn eta_average_is_monotone(n in 4u32..128, th in 1.0f64..60.0, bw in 0.01f64..0.15) {
        let base = eta_bsq_avg(&array(n, th, bw), EtaMethod::Numeric).unwrap();
        let wider_aperture = eta_bsq_avg(&array(n + 4, th, bw), EtaMethod::Numeric).unwrap();
        let wider_band = eta_bsq_avg(&array(n, th, bw * 1.1), EtaMethod::Numeric).unwrap();
        let steeper = eta_bsq_avg(&array(n, th * 1.1, bw), EtaMethod::Numeric).unwrap();
        prop_assert!(wider_aperture <= base + 1e-9);
        prop_assert!(wider_band <= base + 1e-9);
        prop_assert!(steeper <= base + 1e-9);
    }

    #[test]
    fn taylor_agrees_for_small_kappa(n in 2u32..32, th in 0.0f64..30.0, bw in 0.005f64..0.08) {
        let c = array(n, th, bw);
        let k = kappa(&c);
        prop_assume!(k <= 0.3);
        let t = eta_bsq_avg(&c, EtaMethod::Taylor).unwrap();
        let q = eta_bsq_avg(&c, EtaMethod::Numeric).unwrap();
        // The first omitted term averages to x_max^4 / 25 with x_max = pi kappa / 2.
        let remainder = (PI * k / 2.0).powi(4) / 25.0;
        prop_assert!((t - q).abs() <= 1.01 * remainder + 1e-12, "taylor {} numeric {}", t, q);
        if k <= 0.25 {
            prop_assert!((t - q).abs() <= 1e-3);
        }
    }

    #[test]
    fn eta_is_even_and_bounded(f in -1e10f64..1e10, th in 0.0f64..80.0) {
        let c = array(64, th, 0.143);
        let e = eta_bsq(f, &c);
        prop_assert!((0.0..=1.0).contains(&e));
        prop_assert_eq!(e, eta_bsq(-f, &c));
    }
}
