use isl_limits::noise::*;
use isl_limits::scenario::baseline_hardware;
use num_complex::Complex64;
use proptest::prelude::*;

fn inputs(grid: SpectralGrid, pn: PhaseNoiseModel, p_ref: f64) -> NoiseInputs {
    NoiseInputs {
        grid,
        n0: 1.0,
        distortion_psd: 0.3,
        dse_psd: 0.05,
        rsm: RsmModel { symbol_rate_hz: 2.5e9, total_power_ratio: 1e-3, line_width_hz: 20e6, n_harmonics: 3 },
        p_sig_ref: p_ref,
        phase_noise: pn,
    }
}

fn pn_model() -> impl Strategy<Value = PhaseNoiseModel> {
    (1e3f64..1e7, 0.0f64..1e12, -12.0f64..-9.0, 1e5f64..5e7, prop::bool::ANY, 1.0f64..1e4).prop_map(
        |(k2, k3, floor_exp, bl, flicker, fmin)| PhaseNoiseModel {
            psd_kind: PsdKind::PowerLaw,
            k2,
            k3: if flicker { k3 } else { 0.0 },
            floor: 10f64.powf(floor_exp),
            loop_bw_hz: bl,
            f_min_hz: if flicker { fmin } else { 0.0 },
        },
    )
}

#[test]
fn spectral_consistency_literal_form() {
    // With unit reference power the extra sensing PSD is exactly the residual phase spectrum.
    let grid = SpectralGrid::new(1024, 20e9).unwrap();
    let pn = PhaseNoiseModel::calibrated(0.01, 20e9, 10e6);
    let inp = inputs(grid, pn, 1.0);
    let sense = build_noise_psd(NoiseConvention::Sense, &inp).unwrap();
    let comm = build_noise_psd(NoiseConvention::Comm, &inp).unwrap();
    let df = grid.bin_spacing_hz();
    let diff: f64 = sense.components.phase_noise.iter().zip(&comm.components.phase_noise).map(|(s, c)| s - c).sum::<f64>() * df;
    assert!((diff / 0.01 - 1.0).abs() < 1e-6);
    for k in 0..grid.n_bins {
        let extra = sense.values[k] - comm.values[k];
        assert!((extra - sense.components.phase_noise[k]).abs() <= 4.0 * f64::EPSILON * sense.values[k]);
    }
    assert!((sigma_phi_res_var(&pn, &grid).unwrap() - 0.01).abs() < 1e-10);
}

#[test]
fn distortion_components_from_hardware() {
    let hw = baseline_hardware();
    let b = distortion_budget(&hw, 5e9);
    assert!((b.gamma_adc - 10f64.powf(-(6.02 * 7.0 + 1.76) / 10.0)).abs() < 1e-18);
    assert!((b.gamma_iq - 0.01).abs() < 1e-15);
    let lo = (2.0 * std::f64::consts::PI * 5e9 * 50e-15).powi(2);
    assert!((b.gamma_lo - lo).abs() < 1e-18);
    assert!((b.gamma_total - (b.gamma_pa + b.gamma_adc + b.gamma_iq + b.gamma_lo)).abs() < 1e-15);
    assert_eq!(b.effective(), b.gamma_total);
    assert_eq!(b.with_override(Some(0.006)).effective(), 0.006);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn spectral_consistency(pn in pn_model(), p_ref in 0.1f64..1e4) {
        let grid = SpectralGrid::new(512, 20e9).unwrap();
        let inp = inputs(grid, pn, p_ref);
        let sense = build_noise_psd(NoiseConvention::Sense, &inp).unwrap();
        let comm = build_noise_psd(NoiseConvention::Comm, &inp).unwrap();
        let df = grid.bin_spacing_hz();
        let added: f64 = sense.components.phase_noise.iter().zip(&comm.components.phase_noise).map(|(s, c)| s - c).sum::<f64>() * df / p_ref;
        let var = sigma_phi_res_var(&pn, &grid).unwrap();
        prop_assert!(((added - var) / var).abs() < 1e-6, "added {} var {}", added, var);
        prop_assert!(sense.values.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn parseval(re in prop::collection::vec(-10.0f64..10.0, 2..200), seed in 0.0f64..6.0) {
        let n = re.len();
        let grid = SpectralGrid::new(n, 1.0).unwrap();
        let x: Vec<Complex64> = re.iter().enumerate().map(|(i, &r)| Complex64::new(r, (seed + i as f64).sin())).collect();
        let spec = grid.to_frequency(&x);
        let et: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let ef: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        prop_assert!((et - ef).abs() <= 1e-10 * et.max(1.0));
        let back = grid.to_time(&spec);
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn small_angle_equivalence(var in 1e-6f64..0.05, p in 0.01f64..100.0) {
        let exact = p * (1.0 - (-var).exp());
        let approx = p * var;
        prop_assert!((exact - approx).abs() / approx <= 0.03);
    }

    #[test]
    fn budget_is_additive_and_symmetric(g in prop::array::uniform4(0.0f64..0.2)) {
        let a = DistortionBudget::new(g[0], g[1], g[2], g[3]);
        let b = DistortionBudget::new(g[3], g[2], g[1], g[0]);
        let c = DistortionBudget::new(g[1], g[3], g[0], g[2]);
        let sum = g[0] + g[1] + g[2] + g[3];
        prop_assert!((a.gamma_total - sum).abs() <= 1e-15);
        prop_assert!((a.gamma_total - b.gamma_total).abs() <= 4.0 * f64::EPSILON * sum);
        prop_assert!((a.gamma_total - c.gamma_total).abs() <= 4.0 * f64::EPSILON * sum);
    }

    #[test]
    fn bins_positive_with_thermal_floor(n0 in 1e-6f64..10.0, pn in pn_model()) {
        let grid = SpectralGrid::new(256, 10e9).unwrap();
        let inp = NoiseInputs { n0, distortion_psd: 0.0, dse_psd: 0.0, rsm: RsmModel::disabled(), ..inputs(grid, pn, 1.0) };
        for conv in [NoiseConvention::Comm, NoiseConvention::Sense] {
            let psd = build_noise_psd(conv, &inp).unwrap();
            prop_assert!(psd.values.iter().all(|&v| v >= n0));
        }
    }
}
