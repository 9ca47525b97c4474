//! Numerical and Monte Carlo cross-checks of the analytic model.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::capacity::{c_exact, c_jensen, snr_crit, DistortionMode, LinkOperatingPoint};
use crate::error::{invalid, Error, Result};
use crate::model::{gain_breakdown, kappa, ArrayConfig};
use crate::noise::{
    build_noise_psd, sigma_phi_res_var, DistortionBudget, NoiseConvention, NoiseInputs, NoisePsd, PhaseNoiseModel, PsdKind,
    RsmModel, SpectralGrid,
};
use crate::scenario::{NoiseToggles, Scenario};
use crate::sensing::{exact_time_fim, whittle_fim_tau};
use crate::tradeoff::map_points;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub confidence: f64,
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, seed, confidence: 0.997 }
    }
}

/// Samples per RNG stream. Each batch draws from its own ChaCha20 stream so
/// the result does not depend on how batches are scheduled.
const BATCH: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BussgangEstimate {
    pub sigma_sq: f64,
    pub n_samples: usize,
    /// `|mean exp(j phi)|` and the analytic `exp(-sigma^2/2)`.
    pub coeff: f64,
    pub coeff_stderr: f64,
    pub coeff_expected: f64,
    /// `mean |u|^2` for unit-power symbols, and `1 - exp(-sigma^2)`.
    pub distortion_power: f64,
    pub distortion_stderr: f64,
    pub distortion_expected: f64,
    /// `mean u s*`, expected zero.
    pub cross: [f64; 2],
    pub cross_stderr: [f64; 2],
}

impl BussgangEstimate {
    /// All three statistics within `k` standard errors of their targets.
    pub fn within(&self, k: f64) -> bool {
        let ok = |est: f64, want: f64, se: f64| (est - want).abs() <= k * se || (est - want).abs() < 1e-15;
        ok(self.coeff, self.coeff_expected, self.coeff_stderr)
            && ok(self.distortion_power, self.distortion_expected, self.distortion_stderr)
            && ok(self.cross[0], 0.0, self.cross_stderr[0])
            && ok(self.cross[1], 0.0, self.cross_stderr[1])
    }

    /// Largest absolute z-score over the four statistics.
    pub fn max_z(&self) -> f64 {
        let z = |est: f64, want: f64, se: f64| if se > 0.0 { ((est - want) / se).abs() } else { 0.0 };
        z(self.coeff, self.coeff_expected, self.coeff_stderr)
            .max(z(self.distortion_power, self.distortion_expected, self.distortion_stderr))
            .max(z(self.cross[0], 0.0, self.cross_stderr[0]))
            .max(z(self.cross[1], 0.0, self.cross_stderr[1]))
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    sums: [f64; 9],
}

impl Moments {
    fn merge(mut self, o: Moments) -> Self {
        self.n += o.n;
        for (a, b) in self.sums.iter_mut().zip(o.sums) {
            *a += b;
        }
        self
    }
}

fn bussgang_batch(sigma_sq: f64, seed: u64, batch: u64, len: usize) -> Moments {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let phase = Normal::new(0.0, sigma_sq.sqrt()).expect("finite std");
    let sym = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("finite std");
    let beta = (-0.5 * sigma_sq).exp();
    let mut m = Moments { n: len as f64, ..Default::default() };
    for _ in 0..len {
        let phi: f64 = phase.sample(&mut rng);
        let s = Complex64::new(sym.sample(&mut rng), sym.sample(&mut rng));
        let z = Complex64::from_polar(1.0, phi);
        let u = (z - beta) * s;
        let p = u.norm_sqr();
        let c = u * s.conj();
        let v = [z.re, z.im, p, c.re, c.im];
        m.sums[0] += v[0];
        m.sums[1] += v[0] * v[0];
        m.sums[2] += v[1];
        m.sums[3] += v[2];
        m.sums[4] += v[2] * v[2];
        m.sums[5] += v[3];
        m.sums[6] += v[3] * v[3];
        m.sums[7] += v[4];
        m.sums[8] += v[4] * v[4];
    }
    m
}

/// Monte Carlo check of the Bussgang split of a Gaussian phase error.
pub fn mc_bussgang(sigma_sq: f64, mc: &McConfig, parallel: bool) -> Result<BussgangEstimate> {
    if !(sigma_sq >= 0.0) {
        return Err(invalid("sigma_sq", "must be >= 0"));
    }
    if mc.n_samples < 2 {
        return Err(invalid("n_samples", "need at least 2 samples"));
    }
    let n_batches = mc.n_samples.div_ceil(BATCH);
    let ids: Vec<f64> = (0..n_batches).map(|b| b as f64).collect();
    let parts = map_points(&ids, parallel, |b| {
        let b = b as usize;
        let len = BATCH.min(mc.n_samples - b * BATCH);
        Ok(bussgang_batch(sigma_sq, mc.seed, b as u64, len))
    })?;
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let n = m.n;
    let mean = |i: usize| m.sums[i] / n;
    let se = |sum: f64, sum_sq: f64| {
        let mu = sum / n;
        ((sum_sq / n - mu * mu).max(0.0) / (n - 1.0)).sqrt()
    };
    Ok(BussgangEstimate {
        sigma_sq,
        n_samples: mc.n_samples,
        coeff: Complex64::new(mean(0), mean(2)).norm(),
        coeff_stderr: se(m.sums[0], m.sums[1]),
        coeff_expected: (-0.5 * sigma_sq).exp(),
        distortion_power: mean(3),
        distortion_stderr: se(m.sums[3], m.sums[4]),
        distortion_expected: 1.0 - (-sigma_sq).exp(),
        cross: [mean(5), mean(7)],
        cross_stderr: [se(m.sums[5], m.sums[6]), se(m.sums[7], m.sums[8])],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::DegenerateFit("need at least 3 paired points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 || !sxx.is_finite() {
        return Err(Error::DegenerateFit("x values are identical".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    let slope_stderr = if xs.len() > 2 { (ss_res / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(SlopeFit { slope, intercept, r_squared, slope_stderr })
}

/// Least squares on `(ln x, ln y)`.
pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateFit("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationGridSpec {
    pub l_over_lambda: (f64, f64),
    pub b_over_fc: (f64, f64),
    pub n_l: usize,
    pub n_b: usize,
    pub n_bins: usize,
}

impl Default for ValidationGridSpec {
    fn default() -> Self {
        Self { l_over_lambda: (3.0, 25.0), b_over_fc: (0.02, 0.15), n_l: 10, n_b: 10, n_bins: 2048 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub l_ap_over_lambda: f64,
    pub b_over_fc: f64,
    pub whittle_j: f64,
    /// Delay information after the Doppler nuisance is removed.
    pub exact_j: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationGrid {
    pub rows: Vec<ValidationRow>,
    pub max_rel_error: f64,
    /// Linear fit of the relative error against `B/f_c`.
    pub trend_b: SlopeFit,
    /// Linear fit of the relative error against `L/lambda`.
    pub trend_l: SlopeFit,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Copy of `scenario` with the array resized to aperture `l_over_lambda`
/// (about half-wavelength spacing) and bandwidth `b_over_fc * f_c`.
pub fn resized(scenario: &Scenario, l_over_lambda: f64, b_over_fc: f64) -> Scenario {
    let n = (2.0 * l_over_lambda).round().max(1.0) as u32;
    let mut s = *scenario;
    s.array = ArrayConfig {
        n_tx: n,
        n_rx: n,
        spacing_wavelengths: l_over_lambda / f64::from(n),
        bandwidth_hz: b_over_fc * scenario.array.carrier_hz,
        ..scenario.array
    };
    s
}

/// Whittle against exact information at one grid point.
pub fn validation_point(scenario: &Scenario, l_over_lambda: f64, b_over_fc: f64, n_bins: usize) -> Result<ValidationRow> {
    let mut s = resized(scenario, l_over_lambda, b_over_fc);
    s.sensing.n_bins = n_bins;
    let sig = s.sensing_signal()?;
    let noise = s.sense_noise(1.0, NoiseToggles::ALL)?;
    let w = whittle_fim_tau(&sig, &noise)?.j_tau_tau;
    let e = exact_time_fim(&sig, &noise, true)?.effective_j();
    Ok(ValidationRow { l_ap_over_lambda: l_over_lambda, b_over_fc, whittle_j: w, exact_j: e, rel_error: (w - e).abs() / e })
}

pub fn whittle_validation_grid(spec: &ValidationGridSpec, scenario: &Scenario, parallel: bool) -> Result<ValidationGrid> {
    let ls = linspace(spec.l_over_lambda.0, spec.l_over_lambda.1, spec.n_l);
    let bs = linspace(spec.b_over_fc.0, spec.b_over_fc.1, spec.n_b);
    let idx: Vec<f64> = (0..ls.len() * bs.len()).map(|i| i as f64).collect();
    let rows = map_points(&idx, parallel, |i| {
        let i = i as usize;
        validation_point(scenario, ls[i / bs.len()], bs[i % bs.len()], spec.n_bins)
    })?;
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let errs: Vec<f64> = rows.iter().map(|r| r.rel_error).collect();
    let trend_b = linear_fit(&rows.iter().map(|r| r.b_over_fc).collect::<Vec<_>>(), &errs)?;
    let trend_l = linear_fit(&rows.iter().map(|r| r.l_ap_over_lambda).collect::<Vec<_>>(), &errs)?;
    Ok(ValidationGrid { rows, max_rel_error, trend_b, trend_l })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MimoRow {
    pub n: u32,
    pub g_sig_avg: f64,
    pub eta_bsq_avg: f64,
    pub rmse_m: f64,
    pub snr_crit_directional: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MimoScaling {
    pub rows: Vec<MimoRow>,
    /// Log-log fit of RMSE against `N_t N_r`.
    pub rmse_fit: SlopeFit,
    /// Log-log fit of the directional critical SNR against `N_t N_r`.
    pub snr_crit_fit: SlopeFit,
}

/// Thermal-noise ranging RMSE and directional critical SNR for square arrays
/// `N_t = N_r = N` at fixed element spacing. With `squint = false` the beam
/// is steered to broadside.
pub fn mimo_scaling_experiment(n_values: &[u32], scenario: &Scenario, squint: bool) -> Result<MimoScaling> {
    if n_values.len() < 3 {
        return Err(invalid("n_values", "need at least 3 array sizes"));
    }
    let rows = n_values
        .iter()
        .map(|&n| {
            let mut s = *scenario;
            s.array.n_tx = n;
            s.array.n_rx = n;
            if !squint {
                s.array.steer_angle_rad = 0.0;
            }
            let gain = s.gain()?;
            let sig = s.sensing_signal()?;
            let noise = NoisePsd::white(s.grid()?, s.link.n0, NoiseConvention::Sense)?;
            Ok(MimoRow {
                n,
                g_sig_avg: gain.g_sig_avg,
                eta_bsq_avg: gain.eta_bsq_avg,
                rmse_m: whittle_fim_tau(&sig, &noise)?.rmse_range_m,
                snr_crit_directional: snr_crit(&gain, &s.budget(), DistortionMode::Directional)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gi: Vec<f64> = rows.iter().map(|r| f64::from(r.n) * f64::from(r.n)).collect();
    let rmse_fit = slope_fit(&gi, &rows.iter().map(|r| r.rmse_m).collect::<Vec<_>>())?;
    let snr_crit_fit = slope_fit(&gi, &rows.iter().map(|r| r.snr_crit_directional).collect::<Vec<_>>())?;
    Ok(MimoScaling { rows, rmse_fit, snr_crit_fit })
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub model: PhaseNoiseModel,
    /// Residual variance by quadrature of the continuous PSD.
    pub variance: f64,
    /// Extra sensing-convention power over the band, divided by `P_sig,ref`.
    pub added: f64,
    pub rel_error: f64,
}

/// Random tracked phase-noise models, log-uniform in every coefficient. Half
/// of them carry a flicker term with a low-frequency cutoff.
pub fn random_phase_noise(rng: &mut ChaCha20Rng) -> PhaseNoiseModel {
    let flicker = rng.gen_bool(0.5);
    PhaseNoiseModel {
        psd_kind: PsdKind::PowerLaw,
        k2: log_uniform(rng, 1e3, 1e7),
        k3: if flicker { log_uniform(rng, 1e6, 1e12) } else { 0.0 },
        floor: log_uniform(rng, 1e-13, 1e-9),
        loop_bw_hz: log_uniform(rng, 1e5, 5e7),
        f_min_hz: if flicker { log_uniform(rng, 1.0, 1e4) } else { 0.0 },
    }
}

/// Compare the sensing-minus-communication PSD power with the residual
/// phase variance on `n_models` seeded random models.
pub fn spectral_consistency_suite(n_models: usize, seed: u64, grid: SpectralGrid, p_sig_ref: f64) -> Result<Vec<ConsistencyRow>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let df = grid.bin_spacing_hz();
    (0..n_models)
        .map(|_| {
            let model = random_phase_noise(&mut rng);
            let inputs = NoiseInputs {
                grid,
                n0: 1.0,
                distortion_psd: 0.0,
                dse_psd: 0.0,
                rsm: RsmModel::disabled(),
                p_sig_ref,
                phase_noise: model,
            };
            let sense = build_noise_psd(NoiseConvention::Sense, &inputs)?;
            let comm = build_noise_psd(NoiseConvention::Comm, &inputs)?;
            let added = sense
                .components
                .phase_noise
                .iter()
                .zip(&comm.components.phase_noise)
                .map(|(a, b)| a - b)
                .sum::<f64>()
                * df
                / p_sig_ref;
            let variance = sigma_phi_res_var(&model, &grid)?;
            Ok(ConsistencyRow { model, variance, added, rel_error: (added - variance).abs() / variance })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JensenRow {
    pub snr0: f64,
    pub kappa: f64,
    pub c_exact: f64,
    pub c_jensen: f64,
}

impl JensenRow {
    /// Ordering holds up to the quadrature tolerance.
    pub fn ordered(&self) -> bool {
        self.c_jensen >= self.c_exact - 1e-8 * self.c_jensen.max(1e-3)
    }
}

/// Exact and Jensen capacity on `n` seeded random links without RSM lines:
/// array size, steering, bandwidth, SNR, distortion, phase noise, kinematic
/// noise and distortion mode are all drawn at random.
pub fn jensen_ordering_suite(n: usize, seed: u64, parallel: bool) -> Result<Vec<JensenRow>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let hw = crate::scenario::baseline_hardware();
    let links: Vec<(ArrayConfig, LinkOperatingPoint)> = (0..n)
        .map(|_| {
            let mut cfg = crate::scenario::table_array();
            let side = rng.gen_range(2..=200);
            cfg.n_tx = side;
            cfg.n_rx = side;
            cfg.steer_angle_rad = rng.gen_range(0.0..70f64).to_radians();
            cfg.bandwidth_hz = rng.gen_range(0.005..0.2) * cfg.carrier_hz;
            let gain = gain_breakdown(&cfg, &hw)?;
            let op = LinkOperatingPoint {
                snr0: crate::units::db_to_lin(rng.gen_range(-40.0..20.0)),
                gain,
                budget: DistortionBudget::new(rng.gen_range(0.0..0.3), 0.0, 0.0, 0.0),
                sigma_phi_res: rng.gen_range(0.0..0.5),
                sigma_dse_phase: rng.gen_range(0.0..2.0),
                rsm: RsmModel::disabled(),
                distortion_mode: if rng.gen_bool(0.5) { DistortionMode::Directional } else { DistortionMode::Uncorrelated },
            };
            Ok((cfg, op))
        })
        .collect::<Result<_>>()?;
    let idx: Vec<f64> = (0..n).map(|i| i as f64).collect();
    map_points(&idx, parallel, |i| {
        let (cfg, op) = &links[i as usize];
        Ok(JensenRow { snr0: op.snr0, kappa: kappa(cfg), c_exact: c_exact(op, cfg)?, c_jensen: c_jensen(op, cfg)? })
    })
}
