//! Additive noise model: hardware distortion budget, residual tracked phase
//! noise, the residual-sideband-modulation (RSM) line comb and the sampled
//! noise PSDs in both the communication and sensing conventions.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Error, Result};
use crate::model::HardwareProfile;
use crate::quad::Quad;
use crate::units::db_to_lin;

// ---------------------------------------------------------------------------
// Frequency grid
// ---------------------------------------------------------------------------

/// `n_bins` equal cells tiling the baseband `[-B/2, B/2]`.
///
/// Bin `k` is centred at `f_k = -B/2 + (k + 1/2) B/N`, so the grid is
/// symmetric and has no bin at DC. The matching transform pair is
/// `X[k] = sum_n x[n] exp(-j 2 pi f_k n T_s)` with `T_s = 1/B`, for which
/// `sum |x[n]|^2 = N^-1 sum |X[k]|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub n_bins: usize,
    pub bandwidth_hz: f64,
}

impl SpectralGrid {
    pub fn new(n_bins: usize, bandwidth_hz: f64) -> Result<Self> {
        if n_bins < 2 {
            return Err(invalid("n_bins", "need at least 2 bins"));
        }
        if !(bandwidth_hz > 0.0) {
            return Err(invalid("bandwidth_hz", "must be > 0"));
        }
        Ok(Self { n_bins, bandwidth_hz })
    }

    pub fn bin_spacing_hz(&self) -> f64 {
        self.bandwidth_hz / self.n_bins as f64
    }

    pub fn sample_interval_s(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    pub fn frequency(&self, k: usize) -> f64 {
        -0.5 * self.bandwidth_hz + (k as f64 + 0.5) * self.bin_spacing_hz()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_bins).map(|k| self.frequency(k)).collect()
    }

    /// Lower and upper edge of bin `k`.
    pub fn cell(&self, k: usize) -> (f64, f64) {
        let df = self.bin_spacing_hz();
        let lo = -0.5 * self.bandwidth_hz + k as f64 * df;
        (lo, lo + df)
    }

    /// Phase ramp that maps the half-bin-shifted grid onto a plain DFT.
    fn modulation(&self, n: usize) -> Complex64 {
        let nn = self.n_bins as f64;
        // f_k / B = (k - (N - 1)/2) / N
        let phase = PI * (nn - 1.0) * n as f64 / nn;
        Complex64::from_polar(1.0, phase)
    }

    /// Forward transform onto the grid frequencies.
    pub fn to_frequency(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n_bins, "sample count must match the grid");
        let mut buf: Vec<Complex64> = x.iter().enumerate().map(|(n, &v)| v * self.modulation(n)).collect();
        FftPlanner::new().plan_fft_forward(self.n_bins).process(&mut buf);
        buf
    }

    /// Inverse of [`SpectralGrid::to_frequency`].
    pub fn to_time(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(spectrum.len(), self.n_bins, "bin count must match the grid");
        let mut buf = spectrum.to_vec();
        FftPlanner::new().plan_fft_inverse(self.n_bins).process(&mut buf);
        let scale = 1.0 / self.n_bins as f64;
        buf.iter().enumerate().map(|(n, &v)| v * self.modulation(n).conj() * scale).collect()
    }
}

// ---------------------------------------------------------------------------
// Distortion budget
// ---------------------------------------------------------------------------

/// Aggregate hardware distortion. `gamma_total` is always the plain sum of the
/// four components; `total_override` replaces it where a preset quotes a total
/// that is not the sum of its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionBudget {
    pub gamma_pa: f64,
    pub gamma_adc: f64,
    pub gamma_iq: f64,
    pub gamma_lo: f64,
    pub gamma_total: f64,
    pub total_override: Option<f64>,
}

impl DistortionBudget {
    pub fn new(gamma_pa: f64, gamma_adc: f64, gamma_iq: f64, gamma_lo: f64) -> Self {
        Self {
            gamma_pa,
            gamma_adc,
            gamma_iq,
            gamma_lo,
            gamma_total: gamma_pa + gamma_adc + gamma_iq + gamma_lo,
            total_override: None,
        }
    }

    pub fn with_override(mut self, total: Option<f64>) -> Self {
        self.total_override = total;
        self
    }

    /// The value used by the capacity and sensing models.
    pub fn effective(&self) -> f64 {
        self.total_override.unwrap_or(self.gamma_total)
    }

    /// Share of the summed budget per component, in the order PA, ADC, IQ, LO.
    pub fn fractions(&self) -> [f64; 4] {
        if self.gamma_total == 0.0 {
            return [0.0; 4];
        }
        [self.gamma_pa, self.gamma_adc, self.gamma_iq, self.gamma_lo].map(|g| g / self.gamma_total)
    }
}

pub fn gamma_adc(bits: u32) -> f64 {
    db_to_lin(-(6.02 * f64::from(bits) + 1.76))
}

pub fn gamma_lo(jitter_s: f64, f_eff_hz: f64) -> f64 {
    (2.0 * PI * f_eff_hz * jitter_s).powi(2)
}

pub fn gamma_iq(irr_db: f64) -> f64 {
    db_to_lin(-irr_db)
}

pub fn distortion_budget(hw: &HardwareProfile, f_eff_hz: f64) -> DistortionBudget {
    DistortionBudget::new(hw.gamma_pa, gamma_adc(hw.adc_bits), gamma_iq(hw.irr_db), gamma_lo(hw.jitter_s, f_eff_hz))
}

// ---------------------------------------------------------------------------
// Residual tracked phase noise
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdKind {
    #[default]
    PowerLaw,
}

/// Free-running LO phase noise `k2/f^2 + k3/|f|^3 + floor`, tracked by a loop
/// whose error transfer is the first-order high-pass `f^2/(B_L^2 + f^2)`.
///
/// `f_min_hz` is a low-frequency cutoff: the residual PSD is zero for
/// `|f| < f_min_hz`. It must be positive whenever `k3 > 0`, since the flicker
/// term leaves a `1/|f|` residual that is not integrable at DC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseNoiseModel {
    #[serde(default)]
    pub psd_kind: PsdKind,
    pub k2: f64,
    pub k3: f64,
    pub floor: f64,
    pub loop_bw_hz: f64,
    #[serde(default)]
    pub f_min_hz: f64,
}

/// Fraction of the calibrated residual variance carried by the white floor.
const FLOOR_SHARE: f64 = 0.1;

impl PhaseNoiseModel {
    pub fn zero(loop_bw_hz: f64) -> Self {
        Self { psd_kind: PsdKind::PowerLaw, k2: 0.0, k3: 0.0, floor: 0.0, loop_bw_hz, f_min_hz: 0.0 }
    }

    /// Model whose residual variance over `bandwidth_hz` equals `variance`,
    /// with 10% of it in the white floor and the rest in the `1/f^2` term.
    pub fn calibrated(variance: f64, bandwidth_hz: f64, loop_bw_hz: f64) -> Self {
        let half = 0.5 * bandwidth_hz;
        let at = (half / loop_bw_hz).atan();
        let floor = FLOOR_SHARE * variance / (2.0 * (half - loop_bw_hz * at));
        let k2 = (1.0 - FLOOR_SHARE) * variance * loop_bw_hz / (2.0 * at);
        Self { psd_kind: PsdKind::PowerLaw, k2, k3: 0.0, floor, loop_bw_hz, f_min_hz: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k2 >= 0.0 && self.k3 >= 0.0 && self.floor >= 0.0) {
            return Err(invalid("tracking", "PSD coefficients must be >= 0"));
        }
        if !(self.loop_bw_hz > 0.0) {
            return Err(invalid("tracking.loop_bw_hz", "must be > 0"));
        }
        if !(self.f_min_hz >= 0.0) || (self.k3 > 0.0 && self.f_min_hz == 0.0) {
            return Err(invalid("tracking.f_min_hz", "must be > 0 when k3 > 0"));
        }
        Ok(())
    }

    /// Same spectral shape, all coefficients multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { k2: self.k2 * factor, k3: self.k3 * factor, floor: self.floor * factor, ..*self }
    }

    /// Same shape, rescaled so the residual variance over `grid` is `target`.
    pub fn scaled_to_variance(&self, target: f64, grid: &SpectralGrid) -> Result<Self> {
        let current = self.band_power(-0.5 * grid.bandwidth_hz, 0.5 * grid.bandwidth_hz);
        if current <= 0.0 {
            return Err(invalid("tracking", "cannot rescale a model with zero residual power"));
        }
        Ok(self.scaled(target / current))
    }

    /// Free-running PSD before tracking.
    pub fn s_total(&self, f_hz: f64) -> f64 {
        let a = f_hz.abs();
        self.k2 / (a * a) + self.k3 / (a * a * a) + self.floor
    }

    /// Antiderivative of the residual PSD on `[0, inf)`, anchored at the cutoff.
    fn half_primitive(&self, f: f64) -> f64 {
        let bl = self.loop_bw_hz;
        let prim = |x: f64| {
            let at = (x / bl).atan();
            let mut v = self.k2 / bl * at + self.floor * (x - bl * at);
            if self.k3 > 0.0 {
                v += self.k3 / (bl * bl) * (x.ln() - 0.5 * (bl * bl + x * x).ln());
            }
            v
        };
        let lo = self.f_min_hz;
        if f <= lo {
            0.0
        } else {
            prim(f) - prim(lo)
        }
    }

    /// Exact integral of the residual PSD over `[f1, f2]`.
    pub fn band_power(&self, f1: f64, f2: f64) -> f64 {
        let odd = |f: f64| f.signum() * self.half_primitive(f.abs());
        odd(f2) - odd(f1)
    }
}

/// Residual phase-noise PSD after the tracking loop, rad^2/Hz.
pub fn s_phi_res(f_hz: f64, model: &PhaseNoiseModel) -> f64 {
    let a = f_hz.abs();
    if a < model.f_min_hz {
        return 0.0;
    }
    let bl2 = model.loop_bw_hz * model.loop_bw_hz;
    let f2 = a * a;
    // f^2/(B_L^2+f^2) * (k2/f^2 + k3/f^3 + floor), written without the 0/0 at DC.
    let mut v = (model.k2 + model.floor * f2) / (bl2 + f2);
    if model.k3 > 0.0 {
        v += model.k3 / (a * (bl2 + f2));
    }
    v
}

/// Residual phase variance over the grid band, by adaptive quadrature.
pub fn sigma_phi_res_var(model: &PhaseNoiseModel, grid: &SpectralGrid) -> Result<f64> {
    let half = 0.5 * grid.bandwidth_hz;
    let lo = model.f_min_hz.min(half);
    let bl = model.loop_bw_hz;
    let breaks: Vec<f64> = [bl, 10.0 * bl, 100.0 * bl].into_iter().filter(|&b| b > lo && b < half).collect();
    let q = Quad { rel_tol: 1e-11, abs_tol: 0.0, max_panels: 20_000 };
    let one_side = if lo > 0.0 {
        // Integrate in log f so the 1/f flicker residual is smooth.
        let lb: Vec<f64> = breaks.iter().map(|b| b.ln()).collect();
        q.integrate(|u| {
            let f = u.exp();
            s_phi_res(f, model) * f
        }, lo.ln(), half.ln(), &lb)?
    } else {
        q.integrate(|f| s_phi_res(f, model), 0.0, half, &breaks)?
    };
    Ok(2.0 * one_side)
}

// ---------------------------------------------------------------------------
// RSM line comb
// ---------------------------------------------------------------------------

/// Gaussian lines at `+-k * symbol_rate_hz`, `k = 1..=n_harmonics`, scaled so
/// the in-band power is `total_power_ratio` times the reference signal power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsmModel {
    pub symbol_rate_hz: f64,
    pub total_power_ratio: f64,
    /// Standard deviation of each Gaussian line, Hz.
    pub line_width_hz: f64,
    pub n_harmonics: u32,
}

impl RsmModel {
    pub fn disabled() -> Self {
        Self { symbol_rate_hz: 1e9, total_power_ratio: 0.0, line_width_hz: 1e6, n_harmonics: 0 }
    }

    pub fn is_active(&self) -> bool {
        self.n_harmonics > 0 && self.total_power_ratio > 0.0
    }

    fn line_centres(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n_harmonics).flat_map(move |k| {
            let c = f64::from(k) * self.symbol_rate_hz;
            [-c, c]
        })
    }

    /// Integral of the unnormalized comb (unit-area lines) over `[a, b]`.
    fn raw_power(&self, a: f64, b: f64) -> f64 {
        let s = SQRT_2 * self.line_width_hz;
        self.line_centres().map(|c| 0.5 * (erf((b - c) / s) - erf((a - c) / s))).sum()
    }

    fn scale(&self, p_sig_ref: f64, bandwidth_hz: f64) -> f64 {
        if !self.is_active() {
            return 0.0;
        }
        let z = self.raw_power(-0.5 * bandwidth_hz, 0.5 * bandwidth_hz);
        if z <= 0.0 {
            0.0
        } else {
            self.total_power_ratio * p_sig_ref / z
        }
    }

    /// Exact integral of [`s_rsm`] over `[a, b]`.
    pub fn band_power(&self, a: f64, b: f64, p_sig_ref: f64, bandwidth_hz: f64) -> f64 {
        let k = self.scale(p_sig_ref, bandwidth_hz);
        if k == 0.0 {
            0.0
        } else {
            k * self.raw_power(a, b)
        }
    }

    /// Line centres inside the band, useful as quadrature breakpoints.
    pub fn in_band_centres(&self, bandwidth_hz: f64) -> Vec<f64> {
        if !self.is_active() {
            return Vec::new();
        }
        self.line_centres().filter(|c| c.abs() < 0.5 * bandwidth_hz).collect()
    }
}

/// RSM PSD at baseband offset `f_offset_hz`, W/Hz.
pub fn s_rsm(f_offset_hz: f64, model: &RsmModel, p_sig_ref: f64, bandwidth_hz: f64) -> f64 {
    let k = model.scale(p_sig_ref, bandwidth_hz);
    if k == 0.0 {
        return 0.0;
    }
    let w = model.line_width_hz;
    let norm = 1.0 / (w * (2.0 * PI).sqrt());
    k * model
        .line_centres()
        .map(|c| {
            let z = (f_offset_hz - c) / w;
            norm * (-0.5 * z * z).exp()
        })
        .sum::<f64>()
}

// ---------------------------------------------------------------------------
// Sampled PSDs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseConvention {
    Comm,
    Sense,
}

impl NoiseConvention {
    pub fn name(self) -> &'static str {
        match self {
            NoiseConvention::Comm => "comm",
            NoiseConvention::Sense => "sense",
        }
    }
}

/// Everything that goes into a sampled noise PSD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseInputs {
    pub grid: SpectralGrid,
    /// Thermal noise PSD, W/Hz.
    pub n0: f64,
    /// Hardware distortion PSD `P_ref Gamma / B`, W/Hz.
    pub distortion_psd: f64,
    /// Kinematic mismatch PSD `N0 sigma^2_DSE`, W/Hz.
    pub dse_psd: f64,
    pub rsm: RsmModel,
    /// Received signal power the RSM and phase-noise terms are referred to, W.
    pub p_sig_ref: f64,
    pub phase_noise: PhaseNoiseModel,
}

/// Per-bin cell averages of each additive component, W/Hz.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PsdComponents {
    pub thermal: Vec<f64>,
    pub distortion: Vec<f64>,
    pub dse: Vec<f64>,
    pub rsm: Vec<f64>,
    pub phase_noise: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePsd {
    pub grid: SpectralGrid,
    pub values: Vec<f64>,
    pub convention: NoiseConvention,
    pub components: PsdComponents,
}

impl NoisePsd {
    /// White noise of level `n0`.
    pub fn white(grid: SpectralGrid, n0: f64, convention: NoiseConvention) -> Result<Self> {
        let inputs = NoiseInputs {
            grid,
            n0,
            distortion_psd: 0.0,
            dse_psd: 0.0,
            rsm: RsmModel::disabled(),
            p_sig_ref: 0.0,
            phase_noise: PhaseNoiseModel::zero(1.0),
        };
        build_noise_psd(convention, &inputs)
    }

    /// Riemann sum of the PSD over the band, W.
    pub fn band_power(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.bin_spacing_hz()
    }

    /// The same PSD multiplied by `factor` on every bin.
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|x| x * factor).collect::<Vec<_>>();
        Self {
            grid: self.grid,
            values: s(&self.values),
            convention: self.convention,
            components: PsdComponents {
                thermal: s(&self.components.thermal),
                distortion: s(&self.components.distortion),
                dse: s(&self.components.dse),
                rsm: s(&self.components.rsm),
                phase_noise: s(&self.components.phase_noise),
            },
        }
    }
}

/// Sample the noise PSD on the grid. Each bin holds the exact cell average
/// of the continuous PSD, so the Riemann sum reproduces band powers.
pub fn build_noise_psd(convention: NoiseConvention, inputs: &NoiseInputs) -> Result<NoisePsd> {
    let grid = inputs.grid;
    for (name, v) in [("n0", inputs.n0), ("distortion_psd", inputs.distortion_psd), ("dse_psd", inputs.dse_psd), ("p_sig_ref", inputs.p_sig_ref)] {
        if !(v >= 0.0) {
            return Err(invalid(name, "PSD contributions must be >= 0"));
        }
    }
    inputs.phase_noise.validate()?;
    let n = grid.n_bins;
    let df = grid.bin_spacing_hz();
    let b = grid.bandwidth_hz;
    let mut comp = PsdComponents {
        thermal: vec![inputs.n0; n],
        distortion: vec![inputs.distortion_psd; n],
        dse: vec![inputs.dse_psd; n],
        rsm: vec![0.0; n],
        phase_noise: vec![0.0; n],
    };
    for k in 0..n {
        let (lo, hi) = grid.cell(k);
        comp.rsm[k] = inputs.rsm.band_power(lo, hi, inputs.p_sig_ref, b) / df;
        if convention == NoiseConvention::Sense {
            comp.phase_noise[k] = inputs.p_sig_ref * inputs.phase_noise.band_power(lo, hi) / df;
        }
    }
    let values: Vec<f64> = (0..n)
        .map(|k| comp.thermal[k] + comp.distortion[k] + comp.dse[k] + comp.rsm[k] + comp.phase_noise[k])
        .collect();
    if let Some((bin, &value)) = values.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositivePsd { bin, value });
    }
    Ok(NoisePsd { grid, values, convention, components: comp })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric_and_tiles_band() {
        let g = SpectralGrid::new(8, 8.0).unwrap();
        assert_eq!(g.frequencies(), vec![-3.5, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5]);
        assert_eq!(g.cell(0).0, -4.0);
        assert_eq!(g.cell(7).1, 4.0);
    }

    #[test]
    fn transform_matches_definition() {
        let g = SpectralGrid::new(6, 3.0).unwrap();
        let x: Vec<Complex64> = (0..6).map(|n| Complex64::new(n as f64, 1.0 - n as f64 * 0.3)).collect();
        let fast = g.to_frequency(&x);
        for k in 0..6 {
            let fk = g.frequency(k);
            let slow: Complex64 = (0..6)
                .map(|n| x[n] * Complex64::from_polar(1.0, -2.0 * PI * fk * n as f64 * g.sample_interval_s()))
                .sum();
            assert!((fast[k] - slow).norm() < 1e-12);
        }
        let back = g.to_time(&fast);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn budget_components() {
        assert!((gamma_adc(6) / 1.629e-4 - 1.0).abs() < 1e-3);
        assert!((gamma_adc(7) / 4.074e-5 - 1.0).abs() < 1e-3);
        assert!((gamma_lo(50e-15, 5e9) / 2.467e-6 - 1.0).abs() < 1e-3);
        assert!((gamma_iq(20.0) - 0.01).abs() < 1e-15);
        assert!((gamma_iq(30.0) - 1e-3).abs() < 1e-15);
        assert_eq!(gamma_lo(0.0, 5e9), 0.0);
    }

    #[test]
    fn high_pass_corner() {
        let m = PhaseNoiseModel { psd_kind: PsdKind::PowerLaw, k2: 3.0, k3: 2e7, floor: 1e-12, loop_bw_hz: 1e7, f_min_hz: 1.0 };
        let f = m.loop_bw_hz;
        assert!((s_phi_res(f, &m) - 0.5 * m.s_total(f)).abs() < 1e-15 * m.s_total(f));
        let k2only = PhaseNoiseModel { k3: 0.0, floor: 0.0, k2: 1.0, f_min_hz: 0.0, ..m };
        assert!((s_phi_res(1e-6, &k2only) * 1e14 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn calibrated_default_hits_target() {
        let g = SpectralGrid::new(2048, 20e9).unwrap();
        let m = PhaseNoiseModel::calibrated(0.01, 20e9, 10e6);
        assert!((sigma_phi_res_var(&m, &g).unwrap() - 0.01).abs() < 1e-12);
        assert!((m.band_power(-10e9, 10e9) - 0.01).abs() < 1e-14);
    }

    #[test]
    fn rsm_normalization_and_peak() {
        let m = RsmModel { symbol_rate_hz: 2e9, total_power_ratio: 1e-3, line_width_hz: 5e7, n_harmonics: 3 };
        let q = Quad::default();
        let breaks = m.in_band_centres(20e9);
        let v = q.integrate(|f| s_rsm(f, &m, 5.0, 20e9), -10e9, 10e9, &breaks).unwrap();
        assert!((v / 5e-3 - 1.0).abs() < 1e-6);
        let one = RsmModel { n_harmonics: 1, ..m };
        assert!(s_rsm(2e9, &one, 1.0, 20e9) > s_rsm(2e9 + 1e6, &one, 1.0, 20e9));
        assert!(s_rsm(2e9, &one, 1.0, 20e9) > s_rsm(2e9 - 1e6, &one, 1.0, 20e9));
        assert_eq!(s_rsm(0.0, &RsmModel::disabled(), 1.0, 20e9), 0.0);
    }
}
