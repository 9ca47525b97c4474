//! Delay-estimation Fisher information under coloured noise.
//!
//! Two routes share the same sampled spectra. The Whittle route sums
//! `8 pi^2 f^2 |S(f)|^2 / N(f)` over the grid. The exact route builds the time
//! samples and the Toeplitz noise covariance, then solves against it; with
//! Doppler enabled the signal also carries the wideband time compression
//! `tau(t) = tau - (f_D / f_c) t`, measured from the start of the window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::model::{amplitude_profile, ArrayConfig, HardwareProfile};
use crate::noise::{NoiseConvention, NoisePsd, SpectralGrid};
use crate::toeplitz::{cholesky_solve, levinson_solve};
use crate::units::SPEED_OF_LIGHT;

/// Largest grid accepted by [`exact_time_fim`].
pub const MAX_EXACT_BINS: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingSignalSpec {
    pub grid: SpectralGrid,
    /// `|S(f_k)|` per bin; `sum |S|^2 df = energy`.
    pub amplitude: Vec<f64>,
    pub energy: f64,
    pub tau_s: f64,
    pub doppler_hz: f64,
    /// Carrier used for the time-compression term of the Doppler derivative.
    /// `None` keeps the narrowband phase-only model.
    pub carrier_hz: Option<f64>,
}

impl SensingSignalSpec {
    /// Spectrum shaped by the array amplitude profile and scaled to `energy`.
    pub fn from_profile(cfg: &ArrayConfig, hw: &HardwareProfile, grid: SpectralGrid, energy: f64) -> Result<Self> {
        let shape: Vec<f64> = grid.frequencies().iter().map(|&f| amplitude_profile(f, cfg, hw)).collect();
        let mut s = Self::from_shape(grid, shape, energy)?;
        s.carrier_hz = Some(cfg.carrier_hz);
        Ok(s)
    }

    /// Flat spectrum of total energy `energy`.
    pub fn flat(grid: SpectralGrid, energy: f64) -> Result<Self> {
        Self::from_shape(grid, vec![1.0; grid.n_bins], energy)
    }

    /// Arbitrary non-negative magnitude shape, rescaled to `energy`.
    pub fn from_shape(grid: SpectralGrid, shape: Vec<f64>, energy: f64) -> Result<Self> {
        if shape.len() != grid.n_bins {
            return Err(invalid("amplitude", "one value per bin is required"));
        }
        if !(energy >= 0.0) {
            return Err(invalid("energy", "must be >= 0"));
        }
        let raw: f64 = shape.iter().map(|a| a * a).sum::<f64>() * grid.bin_spacing_hz();
        let amplitude = if energy == 0.0 {
            vec![0.0; grid.n_bins]
        } else if raw > 0.0 {
            let k = (energy / raw).sqrt();
            shape.iter().map(|a| a * k).collect()
        } else {
            return Err(invalid("amplitude", "shape has no energy"));
        };
        let tau_s = 0.5 * grid.n_bins as f64 * grid.sample_interval_s();
        let mut s = Self { grid, amplitude, energy: 0.0, tau_s, doppler_hz: 0.0, carrier_hz: None };
        s.energy = s.band_energy();
        Ok(s)
    }

    pub fn band_energy(&self) -> f64 {
        self.amplitude.iter().map(|a| a * a).sum::<f64>() * self.grid.bin_spacing_hz()
    }

    /// `S(f_k) exp(-j 2 pi f_k tau)`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid
            .frequencies()
            .iter()
            .zip(&self.amplitude)
            .map(|(&f, &a)| Complex64::from_polar(a, -2.0 * PI * f * self.tau_s))
            .collect()
    }

    /// `dS/dtau = -j 2 pi f S`.
    pub fn d_spectrum_d_tau(&self) -> Vec<Complex64> {
        self.grid
            .frequencies()
            .iter()
            .zip(self.spectrum())
            .map(|(&f, s)| Complex64::new(0.0, -2.0 * PI * f) * s)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FimMethod {
    Whittle,
    ExactTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToeplitzSolver {
    #[default]
    Levinson,
    DenseCholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FimResult {
    /// `J_tau,tau`, 1/s^2.
    pub j_tau_tau: f64,
    /// Full (tau, f_D) matrix from the exact route with Doppler.
    pub fim_2x2: Option<[[f64; 2]; 2]>,
    /// Delay CRB, s^2. With Doppler this is `[F^-1]_11`.
    pub crb_tau: f64,
    pub rmse_range_m: f64,
    pub method: FimMethod,
}

impl FimResult {
    /// Information left on the delay after the Doppler nuisance is removed.
    pub fn effective_j(&self) -> f64 {
        1.0 / self.crb_tau
    }

    fn from_scalar(j: f64, method: FimMethod) -> Self {
        let crb_tau = 1.0 / j;
        Self { j_tau_tau: j, fim_2x2: None, crb_tau, rmse_range_m: rmse_range(crb_tau), method }
    }
}

/// Ranging RMSE `(c/2) sqrt(CRB)` for a two-way time transfer.
pub fn rmse_range(crb_tau: f64) -> f64 {
    0.5 * SPEED_OF_LIGHT * crb_tau.sqrt()
}

/// `2 pi^2 E B^2 / (3 N0)`.
pub fn fim_awgn_closed(energy: f64, n0: f64, bandwidth_hz: f64) -> f64 {
    2.0 * PI * PI * energy * bandwidth_hz * bandwidth_hz / (3.0 * n0)
}

pub fn rmse_awgn_closed(energy: f64, n0: f64, bandwidth_hz: f64) -> f64 {
    rmse_range(1.0 / fim_awgn_closed(energy, n0, bandwidth_hz))
}

fn check_pair(sig: &SensingSignalSpec, noise: &NoisePsd) -> Result<()> {
    if noise.convention != NoiseConvention::Sense {
        return Err(Error::ConventionMismatch { expected: "sense", found: noise.convention.name() });
    }
    if sig.grid != noise.grid {
        return Err(invalid("grid", "signal and noise must share one spectral grid"));
    }
    if let Some((bin, &value)) = noise.values.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositivePsd { bin, value });
    }
    Ok(())
}

/// Whittle delay information, `sum_k 2 |dS_k/dtau|^2 / N_k * df`.
pub fn whittle_fim_tau(sig: &SensingSignalSpec, noise: &NoisePsd) -> Result<FimResult> {
    check_pair(sig, noise)?;
    let df = sig.grid.bin_spacing_hz();
    let j: f64 = sig
        .grid
        .frequencies()
        .iter()
        .zip(&sig.amplitude)
        .zip(&noise.values)
        .map(|((&f, &a), &n)| 2.0 * (2.0 * PI * f * a).powi(2) / n)
        .sum::<f64>()
        * df;
    Ok(FimResult::from_scalar(j, FimMethod::Whittle))
}

/// `int f^2 W(f) / N(f) df` with `W = |S|^2 / (E/B)`.
pub fn weighted_moment(sig: &SensingSignalSpec, noise: &NoisePsd) -> Result<f64> {
    check_pair(sig, noise)?;
    if sig.energy <= 0.0 {
        return Ok(0.0);
    }
    let df = sig.grid.bin_spacing_hz();
    let per_hz = sig.energy / sig.grid.bandwidth_hz;
    Ok(sig
        .grid
        .frequencies()
        .iter()
        .zip(&sig.amplitude)
        .zip(&noise.values)
        .map(|((&f, &a), &n)| f * f * a * a / per_hz / n)
        .sum::<f64>()
        * df)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bcrlb {
    /// Delay bound, s^2.
    pub crb_tau_s2: f64,
    /// Range bound `(c/2)^2 crb_tau`, m^2.
    pub range_var_m2: f64,
}

impl Bcrlb {
    pub fn from_delay(crb_tau_s2: f64) -> Self {
        Self { crb_tau_s2, range_var_m2: 0.25 * SPEED_OF_LIGHT * SPEED_OF_LIGHT * crb_tau_s2 }
    }

    pub fn rmse_m(&self) -> f64 {
        self.range_var_m2.sqrt()
    }
}

/// Range bound straight from the weighted moment, `(c^2 / 32 pi^2)(B/E) / M2`.
pub fn bcrlb_from_moment(bandwidth_hz: f64, energy: f64, m2: f64) -> f64 {
    SPEED_OF_LIGHT * SPEED_OF_LIGHT / (32.0 * PI * PI) * (bandwidth_hz / energy) / m2
}

/// `[ (F_D + F_P)^-1 ]_11` for a data FIM and an optional prior FIM over (tau, f_D).
pub fn bcrlb_from_fim(data: [[f64; 2]; 2], prior: Option<[[f64; 2]; 2]>) -> Result<Bcrlb> {
    let p = prior.unwrap_or([[0.0; 2]; 2]);
    let f = [[data[0][0] + p[0][0], data[0][1] + p[0][1]], [data[1][0] + p[1][0], data[1][1] + p[1][1]]];
    if f[1][1] == 0.0 && f[0][1] == 0.0 && f[1][0] == 0.0 {
        // No Doppler information at all: the delay block stands alone.
        if !(f[0][0] > 0.0) {
            return Err(Error::SingularFim);
        }
        return Ok(Bcrlb::from_delay(1.0 / f[0][0]));
    }
    let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
    if !(det > 0.0) || !(f[1][1] > 0.0) {
        return Err(Error::SingularFim);
    }
    Ok(Bcrlb::from_delay(f[1][1] / det))
}

/// Bayesian bound from the Whittle information, optionally with a prior.
pub fn bcrlb(sig: &SensingSignalSpec, noise: &NoisePsd, prior_precision: Option<[[f64; 2]; 2]>) -> Result<Bcrlb> {
    let m2 = weighted_moment(sig, noise)?;
    if !(m2 > 0.0) {
        return Err(Error::SingularFim);
    }
    match prior_precision {
        None => {
            let range_var_m2 = bcrlb_from_moment(sig.grid.bandwidth_hz, sig.energy, m2);
            let crb_tau_s2 = range_var_m2 / (0.25 * SPEED_OF_LIGHT * SPEED_OF_LIGHT);
            Ok(Bcrlb { crb_tau_s2, range_var_m2 })
        }
        Some(p) => {
            let j = 8.0 * PI * PI * sig.energy / sig.grid.bandwidth_hz * m2;
            bcrlb_from_fim([[j, 0.0], [0.0, 0.0]], Some(p))
        }
    }
}

/// Exact Gaussian FIM from the time samples and the Toeplitz noise covariance.
pub fn exact_time_fim(sig: &SensingSignalSpec, noise: &NoisePsd, include_doppler: bool) -> Result<FimResult> {
    exact_time_fim_with(sig, noise, include_doppler, ToeplitzSolver::Levinson)
}

pub fn exact_time_fim_with(
    sig: &SensingSignalSpec,
    noise: &NoisePsd,
    include_doppler: bool,
    solver: ToeplitzSolver,
) -> Result<FimResult> {
    check_pair(sig, noise)?;
    let grid = sig.grid;
    let n = grid.n_bins;
    if n > MAX_EXACT_BINS {
        return Err(Error::GridTooLarge { n, max: MAX_EXACT_BINS });
    }
    let b = grid.bandwidth_hz;
    let ts = grid.sample_interval_s();

    // r[l] = sum_k N_k df exp(j 2 pi f_k l Ts)
    let psd: Vec<Complex64> = noise.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let r: Vec<Complex64> = grid.to_time(&psd).into_iter().map(|v| v * b).collect();

    let scale = |v: Vec<Complex64>| v.into_iter().map(|z| z * b).collect::<Vec<_>>();
    let rot = |n: usize| Complex64::from_polar(1.0, 2.0 * PI * sig.doppler_hz * n as f64 * ts);
    let x: Vec<Complex64> = scale(grid.to_time(&sig.spectrum())).into_iter().enumerate().map(|(i, v)| v * rot(i)).collect();
    let d_tau: Vec<Complex64> =
        scale(grid.to_time(&sig.d_spectrum_d_tau())).into_iter().enumerate().map(|(i, v)| v * rot(i)).collect();

    let mut rhs = vec![d_tau.clone()];
    if include_doppler {
        let compression = sig.carrier_hz.map_or(0.0, |fc| 1.0 / fc);
        let d_dop: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = i as f64 * ts;
                // d/dt of the delayed signal is -d/dtau.
                Complex64::new(0.0, 2.0 * PI * t) * x[i] - d_tau[i] * (t * compression)
            })
            .collect();
        rhs.push(d_dop);
    }
    let solved = match solver {
        ToeplitzSolver::Levinson => levinson_solve(&r, &rhs)?,
        ToeplitzSolver::DenseCholesky => cholesky_solve(&r, &rhs)?,
    };
    let inner = |a: &[Complex64], y: &[Complex64]| -> f64 {
        2.0 * a.iter().zip(y).map(|(u, v)| u.conj() * v).sum::<Complex64>().re
    };
    let j = inner(&rhs[0], &solved[0]);
    if !include_doppler {
        return Ok(FimResult::from_scalar(j, FimMethod::ExactTime));
    }
    let j_td = 0.5 * (inner(&rhs[0], &solved[1]) + inner(&rhs[1], &solved[0]));
    let j_dd = inner(&rhs[1], &solved[1]);
    let fim = [[j, j_td], [j_td, j_dd]];
    let crb_tau = bcrlb_from_fim(fim, None)?.crb_tau_s2;
    Ok(FimResult { j_tau_tau: j, fim_2x2: Some(fim), crb_tau, rmse_range_m: rmse_range(crb_tau), method: FimMethod::ExactTime })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert!((fim_awgn_closed(1.0, 1.0, 1.0) - 6.579736267392906).abs() < 1e-12);
        assert!((fim_awgn_closed(10.0, 1.0, 2e10) / 2.632e22 - 1.0).abs() < 1e-3);
        assert_eq!(rmse_range(0.0), 0.0);
        let c = SPEED_OF_LIGHT;
        assert!((rmse_range(4.0 / (c * c)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn comm_psd_is_rejected() {
        let g = SpectralGrid::new(64, 1e9).unwrap();
        let sig = SensingSignalSpec::flat(g, 1.0).unwrap();
        let noise = NoisePsd::white(g, 1.0, NoiseConvention::Comm).unwrap();
        assert!(matches!(whittle_fim_tau(&sig, &noise), Err(Error::ConventionMismatch { .. })));
        assert!(matches!(exact_time_fim(&sig, &noise, false), Err(Error::ConventionMismatch { .. })));
    }

    #[test]
    fn zero_energy_gives_zero_information() {
        let g = SpectralGrid::new(64, 1e9).unwrap();
        let sig = SensingSignalSpec::flat(g, 0.0).unwrap();
        let noise = NoisePsd::white(g, 1.0, NoiseConvention::Sense).unwrap();
        assert_eq!(whittle_fim_tau(&sig, &noise).unwrap().j_tau_tau, 0.0);
    }

    #[test]
    fn moment_of_white_flat() {
        let g = SpectralGrid::new(4096, 2.0).unwrap();
        let sig = SensingSignalSpec::flat(g, 3.0).unwrap();
        let noise = NoisePsd::white(g, 0.5, NoiseConvention::Sense).unwrap();
        let m2 = weighted_moment(&sig, &noise).unwrap();
        assert!((m2 / (8.0 / 12.0 / 0.5) - 1.0).abs() < 1e-6);
    }
}
