//! Link geometry, hardware impairment magnitudes and the multiplicative gain
//! cascade that turns the ideal array gain `N_t N_r` into the band-averaged
//! signal gain.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quad::Quad;
use crate::units::{sinc, wavelength};

/// Uniform linear arrays at both ends of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub n_tx: u32,
    pub n_rx: u32,
    /// Element spacing in carrier wavelengths.
    pub spacing_wavelengths: f64,
    /// Steering angle from broadside, rad.
    pub steer_angle_rad: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub range_m: f64,
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(invalid("n_tx/n_rx", "element counts must be positive"));
        }
        if !(self.spacing_wavelengths > 0.0) {
            return Err(invalid("spacing_wavelengths", "must be > 0"));
        }
        if !(self.steer_angle_rad.abs() < PI / 2.0) {
            return Err(invalid("steer_angle_rad", "must lie in (-pi/2, pi/2)"));
        }
        if !(self.carrier_hz > 0.0) || !(self.bandwidth_hz > 0.0) {
            return Err(invalid("carrier_hz/bandwidth_hz", "must be > 0"));
        }
        if self.bandwidth_hz > self.carrier_hz {
            return Err(invalid("bandwidth_hz", "fractional bandwidth must stay below 1"));
        }
        if !(self.range_m > 0.0) {
            return Err(invalid("range_m", "must be > 0"));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        wavelength(self.carrier_hz)
    }

    pub fn aperture_tx_wavelengths(&self) -> f64 {
        f64::from(self.n_tx) * self.spacing_wavelengths
    }

    pub fn aperture_rx_wavelengths(&self) -> f64 {
        f64::from(self.n_rx) * self.spacing_wavelengths
    }

    /// Aperture used for squint and pointing loss: the larger of the two ends.
    pub fn active_aperture_wavelengths(&self) -> f64 {
        self.aperture_tx_wavelengths().max(self.aperture_rx_wavelengths())
    }

    pub fn fractional_bandwidth(&self) -> f64 {
        self.bandwidth_hz / self.carrier_hz
    }

    pub fn g_ideal(&self) -> f64 {
        f64::from(self.n_tx) * f64::from(self.n_rx)
    }

    /// Fraunhofer distance `2 L^2 / lambda` of the active aperture.
    pub fn far_field_distance_m(&self) -> f64 {
        let lam = self.wavelength_m();
        let l = self.active_aperture_wavelengths() * lam;
        2.0 * l * l / lam
    }

    pub fn is_far_field(&self) -> bool {
        self.range_m >= self.far_field_distance_m()
    }
}

/// Magnitudes of every hardware impairment in the transceiver chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareProfile {
    /// PA distortion-to-signal ratio (linear).
    pub gamma_pa: f64,
    pub adc_bits: u32,
    /// Image rejection ratio, dB.
    pub irr_db: f64,
    /// Phase-shifter resolution.
    pub ps_bits: u32,
    /// RMS sampling-clock jitter, s.
    pub jitter_s: f64,
    /// RMS per-element amplitude error (linear, relative).
    pub amp_err_rms: f64,
    /// RMS pointing error, rad.
    pub point_err_rad: f64,
    pub rel_pn_var_tx: f64,
    pub rel_pn_var_rx: f64,
    /// Differential LO timing jitter between the two ends, s.
    pub diff_jitter_s: f64,
    /// Loop-noise enhancement factor of the tracking PLL (>= 1).
    pub loop_loss: f64,
}

impl HardwareProfile {
    /// A transceiver with no impairments. ADC and phase-shifter resolutions are
    /// set high enough that their losses vanish at double precision; the IRR
    /// is 300 dB.
    pub fn ideal() -> Self {
        Self {
            gamma_pa: 0.0,
            adc_bits: 64,
            irr_db: 300.0,
            ps_bits: 30,
            jitter_s: 0.0,
            amp_err_rms: 0.0,
            point_err_rad: 0.0,
            rel_pn_var_tx: 0.0,
            rel_pn_var_rx: 0.0,
            diff_jitter_s: 0.0,
            loop_loss: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("gamma_pa", self.gamma_pa),
            ("jitter_s", self.jitter_s),
            ("amp_err_rms", self.amp_err_rms),
            ("point_err_rad", self.point_err_rad),
            ("rel_pn_var_tx", self.rel_pn_var_tx),
            ("rel_pn_var_rx", self.rel_pn_var_rx),
            ("diff_jitter_s", self.diff_jitter_s),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(invalid(name, "must be >= 0"));
            }
        }
        if self.adc_bits == 0 || self.ps_bits == 0 {
            return Err(invalid("adc_bits/ps_bits", "must be >= 1"));
        }
        if !(self.irr_db > 0.0) {
            return Err(invalid("irr_db", "must be > 0"));
        }
        if !(self.loop_loss >= 1.0) {
            return Err(invalid("loop_loss", "must be >= 1"));
        }
        Ok(())
    }
}

/// Factor-by-factor decomposition of the average signal gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainBreakdown {
    pub g_ideal: f64,
    pub eta_bsq_avg: f64,
    pub rho_q: f64,
    pub rho_ape: f64,
    pub rho_a: f64,
    pub rho_pn: f64,
    pub g_sig_avg: f64,
}

impl GainBreakdown {
    pub fn from_factors(g_ideal: f64, eta_bsq_avg: f64, rho_q: f64, rho_ape: f64, rho_a: f64, rho_pn: f64) -> Self {
        let g_sig_avg = g_ideal * eta_bsq_avg * rho_q * rho_ape * rho_a * rho_pn;
        Self { g_ideal, eta_bsq_avg, rho_q, rho_ape, rho_a, rho_pn, g_sig_avg }
    }

    /// Frequency-flat part of the loss, `rho_Q rho_APE rho_A rho_PN`.
    pub fn rho_static(&self) -> f64 {
        self.rho_q * self.rho_ape * self.rho_a * self.rho_pn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaMethod {
    Numeric,
    Taylor,
}

/// Space-bandwidth product `(L/lambda)(B/f_c)|sin theta|`.
pub fn kappa(cfg: &ArrayConfig) -> f64 {
    cfg.active_aperture_wavelengths() * cfg.fractional_bandwidth() * cfg.steer_angle_rad.sin().abs()
}

fn squint_arg(f_offset_hz: f64, cfg: &ArrayConfig) -> f64 {
    PI * cfg.active_aperture_wavelengths() * cfg.steer_angle_rad.sin() * f_offset_hz / cfg.carrier_hz
}

/// Beam-squint power loss at baseband offset `f_offset_hz`.
pub fn eta_bsq(f_offset_hz: f64, cfg: &ArrayConfig) -> f64 {
    sinc(squint_arg(f_offset_hz, cfg)).powi(4)
}

/// Offsets inside `[-B/2, B/2]` where the squint loss has a null.
pub fn squint_nulls(cfg: &ArrayConfig) -> Vec<f64> {
    let per_null = cfg.active_aperture_wavelengths() * cfg.steer_angle_rad.sin().abs() / cfg.carrier_hz;
    if per_null == 0.0 {
        return Vec::new();
    }
    let spacing = 1.0 / per_null;
    let half = 0.5 * cfg.bandwidth_hz;
    let mut out = Vec::new();
    let mut m = 1.0;
    while m * spacing < half {
        out.push(-m * spacing);
        out.push(m * spacing);
        m += 1.0;
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Band average of [`eta_bsq`].
pub fn eta_bsq_avg(cfg: &ArrayConfig, method: EtaMethod) -> Result<f64> {
    match method {
        EtaMethod::Taylor => {
            let k = kappa(cfg);
            if k > 0.5 {
                return Err(Error::TaylorOutOfRange { kappa: k });
            }
            let a = cfg.active_aperture_wavelengths() * cfg.steer_angle_rad.sin();
            Ok(1.0 - PI * PI / 18.0 * a * a * cfg.fractional_bandwidth().powi(2))
        }
        EtaMethod::Numeric => {
            if kappa(cfg) == 0.0 {
                return Ok(1.0);
            }
            let half = 0.5 * cfg.bandwidth_hz;
            let breaks: Vec<f64> = squint_nulls(cfg).into_iter().filter(|&f| f > 0.0).collect();
            let v = Quad::default().integrate(|f| eta_bsq(f, cfg), 0.0, half, &breaks)?;
            Ok(v / half)
        }
    }
}

pub fn rho_q(ps_bits: u32) -> f64 {
    sinc(PI / 2f64.powi(ps_bits.min(1000) as i32)).powi(2)
}

pub fn rho_ape(cfg: &ArrayConfig, point_err_rad: f64) -> f64 {
    let l = cfg.active_aperture_wavelengths() * cfg.steer_angle_rad.cos();
    (-(PI * PI / 3.0) * l * l * point_err_rad * point_err_rad).exp()
}

pub fn rho_a(amp_err_rms: f64) -> f64 {
    if amp_err_rms > 0.3 {
        log::warn!("amplitude error {amp_err_rms} is outside the small-error regime of the exp(-sigma^2) loss");
    }
    (-amp_err_rms * amp_err_rms).exp()
}

/// Relative (tx-rx) phase variance of the LO chain, rad^2.
pub fn rel_phase_var(hw: &HardwareProfile, carrier_hz: f64) -> f64 {
    let jit = 2.0 * PI * carrier_hz * hw.diff_jitter_s;
    hw.rel_pn_var_tx + hw.rel_pn_var_rx + jit * jit
}

pub fn rho_pn(hw: &HardwareProfile, carrier_hz: f64) -> f64 {
    (-rel_phase_var(hw, carrier_hz)).exp()
}

pub fn gain_breakdown(cfg: &ArrayConfig, hw: &HardwareProfile) -> Result<GainBreakdown> {
    cfg.validate()?;
    hw.validate()?;
    if !cfg.is_far_field() {
        log::warn!(
            "range {:.3e} m is inside the far-field distance {:.3e} m",
            cfg.range_m,
            cfg.far_field_distance_m()
        );
    }
    Ok(GainBreakdown::from_factors(
        cfg.g_ideal(),
        eta_bsq_avg(cfg, EtaMethod::Numeric)?,
        rho_q(hw.ps_bits),
        rho_ape(cfg, hw.point_err_rad),
        rho_a(hw.amp_err_rms),
        rho_pn(hw, cfg.carrier_hz),
    ))
}

/// Magnitude of the received sensing spectrum at `f_offset_hz`, before the
/// energy scaling. The residual tracked phase-noise loss is not part of it.
pub fn amplitude_profile(f_offset_hz: f64, cfg: &ArrayConfig, hw: &HardwareProfile) -> f64 {
    let rho_static = rho_q(hw.ps_bits) * rho_ape(cfg, hw.point_err_rad) * rho_a(hw.amp_err_rms) * rho_pn(hw, cfg.carrier_hz);
    (cfg.g_ideal() * rho_static * eta_bsq(f_offset_hz, cfg)).sqrt()
}

/// Free-space path loss `(4 pi R / lambda)^2`.
pub fn path_loss(cfg: &ArrayConfig) -> f64 {
    (4.0 * PI * cfg.range_m / cfg.wavelength_m()).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(l_over_lambda: f64, b_over_fc: f64, theta_deg: f64) -> ArrayConfig {
        let n = 16;
        ArrayConfig {
            n_tx: n,
            n_rx: n,
            spacing_wavelengths: l_over_lambda / f64::from(n),
            steer_angle_rad: theta_deg.to_radians(),
            carrier_hz: 140e9,
            bandwidth_hz: b_over_fc * 140e9,
            range_m: 1e6,
        }
    }

    #[test]
    fn kappa_examples() {
        assert!((kappa(&cfg(50.0, 0.067, 30.0)) - 1.675).abs() < 1e-12);
        assert_eq!(kappa(&cfg(50.0, 0.067, 0.0)), 0.0);
        assert!((kappa(&cfg(32.0, 20.0 / 140.0, 30.0)) - 2.2857142857).abs() < 1e-9);
    }

    #[test]
    fn eta_at_centre_and_null() {
        let c = cfg(10.0, 0.1, 30.0);
        assert_eq!(eta_bsq(0.0, &c), 1.0);
        let null = squint_nulls(&cfg(32.0, 0.15, 30.0))[0].abs();
        assert!(eta_bsq(null, &cfg(32.0, 0.15, 30.0)) < 1e-30);
        // sinc^4(0.1 pi) from its power series
        let x: f64 = 0.1 * PI;
        let series: f64 = (0..12).map(|k| (-x * x).powi(k) / (1..=2 * k + 1).map(|j| j as f64).product::<f64>()).sum();
        assert!((eta_bsq(0.02 * 140e9, &c) - series.powi(4)).abs() < 1e-14);
        assert!((series.powi(4) - 0.9361).abs() < 1e-4);
    }

    #[test]
    fn taylor_gate() {
        let e = eta_bsq_avg(&cfg(32.0, 0.143, 30.0), EtaMethod::Taylor).unwrap_err();
        assert!(matches!(e, Error::TaylorOutOfRange { .. }));
        let t = eta_bsq_avg(&cfg(10.0, 0.02, 30.0), EtaMethod::Taylor).unwrap();
        assert!((t - (1.0 - PI * PI / 18.0 * 25.0 * 4e-4)).abs() < 1e-12);
        let n = eta_bsq_avg(&cfg(10.0, 0.02, 30.0), EtaMethod::Numeric).unwrap();
        assert!((t - n).abs() < 1e-3);
    }

    #[test]
    fn static_factors() {
        assert!((rho_q(4) - 0.98722).abs() < 1e-5);
        assert!((rho_q(2) - 0.81057).abs() < 1e-5);
        assert!((rho_q(30) - 1.0).abs() < 1e-12);
        assert!((rho_a(0.1) - 0.99005).abs() < 1e-5);
        assert!((rho_a(0.2) - 0.96079).abs() < 1e-5);
        let c = cfg(1000.0, 0.1, 30.0);
        assert!((rho_ape(&c, 5e-4) - 0.5396).abs() < 1e-4);
        assert!((rho_ape(&cfg(32.0, 0.1, 30.0), 1e-4) - 0.9999747).abs() < 1e-7);
    }

    #[test]
    fn path_loss_reference() {
        let mut c = cfg(32.0, 0.1, 30.0);
        c.range_m = c.wavelength_m() / (4.0 * PI);
        assert!((path_loss(&c) - 1.0).abs() < 1e-12);
        c.range_m = 1e6;
        assert!((path_loss(&c) / 3.444e19 - 1.0).abs() < 1e-3);
    }
}
