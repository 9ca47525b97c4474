//! Spectral efficiency under hardware distortion.
//!
//! All quantities are Gaussian-input capacity surrogates under the
//! effective-SINR model: the distortion and residual phase noise are treated
//! as additive Gaussian terms once their powers are fixed.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{eta_bsq, squint_nulls, ArrayConfig, GainBreakdown};
use crate::noise::{s_rsm, DistortionBudget, RsmModel};
use crate::quad::Quad;

/// How the hardware distortion scales with the array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionMode {
    /// Distortion is radiated through the same beam as the signal, so the
    /// signal-to-distortion ratio does not depend on the array size.
    #[default]
    Directional,
    /// Distortion is spatially white and collects no array gain.
    Uncorrelated,
}

/// One link state. Powers are normalized to `N0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkOperatingPoint {
    /// `P_tx / (N0 B)` with path loss folded in, linear.
    pub snr0: f64,
    pub gain: GainBreakdown,
    pub budget: DistortionBudget,
    /// Residual tracked phase variance, rad^2.
    pub sigma_phi_res: f64,
    /// Kinematic mismatch noise relative to `N0` (dimensionless).
    pub sigma_dse_phase: f64,
    pub rsm: RsmModel,
    pub distortion_mode: DistortionMode,
}

impl LinkOperatingPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.snr0 > 0.0) {
            return Err(invalid("snr0", "must be > 0"));
        }
        if !(self.sigma_phi_res >= 0.0 && self.sigma_dse_phase >= 0.0) {
            return Err(invalid("sigma", "variances must be >= 0"));
        }
        Ok(())
    }

    pub fn with_snr0(mut self, snr0: f64) -> Self {
        self.snr0 = snr0;
        self
    }

    /// Received signal power after combining, in units of `N0`.
    pub fn p_sig_ref(&self, cfg: &ArrayConfig) -> f64 {
        self.snr0 * cfg.bandwidth_hz * self.gain.g_sig_avg
    }

    fn distortion_gain(&self) -> f64 {
        match self.distortion_mode {
            DistortionMode::Directional => self.gain.g_ideal,
            DistortionMode::Uncorrelated => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub c_exact: f64,
    pub c_jensen: f64,
    pub jensen_gap: f64,
    /// Infinite when the distortion budget is zero.
    pub c_sat: f64,
    pub snr_crit: f64,
}

/// SINR at baseband offset `f_offset_hz`.
pub fn sinr_at(f_offset_hz: f64, op: &LinkOperatingPoint, cfg: &ArrayConfig) -> f64 {
    let shaped = op.snr0 * eta_bsq(f_offset_hz, cfg) * op.gain.rho_static();
    let num = shaped * op.gain.g_ideal * (-op.sigma_phi_res).exp();
    let dist = shaped * op.distortion_gain() * op.budget.effective();
    let rsm = s_rsm(f_offset_hz, &op.rsm, op.p_sig_ref(cfg), cfg.bandwidth_hz);
    num / (1.0 + dist + op.sigma_dse_phase + rsm)
}

fn breakpoints(op: &LinkOperatingPoint, cfg: &ArrayConfig) -> Vec<f64> {
    let mut b: Vec<f64> = squint_nulls(cfg).into_iter().filter(|&f| f > 0.0).collect();
    let w = op.rsm.line_width_hz;
    for c in op.rsm.in_band_centres(cfg.bandwidth_hz).into_iter().filter(|&c| c > 0.0) {
        b.extend([c - 4.0 * w, c, c + 4.0 * w]);
    }
    b
}

/// Band average of `g(SINR(f))` over the (symmetric) band.
fn band_mean<G: Fn(f64) -> f64>(op: &LinkOperatingPoint, cfg: &ArrayConfig, rel_tol: f64, g: G) -> Result<f64> {
    let half = 0.5 * cfg.bandwidth_hz;
    let q = Quad { rel_tol, abs_tol: 1e-14, max_panels: 20_000 };
    let v = q.integrate(|f| g(sinr_at(f, op, cfg)), 0.0, half, &breakpoints(op, cfg))?;
    Ok(v / half)
}

/// Exact spectral efficiency `B^-1 int log2(1 + SINR(f)) df`.
pub fn c_exact(op: &LinkOperatingPoint, cfg: &ArrayConfig) -> Result<f64> {
    op.validate()?;
    band_mean(op, cfg, 1e-8, |s| s.ln_1p()).map(|v| v / std::f64::consts::LN_2)
}

/// Band-averaged effective SINR used by the Jensen expression.
pub fn sinr_avg_eff(op: &LinkOperatingPoint) -> f64 {
    let g = op.gain.g_sig_avg;
    let dist_gain = g * op.distortion_gain() / op.gain.g_ideal;
    let rsm_avg = if op.rsm.is_active() { op.rsm.total_power_ratio * op.snr0 * g } else { 0.0 };
    op.snr0 * g * (-op.sigma_phi_res).exp()
        / (1.0 + op.snr0 * dist_gain * op.budget.effective() + op.sigma_dse_phase + rsm_avg)
}

/// `log2(1 + SINR_avg,eff)`.
pub fn c_jensen(op: &LinkOperatingPoint, _cfg: &ArrayConfig) -> Result<f64> {
    op.validate()?;
    Ok(sinr_avg_eff(op).ln_1p() / std::f64::consts::LN_2)
}

/// Second-order estimate `Var[SINR] / (2 (1 + E[SINR])^2 ln 2)` of the gap.
/// A qualitative scaling aid only.
pub fn jensen_gap_taylor(op: &LinkOperatingPoint, cfg: &ArrayConfig) -> Result<f64> {
    op.validate()?;
    let mean = band_mean(op, cfg, 1e-9, |s| s)?;
    let second = band_mean(op, cfg, 1e-9, |s| s * s)?;
    let var = (second - mean * mean).max(0.0);
    Ok(var / (2.0 * (1.0 + mean).powi(2) * std::f64::consts::LN_2))
}

/// Saturation ceiling `log2(1 + e^{-sigma^2} / Gamma)`.
pub fn c_sat(budget: &DistortionBudget, sigma_phi_res: f64) -> Result<f64> {
    let g = budget.effective();
    if g <= 0.0 {
        return Err(Error::ZeroDistortion);
    }
    Ok((1.0 + (-sigma_phi_res).exp() / g).log2())
}

/// SNR at which distortion and thermal noise contribute equally.
///
/// The uncorrelated value `1/(G_sig,avg Gamma)` is referred to the per-element
/// input SNR. The directional value `1/(rho_static eta_avg Gamma)` has the
/// ideal array gain divided out and is referred to the post-combining SNR
/// `SNR0 * G_ideal`; it does not change with the array size.
pub fn snr_crit(gain: &GainBreakdown, budget: &DistortionBudget, mode: DistortionMode) -> Result<f64> {
    let g = budget.effective();
    if g <= 0.0 {
        return Err(Error::ZeroDistortion);
    }
    if !(gain.g_sig_avg > 0.0) {
        return Err(invalid("g_sig_avg", "must be > 0"));
    }
    Ok(match mode {
        DistortionMode::Uncorrelated => 1.0 / (gain.g_sig_avg * g),
        DistortionMode::Directional => 1.0 / (gain.rho_static() * gain.eta_bsq_avg * g),
    })
}

/// All capacity figures of one operating point. `snr_crit` is the input-referred
/// crossover `1/(G_sig,avg Gamma)`.
pub fn evaluate(op: &LinkOperatingPoint, cfg: &ArrayConfig) -> Result<CapacityResult> {
    let c_exact = c_exact(op, cfg)?;
    let c_jensen = c_jensen(op, cfg)?;
    let (c_sat, snr_crit) = match c_sat(&op.budget, op.sigma_phi_res) {
        Ok(c) => (c, snr_crit(&op.gain, &op.budget, DistortionMode::Uncorrelated)?),
        Err(Error::ZeroDistortion) => (f64::INFINITY, f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(CapacityResult { c_exact, c_jensen, jensen_gap: c_jensen - c_exact, c_sat, snr_crit })
}
