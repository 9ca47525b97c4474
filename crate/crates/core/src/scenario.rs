//! Complete link scenarios and the hardware tiers used throughout the
//! experiments.
//!
//! Powers are normalized to `N0 = 1` unless `link.n0` says otherwise, and the
//! path loss is folded into `snr0`.

use serde::{Deserialize, Serialize};

use crate::capacity::{c_exact, c_jensen, c_sat, snr_crit, DistortionMode, LinkOperatingPoint};
use crate::error::{invalid, Result};
use crate::model::{gain_breakdown, ArrayConfig, GainBreakdown, HardwareProfile};
use crate::noise::{
    build_noise_psd, distortion_budget, sigma_phi_res_var, DistortionBudget, NoiseConvention, NoiseInputs, NoisePsd,
    PhaseNoiseModel, RsmModel, SpectralGrid,
};
use crate::sensing::SensingSignalSpec;
use crate::tradeoff::{map_points, sigma_dse_var, sigma_pn_var, AlphaBase, ResourceModel};
use crate::units::{db_to_lin, lin_to_db};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Baseline,
    LowCost,
    Ideal,
    Custom,
}

impl Tier {
    pub fn parse(s: &str) -> Option<Self> {
        match s.replace('-', "_").as_str() {
            "baseline" => Some(Tier::Baseline),
            "low_cost" => Some(Tier::LowCost),
            "ideal" => Some(Tier::Ideal),
            "custom" => Some(Tier::Custom),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::Baseline => "baseline",
            Tier::LowCost => "low_cost",
            Tier::Ideal => "ideal",
            Tier::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Replaces the summed distortion budget.
    #[serde(default)]
    pub gamma_total: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSettings {
    pub snr0_db: f64,
    pub n0: f64,
    /// Effective signal frequency for the jitter term; `None` means `B/4`.
    #[serde(default)]
    pub f_eff_hz: Option<f64>,
    pub distortion_mode: DistortionMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingSettings {
    pub n_bins: usize,
    /// Integration time of the ranging measurement, s.
    pub observation_s: f64,
}

/// Which additive terms enter the sensing PSD.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseToggles {
    pub hardware: bool,
    pub phase_noise: bool,
    pub dse: bool,
}

impl NoiseToggles {
    pub const ALL: Self = Self { hardware: true, phase_noise: true, dse: true };
    pub const THERMAL: Self = Self { hardware: false, phase_noise: false, dse: false };

    /// Thermal, then hardware, then phase noise, then kinematic mismatch.
    pub fn cumulative() -> [Self; 4] {
        [
            Self::THERMAL,
            Self { hardware: true, ..Self::THERMAL },
            Self { hardware: true, phase_noise: true, dse: false },
            Self::ALL,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub tier: Tier,
    pub array: ArrayConfig,
    pub hardware: HardwareProfile,
    pub tracking: PhaseNoiseModel,
    pub resource: ResourceModel,
    pub rsm: RsmModel,
    #[serde(default)]
    pub overrides: Overrides,
    pub link: LinkSettings,
    pub sensing: SensingSettings,
}

/// One row of a capacity sweep. `snr_crit_db` is the input-referred
/// transition `1 / (G_sig,avg Gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr0_db: f64,
    pub c_exact: f64,
    pub c_jensen: f64,
    pub gap: f64,
    pub c_sat: f64,
    pub snr_crit_db: f64,
}

/// Observation time that puts the baseline ranging RMSE near 2.6 um at
/// `alpha = 0.1`.
pub const DEFAULT_OBSERVATION_S: f64 = 7.7e-6;

pub fn table_array() -> ArrayConfig {
    ArrayConfig {
        n_tx: 64,
        n_rx: 64,
        spacing_wavelengths: 0.5,
        steer_angle_rad: 30f64.to_radians(),
        carrier_hz: 140e9,
        bandwidth_hz: 20e9,
        range_m: 1.0e6,
    }
}

pub fn baseline_hardware() -> HardwareProfile {
    HardwareProfile {
        gamma_pa: db_to_lin(-22.0),
        adc_bits: 7,
        irr_db: 20.0,
        ps_bits: 4,
        jitter_s: 50e-15,
        amp_err_rms: 0.1,
        point_err_rad: 1e-4,
        rel_pn_var_tx: 0.0,
        rel_pn_var_rx: 0.0,
        diff_jitter_s: 50e-15,
        loop_loss: db_to_lin(3.0),
    }
}

impl Scenario {
    pub fn preset(tier: Tier) -> Self {
        let array = table_array();
        let base = Self {
            tier,
            array,
            hardware: baseline_hardware(),
            tracking: PhaseNoiseModel::calibrated(0.01, array.bandwidth_hz, 10e6),
            resource: ResourceModel::default(),
            rsm: RsmModel::disabled(),
            overrides: Overrides { gamma_total: Some(0.006) },
            link: LinkSettings { snr0_db: 0.0, n0: 1.0, f_eff_hz: Some(5e9), distortion_mode: DistortionMode::Directional },
            sensing: SensingSettings { n_bins: 2048, observation_s: DEFAULT_OBSERVATION_S },
        };
        match tier {
            Tier::Baseline | Tier::Custom => base,
            Tier::LowCost => Self {
                hardware: HardwareProfile { gamma_pa: db_to_lin(-8.0), ..base.hardware },
                overrides: Overrides::default(),
                ..base
            },
            Tier::Ideal => Self {
                hardware: HardwareProfile::ideal(),
                tracking: PhaseNoiseModel::zero(10e6),
                overrides: Overrides::default(),
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.array.validate()?;
        self.hardware.validate()?;
        self.tracking.validate()?;
        self.resource.resolved()?;
        if !(self.link.n0 > 0.0) {
            return Err(invalid("link.n0", "must be > 0"));
        }
        if let Some(g) = self.overrides.gamma_total {
            if !(g >= 0.0) {
                return Err(invalid("overrides.gamma_total", "must be >= 0"));
            }
        }
        if self.sensing.n_bins < 2 || !(self.sensing.observation_s > 0.0) {
            return Err(invalid("sensing", "need n_bins >= 2 and observation_s > 0"));
        }
        Ok(())
    }

    pub fn snr0(&self) -> f64 {
        db_to_lin(self.link.snr0_db)
    }

    pub fn f_eff_hz(&self) -> f64 {
        self.link.f_eff_hz.unwrap_or(0.25 * self.array.bandwidth_hz)
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.sensing.n_bins, self.array.bandwidth_hz)
    }

    pub fn gain(&self) -> Result<GainBreakdown> {
        gain_breakdown(&self.array, &self.hardware)
    }

    pub fn budget(&self) -> DistortionBudget {
        distortion_budget(&self.hardware, self.f_eff_hz()).with_override(self.overrides.gamma_total)
    }

    /// Residual phase variance of the tracking model over the signal band.
    pub fn sigma_phi_res(&self) -> Result<f64> {
        sigma_phi_res_var(&self.tracking, &self.grid()?)
    }

    pub fn operating_point(&self, snr0: f64) -> Result<LinkOperatingPoint> {
        Ok(LinkOperatingPoint {
            snr0,
            gain: self.gain()?,
            budget: self.budget(),
            sigma_phi_res: self.sigma_phi_res()?,
            sigma_dse_phase: 0.0,
            rsm: self.rsm,
            distortion_mode: self.link.distortion_mode,
        })
    }

    pub fn alpha_base(&self) -> Result<AlphaBase> {
        Ok(AlphaBase { snr0: self.snr0(), g_sig_avg: self.gain()?.g_sig_avg, gamma_total: self.budget().effective() })
    }

    /// Received signal power after combining, W.
    pub fn p_sig_ref(&self) -> Result<f64> {
        Ok(self.snr0() * self.link.n0 * self.array.bandwidth_hz * self.gain()?.g_sig_avg)
    }

    pub fn sensing_energy(&self) -> Result<f64> {
        Ok(self.p_sig_ref()? * self.sensing.observation_s)
    }

    pub fn sensing_signal(&self) -> Result<SensingSignalSpec> {
        SensingSignalSpec::from_profile(&self.array, &self.hardware, self.grid()?, self.sensing_energy()?)
    }

    /// Sensing-convention PSD at pilot overhead `alpha`.
    pub fn sense_noise(&self, alpha: f64, toggles: NoiseToggles) -> Result<NoisePsd> {
        self.noise_at(alpha, toggles, NoiseConvention::Sense)
    }

    /// Capacity figures over a list of input SNRs in dB.
    pub fn capacity_sweep(&self, snr_db: &[f64], parallel: bool) -> Result<Vec<SweepRow>> {
        let op = self.operating_point(1.0)?;
        let ceiling = c_sat(&op.budget, op.sigma_phi_res).unwrap_or(f64::INFINITY);
        let crit = snr_crit(&op.gain, &op.budget, DistortionMode::Uncorrelated).map_or(f64::INFINITY, lin_to_db);
        map_points(snr_db, parallel, |db| {
            let p = op.with_snr0(db_to_lin(db));
            let c_exact = c_exact(&p, &self.array)?;
            let c_jensen = c_jensen(&p, &self.array)?;
            Ok(SweepRow { snr0_db: db, c_exact, c_jensen, gap: c_jensen - c_exact, c_sat: ceiling, snr_crit_db: crit })
        })
    }

    pub fn noise_at(&self, alpha: f64, toggles: NoiseToggles, convention: NoiseConvention) -> Result<NoisePsd> {
        let grid = self.grid()?;
        let model = self.resource.resolved()?;
        let p_ref = self.p_sig_ref()?;
        let n0 = self.link.n0;
        let phase_noise = if toggles.phase_noise && self.tracking.band_power(-0.5 * grid.bandwidth_hz, 0.5 * grid.bandwidth_hz) > 0.0 {
            self.tracking.scaled_to_variance(sigma_pn_var(alpha, &model)?, &grid)?
        } else {
            PhaseNoiseModel::zero(self.tracking.loop_bw_hz)
        };
        let inputs = NoiseInputs {
            grid,
            n0,
            distortion_psd: if toggles.hardware { p_ref * self.budget().effective() / grid.bandwidth_hz } else { 0.0 },
            dse_psd: if toggles.dse { n0 * sigma_dse_var(alpha, &model)? } else { 0.0 },
            rsm: if toggles.hardware { self.rsm } else { RsmModel::disabled() },
            p_sig_ref: p_ref,
            phase_noise,
        };
        build_noise_psd(convention, &inputs)
    }
}
