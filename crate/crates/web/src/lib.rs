//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the page
//! needs no generated TypeScript types. The `*_json` functions are the same
//! operations callable from native Rust.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use isl_limits::model::{eta_bsq, kappa, squint_nulls, EtaMethod};
use isl_limits::scenario::{NoiseToggles, Scenario, Tier};
use isl_limits::tradeoff::{alpha_star, argmax_r_net, log_grid, pareto_scan, ResourceModel};

#[derive(Debug, thiserror::Error)]
pub enum WebError {
    #[error(transparent)]
    Model(#[from] isl_limits::Error),
    #[error("unknown tier `{0}`")]
    UnknownTier(String),
    #[error("`{0}` must be between {1} and {2}")]
    OutOfRange(&'static str, f64, f64),
}

type Result<T> = std::result::Result<T, WebError>;

fn tier(name: &str) -> Result<Scenario> {
    Tier::parse(name).map(Scenario::preset).ok_or_else(|| WebError::UnknownTier(name.to_string()))
}

fn range(name: &'static str, v: f64, lo: f64, hi: f64) -> Result<f64> {
    if v.is_finite() && (lo..=hi).contains(&v) {
        Ok(v)
    } else {
        Err(WebError::OutOfRange(name, lo, hi))
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain numeric data serializes")
}

#[derive(Debug, Serialize)]
pub struct SquintProfile {
    pub kappa: f64,
    pub eta_avg: f64,
    pub f_offset_hz: Vec<f64>,
    pub eta: Vec<f64>,
    pub nulls_hz: Vec<f64>,
}

/// Beam-squint loss across the band for an `n x n` link on the baseline array,
/// steered `steer_deg` off broadside with fractional bandwidth `b_over_fc`.
pub fn squint_profile(n: u32, steer_deg: f64, b_over_fc: f64, points: u32) -> Result<SquintProfile> {
    let mut s = Scenario::preset(Tier::Baseline);
    range("n", f64::from(n), 1.0, 4096.0)?;
    s.array.n_tx = n;
    s.array.n_rx = n;
    s.array.steer_angle_rad = range("steer_deg", steer_deg, -89.0, 89.0)?.to_radians();
    s.array.bandwidth_hz = range("b_over_fc", b_over_fc, 1e-4, 0.9)? * s.array.carrier_hz;
    s.array.validate()?;
    let points = range("points", f64::from(points), 3.0, 4001.0)? as usize;
    let half = 0.5 * s.array.bandwidth_hz;
    let f_offset_hz: Vec<f64> = (0..points).map(|i| -half + 2.0 * half * i as f64 / (points - 1) as f64).collect();
    let eta = f_offset_hz.iter().map(|&f| eta_bsq(f, &s.array)).collect();
    Ok(SquintProfile {
        kappa: kappa(&s.array),
        eta_avg: isl_limits::model::eta_bsq_avg(&s.array, EtaMethod::Numeric)?,
        f_offset_hz,
        eta,
        nulls_hz: squint_nulls(&s.array),
    })
}

#[derive(Debug, Serialize)]
pub struct CapacityCurve {
    pub tier: &'static str,
    pub c_sat: f64,
    pub snr_crit_db: f64,
    pub gamma_eff: f64,
    pub snr0_db: Vec<f64>,
    pub c_exact: Vec<f64>,
    pub c_jensen: Vec<f64>,
}

/// Exact and Jensen capacity from `snr_min_db` to `snr_max_db` for a tier.
/// A positive `gamma_total` replaces the tier's distortion budget.
pub fn capacity_curve(tier_name: &str, snr_min_db: f64, snr_max_db: f64, points: u32, gamma_total: f64) -> Result<CapacityCurve> {
    let mut s = tier(tier_name)?;
    if gamma_total > 0.0 {
        s.overrides.gamma_total = Some(range("gamma_total", gamma_total, 1e-6, 10.0)?);
    }
    range("snr_min_db", snr_min_db, -60.0, 60.0)?;
    range("snr_max_db", snr_max_db, snr_min_db, 60.0)?;
    let points = range("points", f64::from(points), 2.0, 401.0)? as usize;
    let grid: Vec<f64> = (0..points).map(|i| snr_min_db + (snr_max_db - snr_min_db) * i as f64 / (points - 1) as f64).collect();
    let rows = s.capacity_sweep(&grid, false)?;
    Ok(CapacityCurve {
        tier: s.tier.name(),
        c_sat: rows[0].c_sat,
        snr_crit_db: rows[0].snr_crit_db,
        gamma_eff: s.budget().effective(),
        snr0_db: grid,
        c_exact: rows.iter().map(|r| r.c_exact).collect(),
        c_jensen: rows.iter().map(|r| r.c_jensen).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct AlphaTradeoff {
    pub alpha_star: f64,
    pub best_alpha: f64,
    pub best_r_net: f64,
    pub alpha: Vec<f64>,
    pub r_net: Vec<f64>,
    pub rmse_m: Vec<f64>,
    pub feasible: Vec<bool>,
    pub frontier: Vec<usize>,
    pub rmse_thermal_m: f64,
}

/// Rate and ranging accuracy over pilot overhead with the given
/// phase-noise and kinematic coefficients.
pub fn alpha_tradeoff(tier_name: &str, c_pn: f64, c_dse: f64, points: u32) -> Result<AlphaTradeoff> {
    let mut s = tier(tier_name)?;
    s.resource = ResourceModel::direct(range("c_pn", c_pn, 1e-8, 10.0)?, range("c_dse", c_dse, 1e-14, 1.0)?);
    s.sensing.n_bins = 512;
    let points = range("points", f64::from(points), 3.0, 400.0)? as usize;
    let grid = log_grid(0.01, 1.0, points);
    let scan = pareto_scan(&grid, &s, false)?;
    let (best_alpha, best_r_net) = argmax_r_net(&s.alpha_base()?, &s.resource, &grid)?;
    Ok(AlphaTradeoff {
        alpha_star: alpha_star(&s.resource)?.alpha,
        best_alpha,
        best_r_net,
        alpha: grid,
        r_net: scan.points.iter().map(|p| p.r_net).collect(),
        rmse_m: scan.points.iter().map(|p| p.rmse_m).collect(),
        feasible: scan.points.iter().map(|p| p.feasible).collect(),
        frontier: scan.frontier,
        rmse_thermal_m: isl_limits::tradeoff::rmse_at_alpha(1.0, &s, NoiseToggles::THERMAL)?,
    })
}

pub fn squint_profile_json(n: u32, steer_deg: f64, b_over_fc: f64, points: u32) -> Result<String> {
    squint_profile(n, steer_deg, b_over_fc, points).map(|v| json(&v))
}

pub fn capacity_curve_json(tier: &str, snr_min_db: f64, snr_max_db: f64, points: u32, gamma_total: f64) -> Result<String> {
    capacity_curve(tier, snr_min_db, snr_max_db, points, gamma_total).map(|v| json(&v))
}

pub fn alpha_tradeoff_json(tier: &str, c_pn: f64, c_dse: f64, points: u32) -> Result<String> {
    alpha_tradeoff(tier, c_pn, c_dse, points).map(|v| json(&v))
}

fn js(e: WebError) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen(js_name = squintProfile)]
pub fn wasm_squint_profile(n: u32, steer_deg: f64, b_over_fc: f64, points: u32) -> std::result::Result<String, JsValue> {
    squint_profile_json(n, steer_deg, b_over_fc, points).map_err(js)
}

#[wasm_bindgen(js_name = capacityCurve)]
pub fn wasm_capacity_curve(tier: &str, snr_min_db: f64, snr_max_db: f64, points: u32, gamma_total: f64) -> std::result::Result<String, JsValue> {
    capacity_curve_json(tier, snr_min_db, snr_max_db, points, gamma_total).map_err(js)
}

#[wasm_bindgen(js_name = alphaTradeoff)]
pub fn wasm_alpha_tradeoff(tier: &str, c_pn: f64, c_dse: f64, points: u32) -> std::result::Result<String, JsValue> {
    alpha_tradeoff_json(tier, c_pn, c_dse, points).map_err(js)
}
