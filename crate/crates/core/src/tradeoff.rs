//! Pilot-overhead trade-off between tracking quality and net data rate.
//!
//! A larger pilot share `alpha` averages down the residual phase noise
//! (`C_PN / alpha`) and shortens the prediction horizon of the
//! constant-acceleration tracker (`C_DSE / alpha^5`), at the cost of
//! `(1 - alpha)` of the payload.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::scenario::{NoiseToggles, Scenario};
use crate::sensing::whittle_fim_tau;
use crate::units::SPEED_OF_LIGHT;

/// Inputs for deriving the two constants from first principles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsParams {
    /// White-jerk PSD, m^2/s^5.
    pub q_j: f64,
    pub t_frame_s: f64,
    pub carrier_hz: f64,
    pub loop_loss: f64,
    pub n0: f64,
    /// Pilot energy per frame at full overhead, J.
    pub e_total_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Derivation {
    Direct,
    Physics(PhysicsParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceModel {
    /// rad^2 at alpha = 1.
    pub c_pn: f64,
    /// rad^2 at alpha = 1.
    pub c_dse: f64,
    pub derivation: Derivation,
}

pub const DEFAULT_C_PN: f64 = 0.01;
/// `0.01 * 0.16^4`, which puts the crossover at 0.16.
pub const DEFAULT_C_DSE: f64 = 6.5536e-6;

impl Default for ResourceModel {
    fn default() -> Self {
        Self::direct(DEFAULT_C_PN, DEFAULT_C_DSE)
    }
}

impl ResourceModel {
    pub fn direct(c_pn: f64, c_dse: f64) -> Self {
        Self { c_pn, c_dse, derivation: Derivation::Direct }
    }

    pub fn from_physics(p: PhysicsParams) -> Result<Self> {
        for (name, v) in [("q_j", p.q_j), ("t_frame_s", p.t_frame_s), ("carrier_hz", p.carrier_hz), ("n0", p.n0), ("e_total_j", p.e_total_j)] {
            if !(v > 0.0) {
                return Err(invalid(name, "must be > 0"));
            }
        }
        if !(p.loop_loss >= 1.0) {
            return Err(invalid("loop_loss", "must be >= 1"));
        }
        let c_pn = p.loop_loss * p.n0 / (2.0 * p.e_total_j);
        let k = 4.0 * PI * p.carrier_hz / SPEED_OF_LIGHT;
        let c_dse = k * k * ca_position_var(p.q_j, p.t_frame_s);
        Ok(Self { c_pn, c_dse, derivation: Derivation::Physics(p) })
    }

    /// Recompute the constants when they are derived, then validate.
    pub fn resolved(&self) -> Result<Self> {
        let m = match self.derivation {
            Derivation::Direct => *self,
            Derivation::Physics(p) => Self::from_physics(p)?,
        };
        if !(m.c_pn > 0.0 && m.c_dse > 0.0) {
            return Err(invalid("resource", "c_pn and c_dse must be > 0"));
        }
        Ok(m)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange { alpha })
    }
}

pub fn sigma_pn_var(alpha: f64, model: &ResourceModel) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(model.c_pn / alpha)
}

/// Position variance of a constant-acceleration predictor after `dt_s`,
/// `q_j dt^5 / 20`.
pub fn ca_position_var(q_j: f64, dt_s: f64) -> f64 {
    q_j * dt_s.powi(5) / 20.0
}

/// Whether a kinematic phase variance is inside the small-mismatch regime.
pub fn dse_is_small(var: f64) -> bool {
    var < 1.0
}

pub fn sigma_dse_var(alpha: f64, model: &ResourceModel) -> Result<f64> {
    check_alpha(alpha)?;
    let v = model.c_dse / alpha.powi(5);
    if !dse_is_small(v) {
        log::debug!("kinematic phase variance {v:.3} rad^2 at alpha = {alpha} is outside the small-mismatch regime");
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub alpha: f64,
    /// Common variance of both terms at the crossover.
    pub variance: f64,
    pub inside_unit: bool,
}

/// `alpha* = (C_DSE / C_PN)^(1/4)`.
pub fn alpha_star(model: &ResourceModel) -> Result<Crossover> {
    if !(model.c_pn > 0.0 && model.c_dse > 0.0) {
        return Err(invalid("resource", "c_pn and c_dse must be > 0"));
    }
    let alpha = (model.c_dse / model.c_pn).powf(0.25);
    if alpha > 1.0 {
        log::warn!("crossover alpha* = {alpha:.3} lies outside (0, 1]");
    }
    Ok(Crossover { alpha, variance: model.c_pn / alpha, inside_unit: alpha <= 1.0 })
}

/// Link quantities that do not depend on `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBase {
    pub snr0: f64,
    pub g_sig_avg: f64,
    pub gamma_total: f64,
}

/// Jensen capacity with the alpha-dependent phase-noise and kinematic terms.
pub fn c_j_alpha(alpha: f64, base: &AlphaBase, model: &ResourceModel) -> Result<f64> {
    check_alpha(alpha)?;
    let sg = base.snr0 * base.g_sig_avg;
    let sinr = sg * (-model.c_pn / alpha).exp() / (1.0 + sg * base.gamma_total + model.c_dse / alpha.powi(5));
    Ok(sinr.ln_1p() / std::f64::consts::LN_2)
}

/// Net payload efficiency `(1 - alpha) C_J(alpha)`.
pub fn r_net(alpha: f64, base: &AlphaBase, model: &ResourceModel) -> Result<f64> {
    Ok((1.0 - alpha) * c_j_alpha(alpha, base, model)?)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Maximizer of [`r_net`]: best grid point, then golden-section search
/// between its neighbours. Returns `(alpha, r_net)`.
pub fn argmax_r_net(base: &AlphaBase, model: &ResourceModel, grid: &[f64]) -> Result<(f64, f64)> {
    if grid.len() < 3 {
        return Err(invalid("alpha_grid", "need at least 3 points"));
    }
    let vals = grid.iter().map(|&a| r_net(a, base, model)).collect::<Result<Vec<_>>>()?;
    let i = vals
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let mut lo = grid[i.saturating_sub(1)];
    let mut hi = grid[(i + 1).min(grid.len() - 1)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |a: f64| r_net(a, base, model).unwrap_or(f64::NEG_INFINITY);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if hi - lo < 1e-12 * hi {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let a = 0.5 * (lo + hi);
    let v = f(a);
    Ok(if v >= vals[i] { (a, v) } else { (grid[i], vals[i]) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    DseDominated,
    PnDominated,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::DseDominated => "dse_dominated",
            Regime::PnDominated => "pn_dominated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub alpha: f64,
    pub r_net: f64,
    pub rmse_m: f64,
    pub regime: Regime,
    /// False once the kinematic phase variance exceeds 1 rad^2.
    pub feasible: bool,
    pub sigma_pn: f64,
    pub sigma_dse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoScan {
    pub points: Vec<ParetoPoint>,
    /// Indices into `points` of the feasible non-dominated subset, by alpha.
    pub frontier: Vec<usize>,
}

impl ParetoScan {
    pub fn frontier_points(&self) -> impl Iterator<Item = &ParetoPoint> {
        self.frontier.iter().map(move |&i| &self.points[i])
    }
}

/// Evaluate `f` on every grid value, in order. With `parallel` and the
/// `parallel` feature the points run on the rayon pool.
pub fn map_points<T, F>(grid: &[f64], parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return grid.par_iter().map(|&a| f(a)).collect();
    }
    let _ = parallel;
    grid.iter().map(|&a| f(a)).collect()
}

/// Ranging RMSE at overhead `alpha` with the selected noise terms.
pub fn rmse_at_alpha(alpha: f64, scenario: &Scenario, toggles: NoiseToggles) -> Result<f64> {
    let sig = scenario.sensing_signal()?;
    rmse_with_signal(alpha, scenario, toggles, &sig)
}

fn rmse_with_signal(
    alpha: f64,
    scenario: &Scenario,
    toggles: NoiseToggles,
    sig: &crate::sensing::SensingSignalSpec,
) -> Result<f64> {
    let noise = scenario.sense_noise(alpha, toggles)?;
    Ok(whittle_fim_tau(sig, &noise)?.rmse_range_m)
}

fn non_dominated(points: &[ParetoPoint]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            let p = &points[i];
            p.feasible
                && !points.iter().any(|q| {
                    q.feasible && q.r_net >= p.r_net && q.rmse_m <= p.rmse_m && (q.r_net > p.r_net || q.rmse_m < p.rmse_m)
                })
        })
        .collect()
}

/// Evaluate rate and ranging accuracy over `alpha_grid`.
pub fn pareto_scan(alpha_grid: &[f64], scenario: &Scenario, parallel: bool) -> Result<ParetoScan> {
    if alpha_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("alpha_grid", "must be strictly increasing"));
    }
    let model = scenario.resource.resolved()?;
    let base = scenario.alpha_base()?;
    let sig = scenario.sensing_signal()?;
    let points = map_points(alpha_grid, parallel, |alpha| {
        let sigma_pn = sigma_pn_var(alpha, &model)?;
        let sigma_dse = sigma_dse_var(alpha, &model)?;
        Ok(ParetoPoint {
            alpha,
            r_net: r_net(alpha, &base, &model)?,
            rmse_m: rmse_with_signal(alpha, scenario, NoiseToggles::ALL, &sig)?,
            regime: if sigma_dse > sigma_pn { Regime::DseDominated } else { Regime::PnDominated },
            feasible: dse_is_small(sigma_dse),
            sigma_pn,
            sigma_dse,
        })
    })?;
    let frontier = non_dominated(&points);
    Ok(ParetoScan { points, frontier })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub alpha: f64,
    pub thermal: f64,
    pub plus_hw: f64,
    pub plus_pn: f64,
    pub plus_dse: f64,
}

/// RMSE with the noise terms switched on one after another.
pub fn ablation(alpha_grid: &[f64], scenario: &Scenario, parallel: bool) -> Result<Vec<AblationRow>> {
    let sig = scenario.sensing_signal()?;
    let stages = NoiseToggles::cumulative();
    map_points(alpha_grid, parallel, |alpha| {
        let r = |t| rmse_with_signal(alpha, scenario, t, &sig);
        Ok(AblationRow { alpha, thermal: r(stages[0])?, plus_hw: r(stages[1])?, plus_pn: r(stages[2])?, plus_dse: r(stages[3])? })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cross_at_0_16() {
        let c = alpha_star(&ResourceModel::default()).unwrap();
        assert!((c.alpha - 0.16).abs() < 1e-12);
        assert!(c.inside_unit);
        let m = ResourceModel::direct(0.3, 0.3);
        assert!((alpha_star(&m).unwrap().alpha - 1.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_bounds() {
        let m = ResourceModel::default();
        assert!(matches!(sigma_pn_var(0.0, &m), Err(Error::AlphaOutOfRange { .. })));
        assert!(matches!(sigma_dse_var(1.5, &m), Err(Error::AlphaOutOfRange { .. })));
        assert!((sigma_pn_var(0.1, &m).unwrap() - 0.1).abs() < 1e-15);
        let d = ResourceModel::direct(0.01, 1e-5);
        assert!((sigma_dse_var(0.1, &d).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn physics_constants() {
        let p = PhysicsParams { q_j: 2.0, t_frame_s: 1e-3, carrier_hz: 140e9, loop_loss: 2.0, n0: 1.0, e_total_j: 100.0 };
        let m = ResourceModel::from_physics(p).unwrap();
        assert!((m.c_pn - 0.01).abs() < 1e-15);
        let k = 4.0 * PI * 140e9 / SPEED_OF_LIGHT;
        assert!((m.c_dse / (k * k * 2.0 * 1e-15 / 20.0) - 1.0).abs() < 1e-12);
        let direct = ResourceModel::direct(m.c_pn, m.c_dse);
        for a in [0.05, 0.3, 1.0] {
            let x = sigma_dse_var(a, &m).unwrap();
            let y = sigma_dse_var(a, &direct).unwrap();
            assert!((x - y).abs() <= 1e-12 * y);
        }
    }

    #[test]
    fn r_net_vanishes_at_both_ends() {
        let base = AlphaBase { snr0: 1.0, g_sig_avg: 1000.0, gamma_total: 0.006 };
        let m = ResourceModel::default();
        assert_eq!(r_net(1.0, &base, &m).unwrap(), 0.0);
        assert!(r_net(1e-3, &base, &m).unwrap() < 1e-6);
        let (a, v) = argmax_r_net(&base, &m, &log_grid(0.01, 1.0, 200)).unwrap();
        assert!(a > 0.01 && a < 1.0);
        assert!(v >= r_net(0.9 * a, &base, &m).unwrap());
        assert!(v >= r_net((1.1 * a).min(1.0), &base, &m).unwrap());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.01, 1.0, 200);
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[199], 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
