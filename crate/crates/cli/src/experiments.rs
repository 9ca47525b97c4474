//! The named experiments. Each writes its CSVs, plot scripts and a
//! `manifest.json` under `<out>/<experiment>/` and prints a summary table.

use std::path::{Path, PathBuf};

use isl_limits::capacity::{c_sat, snr_crit, DistortionMode};
use isl_limits::model::{kappa, squint_nulls};
use isl_limits::noise::{DistortionBudget, NoiseConvention, NoisePsd};
use isl_limits::scenario::{NoiseToggles, Scenario};
use isl_limits::sensing::{exact_time_fim, fim_awgn_closed, rmse_awgn_closed, whittle_fim_tau, SensingSignalSpec};
use isl_limits::tradeoff::{
    ablation, alpha_star, argmax_r_net, c_j_alpha, map_points, pareto_scan, rmse_at_alpha, sigma_dse_var, sigma_pn_var,
};
use isl_limits::units::lin_to_db;
use isl_limits::validation::{
    jensen_ordering_suite, mc_bussgang, mimo_scaling_experiment, slope_fit, spectral_consistency_suite,
    whittle_validation_grid, McConfig, SlopeFit,
};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{RunManifest, Sink, Table};
use crate::plot::{emit_plot_description, PlotKind, PlotSpec};
use crate::row;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    LinkBudget,
    CapacitySweep,
    SensingSweep,
    AlphaSweep,
    Pareto,
    MimoScaling,
    Ablation,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::LinkBudget,
        Experiment::CapacitySweep,
        Experiment::SensingSweep,
        Experiment::AlphaSweep,
        Experiment::Pareto,
        Experiment::MimoScaling,
        Experiment::Ablation,
        Experiment::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::LinkBudget => "link-budget",
            Experiment::CapacitySweep => "capacity-sweep",
            Experiment::SensingSweep => "sensing-sweep",
            Experiment::AlphaSweep => "alpha-sweep",
            Experiment::Pareto => "pareto",
            Experiment::MimoScaling => "mimo-scaling",
            Experiment::Ablation => "ablation",
            Experiment::Validate => "validate",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| CliError::UnknownExperiment(s.to_string()))
    }
}

/// Everything an experiment needs.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub parallel: bool,
}

/// Result of one experiment. `failed` counts validation checks that did not
/// pass; only `validate` sets it.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub summary: Vec<(String, String)>,
    pub failed: usize,
}

trait Context<T> {
    fn ctx(self, e: Experiment) -> CliResult<T>;
}

impl<T> Context<T> for isl_limits::Result<T> {
    fn ctx(self, e: Experiment) -> CliResult<T> {
        self.map_err(|source| CliError::ExperimentFailed { experiment: e.name(), source })
    }
}

struct Summary(Vec<(String, String)>);

impl Summary {
    fn put(&mut self, k: &str, v: impl ToString) {
        self.0.push((k.to_string(), v.to_string()));
    }
}

pub fn run_experiment(e: Experiment, cx: &RunContext) -> CliResult<Outcome> {
    let manifest = RunManifest::new(e.name(), cx.config.hash(), cx.config.seed);
    let mut sink = Sink::create(&cx.out_dir, manifest)?;
    let mut sum = Summary(Vec::new());
    let scenario = cx.config.scenario();
    let failed = match e {
        Experiment::LinkBudget => link_budget(&scenario, &mut sink, &mut sum).ctx(e)?.map(|_| 0)?,
        Experiment::CapacitySweep => capacity_sweep(cx, &scenario, &mut sink, &mut sum).ctx(e)?.map(|_| 0)?,
        Experiment::SensingSweep => sensing_sweep(cx, &scenario, &mut sink, &mut sum).ctx(e)?.map(|_| 0)?,
        Experiment::AlphaSweep => alpha_sweep(cx, &scenario, &mut sink, &mut sum).ctx(e)?.map(|_| 0)?,
        Experiment::Pareto => pareto(cx, &scenario, &mut sink, &mut sum).ctx(e)?.map(|_| 0)?,
        Experiment::MimoScaling => mimo(cx, &scenario, &mut sink, &mut sum).ctx(e)?.map(|_| 0)?,
        Experiment::Ablation => ablation_run(cx, &scenario, &mut sink, &mut sum).ctx(e)?.map(|_| 0)?,
        Experiment::Validate => validate(cx, &scenario, &mut sink, &mut sum).ctx(e)??,
    };
    let manifest = sink.finish()?;
    Ok(Outcome { manifest, summary: sum.0, failed })
}

/// Print a summary table to standard output.
pub fn print_summary(o: &Outcome) {
    let w = o.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    println!("== {} ==", o.manifest.experiment);
    for (k, v) in &o.summary {
        println!("  {k:<w$}  {v}");
    }
    println!("  {:<w$}  {}", "outputs", o.manifest.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "));
}

type Step = isl_limits::Result<CliResult<()>>;

fn plot(sink: &mut Sink, csv: &Path, spec: &PlotSpec) -> CliResult<()> {
    let gp = emit_plot_description(csv, spec)?;
    if let Some(name) = gp.file_name() {
        sink.record(&name.to_string_lossy());
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn link_budget(s: &Scenario, sink: &mut Sink, sum: &mut Summary) -> Step {
    let g = s.gain()?;
    let b = s.budget();
    let sigma = s.sigma_phi_res()?;
    let csat = c_sat(&b, sigma)?;
    let crit_u = snr_crit(&g, &b, DistortionMode::Uncorrelated)?;
    let crit_d = snr_crit(&g, &b, DistortionMode::Directional)?;
    let star = alpha_star(&s.resource.resolved()?)?;
    let summed = DistortionBudget { total_override: None, ..b };

    let mut t = Table::new(&["quantity", "value", "unit"]);
    let mut add = |q: &str, v: f64, u: &str| t.push(row![q, v, u]);
    add("g_ideal", g.g_ideal, "linear");
    add("g_ideal_db", lin_to_db(g.g_ideal), "dB");
    add("kappa", kappa(&s.array), "1");
    add("eta_bsq_avg", g.eta_bsq_avg, "linear");
    add("rho_q", g.rho_q, "linear");
    add("rho_ape", g.rho_ape, "linear");
    add("rho_a", g.rho_a, "linear");
    add("rho_pn", g.rho_pn, "linear");
    add("g_sig_avg", g.g_sig_avg, "linear");
    add("g_sig_avg_db", lin_to_db(g.g_sig_avg), "dB");
    add("gamma_pa", b.gamma_pa, "linear");
    add("gamma_adc", b.gamma_adc, "linear");
    add("gamma_iq", b.gamma_iq, "linear");
    add("gamma_lo", b.gamma_lo, "linear");
    add("gamma_sum", summed.effective(), "linear");
    add("gamma_eff", b.effective(), "linear");
    add("gamma_eff_db", lin_to_db(b.effective()), "dB");
    add("sigma_phi_res", sigma, "rad^2");
    add("c_sat", csat, "bit/s/Hz");
    add("snr_crit_uncorrelated_db", lin_to_db(crit_u), "dB");
    add("snr_crit_directional_db", lin_to_db(crit_d), "dB");
    add("alpha_star", star.alpha, "1");
    add("squint_nulls_in_band", squint_nulls(&s.array).len() as f64, "count");
    add("far_field_distance_m", s.array.far_field_distance_m(), "m");
    let rows = t.rows.clone();
    if let Err(e) = sink.csv("link_budget.csv", &t) {
        return Ok(Err(e));
    }

    sum.put("tier", s.tier.name());
    for r in rows {
        let unit = r[2].render();
        let v = match &r[1] {
            crate::output::Cell::F(x) => format!("{x:.4}"),
            c => c.render(),
        };
        sum.put(&r[0].render(), if unit == "1" || unit == "linear" { v } else { format!("{v} {unit}") });
    }
    Ok(Ok(()))
}

fn capacity_sweep(cx: &RunContext, s: &Scenario, sink: &mut Sink, sum: &mut Summary) -> Step {
    let rows = s.capacity_sweep(&cx.config.sweep.snr_grid(), cx.parallel)?;
    let mut t = Table::new(&["snr0_db", "c_exact", "c_jensen", "gap", "c_sat", "snr_crit_db"]);
    for r in &rows {
        t.push(row![r.snr0_db, r.c_exact, r.c_jensen, r.gap, r.c_sat, r.snr_crit_db]);
    }
    let peak = rows.iter().max_by(|a, b| a.gap.total_cmp(&b.gap)).expect("non-empty sweep");
    let (c_sat, crit) = (rows[0].c_sat, rows[0].snr_crit_db);
    sum.put("points", rows.len());
    sum.put("c_sat", format!("{c_sat:.4}"));
    sum.put("snr_crit_db", format!("{crit:.2}"));
    sum.put("gap_peak", format!("{:.4} at {:.1} dB", peak.gap, peak.snr0_db));
    sum.put("min_gap", format!("{:.2e}", rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min)));
    Ok((|| {
        let p = sink.csv("capacity_sweep.csv", &t)?;
        let mut spec = PlotSpec::new(PlotKind::Line, "Capacity vs input SNR", "snr0_db", &["c_exact", "c_jensen"])
            .labels("SNR_0 (dB)", "spectral efficiency (bit/s/Hz)");
        if crit.is_finite() {
            spec = spec.vline("SNR_crit", crit);
        }
        if c_sat.is_finite() {
            spec = spec.hline("C_sat", c_sat);
        }
        plot(sink, &p, &spec)?;
        let gap = PlotSpec::new(PlotKind::Line, "Jensen gap", "snr0_db", &["gap"])
            .labels("SNR_0 (dB)", "gap (bit/s/Hz)")
            .stem("capacity_gap");
        plot(sink, &p, &if crit.is_finite() { gap.vline("SNR_crit", crit) } else { gap })
    })())
}

fn sensing_sweep(cx: &RunContext, s: &Scenario, sink: &mut Sink, sum: &mut Summary) -> Step {
    let alpha = cx.config.sweep.sensing_alpha;
    let rows = map_points(&cx.config.sweep.snr_grid(), cx.parallel, |db| {
        let mut p = *s;
        p.link.snr0_db = db;
        let awgn = rmse_awgn_closed(p.sensing_energy()?, p.link.n0, p.array.bandwidth_hz);
        Ok([db, rmse_at_alpha(alpha, &p, NoiseToggles::ALL)?, rmse_at_alpha(alpha, &p, NoiseToggles::THERMAL)?, awgn])
    })?;
    let mut t = Table::new(&["snr0_db", "rmse_m", "rmse_thermal_m", "rmse_awgn_m"]);
    for r in &rows {
        t.push(row![r[0], r[1], r[2], r[3]]);
    }
    let last = rows.last().expect("non-empty sweep");
    sum.put("alpha", alpha);
    sum.put("points", rows.len());
    sum.put("rmse_at_low_snr_m", format!("{:.3e}", rows[0][1]));
    sum.put("rmse_at_high_snr_m", format!("{:.3e}", last[1]));
    sum.put("high_snr_floor_ratio", format!("{:.2}", last[1] / last[2]));
    Ok((|| {
        let p = sink.csv("sensing_sweep.csv", &t)?;
        let mut spec = PlotSpec::new(PlotKind::Line, "Ranging RMSE vs input SNR", "snr0_db", &["rmse_m", "rmse_thermal_m", "rmse_awgn_m"])
            .labels("SNR_0 (dB)", "range RMSE (m)");
        spec.title.push_str(&format!(" (alpha = {alpha})"));
        plot(sink, &p, &spec)
    })())
}

fn alpha_sweep(cx: &RunContext, s: &Scenario, sink: &mut Sink, sum: &mut Summary) -> Step {
    let grid = cx.config.sweep.alpha_grid();
    let model = s.resource.resolved()?;
    let base = s.alpha_base()?;
    let scan = pareto_scan(&grid, s, cx.parallel)?;
    let star = alpha_star(&model)?;
    let (best_a, best_r) = argmax_r_net(&base, &model, &grid)?;
    let mut t = Table::new(&["alpha", "sigma_pn", "sigma_dse", "c_j", "r_net", "rmse_m", "regime"]);
    for p in &scan.points {
        t.push(row![p.alpha, p.sigma_pn, p.sigma_dse, c_j_alpha(p.alpha, &base, &model)?, p.r_net, p.rmse_m, p.regime.name()]);
    }
    let pn: Vec<f64> = grid.iter().map(|&a| sigma_pn_var(a, &model)).collect::<isl_limits::Result<_>>()?;
    let dse: Vec<f64> = grid.iter().map(|&a| sigma_dse_var(a, &model)).collect::<isl_limits::Result<_>>()?;
    sum.put("alpha_star", format!("{:.4}", star.alpha));
    sum.put("sigma_at_alpha_star", format!("{:.4e} rad^2", star.variance));
    sum.put("slope_sigma_pn", format!("{:.6}", slope_fit(&grid, &pn)?.slope));
    sum.put("slope_sigma_dse", format!("{:.6}", slope_fit(&grid, &dse)?.slope));
    sum.put("argmax_r_net", format!("alpha = {best_a:.4}, r_net = {best_r:.4}"));
    Ok((|| {
        let p = sink.csv("alpha_sweep.csv", &t)?;
        let spec = PlotSpec::new(PlotKind::LogLog, "Phase-noise and kinematic variance", "alpha", &["sigma_pn", "sigma_dse"])
            .labels("pilot overhead alpha", "phase variance (rad^2)")
            .vline("alpha*", star.alpha);
        plot(sink, &p, &spec)?;
        let rmse = PlotSpec::new(PlotKind::LogLog, "Ranging RMSE vs pilot overhead", "alpha", &["rmse_m"])
            .labels("pilot overhead alpha", "range RMSE (m)")
            .vline("alpha*", star.alpha);
        plot(sink, &p, &rmse.stem("alpha_sweep_rmse"))?;
        let rate = PlotSpec::new(PlotKind::Line, "Net rate vs pilot overhead", "alpha", &["r_net", "c_j"])
            .labels("pilot overhead alpha", "bit/s/Hz")
            .vline("argmax", best_a);
        plot(sink, &p, &rate.stem("alpha_sweep_rate"))
    })())
}

fn pareto(cx: &RunContext, s: &Scenario, sink: &mut Sink, sum: &mut Summary) -> Step {
    let scan = pareto_scan(&cx.config.sweep.alpha_grid(), s, cx.parallel)?;
    let header = ["alpha", "r_net", "rmse_m", "regime", "feasible"];
    let mut all = Table::new(&header);
    for p in &scan.points {
        all.push(row![p.alpha, p.r_net, p.rmse_m, p.regime.name(), p.feasible]);
    }
    let mut front = Table::new(&header);
    for p in scan.frontier_points() {
        front.push(row![p.alpha, p.r_net, p.rmse_m, p.regime.name(), p.feasible]);
    }
    sum.put("points", scan.points.len());
    sum.put("feasible", scan.points.iter().filter(|p| p.feasible).count());
    sum.put("frontier", scan.frontier.len());
    if let (Some(a), Some(b)) = (scan.frontier_points().next(), scan.frontier_points().last()) {
        sum.put("frontier_alpha_range", format!("{:.4} .. {:.4}", a.alpha, b.alpha));
    }
    for q in [0.05, 0.1, 0.3] {
        let rmse = rmse_at_alpha(q, s, NoiseToggles::ALL)?;
        let rate = isl_limits::tradeoff::r_net(q, &s.alpha_base()?, &s.resource.resolved()?)?;
        sum.put(&format!("alpha={q}"), format!("r_net {rate:.3}, rmse {:.3} um", rmse * 1e6));
    }
    Ok((|| {
        let p = sink.csv("pareto.csv", &all)?;
        let f = sink.csv("pareto_frontier.csv", &front)?;
        let mut spec = PlotSpec::new(PlotKind::Pareto, "Rate-accuracy trade-off", "r_net", &["rmse_m"])
            .labels("net rate (bit/s/Hz)", "range RMSE (m)");
        spec.frontier = Some(f);
        plot(sink, &p, &spec)
    })())
}

fn fit_row(t: &mut Table, run: &str, quantity: &str, f: &SlopeFit) {
    t.push(row![run, quantity, f.slope, f.intercept, f.r_squared, f.slope_stderr]);
}

fn mimo(cx: &RunContext, s: &Scenario, sink: &mut Sink, sum: &mut Summary) -> Step {
    let sizes = &cx.config.sweep.mimo_sizes;
    let squint = mimo_scaling_experiment(sizes, s, true)?;
    let broadside = mimo_scaling_experiment(sizes, s, false)?;
    let mut t = Table::new(&["n", "squint", "g_sig_avg", "eta_bsq_avg", "rmse_m", "snr_crit_directional"]);
    for (run, on) in [(&squint, true), (&broadside, false)] {
        for r in &run.rows {
            t.push(row![r.n, on, r.g_sig_avg, r.eta_bsq_avg, r.rmse_m, r.snr_crit_directional]);
        }
    }
    let mut f = Table::new(&["run", "quantity", "slope", "intercept", "r_squared", "slope_stderr"]);
    fit_row(&mut f, "squint", "rmse_m", &squint.rmse_fit);
    fit_row(&mut f, "squint", "snr_crit_directional", &squint.snr_crit_fit);
    fit_row(&mut f, "broadside", "rmse_m", &broadside.rmse_fit);
    fit_row(&mut f, "broadside", "snr_crit_directional", &broadside.snr_crit_fit);
    sum.put("sizes", format!("{sizes:?}"));
    sum.put("rmse_slope_squint", format!("{:.4}", squint.rmse_fit.slope));
    sum.put("rmse_slope_broadside", format!("{:.4}", broadside.rmse_fit.slope));
    sum.put("snr_crit_slope_squint", format!("{:.4}", squint.snr_crit_fit.slope));
    sum.put("snr_crit_slope_broadside", format!("{:.3e}", broadside.snr_crit_fit.slope));
    Ok((|| {
        let p = sink.csv("mimo_scaling.csv", &t)?;
        sink.csv("mimo_fits.csv", &f)?;
        let spec = PlotSpec::new(PlotKind::LogLog, "Ranging RMSE vs array size", "n", &["rmse_m"]).labels("N = N_t = N_r", "range RMSE (m)");
        plot(sink, &p, &spec)
    })())
}

fn ablation_run(cx: &RunContext, s: &Scenario, sink: &mut Sink, sum: &mut Summary) -> Step {
    let sw = &cx.config.sweep;
    let grid = isl_limits::tradeoff::log_grid(sw.alpha_min, sw.alpha_max, sw.ablation_points);
    let rows = ablation(&grid, s, cx.parallel)?;
    let mut t = Table::new(&["alpha", "thermal", "plus_hw", "plus_pn", "plus_dse"]);
    for r in &rows {
        t.push(row![r.alpha, r.thermal, r.plus_hw, r.plus_pn, r.plus_dse]);
    }
    let noise = s.noise_at(sw.sensing_alpha, NoiseToggles::ALL, NoiseConvention::Sense)?;
    let psd = psd_table(&noise);
    let at = rows.iter().min_by(|a, b| (a.alpha - sw.sensing_alpha).abs().total_cmp(&(b.alpha - sw.sensing_alpha).abs())).expect("non-empty");
    sum.put("points", rows.len());
    sum.put(
        "rmse_um_near_alpha",
        format!(
            "alpha {:.3}: thermal {:.3}, +hw {:.3}, +pn {:.3}, +dse {:.3}",
            at.alpha,
            at.thermal * 1e6,
            at.plus_hw * 1e6,
            at.plus_pn * 1e6,
            at.plus_dse * 1e6
        ),
    );
    let df = noise.grid.bin_spacing_hz();
    let c = &noise.components;
    let power = |v: &[f64]| v.iter().sum::<f64>() * df;
    sum.put(
        "psd_band_power_w",
        format!(
            "thermal {:.3e}, distortion {:.3e}, phase noise {:.3e}, dse {:.3e}, rsm {:.3e}",
            power(&c.thermal),
            power(&c.distortion),
            power(&c.phase_noise),
            power(&c.dse),
            power(&c.rsm)
        ),
    );
    Ok((|| {
        let p = sink.csv("ablation.csv", &t)?;
        let spec = PlotSpec::new(PlotKind::LogLog, "Impairment ablation", "alpha", &["thermal", "plus_hw", "plus_pn", "plus_dse"])
            .labels("pilot overhead alpha", "range RMSE (m)");
        plot(sink, &p, &spec)?;
        let q = sink.csv("psd_decomposition.csv", &psd)?;
        let spec = PlotSpec::new(PlotKind::Line, "Sensing noise PSD", "f_offset_hz", &["psd_w_per_hz", "thermal", "distortion", "phase_noise", "dse"])
            .labels("baseband offset (Hz)", "PSD (W/Hz)");
        plot(sink, &q, &spec)
    })())
}

/// Sampled PSD with its additive breakdown.
pub fn psd_table(noise: &NoisePsd) -> Table {
    let mut t = Table::new(&["f_offset_hz", "psd_w_per_hz", "thermal", "distortion", "phase_noise", "dse", "rsm"]);
    let c = &noise.components;
    for (k, f) in noise.grid.frequencies().into_iter().enumerate() {
        t.push(row![f, noise.values[k], c.thermal[k], c.distortion[k], c.phase_noise[k], c.dse[k], c.rsm[k]]);
    }
    t
}

struct Verdicts(Table, usize);

impl Verdicts {
    fn check(&mut self, name: &str, value: f64, criterion: &str, pass: bool) {
        if !pass {
            self.1 += 1;
        }
        self.0.push(row![name, value, criterion, if pass { "pass" } else { "fail" }]);
    }
}

fn validate(cx: &RunContext, s: &Scenario, sink: &mut Sink, sum: &mut Summary) -> isl_limits::Result<CliResult<usize>> {
    let sw = &cx.config.sweep;
    let seed = cx.config.seed;
    let mut v = Verdicts(Table::new(&["check", "value", "criterion", "verdict"]), 0);

    // Whittle against exact information.
    let grid = whittle_validation_grid(&sw.validation, s, cx.parallel)?;
    let mut gt = Table::new(&["l_ap_over_lambda", "b_over_fc", "whittle_j", "exact_j", "rel_error"]);
    for r in &grid.rows {
        gt.push(row![r.l_ap_over_lambda, r.b_over_fc, r.whittle_j, r.exact_j, r.rel_error]);
    }
    v.check("whittle_grid_max_rel_error", grid.max_rel_error, "< 0.02", grid.max_rel_error < 0.02);
    v.check("whittle_grid_trend_b_slope", grid.trend_b.slope, "> 0", grid.trend_b.slope > 0.0);

    // Bussgang Monte Carlo.
    let mut bt = Table::new(&[
        "sigma_sq",
        "n_samples",
        "coeff",
        "coeff_expected",
        "coeff_stderr",
        "distortion_power",
        "distortion_expected",
        "distortion_stderr",
        "cross_re",
        "cross_im",
    ]);
    for (i, &s2) in sw.bussgang_sigma.iter().enumerate() {
        let e = mc_bussgang(s2, &McConfig::new(sw.mc_samples, seed.wrapping_add(i as u64)), cx.parallel)?;
        bt.push(row![
            s2,
            e.n_samples,
            e.coeff,
            e.coeff_expected,
            e.coeff_stderr,
            e.distortion_power,
            e.distortion_expected,
            e.distortion_stderr,
            e.cross[0],
            e.cross[1]
        ]);
        v.check(&format!("bussgang_sigma_sq_{s2}"), e.max_z(), "|z| <= 3", e.within(3.0));
    }

    // Single counting of phase noise between the two conventions.
    let rows = spectral_consistency_suite(sw.consistency_models, seed, s.grid()?, s.p_sig_ref()?)?;
    let mut ct = Table::new(&["k2", "k3", "floor", "loop_bw_hz", "f_min_hz", "variance", "added", "rel_error"]);
    for r in &rows {
        ct.push(row![r.model.k2, r.model.k3, r.model.floor, r.model.loop_bw_hz, r.model.f_min_hz, r.variance, r.added, r.rel_error]);
    }
    let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    v.check("spectral_consistency_max_rel_error", worst, "< 1e-6", worst < 1e-6);

    // Power laws and crossover.
    let model = s.resource.resolved()?;
    let ag = isl_limits::tradeoff::log_grid(0.01, 1.0, sw.alpha_points);
    let pn: Vec<f64> = ag.iter().map(|&a| sigma_pn_var(a, &model)).collect::<isl_limits::Result<_>>()?;
    let dse: Vec<f64> = ag.iter().map(|&a| sigma_dse_var(a, &model)).collect::<isl_limits::Result<_>>()?;
    let m_pn = slope_fit(&ag, &pn)?.slope;
    let m_dse = slope_fit(&ag, &dse)?.slope;
    v.check("sigma_pn_slope", m_pn, "-1 +- 1e-6", (m_pn + 1.0).abs() < 1e-6);
    v.check("sigma_dse_slope", m_dse, "-5 +- 1e-6", (m_dse + 5.0).abs() < 1e-6);
    let star = alpha_star(&model)?;
    let bal = (sigma_pn_var(star.alpha, &model)? / sigma_dse_var(star.alpha, &model)? - 1.0).abs();
    v.check("crossover_balance", bal, "< 1e-12", bal < 1e-12);

    // Closed form on a flat spectrum in white noise.
    let (e0, n0, b) = (1.0, 1.0, s.array.bandwidth_hz);
    let closed = fim_awgn_closed(e0, n0, b);
    let g4 = isl_limits::noise::SpectralGrid::new(4096, b)?;
    let w = whittle_fim_tau(&SensingSignalSpec::flat(g4, e0)?, &NoisePsd::white(g4, n0, NoiseConvention::Sense)?)?.j_tau_tau;
    let g2 = isl_limits::noise::SpectralGrid::new(2048, b)?;
    let x = exact_time_fim(&SensingSignalSpec::flat(g2, e0)?, &NoisePsd::white(g2, n0, NoiseConvention::Sense)?, false)?.j_tau_tau;
    v.check("awgn_whittle_rel_error", (w / closed - 1.0).abs(), "< 1e-3", (w / closed - 1.0).abs() < 1e-3);
    v.check("awgn_exact_rel_error", (x / closed - 1.0).abs(), "< 5e-3", (x / closed - 1.0).abs() < 5e-3);

    // Jensen ordering on random links.
    let jr = jensen_ordering_suite(1000, seed, cx.parallel)?;
    let bad = jr.iter().filter(|r| !r.ordered()).count();
    v.check("jensen_violations", bad as f64, "== 0 of 1000", bad == 0);

    let failed = v.1;
    let n = v.0.rows.len();
    sum.put("whittle_grid_points", grid.rows.len());
    sum.put("whittle_grid_max_rel_error", format!("{:.4}%", 100.0 * grid.max_rel_error));
    sum.put("whittle_trend_b_slope", format!("{:.4e}", grid.trend_b.slope));
    sum.put("checks", format!("{} passed, {failed} failed", n - failed));
    for r in &v.0.rows {
        if r[3].render() == "fail" {
            sum.put("FAIL", format!("{} = {} ({})", r[0].render(), r[1].render(), r[2].render()));
        }
    }
    Ok((|| {
        let p = sink.csv("validation_grid.csv", &gt)?;
        sink.csv("bussgang.csv", &bt)?;
        sink.csv("consistency.csv", &ct)?;
        sink.csv("verdicts.csv", &v.0)?;
        let spec = PlotSpec::new(PlotKind::Line, "Whittle relative error", "b_over_fc", &["rel_error"])
            .labels("B/f_c", "relative error")
            .hline("2%", 0.02);
        plot(sink, &p, &spec)?;
        Ok(failed)
    })())
}
