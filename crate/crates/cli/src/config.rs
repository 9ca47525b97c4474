//! Experiment configuration in TOML.
//!
//! Loading goes preset, then file, then `--set` overrides: the tier preset is
//! serialized to a TOML table, the file is deep-merged over it, dotted
//! `key=value` pairs are applied last and the result is deserialized with
//! unknown keys rejected. The config hash is the SHA-256 of the compact JSON
//! form of the resolved config (object keys sorted).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use isl_limits::model::{ArrayConfig, HardwareProfile};
use isl_limits::noise::{PhaseNoiseModel, RsmModel};
use isl_limits::scenario::{LinkSettings, Overrides, Scenario, SensingSettings, Tier};
use isl_limits::tradeoff::ResourceModel;
use isl_limits::validation::ValidationGridSpec;

use crate::error::{CliError, CliResult};

/// Grids and sample counts for the experiment suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub snr_db_min: f64,
    pub snr_db_max: f64,
    pub snr_db_step: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_points: usize,
    /// Pilot overhead used by the sensing sweep.
    pub sensing_alpha: f64,
    pub ablation_points: usize,
    pub mimo_sizes: Vec<u32>,
    pub validation: ValidationGridSpec,
    pub mc_samples: usize,
    pub bussgang_sigma: Vec<f64>,
    pub consistency_models: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            snr_db_min: -20.0,
            snr_db_max: 20.0,
            snr_db_step: 0.5,
            alpha_min: 0.01,
            alpha_max: 1.0,
            alpha_points: 200,
            sensing_alpha: 0.1,
            ablation_points: 40,
            mimo_sizes: vec![16, 32, 64, 128, 256],
            validation: ValidationGridSpec::default(),
            mc_samples: 1_000_000,
            bussgang_sigma: vec![0.01, 0.1, 0.5],
            consistency_models: 100,
        }
    }
}

impl SweepSettings {
    pub fn snr_grid(&self) -> Vec<f64> {
        let n = ((self.snr_db_max - self.snr_db_min) / self.snr_db_step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.snr_db_min + i as f64 * self.snr_db_step).collect()
    }

    pub fn alpha_grid(&self) -> Vec<f64> {
        isl_limits::tradeoff::log_grid(self.alpha_min, self.alpha_max, self.alpha_points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tier: Tier,
    pub seed: u64,
    pub array: ArrayConfig,
    pub hardware: HardwareProfile,
    pub tracking: PhaseNoiseModel,
    pub resource: ResourceModel,
    pub rsm: RsmModel,
    #[serde(default)]
    pub overrides: Overrides,
    pub link: LinkSettings,
    pub sensing: SensingSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl ExperimentConfig {
    pub fn preset(tier: Tier) -> Self {
        Self::from_scenario(Scenario::preset(tier), DEFAULT_SEED)
    }

    pub fn from_scenario(s: Scenario, seed: u64) -> Self {
        Self {
            tier: s.tier,
            seed,
            array: s.array,
            hardware: s.hardware,
            tracking: s.tracking,
            resource: s.resource,
            rsm: s.rsm,
            overrides: s.overrides,
            link: s.link,
            sensing: s.sensing,
            sweep: SweepSettings::default(),
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            tier: self.tier,
            array: self.array,
            hardware: self.hardware,
            tracking: self.tracking,
            resource: self.resource,
            rsm: self.rsm,
            overrides: self.overrides,
            link: self.link,
            sensing: self.sensing,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    /// SHA-256 over the sorted-key compact JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&serde_json::to_value(self).expect("config serializes to JSON"))
            .expect("JSON value serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }

    fn check(&self) -> CliResult<()> {
        self.scenario().validate().map_err(|e| CliError::config("<scenario>", e))?;
        let sw = &self.sweep;
        if !(sw.snr_db_step > 0.0 && sw.snr_db_max >= sw.snr_db_min) {
            return Err(CliError::config("sweep.snr_db_step", "need step > 0 and max >= min"));
        }
        if !(sw.alpha_min > 0.0 && sw.alpha_max <= 1.0 && sw.alpha_min < sw.alpha_max && sw.alpha_points >= 3) {
            return Err(CliError::config("sweep.alpha_*", "need 0 < min < max <= 1 and at least 3 points"));
        }
        if !(sw.sensing_alpha > 0.0 && sw.sensing_alpha <= 1.0) {
            return Err(CliError::config("sweep.sensing_alpha", "must lie in (0, 1]"));
        }
        if sw.mimo_sizes.len() < 3 {
            return Err(CliError::config("sweep.mimo_sizes", "need at least 3 array sizes"));
        }
        if sw.mc_samples < 1000 {
            return Err(CliError::config("sweep.mc_samples", "need at least 1000 samples"));
        }
        Ok(())
    }
}

/// Command-line inputs to [`load`].
#[derive(Debug, Clone, Default)]
pub struct LoadOptions<'a> {
    pub path: Option<&'a Path>,
    pub tier: Option<Tier>,
    pub seed: Option<u64>,
    pub sets: &'a [String],
}

pub fn parse_tier(s: &str) -> CliResult<Tier> {
    Tier::parse(s).ok_or_else(|| CliError::config("tier", format!("unknown tier `{s}` (baseline, low_cost, ideal, custom)")))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn apply_set(table: &mut toml::Table, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(assignment, "expected key=value"))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(key, "empty key segment"));
    }
    let mut t = table;
    for p in &parts[..parts.len() - 1] {
        let entry = t.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry.as_table_mut().ok_or_else(|| CliError::config(key, format!("`{p}` is not a table")))?;
    }
    t.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

pub fn load(opts: &LoadOptions) -> CliResult<ExperimentConfig> {
    let file = match opts.path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Some(toml::from_str::<toml::Table>(&text).map_err(|e| CliError::config(p.display().to_string(), e.message()))?)
        }
        None => None,
    };
    let tier = match (opts.tier, file.as_ref().and_then(|f| f.get("tier"))) {
        (Some(t), _) => t,
        (None, Some(toml::Value::String(s))) => parse_tier(s)?,
        (None, Some(_)) => return Err(CliError::config("tier", "must be a string")),
        (None, None) => Tier::Baseline,
    };
    let mut table = toml::Table::try_from(ExperimentConfig::preset(tier)).expect("preset serializes to TOML");
    if let Some(f) = file {
        merge(&mut table, f);
    }
    table.insert("tier".into(), toml::Value::String(tier.name().into()));
    for s in opts.sets {
        apply_set(&mut table, s)?;
    }
    if let Some(seed) = opts.seed {
        table.insert("seed".into(), toml::Value::Integer(seed as i64));
    }
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(toml::Value::Table(table))
        .map_err(|e| CliError::config(e.path().to_string(), e.inner().message()))?;
    cfg.check()?;
    Ok(cfg)
}
