use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// One CSV cell. Floats are written in scientific notation with nine
/// significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::F(x) if x.is_finite() => format!("{x:.8e}"),
            Cell::F(x) if x.is_nan() => "nan".into(),
            Cell::F(x) => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}
impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::I(i64::from(x))
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

/// Build a row from a list of values convertible to [`Cell`].
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$($crate::output::Cell::from($v)),*] };
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(experiment: &str, config_hash: String, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Output directory of one experiment, collecting written file names.
#[derive(Debug)]
pub struct Sink {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

impl Sink {
    pub fn create(root: &Path, manifest: RunManifest) -> CliResult<Self> {
        let dir = root.join(&manifest.experiment);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir, manifest })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> CliResult<PathBuf> {
        let p = self.path(name);
        table.write_csv(&p)?;
        self.manifest.outputs.push(name.into());
        Ok(p)
    }

    pub fn text(&mut self, name: &str, body: &str) -> CliResult<PathBuf> {
        let p = self.path(name);
        fs::write(&p, body).map_err(|e| CliError::io(&p, e))?;
        self.manifest.outputs.push(name.into());
        Ok(p)
    }

    /// Record a file written by someone else.
    pub fn record(&mut self, name: &str) {
        self.manifest.outputs.push(name.into());
    }

    pub fn finish(self) -> CliResult<RunManifest> {
        self.manifest.write(&self.dir)?;
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(Cell::F(7.370_123_456_7).render(), "7.37012346e0");
        assert_eq!(Cell::F(-2.5e-6).render(), "-2.50000000e-6");
        assert_eq!(Cell::F(f64::INFINITY).render(), "inf");
        assert_eq!(Cell::F(0.0).render(), "0.00000000e0");
    }
}
