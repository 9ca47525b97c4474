//! Self-contained gnuplot scripts next to each CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Line,
    LogLog,
    /// Scatter of all points plus the frontier polyline from a second CSV.
    Pareto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefLine {
    pub label: String,
    pub value: f64,
}

impl RefLine {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        Self { label: label.into(), value }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
    pub xlabel: String,
    pub ylabel: String,
    pub vertical: Vec<RefLine>,
    pub horizontal: Vec<RefLine>,
    /// Frontier CSV for [`PlotKind::Pareto`], same columns as the main file.
    pub frontier: Option<PathBuf>,
    /// Script file stem; defaults to the CSV stem.
    pub stem: Option<String>,
}

impl PlotSpec {
    pub fn new(kind: PlotKind, title: &str, x: &str, ys: &[&str]) -> Self {
        Self {
            kind,
            title: title.into(),
            x: x.into(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            xlabel: x.into(),
            ylabel: ys.join(", "),
            vertical: Vec::new(),
            horizontal: Vec::new(),
            frontier: None,
            stem: None,
        }
    }

    pub fn labels(mut self, x: &str, y: &str) -> Self {
        self.xlabel = x.into();
        self.ylabel = y.into();
        self
    }

    pub fn stem(mut self, stem: &str) -> Self {
        self.stem = Some(stem.into());
        self
    }

    pub fn vline(mut self, label: &str, value: f64) -> Self {
        self.vertical.push(RefLine::new(label, value));
        self
    }

    pub fn hline(mut self, label: &str, value: f64) -> Self {
        self.horizontal.push(RefLine::new(label, value));
        self
    }
}

fn header(csv: &Path) -> CliResult<Vec<String>> {
    let mut r = csv::Reader::from_path(csv)?;
    Ok(r.headers()?.iter().map(str::to_string).collect())
}

fn column(cols: &[String], csv: &Path, name: &str) -> CliResult<usize> {
    cols.iter()
        .position(|c| c == name)
        .map(|i| i + 1)
        .ok_or_else(|| CliError::MissingColumn { csv: csv.to_path_buf(), column: name.to_string() })
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Write `<csv stem>.gp` beside `csv` and return its path. The script refers
/// to the CSV by file name, so run it from the output directory.
pub fn emit_plot_description(csv: &Path, spec: &PlotSpec) -> CliResult<PathBuf> {
    let cols = header(csv)?;
    let xi = column(&cols, csv, &spec.x)?;
    let yis = spec.ys.iter().map(|y| column(&cols, csv, y)).collect::<CliResult<Vec<_>>>()?;
    if let Some(f) = &spec.frontier {
        let fcols = header(f)?;
        column(&fcols, f, &spec.x)?;
        for y in &spec.ys {
            column(&fcols, f, y)?;
        }
    }

    let data = file_name(csv);
    let base = match &spec.stem {
        Some(stem) => csv.with_file_name(stem),
        None => csv.with_extension(""),
    };
    let out = base.with_extension("gp");
    let png = file_name(&base.with_extension("png"));
    let mut s = String::new();
    let _ = writeln!(s, "# {}", spec.title);
    let _ = writeln!(s, "# data: {data}");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{png}'");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set title '{}'", spec.title);
    let _ = writeln!(s, "set xlabel '{}'", spec.xlabel);
    let _ = writeln!(s, "set ylabel '{}'", spec.ylabel);
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "set key outside right");
    if spec.kind == PlotKind::LogLog {
        let _ = writeln!(s, "set logscale xy");
        let _ = writeln!(s, "set format x '10^{{%L}}'");
        let _ = writeln!(s, "set format y '10^{{%L}}'");
    }
    for (i, v) in spec.vertical.iter().enumerate() {
        let _ = writeln!(
            s,
            "set arrow {} from {:e}, graph 0 to {:e}, graph 1 nohead dashtype 2 lc rgb 'black'",
            i + 1,
            v.value,
            v.value
        );
        let _ = writeln!(s, "set label {} '{}' at {:e}, graph 0.95 offset 0.5,0", i + 1, v.label, v.value);
    }
    let mut plots: Vec<String> = Vec::new();
    let style = if spec.kind == PlotKind::Pareto { "points pt 7 ps 0.6" } else { "lines lw 2" };
    for (y, yi) in spec.ys.iter().zip(&yis) {
        plots.push(format!("'{data}' using {xi}:{yi} skip 1 with {style} title '{y}'"));
    }
    if let (PlotKind::Pareto, Some(f)) = (spec.kind, &spec.frontier) {
        let fcols = header(f)?;
        let fx = column(&fcols, f, &spec.x)?;
        for y in &spec.ys {
            let fy = column(&fcols, f, y)?;
            plots.push(format!("'{}' using {fx}:{fy} skip 1 with linespoints lw 2 pt 5 title 'frontier'", file_name(f)));
        }
    }
    for h in &spec.horizontal {
        plots.push(format!("{:e} with lines dashtype 3 lc rgb 'gray30' title '{}'", h.value, h.label));
    }
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    fs::write(&out, s).map_err(|e| CliError::io(&out, e))?;
    Ok(out)
}
