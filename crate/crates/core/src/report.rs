//! Report persistence: deterministic CSV time series, JSON summaries with a
//! config echo and build stamp, and simple SVG line plots.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::Serialize;
use serde_json::json;

use crate::error::Result;

/// 17-significant-digit float formatting; round-trips f64 exactly and keeps
/// CSV output byte-identical across runs.
pub fn fmt_float(x: f64) -> String {
    format!("{:.16e}", x)
}

/// A rectangular CSV table with a fixed column order.
#[derive(Debug, Clone, Serialize)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        CsvTable {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|x| fmt_float(*x)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Build stamp for JSON summaries: package version plus the git revision when
/// the binary was built inside a checkout.
pub fn build_stamp() -> String {
    match option_env!("LOWMACH_GIT_DESCRIBE") {
        Some(rev) => format!("lowmach-{}+{}", env!("CARGO_PKG_VERSION"), rev),
        None => format!("lowmach-{}", env!("CARGO_PKG_VERSION")),
    }
}

/// Writer for one experiment's output files under a directory.
pub struct ReportWriter {
    dir: PathBuf,
    name: String,
    formats: Vec<String>,
    started: SystemTime,
}

impl ReportWriter {
    pub fn new(dir: impl AsRef<Path>, name: &str, formats: &[String]) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(ReportWriter {
            dir,
            name: name.to_string(),
            formats: formats.to_vec(),
            started: SystemTime::now(),
        })
    }

    fn wants(&self, fmt: &str) -> bool {
        self.formats.iter().any(|f| f == fmt)
    }

    pub fn path(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.name))
    }

    pub fn write_csv(&self, table: &CsvTable) -> Result<Option<PathBuf>> {
        if !self.wants("csv") {
            return Ok(None);
        }
        let path = self.path("csv");
        fs::write(&path, table.to_csv())?;
        Ok(Some(path))
    }

    pub fn write_raw_csv(&self, suffix: &str, content: &str) -> Result<Option<PathBuf>> {
        if !self.wants("csv") {
            return Ok(None);
        }
        let path = self.dir.join(format!("{}_{suffix}.csv", self.name));
        fs::write(&path, content)?;
        Ok(Some(path))
    }

    /// JSON summary: `{name, pass, build, wall_seconds, config, details}`.
    pub fn write_summary<C: Serialize, D: Serialize>(
        &self,
        pass: bool,
        config: &C,
        details: &D,
    ) -> Result<Option<PathBuf>> {
        if !self.wants("json") {
            return Ok(None);
        }
        let wall = self.started.elapsed().map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let doc = json!({
            "name": self.name,
            "pass": pass,
            "build": build_stamp(),
            "wall_seconds": wall,
            "config": config,
            "details": details,
        });
        let path = self.path("json");
        let mut f = fs::File::create(&path)?;
        writeln!(f, "{}", serde_json::to_string_pretty(&doc)?)?;
        Ok(Some(path))
    }

    pub fn write_plot(&self, plot: &LinePlot) -> Result<Option<PathBuf>> {
        if !self.wants("svg") {
            return Ok(None);
        }
        let path = self.path("svg");
        fs::write(&path, plot.render())?;
        Ok(Some(path))
    }
}

/// Minimal SVG line plot: one or more named series, linear or log axes.
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

impl LinePlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        LinePlot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn loglog(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn add_series(&mut self, name: &str, points: &[(f64, f64)]) {
        self.series.push((name.to_string(), points.to_vec()));
    }

    fn map(&self, v: f64, log: bool) -> Option<f64> {
        if log {
            if v > 0.0 {
                Some(v.log10())
            } else {
                None
            }
        } else {
            Some(v)
        }
    }

    pub fn render(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 420.0;
        const ML: f64 = 70.0;
        const MR: f64 = 20.0;
        const MT: f64 = 40.0;
        const MB: f64 = 55.0;
        let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

        let mut pts: Vec<Vec<(f64, f64)>> = Vec::new();
        for (_, series) in &self.series {
            let mapped: Vec<(f64, f64)> = series
                .iter()
                .filter_map(|&(x, y)| Some((self.map(x, self.log_x)?, self.map(y, self.log_y)?)))
                .collect();
            pts.push(mapped);
        }
        let all: Vec<(f64, f64)> = pts.iter().flatten().copied().collect();
        let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
        if !all.is_empty() {
            x0 = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            x1 = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            y0 = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            y1 = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            if x1 == x0 {
                x1 = x0 + 1.0;
            }
            if y1 == y0 {
                y1 = y0 + 1.0;
            }
            let pad = 0.05 * (y1 - y0);
            y0 -= pad;
            y1 += pad;
        }
        let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
        let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\">{}</text>\n",
            W / 2.0,
            xml_escape(&self.title)
        ));
        // axes
        svg.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MB,
            W - MR,
            H - MB
        ));
        svg.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MB
        ));
        let fmt_tick = |v: f64, log: bool| {
            if log {
                format!("1e{v:.1}")
            } else {
                format!("{v:.3}")
            }
        };
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">{}</text>\n",
                sx(fx),
                H - MB + 16.0,
                fmt_tick(fx, self.log_x)
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">{}</text>\n",
                ML - 6.0,
                sy(fy) + 3.0,
                fmt_tick(fy, self.log_y)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">{}</text>\n",
            (ML + W - MR) / 2.0,
            H - 12.0,
            xml_escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            (MT + H - MB) / 2.0,
            (MT + H - MB) / 2.0,
            xml_escape(&self.y_label)
        ));
        for (si, ((name, _), mapped)) in self.series.iter().zip(&pts).enumerate() {
            let color = palette[si % palette.len()];
            let path: Vec<String> = mapped
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            if !path.is_empty() {
                svg.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                    path.join(" ")
                ));
            }
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\" fill=\"{color}\">{}</text>\n",
                W - MR - 150.0,
                MT + 14.0 * (si as f64 + 1.0),
                xml_escape(name)
            ));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
