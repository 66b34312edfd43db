//! Output directory, manifest, tables and plots.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Environment variable that replaces the output directory.
pub const OUT_ENV: &str = "PHASEFIELD_OUT";
/// Version of the CSV column layouts.
pub const CSV_VERSION: u32 = 1;

/// `PHASEFIELD_OUT` if set, else `--out`, else `runs/<command>`.
pub fn resolve_out_dir(flag: Option<&Path>, command: &str) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => flag.map(Path::to_path_buf).unwrap_or_else(|| Path::new("runs").join(command)),
    }
}

/// Written before any computation starts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of `config.json`, hex encoded.
    pub config_hash: String,
    pub seed0: u64,
    pub tool_version: String,
    pub csv_version: u32,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Single writer for one run directory.
pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn create(path: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&path)?;
        Ok(RunDir { path })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let mut f = fs::File::create(self.file(name))?;
        f.write_all(bytes)?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut v = serde_json::to_vec_pretty(value)?;
        v.push(b'\n');
        self.write_bytes(name, &v)
    }

    /// Writes `config.json` and `manifest.json`; returns the manifest.
    pub fn start(&self, command: &str, config_bytes: &[u8], seed0: u64, outputs: &[&str]) -> Result<RunManifest, CliError> {
        self.write_bytes("config.json", config_bytes)?;
        let manifest = RunManifest {
            command: command.to_string(),
            config_hash: sha256_hex(config_bytes),
            seed0,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            csv_version: CSV_VERSION,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(manifest)
    }

    /// CSV with a fixed header; rows are formatted by the caller.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(self.file(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Whitespace-separated columns with a `#` header, for gnuplot.
    pub fn write_dat(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let mut s = format!("# {}\n", header.join(" "));
        for r in rows {
            let cells: Vec<String> = r.iter().map(|v| fmt(*v)).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        self.write_bytes(name, s.as_bytes())
    }
}

/// Shortest round-trip rendering; `inf`, `-inf` and `nan` spelled out.
pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// `x` with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return fmt(x);
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// One polyline of a plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Minimal SVG line plot. Non-finite points and, on log axes, nonpositive
/// coordinates are dropped.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>], log_x: bool, log_y: bool) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let ty = |v: f64| if log_y { v.log10() } else { v };
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!log_x || x > 0.0) && (!log_y || y > 0.0);
    let pts: Vec<Vec<(f64, f64)>> =
        series.iter().map(|s| s.points.iter().filter(|p| keep(p)).map(|&(x, y)| (tx(x), ty(y))).collect()).collect();
    let all: Vec<&(f64, f64)> = pts.iter().flatten().collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &&(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if all.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{}</text>\n\
         <line x1=\"{M}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{}\" stroke=\"black\"/>\n",
        W / 2.0,
        escape(title),
        H - M,
        W - M,
        H - M,
        H - M
    );
    let lx = if log_x { format!("log10 {x_label}") } else { x_label.to_string() };
    let ly = if log_y { format!("log10 {y_label}") } else { y_label.to_string() };
    s += &format!("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", W / 2.0, H - 15.0, escape(&lx));
    s += &format!("<text x=\"15\" y=\"{}\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\">{}</text>\n", H / 2.0, H / 2.0, escape(&ly));
    for (v, anchor, x, y) in [(x0, "start", M, H - M + 15.0), (x1, "end", W - M, H - M + 15.0)] {
        s += &format!("<text x=\"{x}\" y=\"{y}\" text-anchor=\"{anchor}\">{:.3}</text>\n", v);
    }
    for (v, y) in [(y0, H - M), (y1, M)] {
        s += &format!("<text x=\"{}\" y=\"{y}\" text-anchor=\"end\">{:.3}</text>\n", M - 4.0, v);
    }
    for (k, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let c = COLORS[k % COLORS.len()];
        let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        s += &format!("<polyline fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\" points=\"{}\"/>\n", path.join(" "));
        for &(x, y) in p {
            s += &format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{c}\"/>\n", px(x), py(y));
        }
        s += &format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{c}\">{}</text>\n",
            W - M - 150.0,
            M + 15.0 * k as f64,
            escape(ser.label)
        );
    }
    s += "</svg>\n";
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(1.885_618_083), "1.88562");
        assert_eq!(sig6(2.921_186_97), "2.92119");
        assert_eq!(sig6(12_227.921), "12227.9");
        assert_eq!(sig6(0.000_123_456_78), "0.000123457");
    }

    #[test]
    fn svg_is_well_formed_with_empty_series() {
        let s = svg_plot("t", "x", "y", &[Series { label: "a", points: vec![(0.0, -1.0)] }], true, true);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
    }
}
