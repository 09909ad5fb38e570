//! Files written by the subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Accumulates a CSV whose first line is `# config_hash=<hex>`.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config_hash: &str, header: &str) -> Self {
        Csv {
            text: format!("# config_hash={config_hash}\n{header}\n"),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn comment(&mut self, line: &str) {
        self.text.push_str("# ");
        self.text.push_str(line);
        self.text.push('\n');
    }

    /// Starts a second table in the same file.
    pub fn section(&mut self, title: &str, header: &str) {
        self.comment(title);
        self.text.push_str(header);
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = create(path)?;
        w.write_all(self.text.as_bytes()).map_err(io_err(path))?;
        w.flush().map_err(io_err(path))
    }
}

/// Shortest round-tripping decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub base_seed: u64,
    pub loggas_version: &'static str,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub outputs: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn write_manifest(out: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let path = manifest_path(out);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, manifest).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e.into(),
    })?;
    writeln!(w).map_err(io_err(&path))?;
    w.flush().map_err(io_err(&path))
}

/// Histogram of `values` on `[lo, hi)` as a standalone SVG bar chart.
pub fn histogram_svg(values: &[f64], lo: f64, hi: f64, bins: usize, title: &str, config_hash: &str) -> String {
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v >= lo && v < hi {
            let b = (((v - lo) / (hi - lo)) * bins as f64) as usize;
            counts[b.min(bins - 1)] += 1;
        }
    }
    let width = 640.0;
    let height = 400.0;
    let margin = 40.0;
    let bin_width = (hi - lo) / bins as f64;
    let total = values.len().max(1) as f64;
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 / (total * bin_width)).collect();
    let top = density.iter().copied().fold(0.0, f64::max).max(1e-12);
    let bar = (width - 2.0 * margin) / bins as f64;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\">\n\
         <!-- config_hash={config_hash} -->\n\
         <text x=\"{margin}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n"
    );
    for (i, d) in density.iter().enumerate() {
        let h = d / top * (height - 2.0 * margin);
        let x = margin + i as f64 * bar;
        let y = height - margin - h;
        svg.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"steelblue\"/>\n",
            bar * 0.95
        ));
    }
    svg.push_str(&format!(
        "<line x1=\"{margin}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <text x=\"{margin}\" y=\"{2}\" font-family=\"sans-serif\" font-size=\"12\">{lo}</text>\n\
         <text x=\"{3}\" y=\"{2}\" font-family=\"sans-serif\" font-size=\"12\">{hi}</text>\n</svg>\n",
        height - margin,
        width - margin,
        height - margin + 16.0,
        width - margin - 10.0,
    ));
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/eq.csv")), PathBuf::from("out/eq.csv.manifest.json"));
    }

    #[test]
    fn histogram_has_one_bar_per_bin() {
        let svg = histogram_svg(&[0.5, 1.5, 1.6, 9.0], 0.0, 4.0, 4, "t", "ab");
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains("config_hash=ab"));
    }
}
