//! CSV and SVG artifact writers. CSV is the contract: header row
//! mandatory, fixed float formatting, fixed row order. SVG plots repeat
//! data already present in the CSV and are gated behind `--svg`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::CliResult;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)
            .map_err(|e| format!("cannot create output dir {}: {e}", root.display()))?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn write_csv(
        &self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        let mut text = String::new();
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    }

    pub fn write_svg_series(
        &self,
        name: &str,
        title: &str,
        series: &[(&str, &[(f64, f64)])],
    ) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, render_svg(title, series))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    }
}

pub fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Minimal line plot: log2 x-axis, linear y, one polyline per series.
fn render_svg(title: &str, series: &[(&str, &[(f64, f64)])]) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 400.0, 60.0, 20.0, 30.0, 40.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, data)| data.iter().map(|(x, y)| (x.max(1.0).log2(), *y)))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y1 = y0 + 1.0;
        y0 -= 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| ml + (x.max(1.0).log2() - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n",
        w / 2.0
    );
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#333\"/>\n\
         <line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{0}\" stroke=\"#333\"/>\n",
        h - mb,
        w - mr
    ));
    for (ti, (y, label)) in [(y0, format!("{y0:.3e}")), (y1, format!("{y1:.3e}"))]
        .iter()
        .enumerate()
    {
        let _ = ti;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{label}</text>\n",
            ml - 4.0,
            sy(*y) + 3.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">log2 N</text>\n",
        (ml + w - mr) / 2.0,
        h - 8.0
    ));
    for (i, (label, data)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = data
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{label}</text>\n",
            w - mr - 120.0,
            mt + 14.0 * (i + 1) as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
