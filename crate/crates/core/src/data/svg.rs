use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::clustering::Clustering;
use crate::data::Dataset;
use crate::error::{Error, Result};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// Renders a standalone SVG scatter plot colored by cluster label.
pub fn render_svg_scatter(dataset: &Dataset, clustering: &Clustering) -> Result<String> {
    if dataset.dim() != 2 && !dataset.is_empty() {
        return Err(Error::NotTwoDimensional(dataset.dim()));
    }
    if clustering.n_points() != dataset.len() {
        return Err(Error::invalid(format!(
            "clustering covers {} points but the dataset has {}",
            clustering.n_points(),
            dataset.len()
        )));
    }
    let (x0, x1) = extent(dataset.points.iter().map(|p| p.coords()[0]));
    let (y0, y1) = extent(dataset.points.iter().map(|p| p.coords()[1]));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<title>{} ({} clusters)</title>"#, escape(&dataset.name), clustering.len());
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" style="fill:white"/>"#);
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/>"#);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}"/>"#);
    for x in [left, right] {
        let _ = writeln!(s, r#"<line x1="{x}" y1="{bottom}" x2="{x}" y2="{}"/>"#, bottom + 5.0);
    }
    for y in [bottom, top] {
        let _ = writeln!(s, r#"<line x1="{}" y1="{y}" x2="{left}" y2="{y}"/>"#, left - 5.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<text x="{left}" y="{}" text-anchor="middle">{x0:.3}</text>"#, bottom + 20.0);
    let _ = writeln!(s, r#"<text x="{right}" y="{}" text-anchor="middle">{x1:.3}</text>"#, bottom + 20.0);
    let _ = writeln!(s, r#"<text x="{}" y="{bottom}" text-anchor="end" dominant-baseline="middle">{y0:.3}</text>"#, left - 8.0);
    let _ = writeln!(s, r#"<text x="{}" y="{top}" text-anchor="end" dominant-baseline="middle">{y1:.3}</text>"#, left - 8.0);
    for (i, p) in dataset.points.iter().enumerate() {
        let color = PALETTE[clustering.label_of(i) % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
            sx(p.coords()[0]),
            sy(p.coords()[1])
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_svg_scatter(dataset: &Dataset, clustering: &Clustering, path: &Path) -> Result<()> {
    let svg = render_svg_scatter(dataset, clustering)?;
    fs::write(path, svg).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
