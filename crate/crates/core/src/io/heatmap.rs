//! Standalone SVG heatmaps of one channel over the sample grid.
//!
//! Each grid cell becomes a rectangle colored by one of 256 palette levels;
//! equal neighbours along a row are merged. Absent cells are left as the
//! background. The outer boundary and the core circles are drawn on top and
//! a color bar carries the scale.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use super::channel::Channel;
use super::table::FieldGrid;
use crate::domain::{OuterBoundary, PerforatedDomain};
use crate::error::Result;

pub const LEVELS: usize = 256;
pub const BACKGROUND: &str = "#ffffff";
const MARGIN: f64 = 20.0;
const TITLE: f64 = 28.0;
const BAR_WIDTH: f64 = 18.0;
const LEGEND: f64 = 120.0;

const ANCHORS: [[f64; 3]; 9] = [
    [68.0, 1.0, 84.0],
    [71.0, 44.0, 122.0],
    [59.0, 81.0, 139.0],
    [44.0, 113.0, 142.0],
    [33.0, 144.0, 141.0],
    [39.0, 173.0, 129.0],
    [92.0, 200.0, 99.0],
    [170.0, 220.0, 50.0],
    [253.0, 231.0, 37.0],
];

/// Perceptually ordered palette, dark (low) to bright (high).
pub fn palette() -> &'static [[u8; 3]; LEVELS] {
    static P: OnceLock<[[u8; 3]; LEVELS]> = OnceLock::new();
    P.get_or_init(|| {
        let mut p = [[0u8; 3]; LEVELS];
        for (k, c) in p.iter_mut().enumerate() {
            let s = k as f64 / (LEVELS - 1) as f64 * (ANCHORS.len() - 1) as f64;
            let i = (s.floor() as usize).min(ANCHORS.len() - 2);
            let t = s - i as f64;
            for ch in 0..3 {
                c[ch] = (ANCHORS[i][ch] + t * (ANCHORS[i + 1][ch] - ANCHORS[i][ch])).round() as u8;
            }
        }
        p
    })
}

pub fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Range of the finite values; a degenerate range is widened by one on each side.
pub fn color_range(values: &[Option<f64>]) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .iter()
        .flatten()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    Some(if lo == hi { (lo - 1.0, hi + 1.0) } else { (lo, hi) })
}

pub fn level(v: f64, lo: f64, hi: f64) -> usize {
    (((v - lo) / (hi - lo)) * (LEVELS - 1) as f64).round().clamp(0.0, (LEVELS - 1) as f64) as usize
}

/// Pixels per grid cell.
pub fn cell_pixels(nx: usize, ny: usize) -> f64 {
    (640 / nx.max(ny)).max(2) as f64
}

pub fn render_heatmap(fields: &FieldGrid, channel: Channel, dom: &PerforatedDomain, mut w: impl Write) -> Result<()> {
    let g = &fields.grid;
    let values = fields.channel(channel);
    let range = color_range(&values);
    let cell = cell_pixels(g.nx, g.ny);
    let (pw, ph) = (g.nx as f64 * cell, g.ny as f64 * cell);
    let (ox, oy) = (MARGIN, MARGIN + TITLE);
    let [dx, dy] = g.cell_size();
    let to_px = |x: f64, y: f64| (ox + (x - g.lo[0]) / dx * cell, oy + (g.hi[1] - y) / dy * cell);
    let width = pw + 2.0 * MARGIN + LEGEND;
    let height = ph + 2.0 * MARGIN + TITLE;
    let pal = palette();

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#)?;
    writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="{BACKGROUND}"/>"#)?;
    writeln!(s, r#"<text x="{ox}" y="{}" font-family="sans-serif" font-size="16">{}</text>"#, MARGIN + 8.0, channel.name())?;
    writeln!(s, r#"<g id="cells" shape-rendering="crispEdges">"#)?;
    if let Some((lo, hi)) = range {
        for j in 0..g.ny {
            let y = oy + (g.ny - 1 - j) as f64 * cell;
            let row = &values[j * g.nx..(j + 1) * g.nx];
            let mut i = 0;
            while i < g.nx {
                let Some(v) = row[i].filter(|v| v.is_finite()) else {
                    i += 1;
                    continue;
                };
                let l = level(v, lo, hi);
                let mut run = 1;
                while i + run < g.nx && row[i + run].filter(|v| v.is_finite()).map(|v| level(v, lo, hi)) == Some(l) {
                    run += 1;
                }
                let x = ox + i as f64 * cell;
                writeln!(s, r#"<rect x="{x}" y="{y}" width="{}" height="{cell}" fill="{}"/>"#, run as f64 * cell, hex(pal[l]))?;
                i += run;
            }
        }
    }
    writeln!(s, "</g>")?;

    writeln!(s, r##"<g id="outline" fill="none" stroke="#000000" stroke-width="1.5">"##)?;
    match &dom.outer {
        OuterBoundary::Disk { center, radius } => {
            let (cx, cy) = to_px(center.x, center.y);
            writeln!(s, r#"<ellipse cx="{cx}" cy="{cy}" rx="{}" ry="{}"/>"#, radius / dx * cell, radius / dy * cell)?;
        }
        OuterBoundary::Polygon { vertices } => {
            let pts: Vec<String> = vertices
                .iter()
                .map(|v| {
                    let (x, y) = to_px(v.x, v.y);
                    format!("{x},{y}")
                })
                .collect();
            writeln!(s, r#"<polygon points="{}"/>"#, pts.join(" "))?;
        }
    }
    for c in &dom.cores {
        let (cx, cy) = to_px(c.center[0], c.center[1]);
        writeln!(s, r#"<ellipse cx="{cx}" cy="{cy}" rx="{}" ry="{}"/>"#, c.radius / dx * cell, c.radius / dy * cell)?;
    }
    writeln!(s, "</g>")?;

    let bx = ox + pw + 16.0;
    writeln!(s, r#"<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">"#)?;
    for (k, a) in ANCHORS.iter().enumerate() {
        let off = k as f64 / (ANCHORS.len() - 1) as f64;
        writeln!(s, r#"<stop offset="{off}" stop-color="{}"/>"#, hex(a.map(|c| c as u8)))?;
    }
    writeln!(s, "</linearGradient></defs>")?;
    writeln!(s, r##"<rect id="color-bar" x="{bx}" y="{oy}" width="{BAR_WIDTH}" height="{ph}" fill="url(#scale)" stroke="#000000"/>"##)?;
    if let Some((lo, hi)) = range {
        for (frac, v) in [(0.0, hi), (0.5, 0.5 * (lo + hi)), (1.0, lo)] {
            writeln!(
                s,
                r#"<text class="scale" x="{}" y="{}" font-family="sans-serif" font-size="12">{v:.4e}</text>"#,
                bx + BAR_WIDTH + 6.0,
                oy + frac * ph + 4.0
            )?;
        }
    }
    writeln!(s, "</svg>")?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Writes the heatmap of the channel named `channel` to `path`.
pub fn emit_heatmap(fields: &FieldGrid, channel: &str, dom: &PerforatedDomain, path: &Path) -> Result<()> {
    let c: Channel = channel.parse()?;
    let mut buf = Vec::new();
    render_heatmap(fields, c, dom, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}
