use std::fmt::Write as _;

use super::DensityGrid;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn frame_open(out: &mut String, title: &str, x: (f64, f64), y: (f64, f64)) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let (x0, y0, x1, y1) = (PAD, H - PAD, W - PAD, PAD);
    let _ = writeln!(out, r#"<polyline points="{x0},{y1} {x0},{y0} {x1},{y0}" fill="none" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{x0}" y="{}" font-size="10">{:.3}</text>"#, y0 + 15.0, x.0);
    let _ = writeln!(out, r#"<text x="{x1}" y="{}" font-size="10" text-anchor="end">{:.3}</text>"#, y0 + 15.0, x.1);
    let _ = writeln!(out, r#"<text x="{}" y="{y0}" font-size="10" text-anchor="end">{:.3}</text>"#, x0 - 4.0, y.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{:.3}</text>"#, x0 - 4.0, y1 + 10.0, y.1);
}

/// Polylines on shared axes, one per `(label, points)`.
pub fn line_plot_svg(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let xr = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let yr = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    let sx = |x: f64| PAD + (x - xr.0) / (xr.1 - xr.0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - yr.0) / (yr.1 - yr.0) * (H - 2.0 * PAD);
    let mut out = String::new();
    frame_open(&mut out, title, xr, yr);
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#, coords.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="10" fill="{color}">{}</text>"#,
            W - PAD + 4.0,
            PAD + 12.0 * i as f64,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Grayscale heat map, darker cells hold more samples.
pub fn heatmap_svg(title: &str, grid: &DensityGrid) -> String {
    let nx = grid.x_edges.len() - 1;
    let ny = grid.y_edges.len() - 1;
    let max = grid.counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    let (cw, ch) = ((W - 2.0 * PAD) / nx as f64, (H - 2.0 * PAD) / ny as f64);
    let mut out = String::new();
    frame_open(
        &mut out,
        title,
        (grid.x_edges[0], grid.x_edges[nx]),
        (grid.y_edges[0], grid.y_edges[ny]),
    );
    for (row, counts) in grid.counts.iter().enumerate() {
        for (col, c) in counts.iter().enumerate() {
            let shade = 255 - (255.0 * *c as f64 / max).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb({shade},{shade},{shade})"/>"#,
                PAD + col as f64 * cw,
                H - PAD - (row + 1) as f64 * ch
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_has_one_polyline_per_series() {
        let s = line_plot_svg("a<b", &[("x".into(), vec![(0.0, 0.0), (1.0, 2.0)]), ("y".into(), vec![])]);
        assert!(s.starts_with("<svg"));
        assert!(s.contains("a&lt;b"));
        assert_eq!(s.matches("<polyline").count(), 3);
    }

    #[test]
    fn heatmap_cells() {
        let g = DensityGrid { x_edges: vec![0.0, 1.0, 2.0], y_edges: vec![0.0, 1.0], counts: vec![vec![3, 0]] };
        let s = heatmap_svg("d", &g);
        assert!(s.contains("rgb(0,0,0)") && s.contains("rgb(255,255,255)"));
    }
}
