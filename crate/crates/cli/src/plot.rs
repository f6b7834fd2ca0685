//! Hand-written SVG for the degeneracy plot.

use heilbronn_core::geometry::AreaDistribution;
use std::fmt::Write as _;

/// Sorted triangle areas as a scatter, the first `critical` highlighted.
pub fn degeneracy_svg(dist: &AreaDistribution, critical: usize) -> String {
    let (w, h, m) = (640.0, 420.0, 50.0);
    let count = dist.len().max(2) as f64;
    let top = dist.entries.last().map_or(1.0, |e| e.1).max(f64::MIN_POSITIVE) * 1.05;
    let sx = |k: usize| m + k as f64 / (count - 1.0) * (w - 2.0 * m);
    let sy = |v: f64| h - m - v / top * (h - 2.0 * m);
    let mut s = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    s.push('\n');
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<path d="M{m},{m} L{m},{b} L{r},{b}" fill="none" stroke="black"/>"#, b = h - m, r = w - m).unwrap();
    for k in 0..=4 {
        let v = top * k as f64 / 4.0;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{v:.4}</text>"#, m - 4.0, sy(v) + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">triangle rank ({} total)</text>"#, w / 2.0, h - 14.0, dist.len()).unwrap();
    writeln!(
        s,
        r#"<line x1="{m}" y1="{y:.2}" x2="{r}" y2="{y:.2}" stroke="crimson" stroke-dasharray="4 3"/>"#,
        y = sy(dist.min_area),
        r = w - m
    )
    .unwrap();
    for (k, (_, a)) in dist.entries.iter().enumerate() {
        let colour = if k < critical { "crimson" } else { "navy" };
        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, sx(k), sy(*a)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
