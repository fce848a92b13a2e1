use std::fmt::Write as _;

use super::ForestRecord;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN: f64 = 60.0;
const LEGEND: f64 = 180.0;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#393b79", "#637939",
];

fn dot(c: &[f64], x: &[f64]) -> f64 {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Bifurcation diagram of `c · x` against `s`, one colour per subspace orbit,
/// with a marker at each bifurcation point.
pub fn render_svg(record: &ForestRecord, functional: &[f64]) -> String {
    let (s0, s1) = (record.settings.window.s_min, record.settings.window.s_max);
    let values = record
        .branches
        .iter()
        .flat_map(|b| b.points.iter().map(|p| dot(functional, &p.x)))
        .filter(|v| v.is_finite());
    let (mut lo, mut hi) = values.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-9 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - 2.0 * MARGIN - LEGEND;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |s: f64| MARGIN + (s - s0) / (s1 - s0) * plot_w;
    let py = |v: f64| MARGIN + (hi - v) / (hi - lo) * plot_h;
    let colour = |orbit: usize| PALETTE[orbit % PALETTE.len()];

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let s = s0 + t * (s1 - s0);
        let v = lo + t * (hi - lo);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{s:.3}</text>"#, px(s), HEIGHT - MARGIN + 18.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#, MARGIN - 6.0, py(v) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">s</text>"#, MARGIN + plot_w / 2.0, HEIGHT - 16.0);
    let _ = writeln!(out, r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">c·x</text>"#, MARGIN + plot_h / 2.0, MARGIN + plot_h / 2.0);

    for b in &record.branches {
        let pts: Vec<String> = b
            .points
            .iter()
            .map(|p| (p.s, dot(functional, &p.x)))
            .filter(|(_, v)| v.is_finite())
            .map(|(s, v)| format!("{:.3},{:.3}", px(s), py(v)))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            r#"<polyline id="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            b.id,
            colour(b.orbit),
            pts.join(" ")
        );
    }
    for e in &record.events {
        let _ = writeln!(
            out,
            r#"<circle id="{}" cx="{:.3}" cy="{:.3}" r="4" fill="black"/>"#,
            e.id,
            px(e.s_star),
            py(dot(functional, &e.x_star))
        );
    }
    let lx = WIDTH - LEGEND - MARGIN + 20.0;
    let mut ly = MARGIN + 10.0;
    for (k, o) in record.orbits.iter().enumerate() {
        if o.branches.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="3"/>"#,
            lx + 24.0,
            colour(k)
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 30.0, ly + 4.0, o.members.join(" "));
        ly += 18.0;
    }
    out.push_str("</svg>\n");
    out
}
