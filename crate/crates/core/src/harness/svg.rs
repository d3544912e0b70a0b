use std::fmt::Write as _;

use super::decay::DecayRow;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// (1 + v^{−1/2})/√(log log n) with unit constant; only defined for n ≥ 3.
pub fn envelope(n: f64, v: f64) -> f64 {
    (1.0 + v.powf(-0.5)) / n.ln().ln().sqrt()
}

/// Gap versus n, one polyline per β, with the envelope overlaid.
pub fn decay_plot(rows: &[DecayRow], v: f64) -> String {
    let ok: Vec<&DecayRow> = rows.iter().filter(|r| r.error.is_none() && r.gap_mean.is_finite()).collect();
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if ok.is_empty() {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">no data</text>"#, W / 2.0, H / 2.0);
        s.push_str("</svg>\n");
        return s;
    }
    let n_lo = ok.iter().map(|r| r.n as f64).fold(f64::INFINITY, f64::min);
    let n_hi = ok.iter().map(|r| r.n as f64).fold(0.0, f64::max).max(n_lo + 1.0);
    let env: Vec<(f64, f64)> = (0..=64)
        .map(|k| n_lo + (n_hi - n_lo) * f64::from(k) / 64.0)
        .filter(|&n| n >= 3.0)
        .map(|n| (n, envelope(n, v)))
        .collect();
    let y_hi = ok.iter().map(|r| r.gap_mean + r.gap_se).chain(env.iter().map(|e| e.1)).fold(0.0, f64::max).max(1e-9) * 1.05;
    let px = |n: f64| PAD + (W - 2.0 * PAD) * (n - n_lo) / (n_hi - n_lo);
    let py = |g: f64| H - PAD - (H - 2.0 * PAD) * g / y_hi;
    let _ = writeln!(s, r#"<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, H - PAD, W - PAD, H - PAD);
    let _ = writeln!(s, r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>"#, H - PAD);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#, W / 2.0, H - 16.0);
    let _ = writeln!(s, r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">center gap</text>"#, H / 2.0, H / 2.0);
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" font-size="12">{n_lo}</text><text x="{}" y="{}" font-size="12" text-anchor="end">{n_hi}</text>"#, H - PAD + 16.0, W - PAD, H - PAD + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{:.3}</text>"#, PAD - 4.0, PAD + 4.0, y_hi);
    if env.len() > 1 {
        let pts: Vec<String> = env.iter().map(|&(n, e)| format!("{:.2},{:.2}", px(n), py(e))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="gray" stroke-dasharray="6 4"/>"#, pts.join(" "));
    }
    let mut betas: Vec<f64> = ok.iter().map(|r| r.beta).collect();
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    for (k, beta) in betas.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut series: Vec<&&DecayRow> = ok.iter().filter(|r| r.beta == *beta).collect();
        series.sort_by_key(|r| r.n);
        let pts: Vec<String> = series.iter().map(|r| format!("{:.2},{:.2}", px(r.n as f64), py(r.gap_mean))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, pts.join(" "));
        for r in &series {
            let (x, y) = (px(r.n as f64), py(r.gap_mean));
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#, py(r.gap_mean - r.gap_se), py(r.gap_mean + r.gap_se));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" fill="{color}">β = {beta}</text>"#, W - PAD - 90.0, PAD + 16.0 * (k as f64 + 1.0));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" fill="gray">envelope (1+v^-1/2)/sqrt(log log n), C = 1, qualitative</text>"#, PAD + 8.0, PAD - 12.0);
    s.push_str("</svg>\n");
    s
}
