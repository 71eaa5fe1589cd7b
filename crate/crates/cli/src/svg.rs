//! Minimal SVG emitter for log-log decay plots.

use std::fmt::Write;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// `(C, p)` of a fitted line `C r^p`.
    pub fit: Option<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Decade-aligned bounds of `log10` of the positive values.
fn decades(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = vals
        .filter(|v| *v > 0.0 && v.is_finite())
        .map(f64::log10)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    Some(if hi > lo { (lo, hi) } else { (lo, lo + 1.0) })
}

pub fn loglog_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        escape(title)
    );
    let all = || series.iter().flat_map(|x| x.points.iter());
    let (Some((x0, x1)), Some((y0, y1))) = (decades(all().map(|p| p.0)), decades(all().map(|p| p.1))) else {
        s.push_str("<text x=\"20\" y=\"60\">no positive data</text>\n</svg>\n");
        return s;
    };
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x.log10() - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (y1 - y.log10()) / (y1 - y0) * ph;
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for d in x0 as i32..=x1 as i32 {
        let x = px(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"##,
            TOP + ph,
            TOP + ph + 16.0
        );
    }
    for d in y0 as i32..=y1 as i32 {
        let y = py(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 10.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(ylabel)
    );
    for (i, ser) in series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        for &(x, y) in ser.points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, px(x), py(y));
        }
        let mut legend = escape(&ser.label);
        if let Some((pre, exp)) = ser.fit {
            let xs: Vec<f64> = ser.points.iter().map(|p| p.0).filter(|x| *x > 0.0).collect();
            let (a, b) = xs
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            if a < b {
                let _ = writeln!(
                    s,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{c}" stroke-dasharray="4 3"/>"#,
                    px(a),
                    py(pre * a.powf(exp)),
                    px(b),
                    py(pre * b.powf(exp))
                );
            }
            let _ = write!(legend, " ({exp:.2})");
        }
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{c}"/><text x="{:.2}" y="{:.2}">{legend}</text>"#,
            LEFT + pw + 14.0,
            ly - 4.0,
            LEFT + pw + 24.0,
            ly
        );
    }
    s.push_str("</svg>\n");
    s
}
