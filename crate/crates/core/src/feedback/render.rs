use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::curves::ShapeCurve;
use super::FeedbackError;

pub const CURVE_CSV_HEADER: [&str; 4] = ["feature", "x", "f", "density_bin_count"];

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 44.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// `<target>_<feature>.svg`, with characters unsafe in file names replaced.
pub fn svg_file_name(target: &str, feature: &str) -> String {
    let clean: String = feature
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    format!("{target}_{clean}.svg")
}

/// Stand-alone SVG of one shape curve: grayscale density bands behind the
/// plot (darker = more training samples), axes with end labels, the curve
/// as a polyline and, when given, a red vertical marker.
pub fn render_curve_svg(curve: &ShapeCurve, marker: Option<f64>) -> String {
    let x0 = curve.xs[0];
    let x1 = *curve.xs.last().expect("non-empty grid");
    let (mut y0, mut y1) = curve
        .ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    let pad = ((y1 - y0) * 0.08).max(1e-6);
    y0 -= pad;
    y1 += pad;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let max_count = curve.density.counts.iter().copied().max().unwrap_or(0).max(1);
    let _ = writeln!(s, r#"<g class="density">"#);
    for (i, &count) in curve.density.counts.iter().enumerate() {
        let a = sx(curve.density.edges[i]);
        let b = sx(curve.density.edges[i + 1]);
        let level = 245 - (170.0 * count as f64 / max_count as f64).round() as i32;
        let _ = writeln!(
            s,
            r#"<rect x="{a:.2}" y="{TOP}" width="{:.2}" height="{plot_h}" fill="rgb({level},{level},{level})"/>"#,
            (b - a).max(0.0)
        );
    }
    let _ = writeln!(s, "</g>");
    let (ax, ay) = (LEFT, TOP + plot_h);
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{ax}" y1="{ay}" x2="{:.2}" y2="{ay}"/><line x1="{ax}" y1="{TOP}" x2="{ax}" y2="{ay}"/></g>"#,
        LEFT + plot_w
    );
    if y0 < 0.0 && y1 > 0.0 {
        let zy = sy(0.0);
        let _ = writeln!(
            s,
            r##"<line class="zero" x1="{ax}" y1="{zy:.2}" x2="{:.2}" y2="{zy:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
            LEFT + plot_w
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{ax}" y="{:.2}" text-anchor="start">{x0:.3}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{x1:.3}</text>"#,
        ay + 16.0,
        LEFT + plot_w,
        ay + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
        LEFT - 6.0,
        TOP + 10.0,
        y1,
        LEFT - 6.0,
        ay,
        y0
    );
    let name = escape(&curve.feature);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{name}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-weight="bold">shape function of {name}</text>"#,
        WIDTH / 2.0
    );
    let points: Vec<String> = curve
        .xs
        .iter()
        .zip(&curve.ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline class="curve" fill="none" stroke="#1f4e9c" stroke-width="2" points="{}"/>"##,
        points.join(" ")
    );
    if let Some(m) = marker {
        let mx = sx(m.clamp(x0, x1));
        let _ = writeln!(
            s,
            r#"<line class="marker" x1="{mx:.2}" y1="{TOP}" x2="{mx:.2}" y2="{ay}" stroke="red" stroke-width="2"/>"#
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bin_count(curve: &ShapeCurve, x: f64) -> usize {
    curve.density.count_at(x)
}

/// Writes `feature,x,f,density_bin_count` rows, one per grid point.
pub fn write_curves_csv(curves: &[ShapeCurve], writer: impl Write) -> Result<(), FeedbackError> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| FeedbackError::Io(std::io::Error::other(e));
    w.write_record(CURVE_CSV_HEADER).map_err(io)?;
    for c in curves {
        for (&x, &y) in c.xs.iter().zip(&c.ys) {
            w.write_record([c.feature.clone(), x.to_string(), y.to_string(), bin_count(c, x).to_string()])
                .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn export_curves_csv(curves: &[ShapeCurve], path: impl AsRef<Path>) -> Result<(), FeedbackError> {
    write_curves_csv(curves, std::fs::File::create(path)?)
}
