//! Output encodings: rounded JSON numbers, CSV rows and the sweep SVG.

use serde_json::Value;

use ftqed::analysis::SweepResult;

/// Significant digits kept in JSON numbers.
pub const JSON_DIGITS: usize = 12;

/// `x` rounded to [`JSON_DIGITS`] significant digits; `null` if not finite.
pub fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{:.*e}", JSON_DIGITS - 1, x).parse().expect("float literal");
    // Normalise -0 so identical runs print identical text.
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    serde_json::Number::from_f64(rounded).map(Value::Number).unwrap_or(Value::Null)
}

pub fn optional(x: Option<f64>) -> Value {
    x.map(number).unwrap_or(Value::Null)
}

/// Shortest round-trip text for CSV cells.
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "NaN".into()
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

/// Polyline plot of `F_p` and `f_p` with an optional threshold marker.
pub fn sweep_svg(sweep: &SweepResult, threshold: Option<f64>) -> String {
    let (x0, x1) = match (sweep.rows.first(), sweep.rows.last()) {
        (Some(a), Some(b)) => (a.p, b.p),
        _ => (0.0, 1.0),
    };
    let values = sweep.rows.iter().flat_map(|r| [r.encoded, r.bare]).filter(|v| v.is_finite());
    let (mut y0, mut y1) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(y0 < y1) {
        y0 = 0.0;
        y1 = 1.0;
    }
    let sx = |p: f64| MARGIN + (p - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let line = |pick: fn(&ftqed::analysis::SweepRow) -> f64| {
        sweep
            .rows
            .iter()
            .filter(|r| pick(r).is_finite())
            .map(|r| format!("{:.2},{:.2}", sx(r.p), sy(pick(r))))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "<path d=\"M{m},{t} L{m},{b} L{r},{b}\" fill=\"none\" stroke=\"black\"/>\n",
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    ));
    let label = |x: f64, y: f64, anchor: &str, text: String| {
        format!("<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"12\" text-anchor=\"{anchor}\">{text}</text>\n")
    };
    out.push_str(&label(MARGIN, HEIGHT - MARGIN + 16.0, "middle", format!("{x0}")));
    out.push_str(&label(WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, "middle", format!("{x1}")));
    out.push_str(&label(MARGIN - 4.0, HEIGHT - MARGIN, "end", format!("{y0:.4}")));
    out.push_str(&label(MARGIN - 4.0, MARGIN + 4.0, "end", format!("{y1:.4}")));
    out.push_str(&label(WIDTH / 2.0, HEIGHT - 8.0, "middle", "p".into()));
    out.push_str(&format!("<polyline fill=\"none\" stroke=\"#1f77b4\" points=\"{}\"/>\n", line(|r| r.encoded)));
    out.push_str(&format!("<polyline fill=\"none\" stroke=\"#d62728\" points=\"{}\"/>\n", line(|r| r.bare)));
    if let Some(p) = threshold.filter(|p| (x0..=x1).contains(p)) {
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{t}\" x2=\"{x:.2}\" y2=\"{b}\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n",
            x = sx(p),
            t = MARGIN,
            b = HEIGHT - MARGIN
        ));
        out.push_str(&label(sx(p), MARGIN - 6.0, "middle", format!("p*={p:.4}")));
    }
    out.push_str(&label(WIDTH - MARGIN, MARGIN - 20.0, "end", format!("F_p {}", sweep.encoded_name)));
    out.push_str(&label(WIDTH - MARGIN, MARGIN - 6.0, "end", format!("f_p {}", sweep.bare_name)));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_twelve_digits() {
        assert_eq!(number(0.1 + 0.2).to_string(), "0.3");
        assert_eq!(number(1.0 / 3.0).to_string(), "0.333333333333");
        assert_eq!(number(-0.0).to_string(), "0.0");
        assert_eq!(number(f64::NAN), Value::Null);
    }
}
