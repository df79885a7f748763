//! Text output helpers.

/// Decimal with 17 significant digits, enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

/// CSV of a labelled square matrix: header row of labels, then one row per
/// label.
pub fn matrix_csv(labels: &[String], m: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str("label");
    for l in labels {
        out.push(',');
        out.push_str(&csv_field(l));
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(m) {
        out.push_str(&csv_field(l));
        for v in row {
            out.push(',');
            out.push_str(&sig17(*v));
        }
        out.push('\n');
    }
    out
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
