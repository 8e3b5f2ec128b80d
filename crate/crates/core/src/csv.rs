//! Plain-text number formatting shared by every table writer.

use std::fmt::Write as _;

/// Seventeen significant digits in scientific notation, locale independent.
///
/// `fmt_real(x).parse::<f64>() == Ok(x)` for every finite `x`.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        // keep the sign of -0.0 out of tables
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// One CSV record from already formatted fields.
pub fn record<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut line = String::new();
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(f.as_ref());
    }
    line.push('\n');
    line
}

/// Row-major matrix as CSV, no header.
pub fn matrix(n_cols: usize, data: &[f64]) -> String {
    let mut out = String::new();
    for row in data.chunks(n_cols) {
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_real(*x));
        }
        out.push('\n');
    }
    out
}
