//! Plain-text number formatting shared by the CSV writers.

/// Shortest decimal that parses back to exactly `v`, switching to
/// exponent form for very small or very large magnitudes.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}
