//! Deterministic number formatting for output files.

/// Rounds to 15 significant digits and prints the shortest decimal that
/// reads back as the rounded value (`1`, `0.7`, `-0.000123`).
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".to_owned()
        } else if x > 0.0 {
            "inf".to_owned()
        } else {
            "-inf".to_owned()
        };
    }
    let rounded: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        return "0".to_owned();
    }
    format!("{rounded}")
}

/// `serde_json` value with the same rounding, for JSON reports.
pub fn json_f64(x: f64) -> serde_json::Value {
    if !x.is_finite() {
        return serde_json::Value::Null;
    }
    let rounded: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    serde_json::Number::from_f64(if rounded == 0.0 { 0.0 } else { rounded })
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(0.7), "0.7");
        assert_eq!(fmt_f64(0.1 + 0.2), "0.3");
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(2f64.sqrt()), "1.4142135623731");
        assert_eq!(fmt_f64(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_f64(123456.0), "123456");
    }
}
