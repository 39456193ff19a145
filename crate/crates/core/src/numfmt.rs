//! Output rounding shared by reports and exports.

/// Significant digits kept in every printed number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `v` rounded to twelve significant digits; non-finite values pass through.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Shortest text that re-parses to `round_sig(v)`.
pub fn fmt_sig(v: f64) -> String {
    let r = round_sig(v);
    if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// Serde helper: `#[serde(serialize_with = "crate::numfmt::sig")]`.
pub fn sig<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(fmt_sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_sig(1.5e-13), "1.5e-13");
        assert_eq!(fmt_sig(0.0), "0");
        let v = 12345.678901234567;
        assert!((fmt_sig(v).parse::<f64>().unwrap() - v).abs() / v < 1e-10);
    }
}
