//! Deterministic number formatting for reports.

/// 17 significant digits in scientific notation: round-trip exact for f64.
/// Non-finite values print as `nan` / `inf` / `-inf`.
pub fn float17(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

/// 12 significant digits in positional notation, e.g. `0.223143551314`.
pub fn sig12(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let magnitude = if v == 0.0 { -1 } else { v.abs().log10().floor() as i32 };
    let decimals = (11 - magnitude).clamp(0, 17) as usize;
    format!("{v:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float17_round_trips() {
        for v in [0.0, 1.5, -2.25e-7, std::f64::consts::PI, 1.0 / 3.0] {
            let s = float17(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v, back, "{s}");
        }
        assert_eq!(float17(f64::NAN), "nan");
        assert_eq!(float17(f64::INFINITY), "inf");
    }

    #[test]
    fn sig12_examples() {
        assert_eq!(sig12(1.25f64.ln()), "0.223143551314");
        assert_eq!(sig12(0.0), "0.000000000000");
        assert_eq!(sig12(f64::INFINITY), "inf");
        assert_eq!(sig12(2f64.ln()), "0.693147180560");
        assert_eq!(sig12(12.345678901234567), "12.3456789012");
    }
}
