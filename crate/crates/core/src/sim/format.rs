//! Number formatting for CSV output.

/// Formats `x` with `sig` significant digits, `%g` style: fixed notation
/// for moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sig = sig.max(1);
    // Round first so the exponent reflects carries such as 9.9999999996 → 10.
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Nine significant digits, the precision used for plot-oriented CSV.
pub fn csv_num(x: f64) -> String {
    fmt_sig(x, 9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(csv_num(0.0), "0");
        assert_eq!(csv_num(1.0), "1");
        assert_eq!(csv_num(-0.25), "-0.25");
        assert_eq!(csv_num(0.1 + 0.2), "0.3");
        assert_eq!(csv_num(std::f64::consts::PI), "3.14159265");
        assert_eq!(csv_num(36.12359947967774), "36.1235995");
        assert_eq!(csv_num(9.9999999996), "10");
        assert_eq!(csv_num(1.5e-7), "1.5e-7");
        assert_eq!(csv_num(-3.0e12), "-3e12");
        assert_eq!(csv_num(123456789.4), "123456789");
        assert_eq!(csv_num(1234567890.0), "1.23456789e9");
        assert_eq!(csv_num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn round_trips_to_nine_digits() {
        for &x in &[1.0e-3, std::f64::consts::FRAC_1_SQRT_2, -293.25, 4096.0, 6.02214076e23] {
            let back: f64 = csv_num(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-9, "{x} -> {back}");
        }
    }
}
