//! Numeric text output: every number is written with 12 significant digits
//! using C's `%.12g` conventions.

/// Significant digits used for all emitted numbers.
pub const SIG_DIGITS: usize = 12;

/// Formats `v` like C's `printf("%.12g", v)`.
pub fn fmt_sig(v: f64) -> String {
    fmt_general(v, SIG_DIGITS)
}

/// Formats `v` like C's `%.{digits}g`: fixed notation when the decimal
/// exponent lies in `[-4, digits)`, scientific otherwise, with trailing
/// zeros removed.
pub fn fmt_general(v: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds `v` to 12 significant digits, so that serializers printing the
/// shortest round-trip representation emit at most that many.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIG_DIGITS - 1, v)
        .parse()
        .expect("valid float")
}
