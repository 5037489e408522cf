//! Fixed-precision number formatting for text artifacts.

/// `%.9g`-style: 9 significant digits, trailing zeros trimmed,
/// scientific notation outside `1e-5 ..= 1e9`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..=8).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn nine_digits() {
        assert_eq!(sig9(70f64.ln()), "4.24849524");
        assert_eq!(sig9(0.5), "0.5");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.125), "-0.125");
        assert_eq!(sig9(123456789.4), "123456789");
        assert_eq!(sig9(1.5e-7), "1.5e-7");
        assert_eq!(sig9(2.5e12), "2.5e12");
        assert_eq!(sig9(0.000123456789123), "0.000123456789");
    }
}
