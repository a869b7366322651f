//! Numeric formatting for report files.

/// Formats `x` with six significant digits, in the style of C's `%.6g`.
pub fn sig6(x: f64) -> String {
    sig(x, 6)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(1.386294361), "1.38629");
        assert_eq!(sig6(-0.3862943611), "-0.386294");
        assert_eq!(sig6(123456789.0), "1.23457e+08");
        assert_eq!(sig6(0.0001234567), "0.000123457");
        assert_eq!(sig6(0.00001234567), "1.23457e-05");
        assert_eq!(sig6(100000.0), "100000");
        assert_eq!(sig6(999999.5), "1e+06");
        assert_eq!(sig6(12.5), "12.5");
    }
}
