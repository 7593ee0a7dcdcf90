//! Locale-independent number formatting for the CSV outputs: nine
//! significant digits, plain decimal where readable, scientific otherwise.

pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exponent) {
        let decimals = (8 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig(2.0 / 3.0), "0.666666667");
        assert_eq!(fmt_sig(0.5), "0.500000000");
        assert_eq!(fmt_sig(-2.99573227355), "-2.99573227");
        assert_eq!(fmt_sig(123456789.4), "123456789");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.5e-7), "1.50000000e-7");
        assert_eq!(fmt_sig(3.0e12), "3.00000000e12");
    }

    #[test]
    fn formatting_round_trips_through_parse() {
        for x in [
            0.1, 0.95, 2.0 / 3.0, 1.0 / 7.0, 123.456, 9.9e-7, 1e10, -0.25,
        ] {
            let printed = fmt_sig(x);
            let parsed: f64 = printed.parse().unwrap();
            assert_eq!(fmt_sig(parsed), printed);
        }
    }
}
