//! Exact rational numbers and their canonical text form.
//!
//! Values are `num_rational::BigRational`, which already enforces the
//! invariants we rely on (positive denominator, lowest terms). The text form
//! is `"a"` for integers and `"a/b"` otherwise, with `b > 0`; parsing accepts
//! exactly that grammar with an optional leading minus sign.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer part in rational literal {0:?}")]
    BadInteger(String),
    #[error("invalid denominator in rational literal {0:?}")]
    BadDenominator(String),
    #[error("zero denominator in rational literal {0:?}")]
    ZeroDenominator(String),
}

/// Parses `"a"` or `"a/b"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(RationalParseError::Empty);
    }
    match text.split_once('/') {
        None => {
            let n: BigInt = text
                .parse()
                .map_err(|_| RationalParseError::BadInteger(text.to_owned()))?;
            Ok(Rational::from_integer(n))
        }
        Some((num, den)) => {
            let n: BigInt = num
                .parse()
                .map_err(|_| RationalParseError::BadInteger(text.to_owned()))?;
            let d: BigInt = den
                .parse()
                .map_err(|_| RationalParseError::BadDenominator(text.to_owned()))?;
            if d.is_zero() {
                return Err(RationalParseError::ZeroDenominator(text.to_owned()));
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Renders a rational in canonical lowest-terms form: `"a"` or `"a/b"`.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Floor of a rational as a `BigInt`.
pub fn floor_int(value: &Rational) -> BigInt {
    value.floor().to_integer()
}

/// Renders a nonnegative rational as a decimal with `sig` significant
/// digits, round-half-even, in plain or scientific-free positional form.
///
/// Used for statistics in trial reports; exact integer arithmetic keeps the
/// rendering identical across platforms.
pub fn format_decimal(value: &Rational, sig: u32) -> String {
    assert!(sig >= 1);
    if value.is_zero() {
        return "0".to_owned();
    }
    let negative = value.is_negative();
    let abs = value.abs();
    // Find e with 10^e <= abs < 10^(e+1).
    let mut e: i64 = 0;
    let ten = rat_int(10);
    let one = Rational::one();
    let mut scaled = abs.clone();
    while scaled >= ten {
        scaled /= &ten;
        e += 1;
    }
    while scaled < one {
        scaled *= &ten;
        e -= 1;
    }
    // digits = round_half_even(abs * 10^(sig-1-e)), an integer with `sig` digits.
    let shift = i64::from(sig) - 1 - e;
    let scaled = abs * ten.pow(shift as i32);
    let mut digits = round_half_even_to_integer(&scaled);
    // Rounding can carry over to one extra digit (e.g. 9.99 -> 10.0).
    let mut digits_str = digits.to_string();
    let mut e = e;
    if digits_str.len() as u32 > sig {
        digits = round_half_even_to_integer(&(Rational::from_integer(digits) / &ten));
        digits_str = digits.to_string();
        e += 1;
    }
    debug_assert_eq!(digits_str.len() as u32, sig);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if e >= 0 && (e as usize) < digits_str.len() {
        let point = e as usize + 1;
        out.push_str(&digits_str[..point]);
        let frac = digits_str[point..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    } else if e < 0 {
        out.push_str("0.");
        for _ in 0..(-e - 1) {
            out.push('0');
        }
        out.push_str(digits_str.trim_end_matches('0'));
    } else {
        // e >= sig: pad with zeros up to the integer length.
        out.push_str(&digits_str);
        for _ in 0..(e as usize + 1 - digits_str.len()) {
            out.push('0');
        }
    }
    out
}

fn round_half_even_to_integer(value: &Rational) -> BigInt {
    let floor = value.floor().to_integer();
    let frac = value - Rational::from_integer(floor.clone());
    let half = rat(1, 2);
    if frac > half {
        floor + BigInt::one()
    } else if frac < half {
        floor
    } else if (&floor % BigInt::from(2)).is_zero() {
        floor
    } else {
        floor + BigInt::one()
    }
}

/// Decimal rendering of sqrt(value) with `sig` significant digits,
/// round-half-even, computed exactly via integer square roots.
pub fn format_decimal_sqrt(value: &Rational, sig: u32) -> String {
    assert!(!value.is_negative());
    if value.is_zero() {
        return "0".to_owned();
    }
    // Find e with 10^e <= sqrt(value) < 10^(e+1), i.e. 10^(2e) <= value.
    let ten = rat_int(10);
    let hundred = rat_int(100);
    let one = Rational::one();
    let mut e: i64 = 0;
    let mut scaled = value.clone();
    while scaled >= hundred {
        scaled /= &hundred;
        e += 1;
    }
    while scaled < one {
        scaled *= &hundred;
        e -= 1;
    }
    // Want round_half_even(sqrt(value) * 10^(sig-1-e)).
    let shift = 2 * (i64::from(sig) - 1 - e);
    let scaled = value * ten.pow(shift as i32);
    // n = nearest integer (half-even) to sqrt(num/den): compare squares exactly.
    let n = nearest_sqrt_half_even(&scaled);
    let digits_str = n.to_string();
    let mut e = e;
    let mut digits_str = digits_str;
    if digits_str.len() as u32 > sig {
        // Carried into one extra digit; drop the trailing zero.
        debug_assert!(digits_str.ends_with('0'));
        digits_str.truncate(digits_str.len() - 1);
        e += 1;
    }
    let as_rat = parse_rational(&digits_str).unwrap() * ten.pow((e - i64::from(sig) + 1) as i32);
    format_decimal(&as_rat, sig)
}

fn nearest_sqrt_half_even(value: &Rational) -> BigInt {
    // Integer n minimizing |n - sqrt(value)| with half-even tie rule.
    // sqrt(num/den) = sqrt(num*den)/den, so the integer-sqrt estimate below
    // is within 1 of floor(sqrt(value)); the loops fix up the remainder.
    let one = BigInt::one();
    let mut n = (value.numer() * value.denom()).sqrt() / value.denom();
    // fix up: largest n with n^2 <= value
    while Rational::from_integer(&n * &n) > *value {
        n -= &one;
    }
    loop {
        let next = &n + &one;
        if Rational::from_integer(&next * &next) <= *value {
            n = next;
        } else {
            break;
        }
    }
    // n = floor(sqrt(value)); round to nearest by comparing value with (n + 1/2)^2.
    let mid = Rational::from_integer(BigInt::from(2) * &n + &one) / rat_int(2);
    let mid_sq = &mid * &mid;
    if *value > mid_sq {
        n + one
    } else if *value < mid_sq {
        n
    } else if (&n % BigInt::from(2)).is_zero() {
        n
    } else {
        n + one
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "1", "-3", "1/2", "-7/3", "22026/1000"] {
            let r = parse_rational(s).unwrap();
            let canon = format_rational(&r);
            assert_eq!(parse_rational(&canon).unwrap(), r);
        }
        assert_eq!(format_rational(&parse_rational("2/4").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational("-2/4").unwrap()), "-1/2");
        assert_eq!(format_rational(&parse_rational("3/1").unwrap()), "3");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/2").is_err());
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1/2/3").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(format_decimal(&rat(1, 2), 12), "0.5");
        assert_eq!(format_decimal(&rat(1, 3), 12), "0.333333333333");
        assert_eq!(format_decimal(&rat(2, 3), 12), "0.666666666667");
        assert_eq!(format_decimal(&rat_int(1), 12), "1");
        assert_eq!(format_decimal(&rat_int(-25), 12), "-25");
        assert_eq!(format_decimal(&rat(1, 1000), 3), "0.001");
        // round-half-even on the last kept digit
        assert_eq!(format_decimal(&rat(25, 1000), 1), "0.02");
        assert_eq!(format_decimal(&rat(35, 1000), 1), "0.04");
        assert_eq!(format_decimal(&rat(9999, 1000), 3), "10");
        assert_eq!(format_decimal(&rat_int(123456), 3), "123000");
    }

    #[test]
    fn decimal_sqrt_rendering() {
        assert_eq!(format_decimal_sqrt(&rat_int(4), 6), "2");
        assert_eq!(format_decimal_sqrt(&rat_int(2), 12), "1.41421356237");
        assert_eq!(format_decimal_sqrt(&rat(1, 4), 6), "0.5");
        assert_eq!(format_decimal_sqrt(&rat_int(0), 6), "0");
        // sqrt(1e-10) = 1e-5 exactly
        assert_eq!(format_decimal_sqrt(&rat(1, 10_000_000_000), 6), "0.00001");
    }
}
