//! Certified interval arithmetic over exact rationals.
//!
//! Logarithms and exponentials of rationals are irrational, so they are
//! represented by enclosing intervals `[lo, hi]` with rational (dyadic)
//! endpoints. Endpoint arithmetic is exact; outward rounding is applied only
//! inside the transcendental kernels to keep denominators bounded. A caller
//! that needs a decision compares intervals; a caller that needs a value
//! re-derives it in exact rationals.
//!
//! Width contracts:
//! * [`ln_interval`]`(q, bits)` has absolute width <= 2^-bits,
//! * [`exp_interval`]`(x, bits)` has relative width <= 2^-bits.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Sign classification of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
    /// The interval straddles zero (or touches it with nonzero width):
    /// the sign of the enclosed value cannot be certified.
    Ambiguous,
}

/// A closed interval with exact rational endpoints, `lo <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(value: Rational) -> Self {
        Interval {
            lo: value.clone(),
            hi: value,
        }
    }

    pub fn zero() -> Self {
        Interval::point(Rational::zero())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(BigInt::from(2))
    }

    pub fn contains(&self, value: &Rational) -> bool {
        self.lo <= *value && *value <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn sign(&self) -> Sign {
        if self.lo.is_positive() {
            Sign::Positive
        } else if self.hi.is_negative() {
            Sign::Negative
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Sign::Zero
        } else {
            Sign::Ambiguous
        }
    }

    /// True when every value of `self` is strictly below every value of `other`.
    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let candidates = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    /// Multiplies by an exact rational.
    pub fn scale(&self, factor: &Rational) -> Interval {
        if factor.is_negative() {
            Interval {
                lo: &self.hi * factor,
                hi: &self.lo * factor,
            }
        } else {
            Interval {
                lo: &self.lo * factor,
                hi: &self.hi * factor,
            }
        }
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Rounds outward so both endpoints become multiples of 2^-bits.
    pub fn round_out(&self, bits: u32) -> Interval {
        Interval {
            lo: round_down(&self.lo, bits),
            hi: round_up(&self.hi, bits),
        }
    }
}

fn round_down(x: &Rational, bits: u32) -> Rational {
    let num = (x.numer().clone() << bits).div_floor(x.denom());
    Rational::new(num, BigInt::one() << bits)
}

fn round_up(x: &Rational, bits: u32) -> Rational {
    let num = (x.numer().clone() << bits).div_ceil(x.denom());
    Rational::new(num, BigInt::one() << bits)
}

fn pow2(bits: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << bits)
}

fn ceil_log2(n: u64) -> u32 {
    64 - n.saturating_sub(1).leading_zeros()
}

/// Enclosure of ln 2, cached per working precision.
pub fn ln2_interval(bits: u32) -> Interval {
    static CACHE: OnceLock<Mutex<BTreeMap<u32, Interval>>> = OnceLock::new();
    // Quantize to multiples of 64 so the cache stays small.
    let bits_q = (bits / 64 + 1) * 64;
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    {
        let guard = cache.lock().unwrap();
        if let Some(hit) = guard.get(&bits_q) {
            return hit.clone();
        }
    }
    // ln 2 = 2 atanh(1/3)
    let third = Rational::new(BigInt::one(), BigInt::from(3));
    let value = atanh_interval(&third, bits_q + 2).scale(&Rational::from_integer(BigInt::from(2)));
    let value = value.round_out(bits_q);
    cache.lock().unwrap().insert(bits_q, value.clone());
    value
}

/// Enclosure of atanh(t) for |t| <= 1/2, with absolute width <= 2^-bits.
fn atanh_interval(t: &Rational, bits: u32) -> Interval {
    assert!(
        t.abs() <= Rational::new(BigInt::one(), BigInt::from(2)),
        "atanh argument out of the reduced range"
    );
    let w = bits + 10 + ceil_log2(bits as u64 + 64);
    let t_int = Interval::point(t.clone()).round_out(w + 8);
    let t_sq = t_int.mul(&t_int).round_out(w + 8);
    let mut power = t_int.clone(); // t^(2k+1)
    let mut sum = t_int.clone();
    let mut k: u64 = 0;
    let stop = pow2(w + 2);
    loop {
        k += 1;
        // Terms round at w + 8 bits so their rounding floor sits safely
        // below the stopping threshold at w + 2 bits.
        power = power.mul(&t_sq).round_out(w + 8);
        let denom = Rational::new(BigInt::one(), BigInt::from(2 * k + 1));
        sum = sum.add(&power.scale(&denom)).round_out(w);
        let mag = power.lo().abs().max(power.hi().abs());
        if mag <= stop {
            // Remaining tail is dominated by a geometric series with ratio
            // t^2 <= 1/4: sum_{j>k} |t|^(2j+1)/(2j+1) <= mag * t^2/(1-t^2) <= mag/2.
            let tail = &mag / Rational::from_integer(BigInt::from(2));
            let slack = Interval::new(-tail.clone(), tail);
            sum = sum.add(&slack);
            break;
        }
    }
    debug_assert!(sum.width() <= pow2(bits));
    sum
}

/// Certified enclosure of ln(q) for rational q > 0; width <= 2^-bits.
pub fn ln_interval(q: &Rational, bits: u32) -> Interval {
    assert!(q.is_positive(), "ln of a nonpositive rational");
    if q.is_one() {
        return Interval::zero();
    }
    // Split q = m * 2^s with m in (1/2, 2).
    let s = q.numer().bits() as i64 - q.denom().bits() as i64;
    let m = shift_rational(q, -s);
    debug_assert!(m > Rational::new(BigInt::one(), BigInt::from(2)));
    debug_assert!(m < Rational::from_integer(BigInt::from(2)));
    // ln q = s ln 2 + 2 atanh((m-1)/(m+1))
    let one = Rational::one();
    let t = (&m - &one) / (&m + &one);
    let atanh_part =
        atanh_interval(&t, bits + 2).scale(&Rational::from_integer(BigInt::from(2)));
    if s == 0 {
        return atanh_part;
    }
    let ln2_bits = bits + 2 + ceil_log2(s.unsigned_abs() + 2);
    let ln2_part = ln2_interval(ln2_bits).scale(&Rational::from_integer(BigInt::from(s)));
    atanh_part.add(&ln2_part)
}

fn shift_rational(q: &Rational, s: i64) -> Rational {
    if s >= 0 {
        Rational::new(q.numer().clone() << s as usize, q.denom().clone())
    } else {
        Rational::new(q.numer().clone(), q.denom().clone() << (-s) as usize)
    }
}

/// Certified enclosure of exp(x) for rational x; relative width <= 2^-bits.
///
/// The result's lower endpoint is strictly positive.
pub fn exp_interval(x: &Rational, bits: u32) -> Interval {
    if x.is_zero() {
        return Interval::point(Rational::one());
    }
    // Argument reduction: x = k ln2 + r with |r| <= 0.36.
    // k is chosen from a rational midpoint approximation of 1/ln2 whose
    // error keeps the drift below 2^-16 regardless of |x|.
    let magnitude_bits = (x.numer().bits() as i64 - x.denom().bits() as i64).max(0) as u64;
    let ln2_est = ln2_interval(24 + magnitude_bits as u32).midpoint();
    let k_rat = x / &ln2_est;
    let k = round_half_down(&k_rat);
    let w = bits + 10 + ceil_log2(bits as u64 + 64);
    let r = if k.is_zero() {
        Interval::point(x.clone())
    } else {
        let ln2_bits = w + 2 + k.bits() as u32;
        Interval::point(x.clone()).sub(
            &ln2_interval(ln2_bits).scale(&Rational::from_integer(k.clone())),
        )
    };
    debug_assert!(
        r.lo().abs() < Rational::new(BigInt::from(2), BigInt::from(5))
            && r.hi().abs() < Rational::new(BigInt::from(2), BigInt::from(5)),
        "exp argument reduction out of range"
    );
    // exp(r) by Taylor series with a rigorous geometric tail bound.
    let r = r.round_out(w);
    let mut term = Interval::point(Rational::one());
    let mut sum = Interval::point(Rational::one());
    let mut j: u64 = 0;
    let stop = pow2(w + 2);
    loop {
        j += 1;
        let denom = Rational::new(BigInt::one(), BigInt::from(j));
        term = term.mul(&r).scale(&denom).round_out(w + 8);
        sum = sum.add(&term);
        let mag = term.lo().abs().max(term.hi().abs());
        if j >= 2 && mag <= stop {
            // |r|/(j+1) <= 0.4/3, so the tail is below mag * (0.14/(1-0.14)).
            let tail = &mag / Rational::from_integer(BigInt::from(4));
            sum = sum.add(&Interval::new(-tail.clone(), tail));
            break;
        }
    }
    let sum = sum.round_out(w);
    // Scale by 2^k exactly.
    let result = scale_pow2(&sum, &k);
    assert!(
        result.lo().is_positive(),
        "exp enclosure lost positivity; widen the precision"
    );
    debug_assert!(result.width() <= result.lo() * pow2(bits));
    result
}

/// Monotone image of an interval under exp.
pub fn exp_of_interval(x: &Interval, bits: u32) -> Interval {
    let lo = exp_interval(x.lo(), bits);
    let hi = exp_interval(x.hi(), bits);
    Interval::new(lo.lo().clone(), hi.hi().clone())
}

fn round_half_down(x: &Rational) -> BigInt {
    // floor(x + 1/2): nearest integer, ties toward +inf; any nearby integer works
    // for argument reduction.
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    (x + half).floor().to_integer()
}

fn scale_pow2(x: &Interval, k: &BigInt) -> Interval {
    if k.is_zero() {
        return x.clone();
    }
    let shift: u64 = k.abs().try_into().expect("exp exponent out of range");
    let factor = if k.is_positive() {
        Rational::from_integer(BigInt::one() << shift)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << shift)
    };
    x.scale(&factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use proptest::prelude::*;

    fn assert_encloses(interval: &Interval, decimal: &str, bits: u32) {
        // `decimal` is a truncated reference value with at least `digits`
        // correct digits; widen it to a crude interval and require overlap
        // plus the width contract.
        let reference = parse_decimal(decimal);
        let slack = rat(1, 1_000_000_000_000_000_000); // reference good to 1e-18
        assert!(
            interval.lo() <= &(&reference + &slack) && &(&reference - &slack) <= interval.hi(),
            "reference {decimal} escapes enclosure [{}, {}]",
            interval.lo(),
            interval.hi()
        );
        assert!(interval.width() <= pow2(bits), "width contract violated");
    }

    fn parse_decimal(text: &str) -> Rational {
        let (sign, text) = match text.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1, text),
        };
        let (int_part, frac_part) = text.split_once('.').unwrap_or((text, ""));
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = digits.parse().unwrap();
        let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
        Rational::new(numer * BigInt::from(sign), denom)
    }

    #[test]
    fn ln_matches_reference_values() {
        // Reference digits computed independently with mpmath at 70 dps.
        assert_encloses(
            &ln_interval(&rat_int(2), 64),
            "0.693147180559945309417232121458",
            64,
        );
        assert_encloses(
            &ln_interval(&rat_int(10), 64),
            "2.302585092994045684017991454684",
            64,
        );
        assert_encloses(
            &ln_interval(&rat(3, 7), 64),
            "-0.847297860387203613710107506520",
            64,
        );
        assert_encloses(
            &ln_interval(&rat(1, 2), 80),
            "-0.693147180559945309417232121458",
            80,
        );
    }

    #[test]
    fn ln_of_one_is_exact_zero() {
        let one = ln_interval(&rat_int(1), 16);
        assert_eq!(one, Interval::zero());
    }

    #[test]
    fn exp_matches_reference_values() {
        assert_encloses(
            &exp_interval(&rat_int(1), 64),
            "2.718281828459045235360287471352",
            62, // relative contract at lo > 2 loosens the absolute width
        );
        assert_encloses(
            &exp_interval(&rat_int(-1), 64),
            "0.367879441171442321595523770161",
            64,
        );
        assert_encloses(
            &exp_interval(&rat(-1, 3), 64),
            "0.716531310573789250425604096925",
            64,
        );
        let big = exp_interval(&rat_int(10), 64);
        assert_encloses(&big, "22026.465794806716516957900645284", 48);
    }

    #[test]
    fn exp_of_large_negative_argument_stays_positive() {
        let tiny = exp_interval(&rat_int(-700), 32);
        assert!(tiny.lo().is_positive());
        assert!(tiny.hi() < &rat(1, 1_000_000));
    }

    #[test]
    fn interval_multiplication_covers_sign_cases() {
        let a = Interval::new(rat_int(-2), rat_int(3));
        let b = Interval::new(rat_int(-5), rat_int(1));
        let p = a.mul(&b);
        assert_eq!(p.lo(), &rat_int(-15));
        assert_eq!(p.hi(), &rat_int(10));
    }

    #[test]
    fn sign_classification() {
        assert_eq!(Interval::new(rat_int(1), rat_int(2)).sign(), Sign::Positive);
        assert_eq!(
            Interval::new(rat_int(-2), rat_int(-1)).sign(),
            Sign::Negative
        );
        assert_eq!(Interval::zero().sign(), Sign::Zero);
        assert_eq!(
            Interval::new(rat_int(0), rat_int(1)).sign(),
            Sign::Ambiguous
        );
        assert_eq!(
            Interval::new(rat_int(-1), rat_int(1)).sign(),
            Sign::Ambiguous
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn exp_ln_round_trip_brackets_input(num in 1i64..5000, den in 1i64..5000, bits in 20u32..70) {
            let q = rat(num, den);
            let ln_q = ln_interval(&q, bits);
            let back = exp_of_interval(&ln_q, bits);
            prop_assert!(back.contains(&q),
                "exp(ln {q}) = [{}, {}] misses the input", back.lo(), back.hi());
        }

        #[test]
        fn ln_width_contract(num in 1i64..100_000, den in 1i64..100_000, bits in 16u32..90) {
            let q = rat(num, den);
            let enclosure = ln_interval(&q, bits);
            prop_assert!(enclosure.width() <= pow2(bits));
        }

        #[test]
        fn ln_is_monotone(a in 1i64..10_000, b in 1i64..10_000) {
            let (small, large) = if rat_int(a) < rat_int(b) { (a, b) } else { (b, a) };
            let la = ln_interval(&rat_int(small), 48);
            let lb = ln_interval(&rat_int(large), 48);
            prop_assert!(la.lo() <= lb.hi());
        }

        #[test]
        fn exp_relative_width_contract(num in -2000i64..2000, den in 1i64..300, bits in 16u32..80) {
            let x = rat(num, den);
            let enclosure = exp_interval(&x, bits);
            prop_assert!(enclosure.lo().is_positive());
            prop_assert!(enclosure.width() <= enclosure.lo() * pow2(bits));
        }

        #[test]
        fn exp_is_supermultiplicative_on_sums(a in -50i64..50, b in -50i64..50, den in 1i64..20) {
            // exp(x) * exp(y) and exp(x + y) must overlap.
            let x = rat(a, den);
            let y = rat(b, den);
            let lhs = exp_interval(&(&x + &y), 48);
            let rhs = exp_interval(&x, 48).mul(&exp_interval(&y, 48));
            prop_assert!(lhs.lo() <= rhs.hi() && rhs.lo() <= lhs.hi());
        }
    }
}
