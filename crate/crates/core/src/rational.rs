//! Exact rational helpers.
//!
//! All values in the library are [`Rational`]s; `num-rational` keeps them in
//! lowest terms with a positive denominator, so `==` is structural.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `2^-n`.
pub fn pow2_neg(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n as usize)
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    Pow::pow(base, exp)
}

/// Smallest `n >= 0` with `2^-n <= eps`, i.e. `max(0, ceil(-log2 eps))`.
pub fn precision_for(eps: &Rational) -> Result<u32> {
    if !eps.is_positive() {
        return Err(Error::invalid("tolerance", format!("{eps} must be positive")));
    }
    // eps >= 1 needs no bits.
    let mut n = 0u32;
    let mut bound = Rational::one();
    while &bound > eps {
        n += 1;
        bound /= int(2);
    }
    Ok(n)
}

/// Smallest `h >= lo` with `holds(h)`, for a predicate monotone in `h`.
///
/// Doubles an upper bracket, then bisects. `cap` bounds the search.
pub fn min_satisfying(lo: u64, cap: u64, mut holds: impl FnMut(u64) -> bool) -> Option<u64> {
    if holds(lo) {
        return Some(lo);
    }
    let mut bad = lo;
    let mut step = 1u64;
    let good = loop {
        let probe = lo.saturating_add(step);
        if probe > cap {
            if bad < cap && holds(cap) {
                break cap;
            }
            return None;
        }
        if holds(probe) {
            break probe;
        }
        bad = probe;
        step = step.saturating_mul(2);
    };
    let (mut bad, mut good) = (bad, good);
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if holds(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.9` (converted exactly).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::invalid("rational", format!("`{text}` is not a rational literal"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::invalid("rational", format!("`{text}` has zero denominator")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole = whole.trim_start_matches(['-', '+']);
        if !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
        let denom = Pow::pow(BigInt::from(10), frac.len());
        let r = Rational::new(digits, denom);
        return Ok(if negative { -r } else { r });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

/// Advisory decimal rendering: at most `digits` fractional digits, truncated
/// toward zero, prefixed with `~` when the expansion was cut.
pub fn to_decimal(r: &Rational, digits: usize) -> String {
    let negative = r.is_negative();
    let abs = r.abs();
    let (whole, mut rem) = abs.numer().div_rem(abs.denom());
    let denom = abs.denom();
    let mut frac = String::new();
    for _ in 0..digits {
        if rem.is_zero() {
            break;
        }
        rem *= 10;
        let (d, r2) = rem.div_rem(denom);
        frac.push(char::from(b'0' + d.to_u8().unwrap_or(0)));
        rem = r2;
    }
    let mut out = String::new();
    if !rem.is_zero() {
        out.push('~');
    }
    if negative {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    if !frac.is_empty() {
        out.push('.');
        out.push_str(&frac);
    }
    out
}

/// Lossy conversion, used only for sample-size arithmetic and reporting.
pub fn to_f64(r: &Rational) -> f64 {
    let negative = r.is_negative();
    let abs = r.abs();
    let shift = abs.numer().bits().max(abs.denom().bits()).saturating_sub(1000) as usize;
    let n = (abs.numer() >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (abs.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    let x = n / d;
    if negative {
        -x
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_rational("9/10").unwrap(), ratio(9, 10));
        assert_eq!(parse_rational("6/8").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational("0.9").unwrap(), ratio(9, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), ratio(-5, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn display_is_lowest_terms() {
        assert_eq!(ratio(2, 4).to_string(), "1/2");
        assert_eq!(ratio(4, 2).to_string(), "2");
        assert_eq!(ratio(-3, 9).to_string(), "-1/3");
    }

    #[test]
    fn precision_matches_definition() {
        assert_eq!(precision_for(&int(1)).unwrap(), 0);
        assert_eq!(precision_for(&int(5)).unwrap(), 0);
        assert_eq!(precision_for(&ratio(1, 4)).unwrap(), 2);
        assert_eq!(precision_for(&ratio(1, 5)).unwrap(), 3);
        assert_eq!(precision_for(&ratio(1, 8)).unwrap(), 3);
        assert_eq!(precision_for(&ratio(1, 20)).unwrap(), 5);
        assert!(precision_for(&int(0)).is_err());
    }

    #[test]
    fn min_satisfying_finds_threshold() {
        for t in 0..200u64 {
            assert_eq!(min_satisfying(0, 10_000, |h| h >= t), Some(t));
        }
        assert_eq!(min_satisfying(3, 10, |h| h >= 1), Some(3));
        assert_eq!(min_satisfying(0, 10, |h| h >= 11), None);
        assert_eq!(min_satisfying(0, 10, |h| h >= 10), Some(10));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(1, 4), 20), "0.25");
        assert_eq!(to_decimal(&ratio(1, 3), 5), "~0.33333");
        assert_eq!(to_decimal(&ratio(-7, 2), 20), "-3.5");
        assert_eq!(to_decimal(&int(0), 20), "0");
    }

    #[test]
    fn arithmetic_round_trips() {
        let a = ratio(7, 9);
        let b = ratio(-5, 12);
        assert_eq!((&a + &b) - &b, a);
        assert_eq!((&a * &b) / &b, a);
    }
}
