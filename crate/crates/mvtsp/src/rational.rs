//! Exact arithmetic aliases and string codecs.
//!
//! Multiplicities and requests are arbitrary-precision integers, costs and LP
//! values are arbitrary-precision rationals. The JSON interchange formats
//! serialize integers as decimal strings and rationals as `"p/q"` strings so
//! that values survive round-trips bit-exactly regardless of magnitude.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(v: i64) -> Rat {
    Rat::from_integer(Int::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(Int::from(p), Int::from(q))
}

pub fn int_to_rat(v: &Int) -> Rat {
    Rat::from_integer(v.clone())
}

/// `true` iff the rational has denominator 1.
pub fn is_integral(r: &Rat) -> bool {
    r.denom().is_one()
}

/// Formats a rational canonically as `p/q` (reduced, `q > 0`).
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or a bare integer string into a rational.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: Int = p
        .parse()
        .map_err(|_| format!("invalid rational numerator in {s:?}"))?;
    let q: Int = q
        .parse()
        .map_err(|_| format!("invalid rational denominator in {s:?}"))?;
    if q.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rat::new(p, q))
}

/// Parses a decimal integer string.
pub fn parse_int(s: &str) -> Result<Int, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("invalid integer {s:?}"))
}

/// Floor of a non-negative rational as an integer.
pub fn floor_rat(r: &Rat) -> Int {
    debug_assert!(!r.is_negative());
    r.floor().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7/2", "5", "0", "1000000000000000000000/7"] {
            let r = parse_rat(s).unwrap();
            let back = parse_rat(&format_rat(&r)).unwrap();
            assert_eq!(r, back);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("a/b").is_err());
        assert!(parse_int("1.5").is_err());
    }

    #[test]
    fn format_is_canonical() {
        assert_eq!(format_rat(&ratio(6, 4)), "3/2");
        assert_eq!(format_rat(&ratio(3, -4)), "-3/4");
        assert_eq!(format_rat(&rat(3)), "3/1");
    }

    #[test]
    fn floor_of_rational() {
        assert_eq!(floor_rat(&ratio(7, 2)), int(3));
        assert_eq!(floor_rat(&rat(4)), int(4));
    }
}
