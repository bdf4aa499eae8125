//! Exact rational coefficients.
//!
//! Coefficients are arbitrary-precision rationals kept in canonical form:
//! reduced, positive denominator, zero stored as `0/1`. The `num` crate
//! maintains these invariants; this module adds the constructors and the
//! canonical `"p/q"` text form used by every wire format.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::{One, Signed, Zero};

pub type Rational = num::BigRational;

/// Integer as a rational.
pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Reduced fraction `n/d`. Panics if `d == 0`.
pub fn q_ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Reciprocal of `k!`, the scalar in exponential and Taylor sums.
pub fn inv_factorial(k: u32) -> Rational {
    let mut f = BigInt::one();
    for i in 2..=k {
        f *= BigInt::from(i);
    }
    Rational::new(BigInt::one(), f)
}

/// Canonical text form, always `p/q` with `q > 0` (zero is `0/1`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`. The stored value is reduced.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Schema(format!("malformed rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = num.trim().parse().map_err(|_| bad())?;
    let d: BigInt = den.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Schema(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Human form for pretty output: integers without the `/1`.
pub fn display_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Magnitude and sign split, for signed term rendering.
pub fn sign_magnitude(r: &Rational) -> (bool, String) {
    (r.is_negative(), display_rational(&r.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-3/4", "0/1", "17/1"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
        // non-canonical inputs normalize
        assert_eq!(format_rational(&parse_rational("2/4").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational("3/-6").unwrap()), "-1/2");
        assert_eq!(format_rational(&parse_rational("5").unwrap()), "5/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn factorials() {
        assert_eq!(inv_factorial(0), q(1));
        assert_eq!(inv_factorial(4), q_ratio(1, 24));
    }
}
