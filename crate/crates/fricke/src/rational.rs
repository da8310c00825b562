//! Helpers around arbitrary-precision rationals.
//!
//! `num_rational::BigRational` already maintains the invariants we need
//! (always reduced, denominator positive, zero is 0/1); this module adds the
//! constructors, the fractional-part functions and the canonical "p/q" text
//! form used by the CLI encoders.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Fractional part <x> in [0, 1).
pub fn frac_part(x: &BigRational) -> BigRational {
    let f = x - x.floor();
    debug_assert!(!f.is_negative() && f < BigRational::one());
    f
}

/// <±x> = min(<x>, <-x>), the distance of x from the nearest integer.
pub fn frac_part_pm(x: &BigRational) -> BigRational {
    let a = frac_part(x);
    let b = frac_part(&-x);
    if a <= b {
        a
    } else {
        b
    }
}

/// Second Bernoulli polynomial B_2(x) = x^2 - x + 1/6.
pub fn bernoulli2(x: &BigRational) -> BigRational {
    x * x - x + rat(1, 6)
}

/// Canonical text form: "p" for integers, "p/q" otherwise.
pub fn render_rat(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Usage(format!("bad rational: {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Usage(format!("bad rational: {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Usage(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}
