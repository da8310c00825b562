//! Fixed-point high-precision real and complex arithmetic.
//!
//! Values are `mant * 2^(-prec)` with an arbitrary-precision integer
//! mantissa. Each operation keeps the stated precision and loses at most a
//! few ulps; series evaluated here have rapidly decaying terms, so there is
//! no need for a full floating-point tower. Transcendental kernels (pi, exp,
//! roots of unity) run with internal guard bits and round once at the end.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigFloat {
    mant: BigInt,
    prec: u32,
}

impl BigFloat {
    pub fn zero(prec: u32) -> Self {
        BigFloat { mant: BigInt::zero(), prec }
    }

    pub fn one(prec: u32) -> Self {
        BigFloat { mant: BigInt::one() << prec, prec }
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        BigFloat { mant: BigInt::from(n) << prec, prec }
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let num = r.numer() << prec;
        BigFloat { mant: num.div_floor(r.denom()), prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        if prec >= self.prec {
            BigFloat { mant: &self.mant << (prec - self.prec), prec }
        } else {
            BigFloat { mant: &self.mant >> (self.prec - prec), prec }
        }
    }

    fn assert_same(&self, other: &Self) {
        assert_eq!(self.prec, other.prec, "mixed-precision arithmetic");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same(other);
        BigFloat { mant: &self.mant + &other.mant, prec: self.prec }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same(other);
        BigFloat { mant: &self.mant - &other.mant, prec: self.prec }
    }

    pub fn neg(&self) -> Self {
        BigFloat { mant: -&self.mant, prec: self.prec }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same(other);
        BigFloat { mant: (&self.mant * &other.mant) >> self.prec, prec: self.prec }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.assert_same(other);
        assert!(!other.mant.is_zero(), "division by zero");
        BigFloat {
            mant: (&self.mant << self.prec).div_floor(&other.mant),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Self {
        BigFloat { mant: self.mant.abs(), prec: self.prec }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// Square root of a nonnegative value.
    pub fn sqrt(&self) -> Self {
        assert!(!self.mant.is_negative(), "sqrt of negative value");
        BigFloat { mant: (&self.mant << self.prec).sqrt(), prec: self.prec }
    }

    /// Nearest integer (ties toward +infinity).
    pub fn round_to_int(&self) -> BigInt {
        let half = BigInt::one() << (self.prec - 1);
        (&self.mant + half) >> self.prec
    }

    pub fn to_f64(&self) -> f64 {
        // Scale the mantissa down first so huge values stay finite.
        let bits = self.mant.bits() as i64;
        if bits <= 900 {
            self.mant.to_f64().unwrap_or(f64::NAN) / 2f64.powi(self.prec as i32)
        } else {
            let shift = bits - 64;
            let top = (&self.mant >> shift).to_f64().unwrap_or(f64::NAN);
            top * 2f64.powi((shift - self.prec as i64) as i32)
        }
    }

    pub fn cmp_abs(&self, other: &Self) -> std::cmp::Ordering {
        self.assert_same(other);
        self.mant.abs().cmp(&other.mant.abs())
    }

    /// pi at `prec` fractional bits (Machin's formula).
    pub fn pi(prec: u32) -> Self {
        let wp = prec + 24;
        let a = atan_inv_fixed(5, wp);
        let b = atan_inv_fixed(239, wp);
        let mant = (a << 4u32) - (b << 2u32);
        BigFloat { mant, prec: wp }.with_prec(prec)
    }

    /// exp(x) for a real argument of moderate size.
    pub fn exp(&self) -> Self {
        let prec = self.prec;
        // Halve the argument until |r| < 1/2, then Taylor and square back.
        let k = (self.mant.bits() as i64 - (prec as i64 - 1)).max(0) as u32;
        let wp = prec + 32 + 2 * k;
        let r = self.with_prec(wp);
        let r = BigFloat { mant: r.mant >> k, prec: wp };
        let mut sum = BigFloat::one(wp);
        let mut term = BigFloat::one(wp);
        let mut n: i64 = 1;
        loop {
            term = term.mul(&r);
            term = BigFloat {
                mant: term.mant.div_floor(&BigInt::from(n)),
                prec: wp,
            };
            if term.mant.is_zero() {
                break;
            }
            sum = sum.add(&term);
            n += 1;
        }
        for _ in 0..k {
            sum = sum.mul(&sum);
        }
        sum.with_prec(prec)
    }
}

/// atan(1/x) * 2^prec as an integer, by the alternating series.
fn atan_inv_fixed(x: i64, prec: u32) -> BigInt {
    let scale = BigInt::one() << prec;
    let x2 = BigInt::from(x * x);
    let mut cur = scale.div_floor(&BigInt::from(x));
    let mut sum = BigInt::zero();
    let mut k: i64 = 0;
    while !cur.is_zero() {
        let term = cur.clone().div_floor(&BigInt::from(2 * k + 1));
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        cur = cur.div_floor(&x2);
        k += 1;
    }
    sum
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cplx {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Cplx {
    pub fn zero(prec: u32) -> Self {
        Cplx { re: BigFloat::zero(prec), im: BigFloat::zero(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Cplx { re: BigFloat::one(prec), im: BigFloat::zero(prec) }
    }

    pub fn from_real(re: BigFloat) -> Self {
        let prec = re.prec();
        Cplx { re, im: BigFloat::zero(prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Cplx { re: self.re.with_prec(prec), im: self.im.with_prec(prec) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Cplx { re: self.re.add(&other.re), im: self.im.add(&other.im) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Cplx { re: self.re.sub(&other.re), im: self.im.sub(&other.im) }
    }

    pub fn neg(&self) -> Self {
        Cplx { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let re = self.re.mul(&other.re).sub(&self.im.mul(&other.im));
        let im = self.re.mul(&other.im).add(&self.im.mul(&other.re));
        Cplx { re, im }
    }

    pub fn scale(&self, s: &BigFloat) -> Self {
        Cplx { re: self.re.mul(s), im: self.im.mul(s) }
    }

    pub fn inv(&self) -> Self {
        let norm = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        Cplx { re: self.re.div(&norm), im: self.im.neg().div(&norm) }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    pub fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.inv().powi(-n);
        }
        let mut result = Cplx::one(self.prec());
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn abs(&self) -> BigFloat {
        self.re.mul(&self.re).add(&self.im.mul(&self.im)).sqrt()
    }

    pub fn dist(&self, other: &Self) -> BigFloat {
        self.sub(other).abs()
    }

    /// e^(2*pi*i*p/q) at `prec` fractional bits.
    pub fn root_of_unity(q: i64, p: i64, prec: u32) -> Self {
        assert!(q > 0);
        let p = p.rem_euclid(q);
        if p == 0 {
            return Cplx::one(prec);
        }
        Self::exp_2pi_i(&BigRational::new(BigInt::from(p), BigInt::from(q)), prec)
    }

    /// e^(2*pi*i*t) for rational t.
    pub fn exp_2pi_i(t: &BigRational, prec: u32) -> Self {
        let t = t - t.floor();
        let halvings = 5u32;
        let wp = prec + 32 + 2 * halvings;
        // theta = 2*pi*t / 2^halvings, |theta| < 2*pi/32 < 0.2
        let two_pi = BigFloat::pi(wp).mul(&BigFloat::from_i64(2, wp));
        let theta = two_pi.mul(&BigFloat::from_rational(&t, wp));
        let theta = BigFloat { mant: theta.mant >> halvings, prec: wp };
        // Taylor series of exp(i*theta)
        let mut sum = Cplx::one(wp);
        let mut term = Cplx::one(wp);
        let itheta = Cplx { re: BigFloat::zero(wp), im: theta };
        let mut n: i64 = 1;
        loop {
            term = term.mul(&itheta);
            term = Cplx {
                re: BigFloat { mant: term.re.mant.div_floor(&BigInt::from(n)), prec: wp },
                im: BigFloat { mant: term.im.mant.div_floor(&BigInt::from(n)), prec: wp },
            };
            if term.re.mant.is_zero() && term.im.mant.is_zero() {
                break;
            }
            sum = sum.add(&term);
            n += 1;
        }
        for _ in 0..halvings {
            sum = sum.mul(&sum);
        }
        sum.with_prec(prec)
    }

    pub fn to_f64s(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}
