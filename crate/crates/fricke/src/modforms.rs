//! The concrete series: normalized Eisenstein series E4 and E6, the
//! discriminant Delta, the j-function, Weierstrass p-values at torsion
//! points, Fricke functions, and Siegel-function powers.
//!
//! Normalization. The classical weight-k quantities carry powers of 2*pi*i
//! that cancel in every function this crate exposes, so everything is built
//! from the integral series
//!
//!   E4 = 1 + 240 sum sigma_3(n) q^n,     E6 = 1 - 504 sum sigma_5(n) q^n,
//!   Delta = q prod (1 - q^n)^24,         j = E4^3 / Delta,
//!
//! the (2*pi*i)^(-2)-normalized p-value series wp_v, and a single rational
//! constant: the Fricke function of index v is 12 * E4 * E6 * wp_v / Delta.
//! The constant is pinned by the 2-torsion resolvent identities (sigma_1 = 0,
//! sigma_2 = -3 j (j - 1728), sigma_3 = -2 j (j - 1728)^2), which the test
//! suite and the acceptance suite both check.
//!
//! Siegel functions are built from the standard infinite q-product, keeping
//! the root-of-unity prefactor as an exact rational phase r (the function is
//! e^(2 pi i r) q^rho * unit). Only 12N-th powers, whose prefactor collapses
//! into Q(zeta_N), are ever expanded into plain series.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;

use crate::cyclo::CycloElem;
use crate::error::{Error, Result};
use crate::qseries::FracQSeries;
use crate::rational::{bernoulli2, frac_part, parse_rat, rat, rat_int, render_rat};

/// Index v = [a/N, b/N] of a family member, stored with entries reduced to
/// [0, N). The constructor only rejects the lattice point; membership in the
/// primitive index set (gcd(a, b, N) = 1) is a separate predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexVector {
    level: u32,
    a: i64,
    b: i64,
}

impl IndexVector {
    pub fn new(level: u32, a: i64, b: i64) -> Result<Self> {
        if level < 2 {
            return Err(Error::BadIndex(format!("level {level} must be >= 2")));
        }
        let n = level as i64;
        let a = a.rem_euclid(n);
        let b = b.rem_euclid(n);
        if a == 0 && b == 0 {
            return Err(Error::BadIndex("index vector lies in Z^2".into()));
        }
        Ok(IndexVector { level, a, b })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn numerators(&self) -> (i64, i64) {
        (self.a, self.b)
    }

    pub fn v1(&self) -> BigRational {
        rat(self.a, self.level as i64)
    }

    pub fn v2(&self) -> BigRational {
        rat(self.b, self.level as i64)
    }

    /// True iff N is the least denominator of v, i.e. v lies in the
    /// primitive index set for level N.
    pub fn is_primitive(&self) -> bool {
        num_integer::gcd(num_integer::gcd(self.a, self.b), self.level as i64) == 1
    }

    pub fn neg(&self) -> Self {
        IndexVector {
            level: self.level,
            a: (-self.a).rem_euclid(self.level as i64),
            b: (-self.b).rem_euclid(self.level as i64),
        }
    }

    pub fn scale(&self, k: i64) -> Result<Self> {
        IndexVector::new(self.level, self.a * k, self.b * k)
    }

    /// Canonical representative of the class {v, -v} mod Z^2:
    /// lexicographically least numerator pair.
    pub fn canonical(&self) -> Self {
        let m = self.neg();
        if (self.a, self.b) <= (m.a, m.b) {
            *self
        } else {
            m
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical() == *self
    }

    /// Canonical representatives of all classes of the primitive index set
    /// modulo {±1}, sorted.
    pub fn primitive_classes(level: u32) -> Vec<IndexVector> {
        let n = level as i64;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if let Ok(v) = IndexVector::new(level, a, b) {
                    if v.is_primitive() && v.is_canonical() {
                        out.push(v);
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Parse "a/N,b/N" (rational entries whose denominators divide N).
    pub fn parse(text: &str, level: u32) -> Result<Self> {
        let (s1, s2) = text
            .split_once(',')
            .ok_or_else(|| Error::BadIndex(format!("expected \"v1,v2\", got {text:?}")))?;
        let n = BigRational::from_integer(BigInt::from(level));
        let mut nums = [0i64; 2];
        for (i, s) in [s1, s2].iter().enumerate() {
            let scaled = parse_rat(s)? * &n;
            if !scaled.denom().is_one() {
                return Err(Error::BadIndex(format!(
                    "{s} is not a multiple of 1/{level}"
                )));
            }
            nums[i] = i64::try_from(scaled.numer())
                .map_err(|_| Error::BadIndex("index numerator out of range".into()))?;
        }
        IndexVector::new(level, nums[0], nums[1])
    }
}

impl fmt::Display for IndexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", render_rat(&self.v1()), render_rat(&self.v2()))
    }
}

static SERIES_CACHE: Lazy<Mutex<HashMap<(u8, i64), FracQSeries>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn cached(kind: u8, t: i64, build: impl FnOnce() -> FracQSeries) -> FracQSeries {
    if let Some(s) = SERIES_CACHE.lock().unwrap().get(&(kind, t)) {
        return s.clone();
    }
    let s = build();
    SERIES_CACHE.lock().unwrap().insert((kind, t), s.clone());
    s
}

fn int_coeff(c: i64) -> CycloElem {
    CycloElem::from_rational(1, rat_int(c))
}

fn bigint_coeff(c: BigInt) -> CycloElem {
    CycloElem::from_rational(1, BigRational::from_integer(c))
}

/// Euler product prod (1 - q^n) by the pentagonal-number expansion, to
/// exponents < t.
fn euler_product(t: i64) -> FracQSeries {
    let mut terms = vec![(0i64, int_coeff(1))];
    let mut k: i64 = 1;
    loop {
        let e1 = k * (3 * k - 1) / 2;
        let e2 = k * (3 * k + 1) / 2;
        if e1 >= t && e2 >= t {
            break;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        if e1 < t {
            terms.push((e1, int_coeff(sign)));
        }
        if e2 < t {
            terms.push((e2, int_coeff(sign)));
        }
        k += 1;
    }
    FracQSeries::from_terms(1, 1, t, terms)
}

/// Delta = q prod (1 - q^n)^24, integer coefficients, exponents < t known.
pub fn delta_norm_series(t: i64) -> FracQSeries {
    assert!(t >= 1);
    cached(0, t, || {
        euler_product(t - 1)
            .pow(24)
            .expect("integral series")
            .shift_exponent(&rat_int(1))
            .expect("integer shift")
    })
}

fn divisor_power_sums(t: i64, e: u32) -> Vec<BigInt> {
    let t = t.max(0) as usize;
    let mut sums = vec![BigInt::zero(); t];
    for d in 1..t {
        let dp = BigInt::from(d).pow(e);
        let mut m = d;
        while m < t {
            sums[m] += &dp;
            m += d;
        }
    }
    sums
}

/// E4 = 1 + 240 sum sigma_3(n) q^n.
pub fn e4_series(t: i64) -> FracQSeries {
    assert!(t >= 1);
    cached(1, t, || {
        let sig = divisor_power_sums(t, 3);
        let mut terms = vec![(0i64, int_coeff(1))];
        for (n, s) in sig.iter().enumerate().skip(1) {
            terms.push((n as i64, bigint_coeff(240 * s)));
        }
        FracQSeries::from_terms(1, 1, t, terms)
    })
}

/// E6 = 1 - 504 sum sigma_5(n) q^n.
pub fn e6_series(t: i64) -> FracQSeries {
    assert!(t >= 1);
    cached(2, t, || {
        let sig = divisor_power_sums(t, 5);
        let mut terms = vec![(0i64, int_coeff(1))];
        for (n, s) in sig.iter().enumerate().skip(1) {
            terms.push((n as i64, bigint_coeff(-504 * s)));
        }
        FracQSeries::from_terms(1, 1, t, terms)
    })
}

/// j = E4^3 / Delta = q^-1 + 744 + 196884 q + ..., exponents < t known.
pub fn j_series(t: i64) -> FracQSeries {
    assert!(t >= 1);
    cached(3, t, || {
        let e4 = e4_series(t + 2);
        let delta = delta_norm_series(t + 2);
        e4.pow(3)
            .expect("integral series")
            .mul(&delta.inv().expect("Delta has leading coefficient 1"))
            .expect("series product")
    })
}

/// 12 E4 E6 / Delta: the Fricke function is this series times wp_v.
fn fricke_base(t: i64) -> FracQSeries {
    cached(4, t, || {
        let e4 = e4_series(t + 2);
        let e6 = e6_series(t + 2);
        let delta = delta_norm_series(t + 2);
        e4.mul(&e6)
            .expect("series product")
            .mul(&delta.inv().expect("Delta has leading coefficient 1"))
            .expect("series product")
            .scale_rat(&rat_int(12))
    })
}

/// The (2 pi i)^(-2)-normalized Weierstrass p-value series wp_v, with
/// coefficients in Q(zeta_N) and exponents in (1/N)Z, known below t.
///
/// With q_z = zeta_N^b q^(a/N) the expansion is
///   1/12 + q_z/(1-q_z)^2
///       + sum_{n>=1} [ q^n q_z/(1-q^n q_z)^2 + (q^n/q_z)/(1-q^n/q_z)^2
///                      - 2 q^n/(1-q^n)^2 ],
/// where each x/(1-x)^2 unfolds as sum_{k>=1} k x^k. For a = 0 the q_z
/// factor is a root of unity and the first piece is an exact constant.
pub fn wp_norm_series(v: &IndexVector, t: i64) -> FracQSeries {
    let n = v.level() as i64;
    let m = v.level();
    let (a, b) = v.numerators();
    let tkey = t * n;
    let mut terms: Vec<(i64, CycloElem)> = Vec::new();
    terms.push((0, CycloElem::from_rational(m, rat(1, 12))));

    if a == 0 {
        // q_z = zeta^b: constant zeta^b / (1 - zeta^b)^2
        let z = CycloElem::root_of_unity(m, b);
        let d = CycloElem::one(m).sub(&z).expect("same order");
        let c = z
            .mul(&d.mul(&d).unwrap().inv().expect("1 - zeta^b is nonzero"))
            .unwrap();
        terms.push((0, c));
    } else {
        let mut k = 1i64;
        while k * a < tkey {
            terms.push((k * a, CycloElem::root_of_unity(m, b * k).scale(&rat_int(k))));
            k += 1;
        }
    }

    let mut nn = 1i64;
    while nn * n + a < tkey {
        let base = nn * n + a;
        let mut k = 1i64;
        while k * base < tkey {
            terms.push((k * base, CycloElem::root_of_unity(m, b * k).scale(&rat_int(k))));
            k += 1;
        }
        nn += 1;
    }
    let mut nn = 1i64;
    while nn * n - a < tkey {
        let base = nn * n - a;
        let mut k = 1i64;
        while k * base < tkey {
            terms.push((k * base, CycloElem::root_of_unity(m, -b * k).scale(&rat_int(k))));
            k += 1;
        }
        nn += 1;
    }

    let sig1 = divisor_power_sums(t, 1);
    for (mm, s) in sig1.iter().enumerate().skip(1) {
        terms.push((mm as i64 * n, bigint_coeff(-2 * s).lift(m).expect("lift to N")));
    }

    FracQSeries::from_terms(m, v.level(), tkey, terms)
}

/// Fricke function f_v = 12 E4 E6 wp_v / Delta, exponents < t known.
/// Members are even in v and memoized per class.
pub fn fricke_series(v: &IndexVector, t: i64) -> FracQSeries {
    let key = {
        let c = v.canonical();
        let (a, b) = c.numerators();
        (v.level(), a, b, t)
    };
    if let Some(s) = FRICKE_CACHE.lock().unwrap().get(&key) {
        return s.clone();
    }
    let base = fricke_base(t);
    let wp = wp_norm_series(v, t + 1);
    let series = base.mul(&wp).expect("series product");
    FRICKE_CACHE.lock().unwrap().insert(key, series.clone());
    series
}

/// Factored form of a Siegel function: the function is
/// e^(2 pi i phase) * q^qexp * unit. Powering by m multiplies `phase` and
/// `qexp` by m exactly and raises `unit` to the m-th power.
///
/// `unit` has q-order 0; its leading coefficient is 1 when <v1> > 0 and the
/// cyclotomic constant (1 - zeta_N^b) when v1 is integral (that factor is
/// not a rational phase, so it stays in the series).
#[derive(Debug, Clone)]
pub struct SiegelSymbol {
    pub phase: BigRational,
    pub qexp: BigRational,
    pub unit: FracQSeries,
}

/// Siegel symbol for v with the unit series known to relative order rel_t
/// (q-units above the leading term).
///
/// From the standard product expansion with 0 <= a1 < 1, q_z = zeta^b q^a1:
///   g_v = -e^(pi i a2 (a1 - 1)) q^((1/2)B2(a1))
///         (1 - q_z) prod_{n>=1} (1 - q^n q_z)(1 - q^n / q_z).
pub fn siegel_symbol(v: &IndexVector, rel_t: i64) -> SiegelSymbol {
    let n = v.level() as i64;
    let m = v.level();
    let (a, b) = v.numerators();
    let a1 = v.v1();
    let a2 = v.v2();

    let qexp = bernoulli2(&a1) / rat_int(2);
    // -1 = e^(pi i) combines with e^(pi i a2 (a1 - 1))
    let phase = frac_part(&(rat(1, 2) + &a2 * (&a1 - rat_int(1)) / rat_int(2)));

    let tkey = rel_t * n;
    let mut unit = FracQSeries::one(m, v.level(), tkey);
    let factor = |key: i64, root: CycloElem| -> FracQSeries {
        FracQSeries::from_terms(
            m,
            v.level(),
            tkey,
            vec![(0, CycloElem::one(m)), (key, root.neg())],
        )
    };
    if a == 0 {
        let c = CycloElem::one(m)
            .sub(&CycloElem::root_of_unity(m, b))
            .expect("same order");
        unit = unit.scale(&c).expect("constant scale");
    } else {
        unit = unit.mul(&factor(a, CycloElem::root_of_unity(m, b))).unwrap();
    }
    let mut nn = 1i64;
    while nn * n + a < tkey {
        unit = unit
            .mul(&factor(nn * n + a, CycloElem::root_of_unity(m, b)))
            .unwrap();
        nn += 1;
    }
    let mut nn = 1i64;
    while nn * n - a < tkey {
        unit = unit
            .mul(&factor(nn * n - a, CycloElem::root_of_unity(m, -b)))
            .unwrap();
        nn += 1;
    }
    SiegelSymbol { phase, qexp, unit }
}

/// Exact expansion of g_v^m for 12N | m, with cyclotomic order N and
/// exponent denominator N; exponents < t are known. The q-order is
/// (m/2) B2(<v1>) by construction.
///
/// The m-th power of the product unit is taken in one quadratic pass via
/// B' = (m log unit)' B: with the factors (1 - zeta^b q^(e/N)) the scaled
/// log-derivative weights are w_(ke) = -m e zeta^(bk), all integral, and
/// b_k = (1/k) sum_j w_j b_(k-j).
pub fn siegel_power_series(v: &IndexVector, m: i64, t: i64) -> Result<FracQSeries> {
    let n = v.level() as i64;
    if m == 0 || m.rem_euclid(12 * n) != 0 {
        return Err(Error::Usage(format!(
            "Siegel power exponent {m} must be a nonzero multiple of 12N = {}",
            12 * n
        )));
    }
    let key = {
        let c = v.canonical();
        let (a, b) = c.numerators();
        (v.level(), a, b, m, t)
    };
    {
        let cache = SIEGEL_CACHE.lock().unwrap();
        if let Some(s) = cache.get(&key) {
            return Ok(s.clone());
        }
    }

    let level = v.level();
    let (a, b) = v.numerators();
    let qexp = bernoulli2(&v.v1()) / rat_int(2);
    let total_shift = &qexp * rat_int(m);
    // required relative precision: t - m*rho, rounded up to whole q-units
    let rel = rat_int(t) - &total_shift;
    let rel_t = rel.ceil().numer().max(&BigInt::one()).clone();
    let rel_t = i64::try_from(&rel_t).expect("relative precision in range");
    let relkey = rel_t * n;

    // leading cyclotomic constant: 1, or (1 - zeta^b)^m when v1 is integral
    let c0_pow = if a == 0 {
        CycloElem::one(level)
            .sub(&CycloElem::root_of_unity(level, b))?
            .pow(m)?
    } else {
        CycloElem::one(level)
    };

    // scaled log-derivative weights of the unit product
    let mut weights: Vec<CycloElem> = vec![CycloElem::zero(level); relkey as usize];
    let mut add_factor = |e: i64, root_num: i64| {
        let mut k = 1i64;
        while k * e < relkey {
            let w = CycloElem::root_of_unity(level, root_num * k).scale(&rat_int(-m * e));
            let slot = &mut weights[(k * e) as usize];
            *slot = slot.add(&w).expect("same order");
            k += 1;
        }
    };
    if a > 0 {
        add_factor(a, b);
    }
    let mut nn = 1i64;
    while nn * n + a < relkey {
        add_factor(nn * n + a, b);
        nn += 1;
    }
    let mut nn = 1i64;
    while nn * n - a < relkey {
        add_factor(nn * n - a, -b);
        nn += 1;
    }

    // b_k = (1/k) sum_{j=1}^{k} w_j b_(k-j)
    let mut coeffs: Vec<CycloElem> = Vec::with_capacity(relkey as usize);
    coeffs.push(CycloElem::one(level));
    for k in 1..relkey {
        let mut acc = CycloElem::zero(level);
        for j in 1..=k {
            let w = &weights[j as usize];
            if w.is_zero() {
                continue;
            }
            let bk = &coeffs[(k - j) as usize];
            if bk.is_zero() {
                continue;
            }
            acc = acc.add(&w.mul(bk)?)?;
        }
        coeffs.push(acc.scale(&rat(1, k)));
    }

    // the prefactor e^(2 pi i phase m) collapses into Q(zeta_N)
    let a2 = v.v2();
    let a1 = v.v1();
    let phase = frac_part(&(rat(1, 2) + &a2 * (&a1 - rat_int(1)) / rat_int(2)));
    let phase_m = frac_part(&(&phase * rat_int(m)));
    let scaled = &phase_m * rat_int(n);
    assert!(
        scaled.denom().is_one(),
        "12N-th power phase must land in Q(zeta_N)"
    );
    let root = CycloElem::root_of_unity(level, i64::try_from(scaled.numer()).unwrap());
    let lead = root.mul(&c0_pow)?;

    let unit_pow = FracQSeries::from_terms(
        level,
        level,
        relkey,
        coeffs.into_iter().enumerate().map(|(i, c)| (i as i64, c)),
    );
    let series = unit_pow.scale(&lead)?.shift_exponent(&total_shift)?;
    let series = series.truncate_to(&rat_int(t))?;
    SIEGEL_CACHE
        .lock()
        .unwrap()
        .insert(key, series.clone());
    Ok(series)
}

static SIEGEL_CACHE: Lazy<Mutex<HashMap<(u32, i64, i64, i64, i64), FracQSeries>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

static FRICKE_CACHE: Lazy<Mutex<HashMap<(u32, i64, i64, i64), FracQSeries>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));
