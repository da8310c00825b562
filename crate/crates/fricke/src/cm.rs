//! Numerical evaluation of family members at CM points, and the
//! reciprocity-group diagnostics for ray-class-field generation.
//!
//! For an imaginary quadratic discriminant d_K the CM point is
//! tau_K = (d_K + sqrt(d_K))/2, with minimal polynomial x^2 + B_K x + C_K
//! (B_K = -d_K, C_K = (d_K^2 - d_K)/4) and ring of integers Z tau_K + Z.
//! The reciprocity group W consists of the matrices [t - B_K s, -C_K s; s, t]
//! invertible mod N; its classes mod {±1} act on the member at [0, 1/N] by
//! sending it to the member at [s/N, t/N], and the resulting value set is
//! what a generation claim predicts to be pairwise distinct.
//!
//! Everything here is numerics at a stated precision: q at tau_K has modulus
//! e^(-pi sqrt|d_K|) < 1/4, so truncated series evaluate with a rapidly
//! decaying tail, reported as |q|^(T - ord) relative to the leading term.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::famgroup::{FamilyDescriptor, MatModN};
use crate::modforms::{siegel_symbol, IndexVector};
use crate::numeric::{BigFloat, Cplx};
use crate::qseries::{FracQSeries, QOrder};
use crate::rational::rat;

/// Fundamental discriminants -3 >= d >= -200 with their class numbers.
/// Regenerated by counting reduced quadratic forms; a test re-derives a
/// sample by brute force.
pub const CLASS_NUMBER_TABLE: &[(i64, u32)] = &[
    (-3, 1), (-4, 1), (-7, 1), (-8, 1), (-11, 1), (-15, 2), (-19, 1), (-20, 2),
    (-23, 3), (-24, 2), (-31, 3), (-35, 2), (-39, 4), (-40, 2), (-43, 1),
    (-47, 5), (-51, 2), (-52, 2), (-55, 4), (-56, 4), (-59, 3), (-67, 1),
    (-68, 4), (-71, 7), (-79, 5), (-83, 3), (-84, 4), (-87, 6), (-88, 2),
    (-91, 2), (-95, 8), (-103, 5), (-104, 6), (-107, 3), (-111, 8), (-115, 2),
    (-116, 6), (-119, 10), (-120, 4), (-123, 2), (-127, 5), (-131, 5),
    (-132, 4), (-136, 4), (-139, 3), (-143, 10), (-148, 2), (-151, 7),
    (-152, 6), (-155, 4), (-159, 10), (-163, 1), (-164, 8), (-167, 11),
    (-168, 4), (-179, 5), (-183, 8), (-184, 4), (-187, 2), (-191, 13),
    (-195, 4), (-199, 9),
];

/// An imaginary quadratic field given by its (fundamental) discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImagQuadData {
    pub d_k: i64,
    /// min(tau_K, Q) = x^2 + b_k x + c_k
    pub b_k: i64,
    pub c_k: i64,
    pub class_number: u32,
}

pub fn make_field(d_k: i64) -> Result<ImagQuadData> {
    let class_number = CLASS_NUMBER_TABLE
        .iter()
        .find(|(d, _)| *d == d_k)
        .map(|(_, h)| *h)
        .ok_or_else(|| {
            Error::Usage(format!(
                "{d_k} is not a fundamental discriminant in the built-in range [-200, -3]"
            ))
        })?;
    let b_k = -d_k;
    debug_assert_eq!((d_k * d_k - d_k) % 4, 0);
    let c_k = (d_k * d_k - d_k) / 4;
    debug_assert_eq!(b_k * b_k - 4 * c_k, d_k);
    Ok(ImagQuadData { d_k, b_k, c_k, class_number })
}

impl ImagQuadData {
    /// tau_K = (d_K + i sqrt|d_K|)/2 at `prec` fractional bits.
    pub fn tau(&self, prec: u32) -> Cplx {
        let half = BigFloat::from_rational(&rat(1, 2), prec);
        let re = BigFloat::from_i64(self.d_k, prec).mul(&half);
        let im = BigFloat::from_i64(-self.d_k, prec).sqrt().mul(&half);
        Cplx { re, im }
    }

    /// |q| = e^(-pi sqrt|d_K|) as an f64 (diagnostics and tail bounds).
    pub fn abs_q_f64(&self) -> f64 {
        (-std::f64::consts::PI * ((-self.d_k) as f64).sqrt()).exp()
    }
}

/// The group of matrices [t - B_K s, -C_K s; s, t] that are invertible
/// mod N, together with its classes mod {±1}.
#[derive(Debug, Clone)]
pub struct ReciprocityGroup {
    pub level: u32,
    pub elements: Vec<(i64, i64, MatModN)>,
    /// canonical (s, t) representative per {±1} class, sorted
    pub pm_classes: Vec<(i64, i64)>,
}

pub fn reciprocity_group(k: &ImagQuadData, level: u32) -> Result<ReciprocityGroup> {
    if level < 2 {
        return Err(Error::Usage(format!("level {level} must be >= 2")));
    }
    let n = level as i64;
    let mut elements = Vec::new();
    let mut pm = std::collections::BTreeSet::new();
    for s in 0..n {
        for t in 0..n {
            let det = (t * t - k.b_k * s * t + k.c_k * s * s).rem_euclid(n);
            if num_integer::gcd(det, n) != 1 {
                continue;
            }
            let gamma = MatModN::new(level, t - k.b_k * s, -k.c_k * s, s, t)?;
            debug_assert_eq!(gamma.det(), det);
            elements.push((s, t, gamma));
            let neg = ((-s).rem_euclid(n), (-t).rem_euclid(n));
            pm.insert(std::cmp::min((s, t), neg));
        }
    }
    Ok(ReciprocityGroup {
        level,
        elements,
        pm_classes: pm.into_iter().collect(),
    })
}

/// Brute-force count of invertible residues a tau + b in the quotient of
/// Z tau + Z by N, using tau^2 = -B tau - C. Independent of the matrix
/// description; used to cross-check |W|.
pub fn unit_count_by_residues(k: &ImagQuadData, level: u32) -> usize {
    let n = level as i64;
    let mul = |x: (i64, i64), y: (i64, i64)| -> (i64, i64) {
        // (a tau + b)(c tau + d) = (ad + bc - ac B) tau + (bd - ac C)
        let (a, b) = x;
        let (c, d) = y;
        (
            (a * d + b * c - a * c * k.b_k).rem_euclid(n),
            (b * d - a * c * k.c_k).rem_euclid(n),
        )
    };
    let mut count = 0;
    for a in 0..n {
        for b in 0..n {
            'search: for c in 0..n {
                for d in 0..n {
                    if mul((a, b), (c, d)) == (0, 1) {
                        count += 1;
                        break 'search;
                    }
                }
            }
        }
    }
    count
}

/// Value and relative tail bound of a truncated series at tau_K: each term
/// c q^(k/D) evaluates through q^(1/D) = zeta_(2D)^(d_K) e^(-pi sqrt|d_K|/D).
pub fn eval_series_at_cm(
    s: &FracQSeries,
    k: &ImagQuadData,
    prec: u32,
) -> Result<(Cplx, f64)> {
    let d = s.exp_den() as i64;
    let root = Cplx::root_of_unity(2 * d, k.d_k, prec);
    let pi = BigFloat::pi(prec);
    let sqrt_dk = BigFloat::from_i64(-k.d_k, prec).sqrt();
    let r0 = pi
        .mul(&sqrt_dk)
        .div(&BigFloat::from_i64(d, prec))
        .neg()
        .exp();
    let q_unit = root.scale(&r0);
    let mut acc = Cplx::zero(prec);
    for (key, c) in s.term_keys() {
        let term = c.embed(prec).mul(&q_unit.powi(key));
        acc = acc.add(&term);
    }
    let tail = match s.ord() {
        QOrder::Value(o) => {
            let span = s.trunc() - o;
            let span = span.to_f64().unwrap_or(f64::INFINITY);
            (k.abs_q_f64().ln() * span).exp()
        }
        QOrder::ZeroToPrecision => 0.0,
    };
    Ok((acc, tail))
}

/// e^(2 pi i tau_K rho) for rational rho: modulus e^(-pi sqrt|d| rho) and
/// phase zeta from e^(pi i d_K rho).
fn q_power_at_cm(k: &ImagQuadData, rho: &num_rational::BigRational, prec: u32) -> Result<Cplx> {
    let phase = Cplx::exp_2pi_i(&(rho * rat(k.d_k, 2)), prec);
    let pi = BigFloat::pi(prec);
    let sqrt_dk = BigFloat::from_i64(-k.d_k, prec).sqrt();
    let exponent = pi.mul(&sqrt_dk).mul(&BigFloat::from_rational(rho, prec)).neg();
    Ok(phase.scale(&exponent.exp()))
}

/// Evaluate the family member h_v at tau_K. Siegel powers go through the
/// factored symbol (phase x q-power x unit value, then one complex power)
/// for conditioning; other members evaluate their plain expansion.
pub fn eval_member_at_cm(
    family: &FamilyDescriptor,
    v: &IndexVector,
    k: &ImagQuadData,
    prec: u32,
    t: i64,
) -> Result<Cplx> {
    match family {
        FamilyDescriptor::SiegelPow { exponent, .. } => {
            eval_siegel_power(v, *exponent, k, prec, t)
        }
        FamilyDescriptor::Product { factors, .. } => {
            let mut acc = Cplx::one(prec);
            for (slot, m) in factors {
                let w = slot.act_on_index(v)?;
                acc = acc.mul(&eval_siegel_power(&w, *m, k, prec, t)?);
            }
            Ok(acc)
        }
        _ => {
            let s = family.member_series(v, t)?;
            let (val, _tail) = eval_series_at_cm(&s, k, prec)?;
            Ok(val)
        }
    }
}

fn eval_siegel_power(
    v: &IndexVector,
    m: i64,
    k: &ImagQuadData,
    prec: u32,
    t: i64,
) -> Result<Cplx> {
    let symbol = siegel_symbol(v, t.max(4));
    let phase = Cplx::exp_2pi_i(&symbol.phase, prec);
    let qrho = q_power_at_cm(k, &symbol.qexp, prec)?;
    let (unit_val, _tail) = eval_series_at_cm(&symbol.unit, k, prec)?;
    Ok(phase.mul(&qrho).mul(&unit_val).powi(m))
}

/// Near-integrality decomposition of a complex value against Z + Z tau_K:
/// returns (m1, m2, residual) with m1, m2 the rounded integers.
fn lattice_fit(c: &Cplx, tau: &Cplx) -> (BigInt, BigInt, f64) {
    let m2_real = c.im.div(&tau.im);
    let m2 = m2_real.round_to_int();
    let m2f = BigFloat::from_rational(
        &num_rational::BigRational::from_integer(m2.clone()),
        c.prec(),
    );
    let m1 = c.re.sub(&m2f.mul(&tau.re)).round_to_int();
    let m1f = BigFloat::from_rational(
        &num_rational::BigRational::from_integer(m1.clone()),
        c.prec(),
    );
    let fitted = Cplx::from_real(m1f).add(&tau.scale(&m2f));
    let residual = c.dist(&fitted).to_f64();
    (m1, m2, residual)
}

/// Verdicts and data of a conjugate-value run.
#[derive(Debug, Clone)]
pub struct CMReport {
    pub d_k: i64,
    pub level: u32,
    pub power: i64,
    pub prec_bits: u32,
    pub truncation: i64,
    pub tolerance: f64,
    pub near_tolerance: f64,
    /// (s, t, value) per ± class, sorted by (s, t)
    pub conjugates: Vec<(i64, i64, Cplx)>,
    pub min_pairwise_distance: f64,
    /// per coefficient of prod (x - value): (m1, m2, residual), when
    /// class_number = 1
    pub lattice_coeffs: Option<Vec<(BigInt, BigInt, f64)>>,
    pub distinct: bool,
    pub near_integral: Option<bool>,
    pub tail_bound: f64,
}

/// Evaluate the conjugates h_[s/N,t/N](tau_K)^n over W/{±1} and run the
/// distinctness and near-integrality diagnostics.
#[allow(clippy::too_many_arguments)]
pub fn cm_conjugates(
    family: &FamilyDescriptor,
    n_power: i64,
    k: &ImagQuadData,
    level: u32,
    prec: u32,
    t: i64,
    tolerance: f64,
    near_tolerance: f64,
) -> Result<CMReport> {
    if k.d_k == -3 || k.d_k == -4 {
        return Err(Error::Usage(
            "the reciprocity isomorphism excludes the fields of discriminant -3 and -4".into(),
        ));
    }
    if n_power == 0 {
        return Err(Error::Usage("conjugate power n must be nonzero".into()));
    }
    if family.level() != level {
        return Err(Error::Usage("family level does not match N".into()));
    }
    let group = reciprocity_group(k, level)?;
    let tau = k.tau(prec);

    let mut conjugates = Vec::new();
    for &(s, t_idx) in &group.pm_classes {
        let v = IndexVector::new(level, s, t_idx)?;
        let base = eval_member_at_cm(family, &v, k, prec, t)?;
        let val = base.powi(n_power);
        if (s, t_idx) == (0, 1) && base.abs().to_f64() <= tolerance {
            return Err(Error::ZeroValue(format!(
                "|h_[0,1/{level}](tau_K)| = {:.3e}",
                base.abs().to_f64()
            )));
        }
        conjugates.push((s, t_idx, val));
    }

    let mut min_dist = f64::INFINITY;
    for i in 0..conjugates.len() {
        for j in (i + 1)..conjugates.len() {
            let d = conjugates[i].2.dist(&conjugates[j].2).to_f64();
            min_dist = min_dist.min(d);
        }
    }
    if conjugates.len() == 1 {
        min_dist = f64::INFINITY;
    }

    // P(x) = prod (x - value), complex coefficients ascending
    let mut poly = vec![Cplx::one(prec)];
    for (_, _, val) in &conjugates {
        let mut next = vec![Cplx::zero(prec); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] = next[i + 1].add(c);
            next[i] = next[i].sub(&c.mul(val));
        }
        poly = next;
    }

    let lattice_coeffs = if k.class_number == 1 {
        Some(poly.iter().map(|c| lattice_fit(c, &tau)).collect::<Vec<_>>())
    } else {
        None
    };
    let near_integral = lattice_coeffs
        .as_ref()
        .map(|cs| cs.iter().all(|(_, _, r)| *r <= near_tolerance));
    let distinct = min_dist > tolerance;

    // worst relative tail among the evaluated members; truncation must keep
    // it below the distinctness tolerance
    let tail_bound = {
        let v = IndexVector::new(level, 0, 1)?;
        let s = family.member_series(&v, t)?;
        match s.ord() {
            QOrder::Value(o) => {
                let span = (s.trunc() - o).to_f64().unwrap_or(f64::INFINITY);
                (k.abs_q_f64().ln() * span).exp()
            }
            QOrder::ZeroToPrecision => 0.0,
        }
    };
    if tail_bound > tolerance {
        return Err(Error::PrecisionLoss(format!(
            "relative series tail {tail_bound:.3e} exceeds the tolerance {tolerance:.1e}; \
             raise the truncation"
        )));
    }

    Ok(CMReport {
        d_k: k.d_k,
        level,
        power: n_power,
        prec_bits: prec,
        truncation: t,
        tolerance,
        near_tolerance,
        conjugates,
        min_pairwise_distance: min_dist,
        lattice_coeffs,
        distinct,
        near_integral,
        tail_bound,
    })
}

// ---------------------------------------------------------------------------
// JSON mirror

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConjugateJson {
    pub s: i64,
    pub t: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LatticeCoeffJson {
    pub m1: String,
    pub m2: String,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CMReportJson {
    pub d_k: i64,
    pub level: u32,
    pub n: i64,
    pub prec_bits: u32,
    pub truncation: i64,
    pub tolerance: f64,
    pub near_tolerance: f64,
    pub conjugates: Vec<ConjugateJson>,
    pub min_pairwise_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_coeffs: Option<Vec<LatticeCoeffJson>>,
    pub distinct: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub near_integral: Option<bool>,
    pub tail_bound: f64,
}

impl CMReport {
    pub fn to_json(&self) -> CMReportJson {
        CMReportJson {
            d_k: self.d_k,
            level: self.level,
            n: self.power,
            prec_bits: self.prec_bits,
            truncation: self.truncation,
            tolerance: self.tolerance,
            near_tolerance: self.near_tolerance,
            conjugates: self
                .conjugates
                .iter()
                .map(|(s, t, c)| {
                    let (re, im) = c.to_f64s();
                    ConjugateJson { s: *s, t: *t, re, im }
                })
                .collect(),
            min_pairwise_distance: self.min_pairwise_distance,
            lattice_coeffs: self.lattice_coeffs.as_ref().map(|cs| {
                cs.iter()
                    .map(|(m1, m2, r)| LatticeCoeffJson {
                        m1: m1.to_string(),
                        m2: m2.to_string(),
                        residual: *r,
                    })
                    .collect()
            }),
            distinct: self.distinct,
            near_integral: self.near_integral,
            tail_bound: self.tail_bound,
        }
    }
}
