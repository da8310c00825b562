//! Truncated Laurent series in q^(1/D) with coefficients in Q(zeta_M).
//!
//! A series stores a sparse map from exponents (integer multiples of 1/D) to
//! nonzero cyclotomic coefficients, together with a truncation order `trunc`:
//! every exponent strictly below `trunc` is fully known. "Zero to precision"
//! (an empty term map) is a first-class state, distinct from a proof of
//! nonvanishing; distinctness certificates carry the smallest exponent where
//! two expansions provably differ.
//!
//! Binary operations lift both operands to the lcm of their cyclotomic orders
//! and exponent denominators automatically.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclo::CycloElem;
use crate::error::{Error, Result};
use crate::rational::{parse_rat, render_rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FracQSeries {
    cyclo_order: u32,
    exp_den: u32,
    /// key k represents the exponent k / exp_den
    terms: BTreeMap<i64, CycloElem>,
    /// exponents < trunc / exp_den are fully known
    trunc: i64,
}

/// q-order of a series: the smallest exponent carrying a nonzero coefficient,
/// or the marker that the series vanishes to its precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QOrder {
    Value(BigRational),
    ZeroToPrecision,
}

impl QOrder {
    pub fn value(&self) -> Option<&BigRational> {
        match self {
            QOrder::Value(r) => Some(r),
            QOrder::ZeroToPrecision => None,
        }
    }
}

/// Outcome of comparing two expansions coefficient-by-coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Distinctness {
    /// The smallest exponent where the coefficients differ; a proof that the
    /// two functions are distinct.
    Distinct {
        exponent: BigRational,
        coeff_a: CycloElem,
        coeff_b: CycloElem,
    },
    /// Agreement on every known coefficient up to the common truncation.
    UndecidedToPrecision { trunc: BigRational },
}

impl FracQSeries {
    pub fn zero(cyclo_order: u32, exp_den: u32, trunc: i64) -> Self {
        FracQSeries { cyclo_order, exp_den, terms: BTreeMap::new(), trunc }
    }

    pub fn one(cyclo_order: u32, exp_den: u32, trunc: i64) -> Self {
        let mut s = Self::zero(cyclo_order, exp_den, trunc);
        if trunc > 0 {
            s.terms.insert(0, CycloElem::one(cyclo_order));
        }
        s
    }

    /// q^(key/exp_den) with the given coefficient.
    pub fn monomial(cyclo_order: u32, exp_den: u32, key: i64, coeff: CycloElem, trunc: i64) -> Self {
        let mut s = Self::zero(cyclo_order, exp_den, trunc);
        assert_eq!(coeff.order(), cyclo_order);
        if !coeff.is_zero() && key < trunc {
            s.terms.insert(key, coeff);
        }
        s
    }

    pub fn from_terms<I>(cyclo_order: u32, exp_den: u32, trunc: i64, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, CycloElem)>,
    {
        let mut s = Self::zero(cyclo_order, exp_den, trunc);
        for (k, c) in terms {
            assert_eq!(c.order(), cyclo_order, "coefficient order mismatch");
            if k < trunc && !c.is_zero() {
                match s.terms.entry(k) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let sum = e.get().add(&c).expect("order checked");
                        if sum.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = sum;
                        }
                    }
                }
            }
        }
        s
    }

    pub fn cyclo_order(&self) -> u32 {
        self.cyclo_order
    }

    pub fn exp_den(&self) -> u32 {
        self.exp_den
    }

    pub fn trunc_key(&self) -> i64 {
        self.trunc
    }

    pub fn trunc(&self) -> BigRational {
        self.key_to_exp(self.trunc)
    }

    fn key_to_exp(&self, k: i64) -> BigRational {
        BigRational::new(BigInt::from(k), BigInt::from(self.exp_den))
    }

    pub fn terms(&self) -> impl Iterator<Item = (BigRational, &CycloElem)> {
        self.terms.iter().map(|(k, c)| (self.key_to_exp(*k), c))
    }

    pub fn term_keys(&self) -> impl Iterator<Item = (i64, &CycloElem)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero_to_precision(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest exponent with nonzero coefficient, or the zero marker.
    pub fn ord(&self) -> QOrder {
        match self.terms.keys().next() {
            Some(k) => QOrder::Value(self.key_to_exp(*k)),
            None => QOrder::ZeroToPrecision,
        }
    }

    fn ord_key(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn leading(&self) -> Option<(BigRational, &CycloElem)> {
        self.terms
            .iter()
            .next()
            .map(|(k, c)| (self.key_to_exp(*k), c))
    }

    /// Coefficient at an exponent below the truncation order.
    pub fn coeff_at(&self, exp: &BigRational) -> Result<CycloElem> {
        let scaled = exp * BigRational::from_integer(BigInt::from(self.exp_den));
        if !scaled.denom().is_one() {
            return Ok(CycloElem::zero(self.cyclo_order));
        }
        let key = i64::try_from(scaled.numer())
            .map_err(|_| Error::Usage(format!("exponent {exp} out of range")))?;
        if key >= self.trunc {
            return Err(Error::PrecisionLoss(format!(
                "coefficient at {exp} is beyond the truncation order {}",
                self.trunc()
            )));
        }
        Ok(self
            .terms
            .get(&key)
            .cloned()
            .unwrap_or_else(|| CycloElem::zero(self.cyclo_order)))
    }

    /// Re-express with a larger cyclotomic order and/or exponent denominator.
    pub fn lift(&self, cyclo_order: u32, exp_den: u32) -> Result<Self> {
        if cyclo_order % self.cyclo_order != 0 {
            return Err(Error::BadLift { from_order: self.cyclo_order, target: cyclo_order });
        }
        if exp_den % self.exp_den != 0 {
            return Err(Error::Usage(format!(
                "exponent denominator {} does not divide {}",
                self.exp_den, exp_den
            )));
        }
        let scale = (exp_den / self.exp_den) as i64;
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            terms.insert(k * scale, c.lift(cyclo_order)?);
        }
        Ok(FracQSeries {
            cyclo_order,
            exp_den,
            terms,
            trunc: self.trunc.saturating_mul(scale),
        })
    }

    fn common_pair(&self, other: &Self) -> Result<(Self, Self)> {
        let m = num_integer::lcm(self.cyclo_order, other.cyclo_order);
        let d = num_integer::lcm(self.exp_den, other.exp_den);
        Ok((self.lift(m, d)?, other.lift(m, d)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common_pair(other)?;
        let trunc = a.trunc.min(b.trunc);
        let mut terms = a.terms;
        terms.retain(|k, _| *k < trunc);
        for (k, c) in b.terms {
            if k >= trunc {
                continue;
            }
            match terms.entry(k) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().add(&c)?;
                    if sum.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = sum;
                    }
                }
            }
        }
        Ok(FracQSeries { cyclo_order: a.cyclo_order, exp_den: a.exp_den, terms, trunc })
    }

    pub fn neg(&self) -> Self {
        FracQSeries {
            cyclo_order: self.cyclo_order,
            exp_den: self.exp_den,
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
            trunc: self.trunc,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Multiply every coefficient by a constant.
    pub fn scale(&self, c: &CycloElem) -> Result<Self> {
        let m = num_integer::lcm(self.cyclo_order, c.order());
        let a = self.lift(m, self.exp_den)?;
        let c = c.lift(m)?;
        if c.is_zero() {
            return Ok(Self::zero(m, a.exp_den, a.trunc));
        }
        let mut terms = BTreeMap::new();
        for (k, v) in &a.terms {
            let p = v.mul(&c)?;
            if !p.is_zero() {
                terms.insert(*k, p);
            }
        }
        Ok(FracQSeries { cyclo_order: m, exp_den: a.exp_den, terms, trunc: a.trunc })
    }

    pub fn scale_rat(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero(self.cyclo_order, self.exp_den, self.trunc);
        }
        FracQSeries {
            cyclo_order: self.cyclo_order,
            exp_den: self.exp_den,
            terms: self.terms.iter().map(|(k, c)| (*k, c.scale(r))).collect(),
            trunc: self.trunc,
        }
    }

    /// Shift all exponents by a rational delta (denominator must divide a
    /// lift of the exponent denominator).
    pub fn shift_exponent(&self, delta: &BigRational) -> Result<Self> {
        let den = u32::try_from(delta.denom())
            .map_err(|_| Error::Usage("exponent shift denominator too large".into()))?;
        let d = num_integer::lcm(self.exp_den, den);
        let s = self.lift(self.cyclo_order, d)?;
        let step = delta.numer() * BigInt::from(d / den);
        let step = i64::try_from(&step)
            .map_err(|_| Error::Usage("exponent shift out of range".into()))?;
        Ok(FracQSeries {
            cyclo_order: s.cyclo_order,
            exp_den: s.exp_den,
            terms: s.terms.into_iter().map(|(k, c)| (k + step, c)).collect(),
            trunc: s.trunc + step,
        })
    }

    /// Drop all terms at or above the given truncation exponent.
    pub fn truncate_to(&self, trunc: &BigRational) -> Result<Self> {
        let scaled = trunc * BigRational::from_integer(BigInt::from(self.exp_den));
        if !scaled.denom().is_one() {
            return Err(Error::Usage(format!(
                "truncation order {trunc} is not a multiple of 1/{}",
                self.exp_den
            )));
        }
        let key = i64::try_from(scaled.numer())
            .map_err(|_| Error::Usage("truncation out of range".into()))?;
        if key > self.trunc {
            return Err(Error::PrecisionLoss(format!(
                "cannot extend truncation from {} to {trunc}",
                self.trunc()
            )));
        }
        let mut s = self.clone();
        s.terms.retain(|k, _| *k < key);
        s.trunc = key;
        Ok(s)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common_pair(other)?;
        match (a.ord_key(), b.ord_key()) {
            (None, None) => Err(Error::PrecisionLoss(
                "product of two series that are both zero to precision".into(),
            )),
            (None, Some(ob)) => Ok(Self::zero(a.cyclo_order, a.exp_den, a.trunc + ob)),
            (Some(oa), None) => Ok(Self::zero(a.cyclo_order, a.exp_den, b.trunc + oa)),
            (Some(oa), Some(ob)) => {
                let trunc = (a.trunc + ob).min(b.trunc + oa);
                let offset = oa + ob;
                let len = usize::try_from(trunc - offset).unwrap_or(0);
                let mut dense: Vec<Option<CycloElem>> = vec![None; len];
                for (i, ci) in &a.terms {
                    for (j, cj) in &b.terms {
                        let k = i + j;
                        if k >= trunc {
                            break;
                        }
                        let idx = (k - offset) as usize;
                        let p = ci.mul(cj)?;
                        match &mut dense[idx] {
                            Some(acc) => *acc = acc.add(&p)?,
                            None => dense[idx] = Some(p),
                        }
                    }
                }
                let mut terms = BTreeMap::new();
                for (idx, c) in dense.into_iter().enumerate() {
                    if let Some(c) = c {
                        if !c.is_zero() {
                            terms.insert(offset + idx as i64, c);
                        }
                    }
                }
                Ok(FracQSeries { cyclo_order: a.cyclo_order, exp_den: a.exp_den, terms, trunc })
            }
        }
    }

    /// Multiplicative inverse; requires a known nonzero leading term.
    pub fn inv(&self) -> Result<Self> {
        let k0 = self.ord_key().ok_or(Error::ZeroToPrecision)?;
        let len = usize::try_from(self.trunc - k0).expect("positive relative precision");
        let mut a_rel: Vec<CycloElem> = vec![CycloElem::zero(self.cyclo_order); len];
        for (k, c) in &self.terms {
            a_rel[(k - k0) as usize] = c.clone();
        }
        let c0_inv = a_rel[0].inv()?;
        let mut b_rel: Vec<CycloElem> = Vec::with_capacity(len);
        b_rel.push(c0_inv.clone());
        for m in 1..len {
            let mut acc = CycloElem::zero(self.cyclo_order);
            for i in 1..=m {
                if !a_rel[i].is_zero() && !b_rel[m - i].is_zero() {
                    acc = acc.add(&a_rel[i].mul(&b_rel[m - i])?)?;
                }
            }
            b_rel.push(acc.mul(&c0_inv)?.neg());
        }
        let terms = b_rel
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (-k0 + i as i64, c))
            .collect();
        Ok(FracQSeries {
            cyclo_order: self.cyclo_order,
            exp_den: self.exp_den,
            terms,
            trunc: self.trunc - 2 * k0,
        })
    }

    /// Integer power by repeated squaring; negative powers invert first.
    pub fn pow(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        if n == 0 {
            let rel = match self.ord_key() {
                Some(k0) => self.trunc - k0,
                None => self.trunc,
            };
            return Ok(Self::one(self.cyclo_order, self.exp_den, rel.max(1)));
        }
        let mut result: Option<FracQSeries> = None;
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    Some(r) => r.mul(&base)?,
                    None => base.clone(),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result.expect("n > 0"))
    }

    /// The substitution tau -> tau + 1: the coefficient at exponent r picks up
    /// the exact root of unity e^(2 pi i r). The result lives over
    /// Q(zeta_lcm(M, D)).
    pub fn shift_tau_plus_one(&self) -> Result<Self> {
        let m = num_integer::lcm(self.cyclo_order, self.exp_den);
        let d = self.exp_den;
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let root = CycloElem::root_of_unity(m, k.rem_euclid(d as i64) * (m / d) as i64);
            terms.insert(*k, c.lift(m)?.mul(&root)?);
        }
        Ok(FracQSeries { cyclo_order: m, exp_den: d, terms, trunc: self.trunc })
    }

    /// Apply sigma_d to every coefficient; exponents unchanged.
    pub fn apply_sigma(&self, d: i64) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            terms.insert(*k, c.galois_sigma(d)?);
        }
        Ok(FracQSeries {
            cyclo_order: self.cyclo_order,
            exp_den: self.exp_den,
            terms,
            trunc: self.trunc,
        })
    }

    /// Compare two expansions; a `Distinct` result is a proof.
    pub fn distinctness_certificate(&self, other: &Self) -> Result<Distinctness> {
        let (a, b) = self.common_pair(other)?;
        let trunc = a.trunc.min(b.trunc);
        let mut keys: Vec<i64> = a
            .terms
            .keys()
            .chain(b.terms.keys())
            .copied()
            .filter(|k| *k < trunc)
            .collect();
        keys.sort_unstable();
        keys.dedup();
        for k in keys {
            let ca = a.terms.get(&k).cloned().unwrap_or_else(|| CycloElem::zero(a.cyclo_order));
            let cb = b.terms.get(&k).cloned().unwrap_or_else(|| CycloElem::zero(b.cyclo_order));
            if ca != cb {
                return Ok(Distinctness::Distinct {
                    exponent: a.key_to_exp(k),
                    coeff_a: ca,
                    coeff_b: cb,
                });
            }
        }
        Ok(Distinctness::UndecidedToPrecision { trunc: a.key_to_exp(trunc) })
    }

    /// Canonical text form, increasing exponents, with an O(q^T) tail marker.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, c) in &self.terms {
            let exp = self.key_to_exp(*k);
            let (mag, neg) = match c.as_rational() {
                Some(r) => (
                    if r.abs().is_one() && !exp.is_zero() {
                        String::new()
                    } else {
                        render_rat(&r.abs())
                    },
                    r.is_negative(),
                ),
                None => (format!("({})", c.render()), false),
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let qpart = render_qpow(&exp);
            match (mag.is_empty(), qpart.is_empty()) {
                (true, true) => out.push('1'),
                (true, false) => out.push_str(&qpart),
                (false, true) => out.push_str(&mag),
                (false, false) => {
                    out.push_str(&mag);
                    out.push('*');
                    out.push_str(&qpart);
                }
            }
        }
        let tail = format!("O({})", render_qpow_tail(&self.trunc()));
        if out.is_empty() {
            tail
        } else {
            format!("{out} + {tail}")
        }
    }

    /// Parse the canonical text form; the cyclotomic order and exponent
    /// denominator are context the text does not carry.
    pub fn parse(text: &str, cyclo_order: u32, exp_den: u32) -> Result<Self> {
        let text = text.trim();
        let mut trunc: Option<BigRational> = None;
        let mut terms: Vec<(i64, CycloElem)> = Vec::new();
        for (neg, term) in split_top_level(text) {
            if let Some(inner) = term.strip_prefix("O(").and_then(|t| t.strip_suffix(')')) {
                trunc = Some(parse_qpow(inner)?);
                continue;
            }
            let (coeff_str, exp) = split_term(&term)?;
            let coeff = if coeff_str.is_empty() {
                CycloElem::one(cyclo_order)
            } else if let Some(inner) =
                coeff_str.strip_prefix('(').and_then(|t| t.strip_suffix(')'))
            {
                CycloElem::parse(inner, cyclo_order)?
            } else {
                CycloElem::from_rational(cyclo_order, parse_rat(&coeff_str)?)
            };
            let coeff = if neg { coeff.neg() } else { coeff };
            let scaled = &exp * BigRational::from_integer(BigInt::from(exp_den));
            if !scaled.denom().is_one() {
                return Err(Error::Usage(format!(
                    "exponent {exp} is not a multiple of 1/{exp_den}"
                )));
            }
            let key = i64::try_from(scaled.numer())
                .map_err(|_| Error::Usage("exponent out of range".into()))?;
            terms.push((key, coeff));
        }
        let trunc = trunc.ok_or_else(|| Error::Usage("missing O(q^T) tail marker".into()))?;
        let scaled = &trunc * BigRational::from_integer(BigInt::from(exp_den));
        if !scaled.denom().is_one() {
            return Err(Error::Usage(format!(
                "truncation {trunc} is not a multiple of 1/{exp_den}"
            )));
        }
        let tkey = i64::try_from(scaled.numer())
            .map_err(|_| Error::Usage("truncation out of range".into()))?;
        Ok(Self::from_terms(cyclo_order, exp_den, tkey, terms))
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            cyclo_order: self.cyclo_order,
            exp_den: self.exp_den,
            trunc: render_rat(&self.trunc()),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| TermJson {
                    exp: render_rat(&self.key_to_exp(*k)),
                    coeff: c.coeffs().iter().map(render_rat).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        let mut terms = Vec::new();
        let phi = crate::cyclo::euler_phi(j.cyclo_order) as usize;
        for t in &j.terms {
            if t.coeff.len() != phi {
                return Err(Error::Usage(format!(
                    "coefficient vector length {} != phi({}) = {phi}",
                    t.coeff.len(),
                    j.cyclo_order
                )));
            }
            let exp = parse_rat(&t.exp)?;
            let scaled = &exp * BigRational::from_integer(BigInt::from(j.exp_den));
            if !scaled.denom().is_one() {
                return Err(Error::Usage(format!("exponent {exp} not over 1/{}", j.exp_den)));
            }
            let key = i64::try_from(scaled.numer())
                .map_err(|_| Error::Usage("exponent out of range".into()))?;
            let coeffs: Result<Vec<BigRational>> = t.coeff.iter().map(|s| parse_rat(s)).collect();
            let poly = coeffs?;
            terms.push((key, CycloElem::from_poly(j.cyclo_order, poly)));
        }
        let trunc = parse_rat(&j.trunc)?;
        let scaled = &trunc * BigRational::from_integer(BigInt::from(j.exp_den));
        let tkey = i64::try_from(scaled.numer())
            .map_err(|_| Error::Usage("truncation out of range".into()))?;
        Ok(Self::from_terms(j.cyclo_order, j.exp_den, tkey, terms))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub cyclo_order: u32,
    pub exp_den: u32,
    pub trunc: String,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: String,
    pub coeff: Vec<String>,
}

fn render_qpow(exp: &BigRational) -> String {
    if exp.is_zero() {
        String::new()
    } else if exp.is_one() {
        "q".to_string()
    } else if exp.denom().is_one() {
        format!("q^{}", exp.numer())
    } else {
        format!("q^({}/{})", exp.numer(), exp.denom())
    }
}

fn render_qpow_tail(exp: &BigRational) -> String {
    if exp.denom().is_one() {
        format!("q^{}", exp.numer())
    } else {
        format!("q^({}/{})", exp.numer(), exp.denom())
    }
}

fn parse_qpow(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s == "q" {
        return Ok(BigRational::one());
    }
    let e = s
        .strip_prefix("q^")
        .ok_or_else(|| Error::Usage(format!("bad q power {s:?}")))?;
    let e = e.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(e);
    parse_rat(e)
}

/// Split a term "coeff*q^exp" into its parts; any of them may be missing.
fn split_term(term: &str) -> Result<(String, BigRational)> {
    let term = term.trim();
    if term == "1" {
        return Ok((String::new(), BigRational::zero()));
    }
    if term.starts_with('q') {
        return Ok((String::new(), parse_qpow(term)?));
    }
    // find the '*' separating coefficient from q-part, respecting parens
    let mut depth = 0usize;
    for (i, ch) in term.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                let (c, q) = term.split_at(i);
                return Ok((c.trim().to_string(), parse_qpow(&q[1..])?));
            }
            _ => {}
        }
    }
    Ok((term.to_string(), BigRational::zero()))
}

/// Split "a + b - c" on top-level " + " / " - " separators (those not inside
/// parentheses), returning (negated?, term) pairs.
fn split_top_level(text: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut sign = false;
    let mut rest = text.trim();
    if let Some(r) = rest.strip_prefix('-') {
        sign = true;
        rest = r.trim_start();
    }
    let bytes = rest.as_bytes();
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut i = 0usize;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b' ' if depth == 0 && i + 3 <= bytes.len() => {
                let sep = &rest[i..(i + 3).min(rest.len())];
                if sep == " + " || sep == " - " {
                    out.push((sign, rest[start..i].trim().to_string()));
                    sign = sep == " - ";
                    i += 3;
                    start = i;
                    continue;
                }
            }
            _ => {}
        }
        i += 1;
    }
    out.push((sign, rest[start..].trim().to_string()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn qs(pairs: &[(i64, i64)], den: u32, trunc: i64) -> FracQSeries {
        FracQSeries::from_terms(
            1,
            den,
            trunc,
            pairs
                .iter()
                .map(|(k, c)| (*k, CycloElem::from_rational(1, rat_int(*c)))),
        )
    }

    #[test]
    fn mul_shifts_and_scales() {
        // (q^-1 + 744) * q = 1 + 744 q
        let a = qs(&[(-1, 1), (0, 744)], 1, 10);
        let b = qs(&[(1, 1)], 1, 10);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.coeff_at(&rat_int(0)).unwrap().as_rational().unwrap(), rat_int(1));
        assert_eq!(p.coeff_at(&rat_int(1)).unwrap().as_rational().unwrap(), rat_int(744));
    }

    #[test]
    fn add_cancels_to_zero_marker() {
        let a = qs(&[(2, 5), (3, -1)], 1, 12);
        let s = a.add(&a.neg()).unwrap();
        assert!(s.is_zero_to_precision());
        assert_eq!(s.trunc_key(), 12);
        assert_eq!(s.ord(), QOrder::ZeroToPrecision);
    }

    #[test]
    fn geometric_series_product() {
        let t = 30i64;
        let one_minus_q = qs(&[(0, 1), (1, -1)], 1, t);
        let geo = qs(&(0..t).map(|k| (k, 1)).collect::<Vec<_>>(), 1, t);
        let p = one_minus_q.mul(&geo).unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coeff_at(&rat_int(0)).unwrap().as_rational().unwrap(), rat_int(1));
        assert_eq!(p.trunc_key(), t);
    }

    #[test]
    fn mul_of_two_zero_series_is_an_error() {
        let z = FracQSeries::zero(1, 1, 5);
        assert!(matches!(z.mul(&z), Err(Error::PrecisionLoss(_))));
        // one zero factor propagates the zero marker with shifted trunc
        let a = qs(&[(2, 3)], 1, 9);
        let p = z.mul(&a).unwrap();
        assert!(p.is_zero_to_precision());
        assert_eq!(p.trunc_key(), 7);
    }

    #[test]
    fn inverse_examples() {
        // inv(q^(1/2)) = q^(-1/2)
        let a = qs(&[(1, 1)], 2, 10);
        let inv = a.inv().unwrap();
        assert_eq!(inv.ord(), QOrder::Value(rat(-1, 2)));
        assert_eq!(inv.num_terms(), 1);
        // inv(1 - q) = 1 + q + q^2 + ...
        let b = qs(&[(0, 1), (1, -1)], 1, 8);
        let binv = b.inv().unwrap();
        for k in 0..8 {
            assert_eq!(binv.coeff_at(&rat_int(k)).unwrap().as_rational().unwrap(), rat_int(1));
        }
        // inv(2 q^-1) = (1/2) q
        let c = qs(&[(-1, 2)], 1, 10);
        let cinv = c.inv().unwrap();
        assert_eq!(cinv.coeff_at(&rat_int(1)).unwrap().as_rational().unwrap(), rat(1, 2));
        assert!(FracQSeries::zero(1, 1, 5).inv().is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let a = qs(&[(-2, 3), (0, 5), (1, -7), (4, 2)], 2, 20);
        let p = a.mul(&a.inv().unwrap()).unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coeff_at(&rat_int(0)).unwrap().as_rational().unwrap(), rat_int(1));
    }

    #[test]
    fn pow_examples() {
        // (q^(-1/12))^24 = q^-2
        let a = qs(&[(-1, 1)], 12, 10);
        let p = a.pow(24).unwrap();
        assert_eq!(p.ord(), QOrder::Value(rat_int(-2)));
        assert_eq!(p.num_terms(), 1);
        // a^0 = 1
        let b = qs(&[(1, 3), (2, 5)], 1, 9);
        let one = b.pow(0).unwrap();
        assert_eq!(one.coeff_at(&rat_int(0)).unwrap().as_rational().unwrap(), rat_int(1));
        assert_eq!(one.num_terms(), 1);
        // a^-1 = inv(a)
        assert_eq!(b.pow(-1).unwrap(), b.inv().unwrap());
        // ord scales linearly
        let c = qs(&[(3, 2), (5, 1)], 2, 40);
        assert_eq!(c.pow(5).unwrap().ord(), QOrder::Value(rat(15, 2)));
    }

    #[test]
    fn ord_examples() {
        let a = qs(&[(3, 1), (4, 1)], 2, 10);
        assert_eq!(a.ord(), QOrder::Value(rat(3, 2)));
        assert_eq!(FracQSeries::zero(1, 1, 10).ord(), QOrder::ZeroToPrecision);
        let c = qs(&[(0, 744), (1, 1)], 1, 10);
        assert_eq!(c.ord(), QOrder::Value(rat_int(0)));
    }

    #[test]
    fn shift_tau_examples() {
        // q^(1/2) -> -q^(1/2)
        let a = qs(&[(1, 1)], 2, 10);
        let s = a.shift_tau_plus_one().unwrap();
        assert_eq!(
            s.coeff_at(&rat(1, 2)).unwrap().as_rational().unwrap(),
            rat_int(-1)
        );
        // integer exponents unchanged
        let b = qs(&[(0, 7), (3, -2)], 1, 10);
        let sb = b.shift_tau_plus_one().unwrap();
        assert_eq!(sb.coeff_at(&rat_int(3)).unwrap().as_rational().unwrap(), rat_int(-2));
        // q^(1/3) -> zeta_3 q^(1/3)
        let c = qs(&[(1, 1)], 3, 10);
        let sc = c.shift_tau_plus_one().unwrap();
        assert_eq!(sc.coeff_at(&rat(1, 3)).unwrap(), CycloElem::root_of_unity(3, 1));
    }

    #[test]
    fn shift_tau_d_times_is_identity() {
        let s = FracQSeries::from_terms(
            4,
            6,
            25,
            vec![
                (-3, CycloElem::root_of_unity(4, 1)),
                (2, CycloElem::one(4)),
                (7, CycloElem::root_of_unity(4, 3)),
            ],
        );
        let mut t = s.clone();
        for _ in 0..6 {
            t = t.shift_tau_plus_one().unwrap();
        }
        let lifted = s.lift(t.cyclo_order(), t.exp_den()).unwrap();
        assert_eq!(t, lifted);
    }

    #[test]
    fn sigma_and_shift_compose_with_exponent_root_adjusted() {
        // sigma_d(shift(a)) multiplies the coefficient at exponent r by
        // e^(2 pi i d r), i.e. equals shift applied d times after sigma_d
        let s = FracQSeries::from_terms(
            5,
            3,
            20,
            vec![
                (1, CycloElem::root_of_unity(5, 2)),
                (2, CycloElem::one(5)),
                (4, CycloElem::root_of_unity(5, 3).scale(&rat(1, 2))),
            ],
        );
        for d in [2i64, 4, 7, 11, 13, 14] {
            let lhs = s.shift_tau_plus_one().unwrap().apply_sigma(d).unwrap();
            let mut rhs = s.apply_sigma(d).unwrap();
            for _ in 0..d.rem_euclid(3 * 5) {
                rhs = rhs.shift_tau_plus_one().unwrap();
            }
            let rhs = rhs.lift(lhs.cyclo_order(), lhs.exp_den()).unwrap();
            assert_eq!(lhs, rhs, "composition law fails at d = {d}");
        }
    }

    #[test]
    fn apply_sigma_examples() {
        let a = FracQSeries::from_terms(3, 1, 5, vec![(1, CycloElem::root_of_unity(3, 1))]);
        let s = a.apply_sigma(2).unwrap();
        assert_eq!(s.coeff_at(&rat_int(1)).unwrap(), CycloElem::root_of_unity(3, 2));
        assert_eq!(a.apply_sigma(1).unwrap(), a);
        let r = qs(&[(0, 3), (2, -5)], 1, 9);
        assert_eq!(r.apply_sigma(1).unwrap(), r);
        assert!(a.apply_sigma(3).is_err());
    }

    #[test]
    fn distinctness_examples() {
        let a = qs(&[(0, 1), (1, 1)], 1, 10);
        let b = qs(&[(0, 1), (1, 2)], 1, 10);
        match a.distinctness_certificate(&b).unwrap() {
            Distinctness::Distinct { exponent, coeff_a, coeff_b } => {
                assert_eq!(exponent, rat_int(1));
                assert_eq!(coeff_a.as_rational().unwrap(), rat_int(1));
                assert_eq!(coeff_b.as_rational().unwrap(), rat_int(2));
            }
            other => panic!("expected Distinct, got {other:?}"),
        }
        assert!(matches!(
            a.distinctness_certificate(&a).unwrap(),
            Distinctness::UndecidedToPrecision { .. }
        ));
        // q^(1/2) vs q^(1/3): first difference at 1/3
        let c = qs(&[(1, 1)], 2, 10);
        let d = qs(&[(1, 1)], 3, 10);
        match c.distinctness_certificate(&d).unwrap() {
            Distinctness::Distinct { exponent, coeff_a, coeff_b } => {
                assert_eq!(exponent, rat(1, 3));
                assert!(coeff_a.is_zero());
                assert_eq!(coeff_b.as_rational().unwrap(), rat_int(1));
            }
            other => panic!("expected Distinct, got {other:?}"),
        }
    }

    #[test]
    fn ord_of_product_adds() {
        let a = qs(&[(3, 2), (4, 1)], 2, 30);
        let b = qs(&[(-1, 5), (0, 1)], 2, 30);
        let (QOrder::Value(oa), QOrder::Value(ob)) = (a.ord(), b.ord()) else {
            panic!()
        };
        let QOrder::Value(op) = a.mul(&b).unwrap().ord() else { panic!() };
        assert_eq!(op, oa + ob);
    }

    #[test]
    fn render_examples() {
        let j_start = qs(&[(-1, 1), (0, 744), (1, 196884)], 1, 2);
        assert_eq!(j_start.render(), "q^-1 + 744 + 196884*q + O(q^2)");
        let half = qs(&[(1, -1)], 2, 3);
        assert_eq!(half.render(), "-q^(1/2) + O(q^(3/2))");
        let z = FracQSeries::from_terms(
            3,
            3,
            4,
            vec![(1, CycloElem::root_of_unity(3, 1).scale(&rat_int(2)))],
        );
        assert_eq!(z.render(), "(2*z)*q^(1/3) + O(q^(4/3))");
        assert_eq!(FracQSeries::zero(1, 1, 5).render(), "O(q^5)");
    }

    #[test]
    fn text_round_trip() {
        let samples = vec![
            qs(&[(-2, 1), (0, 744), (3, -5)], 1, 7),
            qs(&[(1, -1), (2, 3)], 2, 9),
            FracQSeries::from_terms(
                5,
                5,
                11,
                vec![
                    (-1, CycloElem::root_of_unity(5, 2)),
                    (
                        3,
                        CycloElem::root_of_unity(5, 1)
                            .add(&CycloElem::from_rational(5, rat(1, 2)))
                            .unwrap(),
                    ),
                ],
            ),
            FracQSeries::zero(2, 4, 13),
        ];
        for s in samples {
            let text = s.render();
            let back = FracQSeries::parse(&text, s.cyclo_order(), s.exp_den()).unwrap();
            assert_eq!(back, s, "round trip failed for {text}");
        }
    }

    #[test]
    fn json_round_trip() {
        let s = FracQSeries::from_terms(
            4,
            6,
            20,
            vec![
                (-3, CycloElem::root_of_unity(4, 1)),
                (0, CycloElem::from_rational(4, rat(7, 3))),
            ],
        );
        let j = s.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let parsed: SeriesJson = serde_json::from_str(&text).unwrap();
        assert_eq!(FracQSeries::from_json(&parsed).unwrap(), s);
    }

    #[test]
    fn truncation_propagation_is_sound() {
        // recompute a pipeline at higher truncation; coefficients below the
        // lower truncation must be unchanged
        let lo = 12i64;
        let hi = 30i64;
        let build = |t: i64| {
            let a = qs(&[(-1, 2), (0, 1), (2, -3)], 1, t);
            let b = qs(&[(1, 1), (3, 5)], 1, t);
            a.mul(&b).unwrap().inv().unwrap().mul(&a).unwrap()
        };
        let s_lo = build(lo);
        let s_hi = build(hi);
        for (exp, c) in s_lo.terms() {
            let scaled = &exp * BigRational::from_integer(BigInt::from(s_lo.exp_den()));
            let key = i64::try_from(scaled.numer()).unwrap();
            if key < s_lo.trunc_key() {
                assert_eq!(&s_hi.coeff_at(&exp).unwrap(), c);
            }
        }
    }
}
