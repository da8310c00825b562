//! The affine plane model f_N(x, y) of the modular curve X(N), and the
//! finite-group certification that the two standard generators have trivial
//! stabilizer.
//!
//! The model comes from the conjugate orbit of the Siegel generator
//! g = g_[1/N,0]^(12Nn) g_[0,1/N]^(24Nn): one series per coset of
//! SL_2(Z/NZ)/{±1}, with the coset [a,b;c,d] contributing
//! g_[a/N,b/N]^(12Nn) g_[c/N,d/N]^(24Nn). The elementary symmetric functions
//! of the orbit are invariant, hence rational polynomials in j; iterated
//! cancellation of the pole against powers of j recovers them, and integer
//! reconstruction is exact (any surviving denominator is a hard error).
//!
//! Precision rule: with C cosets and worst pole depth p among orbit members,
//! the symmetric functions have poles no deeper than C*p, so the orbit is
//! expanded to T = C*p + margin q-units (margin 8, doubled once on retry).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclo::CycloElem;
use crate::error::{Error, Result};
use crate::famgroup::{cosets_mod_pm_gamma, MatModN};
use crate::modforms::{fricke_series, j_series, siegel_power_series, IndexVector};
use crate::qseries::{Distinctness, FracQSeries, QOrder};
use crate::rational::{bernoulli2, frac_part, rat, rat_int, render_rat};

/// Polynomial in j with cyclotomic coefficients, ascending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JPolynomial {
    pub coeffs: Vec<CycloElem>,
}

impl JPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Evaluate on a series (normally the j-expansion itself).
    pub fn eval(&self, j: &FracQSeries) -> Result<FracQSeries> {
        let mut acc: Option<FracQSeries> = None;
        for c in self.coeffs.iter().rev() {
            let next = match acc {
                Some(a) => {
                    let prod = a.mul(j)?;
                    let konst =
                        FracQSeries::monomial(c.order(), 1, 0, c.clone(), prod.trunc_key());
                    prod.add(&konst)?
                }
                None => FracQSeries::monomial(c.order(), 1, 0, c.clone(), j.trunc_key()),
            };
            acc = Some(next);
        }
        Ok(acc.expect("nonempty coefficient vector"))
    }

    /// The coefficient vector as exact rationals, if every coefficient is
    /// rational.
    pub fn rational_coeffs(&self) -> Option<Vec<BigRational>> {
        self.coeffs.iter().map(|c| c.as_rational()).collect()
    }
}

/// Express a series with integer exponents as a polynomial in j by
/// cancelling the principal part top-down. The residual after removing the
/// constant must be zero to precision.
pub fn j_reduce(s: &FracQSeries) -> Result<JPolynomial> {
    for (exp, _) in s.terms() {
        if !exp.denom().is_one() {
            return Err(Error::NotAJPolynomial { exponent: exp });
        }
    }
    let m = s.cyclo_order();
    if s.is_zero_to_precision() {
        return Ok(JPolynomial { coeffs: vec![CycloElem::zero(m)] });
    }
    let deg = match s.ord() {
        QOrder::Value(o) if o.is_negative() => usize::try_from((-&o).to_integer())
            .map_err(|_| Error::Usage("pole order out of range".into()))?,
        _ => 0,
    };
    let t_units = {
        let t = s.trunc().ceil().to_integer();
        i64::try_from(&t).map_err(|_| Error::Usage("truncation out of range".into()))?
            + deg as i64
    };
    let j = j_series(t_units.max(2));
    let mut jpow: Vec<FracQSeries> = Vec::with_capacity(deg + 1);
    for k in 0..=deg {
        if k == 0 {
            jpow.push(FracQSeries::one(1, 1, j.trunc_key()));
        } else if k == 1 {
            jpow.push(j.clone());
        } else {
            let next = jpow[k - 1].mul(&j)?;
            jpow.push(next);
        }
    }

    let mut coeffs = vec![CycloElem::zero(m); deg + 1];
    let mut rem = s.clone();
    loop {
        match rem.ord() {
            QOrder::Value(o) if o.is_negative() => {
                if !o.denom().is_one() {
                    return Err(Error::NotAJPolynomial { exponent: o });
                }
                let k = usize::try_from((-&o).to_integer()).unwrap();
                if k > deg {
                    return Err(Error::NotAJPolynomial { exponent: o });
                }
                let (_, c) = rem.leading().expect("numeric order");
                let c = c.clone();
                let lifted = c
                    .lift(coeffs[k].order())
                    .map_err(|_| Error::Inconsistency("coefficient order grew".into()))?;
                coeffs[k] = coeffs[k].add(&lifted)?;
                rem = rem.sub(&jpow[k].scale(&c)?)?;
            }
            _ => break,
        }
    }
    if rem.trunc_key() <= 0 {
        return Err(Error::PrecisionLoss(
            "truncation too low to read the constant term".into(),
        ));
    }
    let c0 = rem.coeff_at(&rat_int(0))?;
    let lifted = c0
        .lift(coeffs[0].order())
        .map_err(|_| Error::Inconsistency("constant coefficient order grew".into()))?;
    coeffs[0] = coeffs[0].add(&lifted)?;
    rem = rem.sub(&FracQSeries::monomial(c0.order(), 1, 0, c0, rem.trunc_key()))?;
    if let QOrder::Value(e) = rem.ord() {
        return Err(Error::NotAJPolynomial { exponent: e });
    }
    Ok(JPolynomial { coeffs })
}

/// Bivariate integer polynomial, keyed by (x-degree, y-degree).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivarIntPoly {
    pub coeffs: BTreeMap<(u32, u32), BigInt>,
}

impl BivarIntPoly {
    pub fn x_degree(&self) -> u32 {
        self.coeffs.keys().map(|(i, _)| *i).max().unwrap_or(0)
    }

    pub fn y_degree(&self) -> u32 {
        self.coeffs.keys().map(|(_, j)| *j).max().unwrap_or(0)
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigInt {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Largest coefficient magnitude, for relative-error scales.
    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// y-grouped text form, x-degrees descending, y-degrees descending.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let xdeg = self.x_degree();
        for i in (0..=xdeg).rev() {
            let mut row: Vec<((u32, u32), &BigInt)> = self
                .coeffs
                .range((i, 0)..=(i, u32::MAX))
                .map(|(k, v)| (*k, v))
                .collect();
            if row.is_empty() {
                continue;
            }
            row.sort_by(|a, b| b.0 .1.cmp(&a.0 .1));
            let ypoly = render_y_poly(&row);
            let is_single = row.len() == 1;
            let xpart = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            let piece = if i == 0 {
                ypoly.clone()
            } else if ypoly == "1" {
                xpart.clone()
            } else if ypoly == "-1" {
                format!("-{xpart}")
            } else if is_single {
                format!("{ypoly}*{xpart}")
            } else {
                format!("({ypoly})*{xpart}")
            };
            if out.is_empty() {
                out.push_str(&piece);
            } else if let Some(rest) = piece.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&piece);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    pub fn to_json(&self) -> BivarPolyJson {
        BivarPolyJson {
            coeffs: self
                .coeffs
                .iter()
                .map(|((i, j), c)| (format!("{i},{j}"), c.to_string()))
                .collect(),
        }
    }

    pub fn from_json(j: &BivarPolyJson) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (key, val) in &j.coeffs {
            let (i, jj) = key
                .split_once(',')
                .ok_or_else(|| Error::Usage(format!("bad degree key {key:?}")))?;
            let i: u32 = i.parse().map_err(|_| Error::Usage("bad x-degree".into()))?;
            let jj: u32 = jj.parse().map_err(|_| Error::Usage("bad y-degree".into()))?;
            let c: BigInt = val.parse().map_err(|_| Error::Usage("bad coefficient".into()))?;
            if !c.is_zero() {
                coeffs.insert((i, jj), c);
            }
        }
        Ok(BivarIntPoly { coeffs })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct BivarPolyJson {
    /// "(x-degree),(y-degree)" -> decimal coefficient
    pub coeffs: BTreeMap<String, String>,
}

fn render_y_poly(row: &[((u32, u32), &BigInt)]) -> String {
    let mut out = String::new();
    for ((_, j), c) in row {
        let neg = c.is_negative();
        let mag = c.abs();
        let ypart = match j {
            0 => String::new(),
            1 => "y".to_string(),
            _ => format!("y^{j}"),
        };
        let body = if ypart.is_empty() {
            mag.to_string()
        } else if mag.is_one() {
            ypart
        } else {
            format!("{mag}*{ypart}")
        };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
            out.push_str(&body);
        } else {
            out.push_str(if neg { " - " } else { " + " });
            out.push_str(&body);
        }
    }
    out
}

/// Exact q-order of the orbit member at coset [a,b;c,d]:
/// 6Nn B2(<a/N>) + 12Nn B2(<c/N>).
pub fn orbit_member_order(level: u32, n: i64, gamma: &MatModN) -> BigRational {
    let [a, _, c, _] = gamma.entries();
    let nn = level as i64;
    let t1 = bernoulli2(&frac_part(&rat(a, nn))) * rat_int(6 * nn * n);
    let t2 = bernoulli2(&frac_part(&rat(c, nn))) * rat_int(12 * nn * n);
    t1 + t2
}

/// Truncation required by the precision rule for the (N, n) model.
pub fn required_truncation(level: u32, n: i64, margin: i64) -> i64 {
    let cosets = cosets_mod_pm_gamma(level);
    let mut worst = BigRational::zero();
    for g in &cosets {
        let o = orbit_member_order(level, n, g);
        if -&o > worst {
            worst = -o;
        }
    }
    let depth = worst.ceil().to_integer();
    let depth = i64::try_from(&depth).expect("small");
    cosets.len() as i64 * depth + margin
}

/// One orbit series per coset representative of SL_2(Z/NZ)/{±1}.
pub fn conjugate_orbit(level: u32, n: i64, t: i64) -> Result<Vec<(MatModN, FracQSeries)>> {
    if n == 0 {
        return Err(Error::Usage("generator power n must be nonzero".into()));
    }
    let cosets = cosets_mod_pm_gamma(level);
    let m1 = 12 * level as i64 * n;
    cosets
        .par_iter()
        .map(|gamma| {
            let [a, b, c, d] = gamma.entries();
            let v1 = IndexVector::new(level, a, b)?;
            let v2 = IndexVector::new(level, c, d)?;
            let o1 = bernoulli2(&frac_part(&v1.v1())) * rat_int(m1) / rat_int(2);
            let o2 = bernoulli2(&frac_part(&v2.v1())) * rat_int(2 * m1) / rat_int(2);
            // per-slot truncation compensates the other slot's pole
            let bump = |o: &BigRational| -> i64 {
                if o.is_negative() {
                    i64::try_from(&(-o).ceil().to_integer()).unwrap()
                } else {
                    0
                }
            };
            let s1 = siegel_power_series(&v1, m1, t + bump(&o2))?;
            let s2 = siegel_power_series(&v2, 2 * m1, t + bump(&o1))?;
            let prod = s1.mul(&s2)?;
            prod.truncate_to(&rat_int(t)).map(|s| (*gamma, s))
        })
        .collect()
}

/// The plane model f_N(x, y): monic of degree |cosets| in x, with
/// f_N(g, j) = 0 to the working truncation.
pub fn model_polynomial(level: u32, n: i64, requested_t: Option<i64>) -> Result<BivarIntPoly> {
    let mut margin = 8;
    loop {
        let t = requested_t
            .unwrap_or(0)
            .max(required_truncation(level, n, margin));
        match model_polynomial_at(level, n, t) {
            Ok(p) => return Ok(p),
            Err(e @ (Error::NotAJPolynomial { .. } | Error::PrecisionLoss(_))) => {
                if margin > 8 {
                    return Err(e);
                }
                margin = 16;
            }
            Err(e) => return Err(e),
        }
    }
}

fn model_polynomial_at(level: u32, n: i64, t: i64) -> Result<BivarIntPoly> {
    let orbit = conjugate_orbit(level, n, t)?;
    let count = orbit.len();

    // fold prod (x - g_i): xpoly[k] is the series coefficient of x^k
    let mut xpoly: Vec<FracQSeries> =
        vec![FracQSeries::one(level, level, t * level as i64)];
    for (_, g) in &orbit {
        let neg_g = g.neg();
        let mut next: Vec<FracQSeries> = Vec::with_capacity(xpoly.len() + 1);
        for k in 0..=xpoly.len() {
            let from_shift = if k > 0 { Some(&xpoly[k - 1]) } else { None };
            let from_mul = if k < xpoly.len() {
                Some(xpoly[k].mul(&neg_g)?)
            } else {
                None
            };
            next.push(match (from_shift, from_mul) {
                (Some(a), Some(b)) => a.add(&b)?,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b,
                (None, None) => unreachable!(),
            });
        }
        xpoly = next;
    }

    let mut coeffs: BTreeMap<(u32, u32), BigInt> = BTreeMap::new();
    coeffs.insert((count as u32, 0), BigInt::one());
    for (k, series) in xpoly.iter().enumerate().take(count) {
        // the orbit is Galois-stable, so every cyclotomic component beyond
        // the constant must cancel exactly
        for (exp, c) in series.terms() {
            if c.as_rational().is_none() {
                return Err(Error::Inconsistency(format!(
                    "symmetric function x^{k} has a nonrational coefficient at q^{exp}"
                )));
            }
        }
        let jp = j_reduce(series)?;
        let rats = jp
            .rational_coeffs()
            .ok_or_else(|| Error::Inconsistency("nonrational j-polynomial".into()))?;
        for (ydeg, r) in rats.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            if !r.denom().is_one() {
                return Err(Error::Inconsistency(format!(
                    "coefficient at x^{k} y^{ydeg} is not an integer: {}",
                    render_rat(r)
                )));
            }
            coeffs.insert((k as u32, ydeg as u32), r.numer().clone());
        }
    }
    let poly = BivarIntPoly { coeffs };

    // root identity: f(g, j) = 0 to precision (any orbit member is a root)
    verify_root_identity(&poly, &orbit[0].1, t)?;
    Ok(poly)
}

fn verify_root_identity(poly: &BivarIntPoly, g: &FracQSeries, t: i64) -> Result<()> {
    let ydeg = poly.y_degree() as usize;
    let j = j_series(t + ydeg as i64 + 2);
    let mut jpow: Vec<FracQSeries> = vec![FracQSeries::one(1, 1, j.trunc_key())];
    for k in 1..=ydeg {
        let next = jpow[k - 1].mul(&j)?;
        jpow.push(next);
    }
    let xdeg = poly.x_degree();
    let mut acc: Option<FracQSeries> = None;
    for i in (0..=xdeg).rev() {
        let mut row: Option<FracQSeries> = None;
        for ((_, yj), c) in poly.coeffs.range((i, 0)..=(i, u32::MAX)) {
            let term = jpow[*yj as usize].scale_rat(&BigRational::from_integer(c.clone()));
            row = Some(match row {
                Some(r) => r.add(&term)?,
                None => term,
            });
        }
        let row = row.unwrap_or_else(|| FracQSeries::zero(1, 1, j.trunc_key()));
        acc = Some(match acc {
            Some(a) => a.mul(g)?.add(&row)?,
            None => row,
        });
    }
    let res = acc.expect("nonempty polynomial");
    if let QOrder::Value(e) = res.ord() {
        return Err(Error::Inconsistency(format!(
            "model polynomial does not annihilate its generator: residual at q^{e}"
        )));
    }
    Ok(())
}

/// Verdict of a stabilizer certification run.
#[derive(Debug, Clone)]
pub enum StabilizerVerdict {
    TrivialStabilizer,
    Undecided { cosets: Vec<MatModN> },
}

#[derive(Debug, Clone)]
pub struct StabilizerReport {
    pub level: u32,
    pub precision: i64,
    pub verdict: StabilizerVerdict,
    /// Distinctness certificate exponent per non-identity coset.
    pub certificates: Vec<(MatModN, BigRational)>,
    /// For the Siegel generator: (ord g^gamma, ord g^(gamma S)) per coset;
    /// the identity's pair must differ from every other coset's.
    pub order_pairs: Option<Vec<(MatModN, BigRational, BigRational)>>,
}

/// Certify that lambda = f_[1/N,0] - f_[0,1/N]^(-1) is fixed by no
/// non-identity coset of ±Gamma(N)\SL_2(Z), by exhibiting a differing
/// coefficient for every coset.
pub fn stabilizer_check_fricke(level: u32, t: i64) -> Result<StabilizerReport> {
    let classes = IndexVector::primitive_classes(level);
    fricke_series(&classes[0], t); // warm caches before the fan-out
    let series: Result<Vec<(IndexVector, FracQSeries)>> = classes
        .par_iter()
        .map(|v| Ok((*v, fricke_series(v, t))))
        .collect();
    let series = series?;
    let lookup = |v: &IndexVector| -> &FracQSeries {
        &series
            .iter()
            .find(|(w, _)| *w == v.canonical())
            .expect("class present")
            .1
    };
    let e1 = IndexVector::new(level, 1, 0)?;
    let e2 = IndexVector::new(level, 0, 1)?;
    let lambda_of = |a: &IndexVector, b: &IndexVector| -> Result<FracQSeries> {
        lookup(a).sub(&lookup(b).inv()?)
    };
    let lambda = lambda_of(&e1, &e2)?;

    let mut certificates = Vec::new();
    let mut undecided = Vec::new();
    for gamma in cosets_mod_pm_gamma(level) {
        if gamma.eq_mod_pm(&MatModN::identity(level)) {
            continue;
        }
        let conj = lambda_of(&gamma.act_on_index(&e1)?, &gamma.act_on_index(&e2)?)?;
        match lambda.distinctness_certificate(&conj)? {
            Distinctness::Distinct { exponent, .. } => certificates.push((gamma, exponent)),
            Distinctness::UndecidedToPrecision { .. } => undecided.push(gamma),
        }
    }
    let verdict = if undecided.is_empty() {
        StabilizerVerdict::TrivialStabilizer
    } else {
        StabilizerVerdict::Undecided { cosets: undecided }
    };
    Ok(StabilizerReport { level, precision: t, verdict, certificates, order_pairs: None })
}

/// Same certification for the Siegel generator, plus the order-pair
/// computation mirroring the generator's pole pattern: the pair
/// (ord g^gamma, ord g^(gamma S)) with S = [0,-1;1,0] singles out the
/// identity coset.
pub fn stabilizer_check_siegel(level: u32, n: i64, t: i64) -> Result<StabilizerReport> {
    let orbit = conjugate_orbit(level, n, t)?;
    let identity_idx = orbit
        .iter()
        .position(|(g, _)| g.eq_mod_pm(&MatModN::identity(level)))
        .expect("identity coset present");
    let base = &orbit[identity_idx].1;

    let s_mat = MatModN::new(level, 0, -1, 1, 0)?;
    let mut certificates = Vec::new();
    let mut undecided = Vec::new();
    let mut order_pairs = Vec::new();
    for (gamma, series) in &orbit {
        let pair = (
            orbit_member_order(level, n, gamma),
            orbit_member_order(level, n, &gamma.mul(&s_mat)?),
        );
        // cross-check the B2 law against the expansion we just built
        if let QOrder::Value(o) = series.ord() {
            if o != pair.0 {
                return Err(Error::Inconsistency(format!(
                    "orbit member order {o} at {gamma} differs from the B2 law {}",
                    pair.0
                )));
            }
        }
        order_pairs.push((*gamma, pair.0.clone(), pair.1.clone()));
        if gamma.eq_mod_pm(&MatModN::identity(level)) {
            continue;
        }
        match base.distinctness_certificate(series)? {
            Distinctness::Distinct { exponent, .. } => certificates.push((*gamma, exponent)),
            Distinctness::UndecidedToPrecision { .. } => undecided.push(*gamma),
        }
    }

    // identity separation by order pairs
    let id_pair = order_pairs
        .iter()
        .find(|(g, _, _)| g.eq_mod_pm(&MatModN::identity(level)))
        .map(|(_, a, b)| (a.clone(), b.clone()))
        .expect("identity present");
    for (g, a, b) in &order_pairs {
        if !g.eq_mod_pm(&MatModN::identity(level)) && (a.clone(), b.clone()) == id_pair {
            return Err(Error::Inconsistency(format!(
                "order pair fails to separate coset {g} from the identity"
            )));
        }
    }

    let verdict = if undecided.is_empty() {
        StabilizerVerdict::TrivialStabilizer
    } else {
        StabilizerVerdict::Undecided { cosets: undecided }
    };
    Ok(StabilizerReport {
        level,
        precision: t,
        verdict,
        certificates,
        order_pairs: Some(order_pairs),
    })
}

/// Text rendering of a stabilizer report (one line per coset certificate).
pub fn render_stabilizer_report(report: &StabilizerReport) -> String {
    let mut out = String::new();
    match &report.verdict {
        StabilizerVerdict::TrivialStabilizer => {
            let _ = writeln!(
                out,
                "TrivialStabilizer: {} non-identity cosets separated at T = {}",
                report.certificates.len(),
                report.precision
            );
        }
        StabilizerVerdict::Undecided { cosets } => {
            let _ = writeln!(
                out,
                "Undecided: {} cosets unresolved at T = {} (raise T)",
                cosets.len(),
                report.precision
            );
        }
    }
    for (g, e) in &report.certificates {
        let _ = writeln!(out, "  {g}: differs at q^{}", render_rat(e));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_size_and_orders_n2() {
        let t = required_truncation(2, 1, 8);
        assert_eq!(t, 26); // 6 cosets * depth 3 + 8
        let orbit = conjugate_orbit(2, 1, t).unwrap();
        assert_eq!(orbit.len(), 6);
        let mut ords: Vec<BigRational> = orbit
            .iter()
            .map(|(_, s)| s.ord().value().unwrap().clone())
            .collect();
        ords.sort();
        let expected: Vec<BigRational> = [-3, -3, 0, 0, 3, 3].map(rat_int).to_vec();
        assert_eq!(ords, expected);
        // identity coset has order 3
        let id = orbit.iter().find(|(g, _)| *g == MatModN::identity(2)).unwrap();
        assert_eq!(id.1.ord(), QOrder::Value(rat_int(3)));
    }

    #[test]
    fn orbit_representative_choice_is_irrelevant() {
        // replacing a representative by its negative gives the same series
        let t = 10i64;
        let gamma = MatModN::new(3, 1, 1, 0, 1).unwrap();
        let make = |g: &MatModN| -> FracQSeries {
            let [a, b, c, d] = g.entries();
            siegel_power_series(&IndexVector::new(3, a, b).unwrap(), 36, t)
                .unwrap()
                .mul(&siegel_power_series(&IndexVector::new(3, c, d).unwrap(), 72, t).unwrap())
                .unwrap()
        };
        assert_eq!(make(&gamma), make(&gamma.neg()));
    }

    #[test]
    fn j_reduce_examples() {
        // j itself reduces to the polynomial j
        let j = j_series(12);
        let p = j_reduce(&j).unwrap();
        assert_eq!(p.rational_coeffs().unwrap(), vec![rat_int(0), rat_int(1)]);
        // constants reduce to themselves
        let c = FracQSeries::monomial(1, 1, 0, CycloElem::from_rational(1, rat_int(744)), 10);
        assert_eq!(
            j_reduce(&c).unwrap().rational_coeffs().unwrap(),
            vec![rat_int(744)]
        );
        // something that is not a polynomial in j errors
        let bad = FracQSeries::monomial(1, 1, 1, CycloElem::from_rational(1, rat_int(1)), 10);
        assert!(matches!(j_reduce(&bad), Err(Error::NotAJPolynomial { .. })));
    }

    #[test]
    fn two_torsion_resolvent() {
        // sigma_1 = 0, sigma_2 = -3j(j-1728), sigma_3 = -2j(j-1728)^2
        let t = 30i64;
        let f = [
            fricke_series(&IndexVector::new(2, 1, 0).unwrap(), t),
            fricke_series(&IndexVector::new(2, 0, 1).unwrap(), t),
            fricke_series(&IndexVector::new(2, 1, 1).unwrap(), t),
        ];
        let s1 = f[0].add(&f[1]).unwrap().add(&f[2]).unwrap();
        assert!(s1.is_zero_to_precision());
        let s2 = f[0]
            .mul(&f[1])
            .unwrap()
            .add(&f[0].mul(&f[2]).unwrap())
            .unwrap()
            .add(&f[1].mul(&f[2]).unwrap())
            .unwrap();
        let p2 = j_reduce(&s2).unwrap().rational_coeffs().unwrap();
        assert_eq!(p2, vec![rat_int(0), rat_int(5184), rat_int(-3)]);
        let s3 = f[0].mul(&f[1]).unwrap().mul(&f[2]).unwrap();
        let p3 = j_reduce(&s3).unwrap().rational_coeffs().unwrap();
        // -2j(j-1728)^2 = -2j^3 + 6912j^2 - 5971968j
        assert_eq!(
            p3,
            vec![rat_int(0), rat_int(-5971968), rat_int(6912), rat_int(-2)]
        );
    }

    #[test]
    fn model_n2_spot_checks() {
        let poly = model_polynomial(2, 1, None).unwrap();
        assert_eq!(poly.x_degree(), 6);
        assert_eq!(poly.coeff(6, 0), BigInt::one());
        assert_eq!(poly.coeff(0, 0), BigInt::from(2).pow(144));
        assert_eq!(poly.coeff(5, 3), BigInt::from(-2));
        assert_eq!(poly.coeff(5, 2), BigInt::from(2).pow(8) * 9);
        assert_eq!(poly.coeff(5, 1), BigInt::from(2).pow(18) * 3);
        assert_eq!(poly.coeff(5, 0), -BigInt::from(2).pow(25) * 3);
        assert_eq!(poly.coeff(4, 6), BigInt::one());
    }

    #[test]
    fn stabilizer_fricke_small_levels() {
        for (n, expected) in [(2u32, 5usize), (3, 11)] {
            let report = stabilizer_check_fricke(n, 30).unwrap();
            assert!(matches!(report.verdict, StabilizerVerdict::TrivialStabilizer));
            assert_eq!(report.certificates.len(), expected);
        }
    }

    #[test]
    fn stabilizer_siegel_small_levels() {
        for n in [2u32, 3] {
            let t = required_truncation(n, 1, 8);
            let report = stabilizer_check_siegel(n, 1, t).unwrap();
            assert!(matches!(report.verdict, StabilizerVerdict::TrivialStabilizer));
            assert!(report.order_pairs.is_some());
        }
        // negative n accepted
        let t = required_truncation(2, -1, 8);
        let report = stabilizer_check_siegel(2, -1, t).unwrap();
        assert!(matches!(report.verdict, StabilizerVerdict::TrivialStabilizer));
    }

    #[test]
    fn render_layout() {
        let mut coeffs = BTreeMap::new();
        coeffs.insert((2, 0), BigInt::one());
        coeffs.insert((1, 3), BigInt::from(-2));
        coeffs.insert((1, 0), BigInt::from(48));
        coeffs.insert((0, 1), BigInt::from(-7));
        let p = BivarIntPoly { coeffs };
        assert_eq!(p.render(), "x^2 + (-2*y^3 + 48)*x - 7*y");
        let json = p.to_json();
        assert_eq!(BivarIntPoly::from_json(&json).unwrap(), p);
    }
}
