//! Matrix groups mod N, the index action behind Galois conjugation, and
//! symbolic family descriptors.
//!
//! Matrices act on family members through their transpose on the index:
//! h_v^alpha = h_(alpha^T v). The transpose-then-reduce-mod-{±1} convention is
//! fixed by requiring that [0,1;-1,0] send [1/N, 0] to [0, 1/N]; index-level
//! associativity with (h^alpha)^beta = h^(alpha beta) is covered by tests.
//!
//! For the two generator shapes diag(1, d) and [1,1;0,1] the action is also
//! computable directly on q-expansions (coefficient automorphism sigma_d,
//! substitution tau -> tau + 1); [`conjugate_series_a1a2`] exposes that
//! independent route so the two can be cross-checked.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::modforms::{fricke_series, siegel_power_series, IndexVector};
use crate::qseries::FracQSeries;
use crate::rational::{bernoulli2, frac_part, rat_int};

/// A 2x2 matrix over Z/NZ with unit determinant, entries stored in [0, N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatModN {
    level: u32,
    /// row-major [a, b, c, d]
    entries: [i64; 4],
}

impl MatModN {
    pub fn new(level: u32, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if level < 2 {
            return Err(Error::Usage(format!("level {level} must be >= 2")));
        }
        let n = level as i64;
        let m = MatModN {
            level,
            entries: [
                a.rem_euclid(n),
                b.rem_euclid(n),
                c.rem_euclid(n),
                d.rem_euclid(n),
            ],
        };
        if num_integer::gcd(m.det(), n) != 1 {
            return Err(Error::Usage(format!(
                "matrix [{a},{b};{c},{d}] is not invertible mod {level}"
            )));
        }
        Ok(m)
    }

    pub fn identity(level: u32) -> Self {
        MatModN { level, entries: [1, 0, 0, 1] }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn entries(&self) -> [i64; 4] {
        self.entries
    }

    pub fn det(&self) -> i64 {
        let [a, b, c, d] = self.entries;
        (a * d - b * c).rem_euclid(self.level as i64)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.level != other.level {
            return Err(Error::Usage("level mismatch in matrix product".into()));
        }
        let [a, b, c, d] = self.entries;
        let [e, f, g, h] = other.entries;
        MatModN::new(
            self.level,
            a * e + b * g,
            a * f + b * h,
            c * e + d * g,
            c * f + d * h,
        )
    }

    pub fn neg(&self) -> Self {
        let n = self.level as i64;
        let [a, b, c, d] = self.entries;
        MatModN {
            level: self.level,
            entries: [
                (-a).rem_euclid(n),
                (-b).rem_euclid(n),
                (-c).rem_euclid(n),
                (-d).rem_euclid(n),
            ],
        }
    }

    /// Canonical representative of the class {M, -M}: the lexicographically
    /// smaller entry array.
    pub fn canonical_mod_pm(&self) -> Self {
        let m = self.neg();
        if self.entries <= m.entries {
            *self
        } else {
            m
        }
    }

    pub fn eq_mod_pm(&self, other: &Self) -> bool {
        self.level == other.level
            && (self.entries == other.entries || self.entries == other.neg().entries)
    }

    /// The index action of (F3): v -> alpha^T v, reduced to the canonical
    /// ± representative.
    pub fn act_on_index(&self, v: &IndexVector) -> Result<IndexVector> {
        if v.level() != self.level {
            return Err(Error::Usage("level mismatch in index action".into()));
        }
        let [a, b, c, d] = self.entries;
        let (v1, v2) = v.numerators();
        IndexVector::new(self.level, a * v1 + c * v2, b * v1 + d * v2).map(|w| w.canonical())
    }

    /// Unique decomposition alpha = diag(1, det) * S with det(S) = 1.
    pub fn gl2_decompose(&self) -> (Self, Self) {
        let n = self.level as i64;
        let d = self.det();
        let d_inv = mod_inverse(d, n).expect("unit determinant");
        let g = MatModN { level: self.level, entries: [1, 0, 0, d] };
        let [a, b, c, dd] = self.entries;
        let s = MatModN {
            level: self.level,
            entries: [a, b, (c * d_inv).rem_euclid(n), (dd * d_inv).rem_euclid(n)],
        };
        debug_assert_eq!(s.det(), 1);
        debug_assert_eq!(g.mul(&s).unwrap(), *self);
        (g, s)
    }
}

impl fmt::Display for MatModN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.entries;
        write!(f, "[{a},{b};{c},{d}]")
    }
}

fn mod_inverse(x: i64, n: i64) -> Option<i64> {
    let x = x.rem_euclid(n);
    if num_integer::gcd(x, n) != 1 {
        return None;
    }
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (n, x);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    Some(t.rem_euclid(n))
}

/// All of SL_2(Z/NZ), sorted.
pub fn enumerate_sl2(level: u32) -> Vec<MatModN> {
    let n = level as i64;
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if (a * d - b * c).rem_euclid(n) == 1 {
                        out.push(MatModN { level, entries: [a, b, c, d] });
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// One representative per class of SL_2(Z/NZ)/{±1}, sorted.
pub fn cosets_mod_pm_gamma(level: u32) -> Vec<MatModN> {
    let mut out: Vec<MatModN> = enumerate_sl2(level)
        .into_iter()
        .filter(|m| m.canonical_mod_pm() == *m)
        .collect();
    out.sort();
    out
}

/// |SL_2(Z/NZ)| = N^3 prod_{p | N} (1 - 1/p^2).
pub fn sl2_order(level: u32) -> u64 {
    let mut order = (level as u64).pow(3);
    let mut n = level as u64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            order = order / (p * p) * (p * p - 1);
        }
        p += 1;
    }
    if n > 1 {
        order = order / (n * n) * (n * n - 1);
    }
    order
}

/// The multiplier set Q_N of the difference families: integers a in [1, N/2]
/// with a^2 = ±1 (mod N) but a != ±1 (mod N). Defined for odd N only.
pub fn qn_set(level: u32) -> Result<Vec<i64>> {
    if level % 2 == 0 {
        return Err(Error::Usage(format!(
            "the multiplier set is defined for odd N only (got {level})"
        )));
    }
    let n = level as i64;
    let mut out = Vec::new();
    for a in 1..=(n / 2) {
        let a2 = (a * a).rem_euclid(n);
        let pm1 = a.rem_euclid(n) == 1 || (-a).rem_euclid(n) == 1;
        if !pm1 && (a2 == 1 || a2 == (-1i64).rem_euclid(n)) {
            out.push(a);
        }
    }
    Ok(out)
}

/// Symbolic recipe for the series of a family member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyDescriptor {
    /// Fricke functions f_v.
    Fricke { level: u32 },
    /// Siegel-function powers g_v^exponent, 12N | exponent.
    SiegelPow { level: u32, exponent: i64 },
    /// Difference family h_v = f_v - f_(av) for a in Q_N (N odd).
    Diff { level: u32, multiplier: i64 },
    /// Product of Siegel powers with transformed index slots:
    /// h_v = prod_i g_(A_i^T v)^(m_i). Conjugation transforms each slot.
    Product {
        level: u32,
        factors: Vec<(MatModN, i64)>,
    },
}

impl FamilyDescriptor {
    pub fn fricke(level: u32) -> Result<Self> {
        check_level(level)?;
        Ok(FamilyDescriptor::Fricke { level })
    }

    pub fn siegel_pow(level: u32, exponent: i64) -> Result<Self> {
        check_level(level)?;
        if exponent == 0 || exponent.rem_euclid(12 * level as i64) != 0 {
            return Err(Error::Usage(format!(
                "Siegel family exponent must be a nonzero multiple of 12N = {}",
                12 * level
            )));
        }
        Ok(FamilyDescriptor::SiegelPow { level, exponent })
    }

    pub fn diff(level: u32, multiplier: i64) -> Result<Self> {
        check_level(level)?;
        if !qn_set(level)?.contains(&multiplier) {
            return Err(Error::Usage(format!(
                "multiplier {multiplier} is not in the admissible set for N = {level}"
            )));
        }
        Ok(FamilyDescriptor::Diff { level, multiplier })
    }

    /// The generator h_v = g_v^(12Nn) g_(Sv)^(24Nn) with S = [0,-1;1,0];
    /// at the seed v = [1/N, 0] this is g_[1/N,0]^(12Nn) g_[0,1/N]^(24Nn).
    pub fn siegel_generator(level: u32, n: i64) -> Result<Self> {
        check_level(level)?;
        if n == 0 {
            return Err(Error::Usage("generator power n must be nonzero".into()));
        }
        let m = 12 * level as i64 * n;
        let s = MatModN::new(level, 0, -1, 1, 0)?;
        Ok(FamilyDescriptor::Product {
            level,
            factors: vec![(MatModN::identity(level), m), (s, 2 * m)],
        })
    }

    pub fn level(&self) -> u32 {
        match self {
            FamilyDescriptor::Fricke { level }
            | FamilyDescriptor::SiegelPow { level, .. }
            | FamilyDescriptor::Diff { level, .. }
            | FamilyDescriptor::Product { level, .. } => *level,
        }
    }

    /// True for the kinds that transform by (F3) as genuine Fricke families;
    /// product descriptors conjugate slot-wise instead.
    pub fn is_f3_family(&self) -> bool {
        !matches!(self, FamilyDescriptor::Product { .. })
    }

    /// q-expansion of the member h_v, exponents < t known.
    pub fn member_series(&self, v: &IndexVector, t: i64) -> Result<FracQSeries> {
        if v.level() != self.level() {
            return Err(Error::Usage("index level does not match family level".into()));
        }
        if !v.is_primitive() {
            return Err(Error::BadIndex(format!(
                "{v} does not have least denominator {}",
                self.level()
            )));
        }
        match self {
            FamilyDescriptor::Fricke { .. } => Ok(fricke_series(v, t)),
            FamilyDescriptor::SiegelPow { exponent, .. } => siegel_power_series(v, *exponent, t),
            FamilyDescriptor::Diff { multiplier, .. } => {
                let fv = fricke_series(v, t);
                let fav = fricke_series(&v.scale(*multiplier)?, t);
                fv.sub(&fav)
            }
            FamilyDescriptor::Product { factors, .. } => {
                if factors.is_empty() {
                    return Err(Error::Usage("empty product descriptor".into()));
                }
                // compute each factor deep enough that the other factors'
                // poles cannot eat into the requested truncation window
                let orders: Vec<BigRational> = factors
                    .iter()
                    .map(|(slot, m)| {
                        let w = slot.act_on_index(v)?;
                        Ok(bernoulli2(&frac_part(&w.v1())) * rat_int(*m) / rat_int(2))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut acc: Option<FracQSeries> = None;
                for (i, (slot, m)) in factors.iter().enumerate() {
                    let slack: BigRational = orders
                        .iter()
                        .enumerate()
                        .filter(|(j, o)| *j != i && o.is_negative())
                        .map(|(_, o)| o.clone())
                        .sum();
                    let bump = i64::try_from(&(-slack).ceil().to_integer())
                        .map_err(|_| Error::Usage("pole depth out of range".into()))?;
                    let w = slot.act_on_index(v)?;
                    let s = siegel_power_series(&w, *m, t + bump)?;
                    acc = Some(match acc {
                        Some(p) => p.mul(&s)?,
                        None => s,
                    });
                }
                let prod = acc.expect("nonempty product");
                prod.truncate_to(&rat_int(t).min(prod.trunc()))
            }
        }
    }

    /// Series of the conjugate h_v^alpha. For (F3) families this is the
    /// member at alpha^T v; for slot products each slot transforms.
    pub fn conjugate_series(&self, v: &IndexVector, alpha: &MatModN, t: i64) -> Result<FracQSeries> {
        match self {
            FamilyDescriptor::Product { level, factors } => {
                let transformed = FamilyDescriptor::Product {
                    level: *level,
                    factors: factors
                        .iter()
                        .map(|(slot, m)| Ok((compose_slot(slot, alpha)?, *m)))
                        .collect::<Result<Vec<_>>>()?,
                };
                transformed.member_series(v, t)
            }
            _ => self.member_series(&alpha.act_on_index(v)?, t),
        }
    }
}

/// Slot transform after conjugation by alpha: act_on_index applies the
/// transpose, and (A alpha)^T v = alpha^T (A^T v).
fn compose_slot(slot: &MatModN, alpha: &MatModN) -> Result<MatModN> {
    slot.mul(alpha)
}

fn check_level(level: u32) -> Result<()> {
    if level < 2 {
        return Err(Error::Usage(format!("level {level} must be >= 2")));
    }
    Ok(())
}

/// Independent expansion-level route for the A1/A2 generators:
/// diag(1, d) acts as sigma_d on coefficients, [1,1;0,1] as tau -> tau + 1.
/// Returns None for matrices that are neither.
pub fn conjugate_series_a1a2(
    family: &FamilyDescriptor,
    v: &IndexVector,
    alpha: &MatModN,
    t: i64,
) -> Result<Option<FracQSeries>> {
    let [a, b, c, d] = alpha.entries();
    let base = family.member_series(v, t)?;
    if a == 1 && b == 0 && c == 0 {
        return Ok(Some(base.apply_sigma(d)?));
    }
    if a == 1 && b == 1 && c == 0 && d == 1 {
        return Ok(Some(base.shift_tau_plus_one()?));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::Distinctness;
    use crate::rational::rat_int;

    #[test]
    fn sl2_enumeration_sizes() {
        assert_eq!(enumerate_sl2(2).len(), 6);
        assert_eq!(cosets_mod_pm_gamma(2).len(), 6); // -I = I mod 2
        assert_eq!(enumerate_sl2(3).len(), 24);
        assert_eq!(cosets_mod_pm_gamma(3).len(), 12);
        assert_eq!(enumerate_sl2(4).len(), 48);
        assert_eq!(enumerate_sl2(5).len(), 120);
        assert_eq!(cosets_mod_pm_gamma(5).len(), 60);
        for n in [2u32, 3, 4, 5, 6] {
            assert_eq!(enumerate_sl2(n).len() as u64, sl2_order(n));
            assert!(enumerate_sl2(n).contains(&MatModN::identity(n)));
        }
    }

    #[test]
    fn index_action_examples() {
        // [0,1;-1,0] sends [1/N,0] to [0,1/N] and [v1,v2] to [-v2,v1]
        let n = 5u32;
        let alpha = MatModN::new(n, 0, 1, -1, 0).unwrap();
        let v = IndexVector::new(n, 1, 0).unwrap();
        assert_eq!(
            alpha.act_on_index(&v).unwrap(),
            IndexVector::new(n, 0, 1).unwrap().canonical()
        );
        let w = IndexVector::new(n, 2, 3).unwrap();
        assert_eq!(
            alpha.act_on_index(&w).unwrap(),
            IndexVector::new(n, -3, 2).unwrap().canonical()
        );
        // [1,1;0,1] maps [b1,b2] to [b1, b1+b2]
        let t = MatModN::new(n, 1, 1, 0, 1).unwrap();
        assert_eq!(
            t.act_on_index(&w).unwrap(),
            IndexVector::new(n, 2, 5).unwrap().canonical()
        );
        let id = MatModN::identity(n);
        assert_eq!(id.act_on_index(&w).unwrap(), w.canonical());
    }

    #[test]
    fn index_action_is_right_action() {
        // act(v, alpha*beta) = act(act(v, alpha), beta)
        let n = 7u32;
        let mats = enumerate_sl2(n);
        let vs = IndexVector::primitive_classes(n);
        for (i, alpha) in mats.iter().step_by(37).enumerate() {
            let beta = &mats[(i * 61 + 13) % mats.len()];
            for v in vs.iter().step_by(5) {
                let lhs = alpha.mul(beta).unwrap().act_on_index(v).unwrap();
                let rhs = beta.act_on_index(&alpha.act_on_index(v).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn gl2_decomposition() {
        for n in [3u32, 5, 8] {
            for (a, b, c, d) in [(1i64, 2, 3, 4), (2, 1, 1, 1), (0, 1, -1, 0)] {
                let Ok(m) = MatModN::new(n, a, b, c, d) else { continue };
                let (g, s) = m.gl2_decompose();
                assert_eq!(s.det(), 1);
                assert_eq!(g.entries()[0], 1);
                assert_eq!(g.entries()[1], 0);
                assert_eq!(g.entries()[2], 0);
                assert_eq!(g.entries()[3], m.det());
                assert_eq!(g.mul(&s).unwrap(), m);
            }
        }
        // SL2 element decomposes trivially
        let m = MatModN::new(5, 2, 1, 1, 1).unwrap();
        assert_eq!(m.det(), 1);
        let (g, s) = m.gl2_decompose();
        assert_eq!(g, MatModN::identity(5));
        assert_eq!(s, m);
    }

    #[test]
    fn qn_set_examples() {
        assert_eq!(qn_set(5).unwrap(), vec![2]);
        assert_eq!(qn_set(7).unwrap(), Vec::<i64>::new());
        assert_eq!(qn_set(15).unwrap(), vec![4]);
        assert!(qn_set(6).is_err());
    }

    #[test]
    fn family_dispatch() {
        let t = 8i64;
        let v = IndexVector::new(5, 1, 0).unwrap();
        let fam = FamilyDescriptor::fricke(5).unwrap();
        assert_eq!(fam.member_series(&v, t).unwrap(), fricke_series(&v, t));
        let sp = FamilyDescriptor::siegel_pow(5, 60).unwrap();
        assert_eq!(
            sp.member_series(&v, t).unwrap(),
            siegel_power_series(&v, 60, t).unwrap()
        );
        let df = FamilyDescriptor::diff(5, 2).unwrap();
        let expected = fricke_series(&v, t)
            .sub(&fricke_series(&IndexVector::new(5, 2, 0).unwrap(), t))
            .unwrap();
        assert_eq!(df.member_series(&v, t).unwrap(), expected);
        // nonprimitive index rejected
        let bad = IndexVector::new(6, 2, 4).unwrap();
        assert!(FamilyDescriptor::fricke(6).unwrap().member_series(&bad, t).is_err());
    }

    #[test]
    fn family_members_are_even_in_v() {
        let t = 6i64;
        let families = [
            FamilyDescriptor::fricke(5).unwrap(),
            FamilyDescriptor::siegel_pow(5, 60).unwrap(),
            FamilyDescriptor::diff(5, 2).unwrap(),
            FamilyDescriptor::siegel_generator(5, 1).unwrap(),
        ];
        for fam in &families {
            for v in [IndexVector::new(5, 1, 2).unwrap(), IndexVector::new(5, 3, 4).unwrap()] {
                let s1 = fam.member_series(&v, t).unwrap();
                let s2 = fam.member_series(&v.neg(), t).unwrap();
                assert!(
                    s1.sub(&s2).unwrap().is_zero_to_precision(),
                    "family {fam:?} not even at {v}"
                );
            }
        }
    }

    #[test]
    fn diff_family_sign_identity() {
        // h_(av) = -h_v for N = 5, a = 2
        let t = 12i64;
        let fam = FamilyDescriptor::diff(5, 2).unwrap();
        for v in IndexVector::primitive_classes(5) {
            let hv = fam.member_series(&v, t).unwrap();
            let hav = fam.member_series(&v.scale(2).unwrap(), t).unwrap();
            assert!(
                hav.add(&hv).unwrap().is_zero_to_precision(),
                "sign identity fails at {v}"
            );
        }
    }

    #[test]
    fn f3_matches_a1a2_route() {
        let t = 8i64;
        let families = [
            FamilyDescriptor::fricke(5).unwrap(),
            FamilyDescriptor::siegel_pow(5, 60).unwrap(),
            FamilyDescriptor::diff(5, 2).unwrap(),
        ];
        let v = IndexVector::new(5, 1, 2).unwrap();
        let gens = [
            MatModN::new(5, 1, 0, 0, 2).unwrap(),
            MatModN::new(5, 1, 0, 0, 3).unwrap(),
            MatModN::new(5, 1, 1, 0, 1).unwrap(),
        ];
        for fam in &families {
            for alpha in &gens {
                let f3 = fam.conjugate_series(&v, alpha, t).unwrap();
                let direct = conjugate_series_a1a2(fam, &v, alpha, t)
                    .unwrap()
                    .expect("generator shape");
                match f3.distinctness_certificate(&direct).unwrap() {
                    Distinctness::UndecidedToPrecision { .. } => {}
                    Distinctness::Distinct { exponent, .. } => panic!(
                        "F3 and A1/A2 routes differ for {fam:?} at {alpha} (exponent {exponent})"
                    ),
                }
            }
        }
    }

    #[test]
    fn siegel_generator_identity_member() {
        // at the seed [1/N, 0] the generator is g_[1/N,0]^(12Nn) g_[0,1/N]^(24Nn);
        // the second slot needs one extra unit to absorb the first slot's pole
        let t = 8i64;
        let fam = FamilyDescriptor::siegel_generator(2, 1).unwrap();
        let seed = IndexVector::new(2, 1, 0).unwrap();
        let direct = siegel_power_series(&IndexVector::new(2, 1, 0).unwrap(), 24, t)
            .unwrap()
            .mul(&siegel_power_series(&IndexVector::new(2, 0, 1).unwrap(), 48, t + 1).unwrap())
            .unwrap()
            .truncate_to(&rat_int(t))
            .unwrap();
        assert_eq!(fam.member_series(&seed, t).unwrap(), direct);
        assert_eq!(direct.ord(), crate::qseries::QOrder::Value(rat_int(3)));
    }
}
