//! Primitivity and total-primitivity certificates.
//!
//! A family is primitive when members at inequivalent indices are distinct
//! functions; totally primitive when the same holds for every positive power.
//! At a finite truncation the two directions are asymmetric:
//!
//! - a coefficient where two expansions differ is a proof of distinctness,
//!   and a nonzero coefficient of h_u/h_v at a nonzero exponent is a proof
//!   that no power of h_v equals the same power of h_u;
//! - agreement of all known coefficients is only "undecided to precision",
//!   never an identity claim, except where an exact symbolic identity is
//!   known (the difference family's sign relation h_(av) = -h_v, which
//!   follows from a^2 = ±1 and the ± index symmetry).
//!
//! The ratio analysis never divides series: h_u/h_v is constant iff
//! h_u - c h_v vanishes for c the ratio of leading coefficients, so one
//! scalar multiple and a subtraction scan decide each pair.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclo::CycloElem;
use crate::error::{Error, Result};
use crate::famgroup::FamilyDescriptor;
use crate::modforms::IndexVector;
use crate::qseries::{Distinctness, FracQSeries, QOrder};
use crate::rational::{bernoulli2, frac_part, rat_int, render_rat};

/// Guard for the O(N^4) pair scans.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub max_level: u32,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { max_level: 12 }
    }
}

impl ScanOptions {
    pub fn with_max_level(max_level: u32) -> Self {
        ScanOptions { max_level }
    }
}

/// A proved coefficient-level difference between the members at u and v.
#[derive(Debug, Clone)]
pub struct DistinctCert {
    pub u: IndexVector,
    pub v: IndexVector,
    pub exponent: BigRational,
    pub coeff_u: CycloElem,
    pub coeff_v: CycloElem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimitivityVerdict {
    Primitive,
    NotPrimitive { witness: (IndexVector, IndexVector) },
    Undecided { unresolved: Vec<(IndexVector, IndexVector)> },
}

#[derive(Debug, Clone)]
pub struct PrimitivityReport {
    pub level: u32,
    pub precision: i64,
    pub verdict: PrimitivityVerdict,
    pub certificates: Vec<DistinctCert>,
}

/// Per-pair outcome of the ratio analysis for total primitivity.
#[derive(Debug, Clone)]
pub enum RatioAnalysis {
    /// The ratio h_u/h_v provably carries a nonzero coefficient at this
    /// nonzero exponent, so no power can identify the pair.
    NonConstantRatio { exponent: BigRational },
    /// All known coefficients satisfy h_u = c h_v. If c is a root of unity
    /// of order m then h_u^m = h_v^m; `symbolic` marks the cases where the
    /// identity is an exact theorem rather than an observation to precision.
    ConstantRatioCandidate {
        constant: CycloElem,
        root_of_unity_order: Option<u64>,
        symbolic: bool,
    },
    /// A member had no known nonzero coefficient at this precision.
    MemberZeroToPrecision,
}

#[derive(Debug, Clone)]
pub struct PairRatio {
    pub u: IndexVector,
    pub v: IndexVector,
    pub analysis: RatioAnalysis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TotalVerdict {
    TotallyPrimitive,
    NotTotallyPrimitive { witness: (IndexVector, IndexVector) },
    Undecided { unresolved: Vec<(IndexVector, IndexVector)> },
}

#[derive(Debug, Clone)]
pub struct TotalPrimitivityReport {
    pub level: u32,
    pub precision: i64,
    pub verdict: TotalVerdict,
    pub pairs: Vec<PairRatio>,
}

/// All member series of the family at the canonical index classes,
/// constructed in parallel.
fn member_table(family: &FamilyDescriptor, t: i64) -> Result<Vec<(IndexVector, FracQSeries)>> {
    let classes = IndexVector::primitive_classes(family.level());
    // warm the shared series caches before fanning out
    if let Some(first) = classes.first() {
        family.member_series(first, t)?;
    }
    classes
        .par_iter()
        .map(|v| Ok((*v, family.member_series(v, t)?)))
        .collect()
}

/// Scan every unordered pair of index classes for a distinctness proof.
pub fn check_primitive(
    family: &FamilyDescriptor,
    t: i64,
    opts: ScanOptions,
) -> Result<PrimitivityReport> {
    if family.level() > opts.max_level {
        return Err(Error::Usage(format!(
            "level {} exceeds the pair-scan bound {} (raise max_level)",
            family.level(),
            opts.max_level
        )));
    }
    let members = member_table(family, t)?;
    let n = members.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let results: Result<Vec<(usize, usize, Distinctness)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let cert = members[i].1.distinctness_certificate(&members[j].1)?;
            Ok((i, j, cert))
        })
        .collect();
    let mut results = results?;
    results.sort_by_key(|(i, j, _)| (*i, *j));

    let mut certificates = Vec::new();
    let mut unresolved = Vec::new();
    for (i, j, cert) in results {
        let (u, v) = (members[i].0, members[j].0);
        match cert {
            Distinctness::Distinct { exponent, coeff_a, coeff_b } => {
                certificates.push(DistinctCert {
                    u,
                    v,
                    exponent,
                    coeff_u: coeff_a,
                    coeff_v: coeff_b,
                });
            }
            Distinctness::UndecidedToPrecision { .. } => unresolved.push((u, v)),
        }
    }
    let verdict = if unresolved.is_empty() {
        PrimitivityVerdict::Primitive
    } else {
        PrimitivityVerdict::Undecided { unresolved }
    };
    Ok(PrimitivityReport { level: family.level(), precision: t, verdict, certificates })
}

/// Smallest positive m with c^m = 1, if c is a root of unity. Roots of unity
/// in Q(zeta_M) have order dividing 12 M^2 (far more than needed), so one
/// exponentiation decides and the minimal order is found among divisors.
pub fn root_of_unity_order(c: &CycloElem) -> Result<Option<u64>> {
    let bound = 12 * (c.order() as u64) * (c.order() as u64);
    if c.pow(bound as i64)? != CycloElem::one(c.order()) {
        return Ok(None);
    }
    let mut divisors: Vec<u64> = (1..=bound).filter(|d| bound % d == 0).collect();
    divisors.sort_unstable();
    for d in divisors {
        if c.pow(d as i64)? == CycloElem::one(c.order()) {
            return Ok(Some(d));
        }
    }
    unreachable!("bound itself is a witness")
}

fn analyze_pair(
    su: &FracQSeries,
    sv: &FracQSeries,
    symbolic_constant: Option<&CycloElem>,
) -> Result<RatioAnalysis> {
    let (QOrder::Value(ou), QOrder::Value(ov)) = (su.ord(), sv.ord()) else {
        return Ok(RatioAnalysis::MemberZeroToPrecision);
    };
    if ou != ov {
        return Ok(RatioAnalysis::NonConstantRatio { exponent: ou - ov });
    }
    let (_, lead_u) = su.leading().expect("numeric order");
    let (_, lead_v) = sv.leading().expect("numeric order");
    let m = num_integer::lcm(lead_u.order(), lead_v.order());
    let c = lead_u.lift(m)?.mul(&lead_v.lift(m)?.inv()?)?;
    let diff = su.sub(&sv.scale(&c)?)?;
    match diff.ord() {
        QOrder::Value(e) => Ok(RatioAnalysis::NonConstantRatio { exponent: e - ov }),
        QOrder::ZeroToPrecision => {
            let symbolic = symbolic_constant
                .map(|s| {
                    let m = num_integer::lcm(s.order(), c.order());
                    s.lift(m).ok() == c.lift(m).ok()
                })
                .unwrap_or(false);
            Ok(RatioAnalysis::ConstantRatioCandidate {
                root_of_unity_order: root_of_unity_order(&c)?,
                constant: c,
                symbolic,
            })
        }
    }
}

/// For the difference family h_v = f_v - f_(av), the identity h_(av) = -h_v
/// holds exactly; returns the proven constant for pairs related by the
/// multiplier.
fn symbolic_ratio_constant(
    family: &FamilyDescriptor,
    u: &IndexVector,
    v: &IndexVector,
) -> Option<CycloElem> {
    let FamilyDescriptor::Diff { multiplier, .. } = family else {
        return None;
    };
    let au = u.scale(*multiplier).ok()?.canonical();
    let av = v.scale(*multiplier).ok()?.canonical();
    if au == *v || av == *u {
        Some(CycloElem::from_rational(1, rat_int(-1)))
    } else {
        None
    }
}

/// Ratio analysis over every unordered pair of index classes.
pub fn check_totally_primitive(
    family: &FamilyDescriptor,
    t: i64,
    opts: ScanOptions,
) -> Result<TotalPrimitivityReport> {
    if family.level() > opts.max_level {
        return Err(Error::Usage(format!(
            "level {} exceeds the pair-scan bound {} (raise max_level)",
            family.level(),
            opts.max_level
        )));
    }
    let members = member_table(family, t)?;
    let n = members.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let results: Result<Vec<(usize, usize, RatioAnalysis)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (u, su) = &members[i];
            let (v, sv) = &members[j];
            let symbolic = symbolic_ratio_constant(family, u, v);
            Ok((i, j, analyze_pair(su, sv, symbolic.as_ref())?))
        })
        .collect();
    let mut results = results?;
    results.sort_by_key(|(i, j, _)| (*i, *j));

    let mut pair_reports = Vec::new();
    let mut witness = None;
    let mut unresolved = Vec::new();
    for (i, j, analysis) in results {
        let (u, v) = (members[i].0, members[j].0);
        match &analysis {
            RatioAnalysis::NonConstantRatio { .. } => {}
            RatioAnalysis::ConstantRatioCandidate { root_of_unity_order, .. } => {
                if root_of_unity_order.is_some() {
                    // a root-of-unity constant c of order m gives h_u^m = h_v^m
                    witness.get_or_insert((u, v));
                } else {
                    unresolved.push((u, v));
                }
            }
            RatioAnalysis::MemberZeroToPrecision => unresolved.push((u, v)),
        }
        pair_reports.push(PairRatio { u, v, analysis });
    }
    let verdict = if let Some(w) = witness {
        TotalVerdict::NotTotallyPrimitive { witness: w }
    } else if unresolved.is_empty() {
        TotalVerdict::TotallyPrimitive
    } else {
        TotalVerdict::Undecided { unresolved }
    };
    Ok(TotalPrimitivityReport {
        level: family.level(),
        precision: t,
        verdict,
        pairs: pair_reports,
    })
}

/// q-order of the member at v; for Siegel powers the exact law
/// ord = (m/2) B2(<v1>) is asserted against the expansion.
pub fn order_profile(family: &FamilyDescriptor, v: &IndexVector, t: i64) -> Result<BigRational> {
    let s = family.member_series(v, t)?;
    let QOrder::Value(o) = s.ord() else {
        return Err(Error::ZeroToPrecision);
    };
    if let FamilyDescriptor::SiegelPow { exponent, .. } = family {
        let expected = bernoulli2(&frac_part(&v.v1())) * rat_int(*exponent) / rat_int(2);
        if o != expected {
            return Err(Error::Inconsistency(format!(
                "Siegel power order {o} differs from (m/2) B2(<v1>) = {expected} at {v}"
            )));
        }
    }
    Ok(o)
}

/// Re-verify every certificate of a primitivity report at a higher
/// truncation; distinctness proofs must be stable.
pub fn reverify_certificates(
    family: &FamilyDescriptor,
    report: &PrimitivityReport,
    higher_t: i64,
) -> Result<bool> {
    let members = member_table(family, higher_t)?;
    let lookup = |v: &IndexVector| -> &FracQSeries {
        &members.iter().find(|(w, _)| w == v).expect("class present").1
    };
    for cert in &report.certificates {
        let cu = lookup(&cert.u).coeff_at(&cert.exponent)?;
        let cv = lookup(&cert.v).coeff_at(&cert.exponent)?;
        let m = num_integer::lcm(cu.order(), num_integer::lcm(cv.order(), cert.coeff_u.order()));
        if cu.lift(m)? != cert.coeff_u.lift(m)? || cv.lift(m)? != cert.coeff_v.lift(m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// JSON mirrors

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PairJson {
    pub u: String,
    pub v: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CertJson {
    pub u: String,
    pub v: String,
    pub exponent: String,
    pub coeff_u: String,
    pub coeff_v: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PrimitivityReportJson {
    pub level: u32,
    pub precision: i64,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PairJson>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub unresolved: Vec<PairJson>,
    pub certificates: Vec<CertJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RatioJson {
    pub u: String,
    pub v: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_of_unity_order: Option<u64>,
    #[serde(default)]
    pub symbolic: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TotalPrimitivityReportJson {
    pub level: u32,
    pub precision: i64,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PairJson>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub unresolved: Vec<PairJson>,
    pub pairs: Vec<RatioJson>,
}

fn pair_json(p: &(IndexVector, IndexVector)) -> PairJson {
    PairJson { u: p.0.to_string(), v: p.1.to_string() }
}

impl PrimitivityReport {
    pub fn to_json(&self) -> PrimitivityReportJson {
        let (verdict, witness, unresolved) = match &self.verdict {
            PrimitivityVerdict::Primitive => ("Primitive".to_string(), None, vec![]),
            PrimitivityVerdict::NotPrimitive { witness } => {
                ("NotPrimitive".to_string(), Some(pair_json(witness)), vec![])
            }
            PrimitivityVerdict::Undecided { unresolved } => (
                "Undecided".to_string(),
                None,
                unresolved.iter().map(pair_json).collect(),
            ),
        };
        PrimitivityReportJson {
            level: self.level,
            precision: self.precision,
            verdict,
            witness,
            unresolved,
            certificates: self
                .certificates
                .iter()
                .map(|c| CertJson {
                    u: c.u.to_string(),
                    v: c.v.to_string(),
                    exponent: render_rat(&c.exponent),
                    coeff_u: c.coeff_u.render(),
                    coeff_v: c.coeff_v.render(),
                })
                .collect(),
        }
    }
}

impl TotalPrimitivityReport {
    pub fn to_json(&self) -> TotalPrimitivityReportJson {
        let (verdict, witness, unresolved) = match &self.verdict {
            TotalVerdict::TotallyPrimitive => ("TotallyPrimitive".to_string(), None, vec![]),
            TotalVerdict::NotTotallyPrimitive { witness } => (
                "NotTotallyPrimitive".to_string(),
                Some(pair_json(witness)),
                vec![],
            ),
            TotalVerdict::Undecided { unresolved } => (
                "Undecided".to_string(),
                None,
                unresolved.iter().map(pair_json).collect(),
            ),
        };
        TotalPrimitivityReportJson {
            level: self.level,
            precision: self.precision,
            verdict,
            witness,
            unresolved,
            pairs: self
                .pairs
                .iter()
                .map(|p| {
                    let (kind, exponent, constant, order, symbolic) = match &p.analysis {
                        RatioAnalysis::NonConstantRatio { exponent } => {
                            ("NonConstantRatio", Some(render_rat(exponent)), None, None, false)
                        }
                        RatioAnalysis::ConstantRatioCandidate {
                            constant,
                            root_of_unity_order,
                            symbolic,
                        } => (
                            "ConstantRatioCandidate",
                            None,
                            Some(constant.render()),
                            *root_of_unity_order,
                            *symbolic,
                        ),
                        RatioAnalysis::MemberZeroToPrecision => {
                            ("MemberZeroToPrecision", None, None, None, false)
                        }
                    };
                    RatioJson {
                        u: p.u.to_string(),
                        v: p.v.to_string(),
                        kind: kind.to_string(),
                        exponent,
                        constant,
                        root_of_unity_order: order,
                        symbolic,
                    }
                })
                .collect(),
        }
    }
}
