//! Command-line front end: deterministic text and JSON output for the
//! q-expansion, family-check, model, orbit, stabilizer and CM operations.
//!
//! Exit codes: 0 success / affirmative verdict, 1 negative verdict (only
//! when --expect is given) or internal inconsistency, 2 usage errors,
//! 3 precision errors. A header line with the effective parameters goes to
//! stderr so stdout stays byte-stable and machine-readable.

use std::io::Write;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde::Serialize;

use fricke::cm::{cm_conjugates, make_field, reciprocity_group};
use fricke::error::Error;
use fricke::famgroup::{cosets_mod_pm_gamma, qn_set, FamilyDescriptor};
use fricke::modelcurve::{
    model_polynomial, orbit_member_order, render_stabilizer_report, required_truncation,
    stabilizer_check_fricke, stabilizer_check_siegel, StabilizerVerdict,
};
use fricke::modforms::{
    delta_norm_series, e4_series, e6_series, j_series, wp_norm_series, IndexVector,
};
use fricke::primitivity::{
    check_primitive, check_totally_primitive, PrimitivityVerdict, ScanOptions, TotalVerdict,
};
use fricke::qseries::FracQSeries;
use fricke::rational::{bernoulli2, frac_part, rat, rat_int, render_rat};

#[derive(Parser)]
#[command(name = "fricke", version, about = "Exact q-expansions of level-N modular function families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputOpts {
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Write output to a file instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the q-expansion of a series or family member
    Qexp {
        /// one of: j, e4, e6, delta, wp, fricke, siegel, diff:a, sgen
        #[arg(long)]
        family: String,
        #[arg(long, value_name = "N")]
        n_level: Option<u32>,
        /// Alias for --n-level
        #[arg(long = "N", value_name = "N", conflicts_with = "n_level")]
        n_level_alias: Option<u32>,
        /// Index vector "a/N,b/N"
        #[arg(long)]
        v: Option<String>,
        /// Power multiplier: siegel uses exponent 12*N*n, sgen is the
        /// generator with parameter n
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n: i64,
        /// Number of q-units to display above the leading exponent
        #[arg(long, default_value_t = 60)]
        terms: i64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Primitivity / total-primitivity certificates for a family
    FamilyCheck {
        /// one of: fricke, siegel, diff:a
        #[arg(long)]
        family: String,
        #[arg(long = "N")]
        n_level: u32,
        #[arg(long, default_value_t = 60)]
        terms: i64,
        /// Run the total-primitivity (ratio) analysis
        #[arg(long)]
        total: bool,
        /// Exit 1 unless the verdict matches ("primitive" or "total")
        #[arg(long)]
        expect: Option<String>,
        /// Pair scans are O(N^4); levels above this bound are refused
        #[arg(long, default_value_t = 12)]
        max_level: u32,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// The multiplier set Q_N for difference families (odd N)
    QnSet {
        #[arg(long = "N")]
        n_level: u32,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// The plane model f_N(x, y) of X(N)
    Model {
        #[arg(long = "N")]
        n_level: u32,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n: i64,
        /// Truncation override (default: the precision rule)
        #[arg(long)]
        terms: Option<i64>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Conjugate orbit of the Siegel generator over the cosets
    Orbit {
        #[arg(long = "N")]
        n_level: u32,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n: i64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Stabilizer certification for the standard generators
    Stabilizer {
        /// "fricke" or "siegel"
        #[arg(long)]
        family: String,
        #[arg(long = "N")]
        n_level: u32,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        terms: Option<i64>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Conjugate values at a CM point and generation diagnostics
    Cm {
        /// Fundamental discriminant (negative)
        #[arg(long, allow_hyphen_values = true)]
        dk: i64,
        #[arg(long = "N")]
        n_level: u32,
        /// one of: siegel, fricke, diff:a, sgen
        #[arg(long, default_value = "siegel")]
        family: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, default_value_t = 128)]
        prec_bits: u32,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1e-4)]
        near_tol: f64,
        #[arg(long, default_value_t = 30)]
        terms: i64,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn emit(output: &OutputOpts, content: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .map_err(|e| Error::Usage(format!("cannot open {}: {e}", path.display())))?;
            f.write_all(content.as_bytes())
                .map_err(|e| Error::Usage(format!("write failed: {e}")))?;
        }
        None => {
            print!("{content}");
        }
    }
    Ok(())
}

fn header(subcommand: &str, fields: &[(&str, String)]) {
    let mut line = format!("# fricke {subcommand}");
    for (k, v) in fields {
        line.push_str(&format!(" {k}={v}"));
    }
    eprintln!("{line}");
}

fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Parse "fricke" | "siegel" | "diff:a" | "sgen" into a descriptor.
fn parse_family(name: &str, level: u32, n: i64) -> Result<FamilyDescriptor, Error> {
    if let Some(a) = name.strip_prefix("diff:") {
        let a: i64 = a
            .parse()
            .map_err(|_| Error::Usage(format!("bad multiplier in {name:?}")))?;
        return FamilyDescriptor::diff(level, a);
    }
    match name {
        "fricke" => FamilyDescriptor::fricke(level),
        "siegel" => FamilyDescriptor::siegel_pow(level, 12 * level as i64 * n),
        "sgen" => FamilyDescriptor::siegel_generator(level, n),
        other => Err(Error::Usage(format!(
            "unknown family {other:?} (expected fricke, siegel, diff:a or sgen)"
        ))),
    }
}

/// Exact q-order of the requested expansion, used to pick the truncation
/// window so that `terms` q-units are displayed above the leading term.
fn ord_hint(
    family: &str,
    level: u32,
    v: Option<&IndexVector>,
    n: i64,
) -> Result<BigRational, Error> {
    let nn = level as i64;
    Ok(match family {
        "j" => rat_int(-1),
        "delta" => rat_int(1),
        "e4" | "e6" => rat_int(0),
        "wp" => rat_int(0),
        "fricke" | "diff" => rat_int(-1),
        "siegel" => {
            let v = v.ok_or_else(|| Error::Usage("--v required".into()))?;
            bernoulli2(&frac_part(&v.v1())) * rat_int(12 * nn * n) / rat_int(2)
        }
        "sgen" => {
            let v = v.ok_or_else(|| Error::Usage("--v required".into()))?;
            let (v1, v2) = v.numerators();
            bernoulli2(&frac_part(&rat(v1, nn))) * rat_int(6 * nn * n)
                + bernoulli2(&frac_part(&rat(-v2, nn))) * rat_int(12 * nn * n)
        }
        _ => rat_int(0),
    })
}

#[derive(Serialize)]
struct QexpJson {
    family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v: Option<String>,
    n: i64,
    terms: i64,
    series: fricke::qseries::SeriesJson,
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Qexp { family, n_level, n_level_alias, v, n, terms, output } => {
            let level = n_level.or(n_level_alias);
            if terms < 1 {
                return Err(Error::Usage("--terms must be >= 1".into()));
            }
            let fam_kind = family.split(':').next().unwrap_or("").to_string();
            let needs_index = matches!(fam_kind.as_str(), "wp" | "fricke" | "siegel" | "diff" | "sgen");
            let (index, level) = if needs_index {
                let level =
                    level.ok_or_else(|| Error::Usage("--N required for this family".into()))?;
                let vtext = v.ok_or_else(|| Error::Usage("--v required for this family".into()))?;
                (Some(IndexVector::parse(&vtext, level)?), Some(level))
            } else {
                (None, level)
            };
            header(
                "qexp",
                &[
                    ("family", family.clone()),
                    ("N", level.map(|x| x.to_string()).unwrap_or_else(|| "-".into())),
                    ("v", index.map(|x| x.to_string()).unwrap_or_else(|| "-".into())),
                    ("n", n.to_string()),
                    ("terms", terms.to_string()),
                    ("defaults", "terms=60 prec-bits=128 tol=1e-6".into()),
                ],
            );
            let ord = ord_hint(&fam_kind, level.unwrap_or(2), index.as_ref(), n)?;
            let tr = {
                let c = ord.ceil().to_integer();
                i64::try_from(&c).map_err(|_| Error::Usage("order out of range".into()))? + terms
            };
            let series: FracQSeries = match fam_kind.as_str() {
                "j" => j_series(tr),
                "delta" => delta_norm_series(tr.max(2)),
                "e4" => e4_series(tr.max(1)),
                "e6" => e6_series(tr.max(1)),
                "wp" => wp_norm_series(&index.unwrap(), tr.max(1)),
                _ => {
                    let fam = parse_family(&family, level.unwrap(), n)?;
                    fam.member_series(&index.unwrap(), tr)?
                }
            };
            let content = if output.json {
                json_string(&QexpJson {
                    family,
                    level,
                    v: index.map(|x| x.to_string()),
                    n,
                    terms,
                    series: series.to_json(),
                })
            } else {
                format!("{}\n", series.render())
            };
            emit(&output, &content)?;
            Ok(0)
        }

        Command::FamilyCheck { family, n_level, terms, total, expect, max_level, output } => {
            header(
                "family-check",
                &[
                    ("family", family.clone()),
                    ("N", n_level.to_string()),
                    ("terms", terms.to_string()),
                    ("total", total.to_string()),
                    ("defaults", "terms=60 prec-bits=128 tol=1e-6".into()),
                ],
            );
            let fam = parse_family(&family, n_level, 1)?;
            let opts = ScanOptions::with_max_level(max_level);
            let mut exit = 0;
            let content = if total {
                let report = check_totally_primitive(&fam, terms, opts)?;
                if let Some(exp) = &expect {
                    let ok = matches!(report.verdict, TotalVerdict::TotallyPrimitive);
                    if (exp == "total" || exp == "primitive") && !ok {
                        exit = 1;
                    }
                }
                if output.json {
                    json_string(&report.to_json())
                } else {
                    let mut text = match &report.verdict {
                        TotalVerdict::TotallyPrimitive => format!(
                            "TotallyPrimitive: all {} pairs have non-constant ratios (N={}, T={})\n",
                            report.pairs.len(),
                            report.level,
                            report.precision
                        ),
                        TotalVerdict::NotTotallyPrimitive { witness } => format!(
                            "NotTotallyPrimitive: witness pair ({}) ~ ({}) (N={}, T={})\n",
                            witness.0, witness.1, report.level, report.precision
                        ),
                        TotalVerdict::Undecided { unresolved } => format!(
                            "Undecided: {} pairs unresolved at T={} (raise --terms)\n",
                            unresolved.len(),
                            report.precision
                        ),
                    };
                    for p in &report.pairs {
                        if let fricke::primitivity::RatioAnalysis::ConstantRatioCandidate {
                            constant,
                            root_of_unity_order,
                            symbolic,
                        } = &p.analysis
                        {
                            text.push_str(&format!(
                                "  constant ratio on ({}) ~ ({}): {} (root of unity order {:?}, symbolic {})\n",
                                p.u,
                                p.v,
                                constant.render(),
                                root_of_unity_order,
                                symbolic
                            ));
                        }
                    }
                    text
                }
            } else {
                let report = check_primitive(&fam, terms, opts)?;
                if let Some(exp) = &expect {
                    let ok = matches!(report.verdict, PrimitivityVerdict::Primitive);
                    if exp == "primitive" && !ok {
                        exit = 1;
                    }
                }
                if output.json {
                    json_string(&report.to_json())
                } else {
                    match &report.verdict {
                        PrimitivityVerdict::Primitive => format!(
                            "Primitive: {} pair certificates (N={}, T={})\n",
                            report.certificates.len(),
                            report.level,
                            report.precision
                        ),
                        PrimitivityVerdict::NotPrimitive { witness } => format!(
                            "NotPrimitive: witness pair ({}) ~ ({})\n",
                            witness.0, witness.1
                        ),
                        PrimitivityVerdict::Undecided { unresolved } => format!(
                            "Undecided: {} pairs unresolved at T={} (raise --terms)\n",
                            unresolved.len(),
                            report.precision
                        ),
                    }
                }
            };
            emit(&output, &content)?;
            Ok(exit)
        }

        Command::QnSet { n_level, output } => {
            header("qn-set", &[("N", n_level.to_string())]);
            let set = qn_set(n_level)?;
            let content = if output.json {
                #[derive(Serialize)]
                struct QnJson {
                    #[serde(rename = "N")]
                    level: u32,
                    qn_set: Vec<i64>,
                }
                json_string(&QnJson { level: n_level, qn_set: set })
            } else {
                let mut s = set
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join("\n");
                if !s.is_empty() {
                    s.push('\n');
                }
                s
            };
            emit(&output, &content)?;
            Ok(0)
        }

        Command::Model { n_level, n, terms, output } => {
            header(
                "model",
                &[
                    ("N", n_level.to_string()),
                    ("n", n.to_string()),
                    (
                        "terms",
                        terms
                            .map(|t| t.to_string())
                            .unwrap_or_else(|| format!("auto({})", required_truncation(n_level, n, 8))),
                    ),
                ],
            );
            if n_level > 4 {
                return Err(Error::Usage(format!(
                    "model computation supports N <= 4 (got {n_level})"
                )));
            }
            let poly = model_polynomial(n_level, n, terms)?;
            let content = if output.json {
                #[derive(Serialize)]
                struct ModelJson {
                    #[serde(rename = "N")]
                    level: u32,
                    n: i64,
                    coeffs: std::collections::BTreeMap<String, String>,
                }
                json_string(&ModelJson {
                    level: n_level,
                    n,
                    coeffs: poly.to_json().coeffs,
                })
            } else {
                format!("{}\n", poly.render())
            };
            emit(&output, &content)?;
            Ok(0)
        }

        Command::Orbit { n_level, n, output } => {
            header("orbit", &[("N", n_level.to_string()), ("n", n.to_string())]);
            let cosets = cosets_mod_pm_gamma(n_level);
            #[derive(Serialize)]
            struct OrbitRow {
                coset: String,
                slot1: String,
                slot2: String,
                ord: String,
            }
            let rows: Vec<OrbitRow> = cosets
                .iter()
                .map(|g| {
                    let [a, b, c, d] = g.entries();
                    OrbitRow {
                        coset: g.to_string(),
                        slot1: format!("{a}/{n_level},{b}/{n_level}"),
                        slot2: format!("{c}/{n_level},{d}/{n_level}"),
                        ord: render_rat(&orbit_member_order(n_level, n, g)),
                    }
                })
                .collect();
            let content = if output.json {
                #[derive(Serialize)]
                struct OrbitJson {
                    #[serde(rename = "N")]
                    level: u32,
                    n: i64,
                    cosets: usize,
                    members: Vec<OrbitRow>,
                }
                json_string(&OrbitJson { level: n_level, n, cosets: rows.len(), members: rows })
            } else {
                let mut s = format!("{} cosets of SL2(Z/{}Z)/{{±1}}\n", rows.len(), n_level);
                for r in rows {
                    s.push_str(&format!(
                        "{}  g[{}]^(12Nn) g[{}]^(24Nn)  ord {}\n",
                        r.coset, r.slot1, r.slot2, r.ord
                    ));
                }
                s
            };
            emit(&output, &content)?;
            Ok(0)
        }

        Command::Stabilizer { family, n_level, n, terms, output } => {
            header(
                "stabilizer",
                &[
                    ("family", family.clone()),
                    ("N", n_level.to_string()),
                    ("n", n.to_string()),
                ],
            );
            let report = match family.as_str() {
                "fricke" => stabilizer_check_fricke(n_level, terms.unwrap_or(40))?,
                "siegel" => {
                    let t = terms.unwrap_or_else(|| required_truncation(n_level, n, 8));
                    stabilizer_check_siegel(n_level, n, t)?
                }
                other => {
                    return Err(Error::Usage(format!(
                        "unknown generator family {other:?} (expected fricke or siegel)"
                    )))
                }
            };
            let trivial = matches!(report.verdict, StabilizerVerdict::TrivialStabilizer);
            let content = if output.json {
                #[derive(Serialize)]
                struct StabJson {
                    #[serde(rename = "N")]
                    level: u32,
                    family: String,
                    verdict: String,
                    certificates: Vec<(String, String)>,
                }
                json_string(&StabJson {
                    level: n_level,
                    family,
                    verdict: if trivial { "TrivialStabilizer".into() } else { "Undecided".into() },
                    certificates: report
                        .certificates
                        .iter()
                        .map(|(g, e)| (g.to_string(), render_rat(e)))
                        .collect(),
                })
            } else {
                render_stabilizer_report(&report)
            };
            emit(&output, &content)?;
            Ok(if trivial { 0 } else { 3 })
        }

        Command::Cm { dk, n_level, family, n, prec_bits, tol, near_tol, terms, output } => {
            header(
                "cm",
                &[
                    ("dk", dk.to_string()),
                    ("N", n_level.to_string()),
                    ("family", family.clone()),
                    ("n", n.to_string()),
                    ("prec-bits", prec_bits.to_string()),
                    ("tol", format!("{tol:e}")),
                    ("near-tol", format!("{near_tol:e}")),
                    ("terms", terms.to_string()),
                ],
            );
            if prec_bits < 53 {
                return Err(Error::Usage("--prec-bits must be >= 53".into()));
            }
            let k = make_field(dk)?;
            let fam = parse_family(&family, n_level, n)?;
            // the family itself carries the Siegel exponent; the conjugate
            // power multiplies values, so build the base (n=1) descriptor
            let (base_fam, conj_power) = match &fam {
                FamilyDescriptor::SiegelPow { level, .. } => {
                    (FamilyDescriptor::siegel_pow(*level, 12 * *level as i64)?, n)
                }
                other => (other.clone(), n),
            };
            let report =
                cm_conjugates(&base_fam, conj_power, &k, n_level, prec_bits, terms, tol, near_tol)?;
            let content = if output.json {
                json_string(&report.to_json())
            } else {
                let mut s = format!(
                    "W/{{±1}} classes: {} (|W| = {})\n",
                    report.conjugates.len(),
                    reciprocity_group(&k, n_level)?.elements.len()
                );
                for (si, ti, val) in &report.conjugates {
                    let (re, im) = val.to_f64s();
                    s.push_str(&format!("  ({si},{ti}): {re:.12e} + {im:.12e} i\n"));
                }
                s.push_str(&format!(
                    "min pairwise distance: {:.6e}\ndistinct at {:.1e}: {}\n",
                    report.min_pairwise_distance, report.tolerance, report.distinct
                ));
                if let Some(coeffs) = &report.lattice_coeffs {
                    let worst = coeffs.iter().map(|(_, _, r)| *r).fold(0.0f64, f64::max);
                    s.push_str(&format!(
                        "near-integrality (class number 1): worst residual {:.6e} -> {}\n",
                        worst,
                        report.near_integral.unwrap_or(false)
                    ));
                }
                s.push_str(&format!("relative tail bound: {:.3e}\n", report.tail_bound));
                s
            };
            emit(&output, &content)?;
            Ok(0)
        }
    }
}
