//! Python bindings: the series type plus the family, model, primitivity and
//! CM operations. Reports cross the boundary as JSON strings so the Python
//! side can load them with the standard library.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ::fricke::cm::{cm_conjugates, make_field};
use ::fricke::error::Error;
use ::fricke::famgroup::{qn_set, FamilyDescriptor};
use ::fricke::modelcurve::{
    model_polynomial, render_stabilizer_report, required_truncation, stabilizer_check_fricke,
    stabilizer_check_siegel,
};
use ::fricke::modforms::{
    delta_norm_series, e4_series, e6_series, fricke_series, j_series, siegel_power_series,
    wp_norm_series, IndexVector,
};
use ::fricke::primitivity::{check_primitive, check_totally_primitive, ScanOptions};
use ::fricke::qseries::FracQSeries;
use ::fricke::rational::{parse_rat, render_rat};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_family(name: &str, level: u32, n: i64) -> PyResult<FamilyDescriptor> {
    if let Some(a) = name.strip_prefix("diff:") {
        let a: i64 = a
            .parse()
            .map_err(|_| PyValueError::new_err(format!("bad multiplier in {name:?}")))?;
        return FamilyDescriptor::diff(level, a).map_err(err);
    }
    match name {
        "fricke" => FamilyDescriptor::fricke(level).map_err(err),
        "siegel" => FamilyDescriptor::siegel_pow(level, 12 * level as i64 * n).map_err(err),
        "sgen" => FamilyDescriptor::siegel_generator(level, n).map_err(err),
        other => Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    }
}

/// A truncated Laurent series in q^(1/D) with exact cyclotomic coefficients.
#[pyclass(name = "Series", skip_from_py_object)]
#[derive(Clone)]
struct PySeries {
    inner: FracQSeries,
}

#[pymethods]
impl PySeries {
    fn __repr__(&self) -> String {
        self.inner.render()
    }

    fn __str__(&self) -> String {
        self.inner.render()
    }

    fn __add__(&self, other: &PySeries) -> PyResult<PySeries> {
        Ok(PySeries { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn __sub__(&self, other: &PySeries) -> PyResult<PySeries> {
        Ok(PySeries { inner: self.inner.sub(&other.inner).map_err(err)? })
    }

    fn __mul__(&self, other: &PySeries) -> PyResult<PySeries> {
        Ok(PySeries { inner: self.inner.mul(&other.inner).map_err(err)? })
    }

    fn __pow__(&self, n: i64, _mod: Option<i64>) -> PyResult<PySeries> {
        Ok(PySeries { inner: self.inner.pow(n).map_err(err)? })
    }

    fn inv(&self) -> PyResult<PySeries> {
        Ok(PySeries { inner: self.inner.inv().map_err(err)? })
    }

    /// q-order as a rational string, or None when zero to precision.
    fn ord(&self) -> Option<String> {
        self.inner.ord().value().map(render_rat)
    }

    fn is_zero_to_precision(&self) -> bool {
        self.inner.is_zero_to_precision()
    }

    /// Coefficient at a rational exponent, rendered in the zeta basis.
    fn coeff(&self, exp: &str) -> PyResult<String> {
        let e = parse_rat(exp).map_err(err)?;
        Ok(self.inner.coeff_at(&e).map_err(err)?.render())
    }

    fn cyclo_order(&self) -> u32 {
        self.inner.cyclo_order()
    }

    fn exp_den(&self) -> u32 {
        self.inner.exp_den()
    }

    fn trunc(&self) -> String {
        render_rat(&self.inner.trunc())
    }

    fn num_terms(&self) -> usize {
        self.inner.num_terms()
    }

    fn shift_tau_plus_one(&self) -> PyResult<PySeries> {
        Ok(PySeries { inner: self.inner.shift_tau_plus_one().map_err(err)? })
    }

    fn apply_sigma(&self, d: i64) -> PyResult<PySeries> {
        Ok(PySeries { inner: self.inner.apply_sigma(d).map_err(err)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_json()).expect("serializable")
    }
}

#[pyfunction]
fn j(terms: i64) -> PyResult<PySeries> {
    if terms < 1 {
        return Err(PyValueError::new_err("terms must be >= 1"));
    }
    Ok(PySeries { inner: j_series(terms) })
}

#[pyfunction]
fn e4(terms: i64) -> PySeries {
    PySeries { inner: e4_series(terms.max(1)) }
}

#[pyfunction]
fn e6(terms: i64) -> PySeries {
    PySeries { inner: e6_series(terms.max(1)) }
}

#[pyfunction]
fn delta(terms: i64) -> PySeries {
    PySeries { inner: delta_norm_series(terms.max(2)) }
}

#[pyfunction]
fn wp(level: u32, v: &str, terms: i64) -> PyResult<PySeries> {
    let v = IndexVector::parse(v, level).map_err(err)?;
    Ok(PySeries { inner: wp_norm_series(&v, terms.max(1)) })
}

#[pyfunction(name = "fricke")]
fn fricke_fn(level: u32, v: &str, terms: i64) -> PyResult<PySeries> {
    let v = IndexVector::parse(v, level).map_err(err)?;
    Ok(PySeries { inner: fricke_series(&v, terms) })
}

#[pyfunction]
fn siegel_power(level: u32, v: &str, m: i64, terms: i64) -> PyResult<PySeries> {
    let v = IndexVector::parse(v, level).map_err(err)?;
    Ok(PySeries { inner: siegel_power_series(&v, m, terms).map_err(err)? })
}

/// Series of a family member h_v.
#[pyfunction]
#[pyo3(signature = (family, level, v, terms, n = 1))]
fn member(family: &str, level: u32, v: &str, terms: i64, n: i64) -> PyResult<PySeries> {
    let fam = parse_family(family, level, n)?;
    let v = IndexVector::parse(v, level).map_err(err)?;
    Ok(PySeries { inner: fam.member_series(&v, terms).map_err(err)? })
}

#[pyfunction(name = "qn_set")]
fn qn_set_py(level: u32) -> PyResult<Vec<i64>> {
    qn_set(level).map_err(err)
}

/// Primitivity report as a JSON string.
#[pyfunction]
#[pyo3(signature = (family, level, terms = 40, total = false, max_level = 12))]
fn family_check(
    family: &str,
    level: u32,
    terms: i64,
    total: bool,
    max_level: u32,
) -> PyResult<String> {
    let fam = parse_family(family, level, 1)?;
    let opts = ScanOptions::with_max_level(max_level);
    let json = if total {
        serde_json::to_string_pretty(&check_totally_primitive(&fam, terms, opts).map_err(err)?.to_json())
    } else {
        serde_json::to_string_pretty(&check_primitive(&fam, terms, opts).map_err(err)?.to_json())
    };
    Ok(json.expect("serializable"))
}

/// Plane model of X(N) as text.
#[pyfunction]
#[pyo3(signature = (level, n = 1, terms = None))]
fn model(level: u32, n: i64, terms: Option<i64>) -> PyResult<String> {
    Ok(model_polynomial(level, n, terms).map_err(err)?.render())
}

/// Plane model of X(N) as a JSON string mapping "i,j" to coefficients.
#[pyfunction]
#[pyo3(signature = (level, n = 1, terms = None))]
fn model_json(level: u32, n: i64, terms: Option<i64>) -> PyResult<String> {
    let poly = model_polynomial(level, n, terms).map_err(err)?;
    Ok(serde_json::to_string_pretty(&poly.to_json()).expect("serializable"))
}

/// Stabilizer certification report as text.
#[pyfunction]
#[pyo3(signature = (family, level, n = 1, terms = None))]
fn stabilizer(family: &str, level: u32, n: i64, terms: Option<i64>) -> PyResult<String> {
    let report = match family {
        "fricke" => stabilizer_check_fricke(level, terms.unwrap_or(40)).map_err(err)?,
        "siegel" => {
            let t = terms.unwrap_or_else(|| required_truncation(level, n, 8));
            stabilizer_check_siegel(level, n, t).map_err(err)?
        }
        other => return Err(PyValueError::new_err(format!("unknown generator {other:?}"))),
    };
    Ok(render_stabilizer_report(&report))
}

/// CM conjugate diagnostics as a JSON string.
#[pyfunction]
#[pyo3(signature = (dk, level, family = "siegel", n = 1, prec_bits = 128, terms = 30, tol = 1e-6, near_tol = 1e-4))]
#[allow(clippy::too_many_arguments)]
fn cm_report(
    dk: i64,
    level: u32,
    family: &str,
    n: i64,
    prec_bits: u32,
    terms: i64,
    tol: f64,
    near_tol: f64,
) -> PyResult<String> {
    let k = make_field(dk).map_err(err)?;
    let fam = match family {
        "siegel" => FamilyDescriptor::siegel_pow(level, 12 * level as i64).map_err(err)?,
        other => parse_family(other, level, 1)?,
    };
    let report =
        cm_conjugates(&fam, n, &k, level, prec_bits, terms, tol, near_tol).map_err(err)?;
    Ok(serde_json::to_string_pretty(&report.to_json()).expect("serializable"))
}

#[pymodule]
fn fricke_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySeries>()?;
    m.add_function(wrap_pyfunction!(j, m)?)?;
    m.add_function(wrap_pyfunction!(e4, m)?)?;
    m.add_function(wrap_pyfunction!(e6, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(wp, m)?)?;
    m.add_function(wrap_pyfunction!(fricke_fn, m)?)?;
    m.add_function(wrap_pyfunction!(siegel_power, m)?)?;
    m.add_function(wrap_pyfunction!(member, m)?)?;
    m.add_function(wrap_pyfunction!(qn_set_py, m)?)?;
    m.add_function(wrap_pyfunction!(family_check, m)?)?;
    m.add_function(wrap_pyfunction!(model, m)?)?;
    m.add_function(wrap_pyfunction!(model_json, m)?)?;
    m.add_function(wrap_pyfunction!(stabilizer, m)?)?;
    m.add_function(wrap_pyfunction!(cm_report, m)?)?;
    Ok(())
}
