//! Python bindings: reduced CBC constructions, exact errors and bounds.

use pyo3::exceptions::{PyMemoryError, PyValueError};
use pyo3::prelude::*;

use ::redcbc::{
    cost_model, mu_b as core_mu_b, phi_korobov_table, reduced_cbc_fast, reduced_cbc_naive,
    reduced_cbc_poly, theorem_bound as korobov_bound, theorem_bound_walsh, walsh_kernel_table,
    wce_product, wce_walsh_product, CbcError, GeneratingVector, LatticeKind, ReductionSchedule,
    ReductionSpec, SpaceParams, Weights,
};

fn py_err(e: CbcError) -> PyErr {
    match e {
        CbcError::Capacity(_) => PyMemoryError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn weights_from(obj: &Bound<'_, PyAny>, s: usize) -> PyResult<Weights> {
    if let Ok(rule) = obj.extract::<String>() {
        return Weights::from_rule(&rule, s).map_err(py_err);
    }
    let list: Vec<f64> = obj.extract()?;
    if list.len() < s {
        return Err(PyValueError::new_err(format!(
            "{} weights given for s = {s}",
            list.len()
        )));
    }
    Weights::product(list[..s].to_vec()).map_err(py_err)
}

fn schedule_from(
    obj: Option<&Bound<'_, PyAny>>,
    s: usize,
    params: &SpaceParams,
) -> PyResult<ReductionSchedule> {
    let Some(obj) = obj else {
        return Ok(ReductionSchedule::zero(s, params));
    };
    let spec = if let Ok(rule) = obj.extract::<String>() {
        ReductionSpec::parse(&rule).map_err(py_err)?
    } else {
        ReductionSpec::Explicit(obj.extract()?)
    };
    ReductionSchedule::from_spec(&spec, s, params).map_err(py_err)
}

fn is_korobov(mode: &str) -> PyResult<bool> {
    match mode {
        "korobov" => Ok(true),
        "polynomial" => Ok(false),
        other => Err(PyValueError::new_err(format!("unknown mode '{other}'"))),
    }
}

/// Result of a construction.
#[pyclass(get_all, frozen)]
struct Construction {
    components: Vec<u64>,
    effective: Vec<u64>,
    reduction: Vec<u32>,
    trace: Vec<f64>,
    squared_error: f64,
    log10_error: f64,
    candidate_evaluations: u64,
    multiply_adds: u64,
    predicted_cost: u64,
}

#[pymethods]
impl Construction {
    fn __repr__(&self) -> String {
        format!(
            "Construction(s={}, log10_error={:.4})",
            self.components.len(),
            self.log10_error
        )
    }
}

/// Builds a generating vector. `weights` is a rule string such as `"j^-3"` or
/// a list of product weights; `reduction` is a rule string such as
/// `"floor(3/2*log2(j))"` or a list of exponents.
#[pyfunction]
#[pyo3(signature = (mode, base, m, alpha, s, weights, reduction=None, algorithm="fast"))]
#[allow(clippy::too_many_arguments)]
fn construct(
    py: Python<'_>,
    mode: &str,
    base: u64,
    m: u32,
    alpha: f64,
    s: usize,
    weights: &Bound<'_, PyAny>,
    reduction: Option<&Bound<'_, PyAny>>,
    algorithm: &str,
) -> PyResult<Construction> {
    let korobov = is_korobov(mode)?;
    let params = SpaceParams::new(base, m, alpha).map_err(py_err)?;
    let weights = weights_from(weights, s)?;
    let schedule = schedule_from(reduction, s, &params)?;
    let algorithm = algorithm.to_string();
    py.detach(move || -> Result<Construction, CbcError> {
        let (vector, counters, e2) = if korobov {
            let profile = phi_korobov_table(&params)?;
            let (v, c) = match algorithm.as_str() {
                "fast" => reduced_cbc_fast(&params, &weights, &schedule, s, &profile)?,
                "naive" => reduced_cbc_naive(&params, &weights, &schedule, s)?,
                other => {
                    return Err(CbcError::Validation(format!("unknown algorithm '{other}'")))
                }
            };
            let e2 = wce_product(&params, &weights, &v, &profile)?.squared_error;
            (v, c, e2)
        } else {
            let profile = walsh_kernel_table(&params)?;
            let (v, c) = reduced_cbc_poly(&params, &weights, &schedule, s, &profile)?;
            let e2 = wce_walsh_product(&params, &weights, &v, &profile)?.squared_error;
            (v, c, e2)
        };
        Ok(Construction {
            components: vector.components,
            effective: vector.effective,
            reduction: vector.reduction,
            trace: vector.trace,
            squared_error: e2,
            log10_error: 0.5 * e2.log10(),
            candidate_evaluations: counters.candidate_evaluations,
            multiply_adds: counters.multiply_adds,
            predicted_cost: cost_model(&schedule, s).predicted,
        })
    })
    .map_err(py_err)
}

/// Exact squared worst-case error of a given vector under product weights.
#[pyfunction]
#[pyo3(signature = (mode, base, m, alpha, weights, components, reduction=None))]
#[allow(clippy::too_many_arguments)]
fn squared_error(
    py: Python<'_>,
    mode: &str,
    base: u64,
    m: u32,
    alpha: f64,
    weights: &Bound<'_, PyAny>,
    components: Vec<u64>,
    reduction: Option<&Bound<'_, PyAny>>,
) -> PyResult<f64> {
    let korobov = is_korobov(mode)?;
    let s = components.len();
    let params = SpaceParams::new(base, m, alpha).map_err(py_err)?;
    let weights = weights_from(weights, s)?;
    let schedule = schedule_from(reduction, s, &params)?;
    py.detach(move || -> Result<f64, CbcError> {
        if korobov {
            let v = GeneratingVector::from_components(LatticeKind::Rank1, &schedule, components)?;
            let profile = phi_korobov_table(&params)?;
            Ok(wce_product(&params, &weights, &v, &profile)?.squared_error)
        } else {
            let v =
                GeneratingVector::from_components(LatticeKind::Polynomial, &schedule, components)?;
            let profile = walsh_kernel_table(&params)?;
            Ok(wce_walsh_product(&params, &weights, &v, &profile)?.squared_error)
        }
    })
    .map_err(py_err)
}

/// Kernel values `φ(n/b^m)` (Korobov) or `φ(ν(n/x^m))` (Walsh), `n < b^m`.
#[pyfunction]
fn kernel_table(mode: &str, base: u64, m: u32, alpha: f64) -> PyResult<Vec<f64>> {
    let params = SpaceParams::new(base, m, alpha).map_err(py_err)?;
    if is_korobov(mode)? {
        Ok(phi_korobov_table(&params).map_err(py_err)?.values().to_vec())
    } else {
        Ok(walsh_kernel_table(&params).map_err(py_err)?.values().to_vec())
    }
}

/// Upper bound on the squared error of the first `s` coordinates at `lambda`.
#[pyfunction]
#[pyo3(signature = (mode, base, m, alpha, s, weights, reduction=None, lambda_=1.0))]
#[allow(clippy::too_many_arguments)]
fn theorem_bound(
    mode: &str,
    base: u64,
    m: u32,
    alpha: f64,
    s: usize,
    weights: &Bound<'_, PyAny>,
    reduction: Option<&Bound<'_, PyAny>>,
    lambda_: f64,
) -> PyResult<f64> {
    let params = SpaceParams::new(base, m, alpha).map_err(py_err)?;
    let weights = weights_from(weights, s)?;
    let schedule = schedule_from(reduction, s, &params)?;
    if is_korobov(mode)? {
        korobov_bound(&params, &weights, &schedule, s, lambda_).map_err(py_err)
    } else {
        theorem_bound_walsh(&params, &weights, &schedule, s, lambda_).map_err(py_err)
    }
}

#[pyfunction]
fn mu_b(base: u64, alpha: f64) -> PyResult<f64> {
    core_mu_b(base, alpha).map_err(py_err)
}

#[pymodule]
#[pyo3(name = "redcbc")]
fn redcbc_py(module: &Bound<'_, PyModule>) -> PyResult<()> {
    module.add_class::<Construction>()?;
    module.add_function(wrap_pyfunction!(construct, module)?)?;
    module.add_function(wrap_pyfunction!(squared_error, module)?)?;
    module.add_function(wrap_pyfunction!(kernel_table, module)?)?;
    module.add_function(wrap_pyfunction!(theorem_bound, module)?)?;
    module.add_function(wrap_pyfunction!(mu_b, module)?)?;
    Ok(())
}
