//! Python bindings: the base type plus the main operations (digit
//! expansions, spectra, eigenfunctional evaluation, invariant density,
//! decay measurement, branch diagnostics, and the quartic verification).

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use betamap::beta::{BetaSpec, Point, Precision};
use betamap::error::Error;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_precision(s: &str) -> PyResult<Precision> {
    s.parse().map_err(err)
}

fn lam_of(pair: (f64, f64)) -> Complex64 {
    Complex64::new(pair.0, pair.1)
}

/// A base beta > 1, defined numerically or as a polynomial root.
#[pyclass(name = "Beta")]
struct PyBeta {
    inner: BetaSpec,
}

#[pymethods]
impl PyBeta {
    /// Beta(value=...) or Beta(poly=[c_k, ..., c_0], lo=..., hi=...).
    #[new]
    #[pyo3(signature = (value=None, poly=None, lo=None, hi=None, precision="double"))]
    fn new(
        value: Option<f64>,
        poly: Option<Vec<i64>>,
        lo: Option<f64>,
        hi: Option<f64>,
        precision: &str,
    ) -> PyResult<Self> {
        let prec = parse_precision(precision)?;
        let inner = match (value, poly) {
            (Some(v), None) => BetaSpec::from_value(v, prec).map_err(err)?,
            (None, Some(coeffs)) => {
                let (lo, hi) = match (lo, hi) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(PyValueError::new_err(
                            "polynomial bases need lo and hi for the isolating interval",
                        ))
                    }
                };
                BetaSpec::from_poly(&coeffs, lo, hi, prec).map_err(err)?
            }
            _ => {
                return Err(PyValueError::new_err(
                    "give exactly one of value= or poly=",
                ))
            }
        };
        Ok(PyBeta { inner })
    }

    #[getter]
    fn value(&self) -> f64 {
        self.inner.value()
    }

    fn digits_of_one(&self, n: usize) -> PyResult<Vec<u32>> {
        self.inner.digits_of_one(n).map_err(err)
    }

    fn quasi_digits_of_one(&self, n: usize) -> PyResult<Vec<u32>> {
        self.inner.quasi_digits_of_one(n).map_err(err)
    }

    fn orbit_of_one(&self, n: usize) -> PyResult<Vec<f64>> {
        self.inner.orbit_of_one_f64(n).map_err(err)
    }

    /// L(1) when the expansion of 1 terminates, detected exactly.
    fn simple_index(&self) -> PyResult<Option<usize>> {
        self.inner.simple_index_of_one(256).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Beta({})", self.inner.value())
    }
}

/// Greedy digits of a point.
#[pyfunction]
fn greedy_digits(beta: &PyBeta, x: f64, n: usize) -> PyResult<Vec<u32>> {
    Ok(betamap::expansion::greedy_digits(&beta.inner, &Point::Float(x), n)
        .map_err(err)?
        .greedy)
}

/// Isolated eigenvalues as a list of dicts.
#[pyfunction]
#[pyo3(signature = (beta, ceiling=0.95, tol=1e-10))]
fn spectrum<'py>(py: Python<'py>, beta: &PyBeta, ceiling: f64, tol: f64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rep = betamap::spectra::locate_eigenvalues(
        &beta.inner,
        betamap::spectra::LocateOptions { tol, ceiling },
    )
    .map_err(err)?;
    let mut out = Vec::new();
    for e in &rep.eigenvalues {
        let d = PyDict::new(py);
        d.set_item("lambda", (e.lambda_re, e.lambda_im))?;
        d.set_item("multiplicity", e.multiplicity)?;
        d.set_item("residual", e.residual)?;
        d.set_item("leading", e.kind == betamap::spectra::EigenvalueKind::Leading)?;
        out.push(d);
    }
    Ok(out)
}

/// F_lambda(x) and its certified tail bound: ((re, im), tail).
#[pyfunction]
#[pyo3(signature = (beta, lam, x, tol=1e-10))]
fn eval_f(beta: &PyBeta, lam: (f64, f64), x: f64, tol: f64) -> PyResult<((f64, f64), f64)> {
    let f = betamap::functional::eval_f(&beta.inner, lam_of(lam), &Point::Float(x), tol)
        .map_err(err)?;
    Ok(((f.value.re, f.value.im), f.tail_bound))
}

/// |1 - phi_hat(1/lambda)|: zero exactly at isolated eigenvalues.
#[pyfunction]
#[pyo3(signature = (beta, lam, tol=1e-10))]
fn continuity_residual(beta: &PyBeta, lam: (f64, f64), tol: f64) -> PyResult<f64> {
    betamap::functional::continuity_residual(&beta.inner, lam_of(lam), tol).map_err(err)
}

/// Invariant density as (breakpoint, coefficient) pairs.
#[pyfunction]
#[pyo3(signature = (beta, tol=1e-10))]
fn parry_density(beta: &PyBeta, tol: f64) -> PyResult<Vec<(f64, f64)>> {
    let h = betamap::transfer::parry_density(&beta.inner, 256, tol).map_err(err)?;
    Ok(h.terms()
        .iter()
        .map(|(b, c)| (b.to_f64(), c.re))
        .collect())
}

/// Fitted BV decay rate of an observable: (alpha, r_squared).
/// `construct=True` builds the null-space observable from the sub-leading
/// eigenvalues; otherwise a generic centered step function is used.
#[pyfunction]
#[pyo3(signature = (beta, construct=false, nmax=40))]
fn decay_rate(beta: &PyBeta, construct: bool, nmax: usize) -> PyResult<(f64, f64)> {
    let fit = if construct {
        let rep = betamap::spectra::locate_eigenvalues(
            &beta.inner,
            betamap::spectra::LocateOptions::default(),
        )
        .map_err(err)?;
        let sub = betamap::spectra::subleading_of(&rep)
            .map(|(_, v)| v)
            .unwrap_or_default();
        let obs =
            betamap::transfer::good_decay_construct(&beta.inner, &sub, None, 1e-18).map_err(err)?;
        betamap::transfer::decay_fit_dd(&beta.inner, &obs.step_dd, nmax, None).map_err(err)?
    } else {
        let f: betamap::transfer::StepFunction = betamap::transfer::StepFn::from_terms(vec![
            (
                betamap::transfer::breakpoint_at(&beta.inner, 0.41),
                Complex64::new(1.0, 0.0),
            ),
            (
                betamap::transfer::breakpoint_at(&beta.inner, 1.0),
                Complex64::new(-0.41, 0.0),
            ),
        ]);
        betamap::transfer::decay_fit(&beta.inner, &f, nmax, None).map_err(err)?
    };
    Ok((fit.fitted_alpha, fit.r_squared))
}

/// Difference-quotient probe along left approximant bases:
/// list of (beta_N, gap, quotient) plus the fitted exponent.
#[pyfunction]
#[pyo3(signature = (beta, lam, count=6))]
fn nondiff_probe(
    beta: &PyBeta,
    lam: (f64, f64),
    count: usize,
) -> PyResult<(Vec<(f64, f64, f64)>, Option<f64>)> {
    let probe =
        betamap::continuity::nondiff_probe(&beta.inner, lam_of(lam), count).map_err(err)?;
    Ok((
        probe
            .steps
            .iter()
            .map(|s| (s.beta_n, s.gap, s.quotient))
            .collect(),
        probe.fitted_exponent,
    ))
}

/// Holder constants of a branch: dict with gamma1, gamma2, alpha0, alpha1, alpha2.
#[pyfunction]
#[pyo3(signature = (beta, lam, multiplicity=1, horizon=64))]
fn holder_constants<'py>(
    py: Python<'py>,
    beta: &PyBeta,
    lam: (f64, f64),
    multiplicity: u32,
    horizon: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let est = betamap::continuity::holder_constants(&beta.inner, lam_of(lam), multiplicity, horizon)
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("gamma1", est.gamma1)?;
    d.set_item("gamma2", est.gamma2)?;
    d.set_item("gamma_exact", est.gamma_exact)?;
    d.set_item("alpha0", est.alpha0)?;
    d.set_item("alpha1", est.alpha1)?;
    d.set_item("alpha2", est.alpha2)?;
    Ok(d)
}

/// Verify one quartic family member; returns a dict of clause results.
#[pyfunction]
fn verify_family<'py>(py: Python<'py>, family: &str, n: u32) -> PyResult<Bound<'py, PyDict>> {
    let fam: betamap::quartic::Family = family.parse().map_err(err)?;
    let member = betamap::quartic::QuarticFamily::new(fam, n).map_err(err)?;
    let rep = betamap::quartic::verify_family(&member, 1e-9).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("beta", rep.beta)?;
    d.set_item("digits_ok", rep.digits_ok)?;
    d.set_item("eigenvalues_ok", rep.eigenvalues_ok)?;
    d.set_item("eigenvalue_error", rep.eigenvalue_error)?;
    d.set_item("factorization_ok", rep.factorization_ok)?;
    d.set_item("simplicity_ok", rep.simplicity_ok)?;
    d.set_item("all_ok", rep.all_ok())?;
    Ok(d)
}

#[pymodule]
fn betamap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBeta>()?;
    m.add_function(wrap_pyfunction!(greedy_digits, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(eval_f, m)?)?;
    m.add_function(wrap_pyfunction!(continuity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(parry_density, m)?)?;
    m.add_function(wrap_pyfunction!(decay_rate, m)?)?;
    m.add_function(wrap_pyfunction!(nondiff_probe, m)?)?;
    m.add_function(wrap_pyfunction!(holder_constants, m)?)?;
    m.add_function(wrap_pyfunction!(verify_family, m)?)?;
    Ok(())
}
