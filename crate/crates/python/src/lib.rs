//! Python bindings for `circlaw-core`.
//!
//! Matrices are exposed as `RegularDigraph` objects. Structured results come
//! back as plain dicts built from the core crate's serde records.

use circlaw_core::anticonc::{self, ResamplerSpec};
use circlaw_core::digraph::{self, SampleMethod, SamplerOptions};
use circlaw_core::hermitization::{self, ReferenceLaw, ShiftSpec, DEFAULT_LOG_FLOOR};
use circlaw_core::linalg::{self, ComplexDenseMatrix, SpectralSummary};
use circlaw_core::normals::{self, PlaneCell};
use circlaw_core::rng::{self, rng_from_seed};
use circlaw_core::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

fn value_err(e: circlaw_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Round-trips a serde record through `json.loads` to get a plain dict.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn square_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexDenseMatrix> {
    let m = ComplexDenseMatrix::from_rows(&rows).map_err(value_err)?;
    if !m.is_square() {
        return Err(PyValueError::new_err("expected a square matrix"));
    }
    Ok(m)
}

/// An `n x n` 0/1 matrix with every row and column sum equal to `d`.
#[pyclass(name = "RegularDigraph", module = "circlaw", frozen, eq, skip_from_py_object)]
#[derive(Clone)]
pub struct PyDigraph {
    inner: digraph::RegularDigraph,
    method: Option<SampleMethod>,
}

/// Equality is on the matrix alone, not on how it was obtained.
impl PartialEq for PyDigraph {
    fn eq(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

impl PyDigraph {
    fn wrap(inner: digraph::RegularDigraph) -> Self {
        Self { inner, method: None }
    }

    fn shifted(&self, z: Complex64, normalized: bool) -> PyResult<ComplexDenseMatrix> {
        let spec = if normalized {
            ShiftSpec::normalized(z, self.inner.d())
        } else {
            ShiftSpec::new(z, 1.0)
        };
        Ok(hermitization::build_shifted(&self.inner, &spec.map_err(value_err)?))
    }
}

#[pymethods]
impl PyDigraph {
    /// Builds a matrix from its row supports (sorted 0-based column indices).
    #[new]
    fn new(supports: Vec<Vec<usize>>) -> PyResult<Self> {
        let n = supports.len();
        let d = supports.first().map_or(0, Vec::len);
        digraph::RegularDigraph::from_supports(n, d, supports)
            .map(Self::wrap)
            .map_err(value_err)
    }

    /// Uniform draw; exact by rejection when feasible, otherwise from the
    /// switch chain. `seed` is used as given, so `derive_seed(master, t)`
    /// reproduces trial `t` of a CLI run.
    #[staticmethod]
    #[pyo3(signature = (n, d, seed, max_attempts = 200, burn_in = None))]
    fn sample(
        py: Python<'_>,
        n: usize,
        d: usize,
        seed: u64,
        max_attempts: usize,
        burn_in: Option<usize>,
    ) -> PyResult<Self> {
        let opts = SamplerOptions {
            max_attempts,
            burn_in_accepted: burn_in,
        };
        let (inner, method) = py
            .detach(|| digraph::sample_uniform(n, d, &mut rng_from_seed(seed), &opts))
            .map_err(value_err)?;
        Ok(Self {
            inner,
            method: Some(method),
        })
    }

    #[staticmethod]
    fn circulant(n: usize, d: usize) -> PyResult<Self> {
        digraph::RegularDigraph::circulant(n, d)
            .map(Self::wrap)
            .map_err(value_err)
    }

    #[staticmethod]
    fn all_ones(n: usize) -> PyResult<Self> {
        digraph::RegularDigraph::all_ones(n).map(Self::wrap).map_err(value_err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        digraph::RegularDigraph::from_text(text)
            .map(Self::wrap)
            .map_err(value_err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    /// `"exact"`, `"switch-chain"`, or `None` when not sampled.
    #[getter]
    fn method(&self) -> Option<&'static str> {
        self.method.map(|m| if m.is_exact() { "exact" } else { "switch-chain" })
    }

    fn supports(&self) -> Vec<Vec<usize>> {
        self.inner.supports().to_vec()
    }

    fn to_dense(&self) -> Vec<Vec<u8>> {
        self.inner.to_dense()
    }

    fn complement(&self) -> Self {
        Self::wrap(self.inner.complement())
    }

    /// Eigenvalues of `d^{-1/2} A - z` (or `A - z` when not normalized).
    #[pyo3(signature = (z = Complex64::new(0.0, 0.0), normalized = true))]
    fn eigenvalues(&self, py: Python<'_>, z: Complex64, normalized: bool) -> PyResult<Vec<Complex64>> {
        let m = self.shifted(z, normalized)?;
        py.detach(|| linalg::eigenvalues(&m)).map_err(value_err)
    }

    /// Singular values of the same matrix, nonincreasing.
    #[pyo3(signature = (z = Complex64::new(0.0, 0.0), normalized = true))]
    fn singular_values(&self, py: Python<'_>, z: Complex64, normalized: bool) -> PyResult<Vec<f64>> {
        let m = self.shifted(z, normalized)?;
        py.detach(|| linalg::singular_values(&m)).map_err(value_err)
    }

    /// Spectral summary as CSV text (`index,re_lambda,im_lambda,s,backward_error`).
    #[pyo3(signature = (z = Complex64::new(0.0, 0.0), normalized = true))]
    fn spectral_summary_csv(&self, py: Python<'_>, z: Complex64, normalized: bool) -> PyResult<String> {
        let m = self.shifted(z, normalized)?;
        py.detach(|| SpectralSummary::compute(&m))
            .map(|s| s.to_csv())
            .map_err(value_err)
    }

    /// `(U, floored)`: log potential of the ESD of `d^{-1/2} A` at `z`.
    #[pyo3(signature = (z, floor = DEFAULT_LOG_FLOOR))]
    fn log_potential(&self, py: Python<'_>, z: Complex64, floor: f64) -> PyResult<(f64, usize)> {
        py.detach(|| hermitization::log_potential_at(&self.inner, z, floor))
            .map(|p| (p.value, p.floored))
            .map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("RegularDigraph(n={}, d={})", self.inner.n(), self.inner.d())
    }
}

/// All matrices for `(n, d)` in row-major bit order.
#[pyfunction]
fn enumerate_all(n: usize, d: usize) -> PyResult<Vec<PyDigraph>> {
    digraph::enumerate_all(n, d)
        .map(|v| v.into_iter().map(PyDigraph::wrap).collect())
        .map_err(value_err)
}

#[pyfunction]
fn derive_seed(master: u64, index: u64) -> u64 {
    rng::derive_seed(master, index)
}

#[pyfunction]
fn eigenvalues(rows: Vec<Vec<Complex64>>) -> PyResult<Vec<Complex64>> {
    linalg::eigenvalues(&square_matrix(rows)?).map_err(value_err)
}

#[pyfunction]
fn singular_values(rows: Vec<Vec<Complex64>>) -> PyResult<Vec<f64>> {
    linalg::singular_values(&ComplexDenseMatrix::from_rows(&rows).map_err(value_err)?).map_err(value_err)
}

/// `(sum_j s_j^-2, sum_i dist_i^-2)` for a square matrix of full rank.
#[pyfunction]
fn negative_second_moment(rows: Vec<Vec<Complex64>>) -> PyResult<(f64, f64)> {
    anticonc::negative_second_moment(&square_matrix(rows)?)
        .map(|s| (s.singular_side, s.distance_side))
        .map_err(value_err)
}

#[pyfunction]
fn log_potential_circular(z: Complex64) -> f64 {
    hermitization::log_potential_circular(z)
}

/// Kolmogorov distance between the radial CDF of `eigs` and the circular
/// law, or the Kesten-McKay law of degree `km_degree` on the unscaled
/// spectrum.
#[pyfunction]
#[pyo3(signature = (eigs, km_degree = None))]
fn radial_cdf_distance(eigs: Vec<Complex64>, km_degree: Option<usize>) -> f64 {
    let law = km_degree.map_or(ReferenceLaw::Circular, |d| ReferenceLaw::KestenMcKay { d });
    hermitization::radial_cdf_distance(&hermitization::esd(&eigs), &law)
}

/// Standard complex Gaussian vector with `E|g_i|^2 = 1`.
#[pyfunction]
fn gaussian_vector(n: usize, seed: u64) -> Vec<Complex64> {
    normals::sample_gaussian(n, &mut rng_from_seed(seed)).coords
}

/// `(layer, (jx, jy))` of the cell containing `w`, or `None` if uncovered.
#[pyfunction]
fn plane_partition_cell(w: Complex64, rho: f64) -> PyResult<Option<(u8, (i64, i64))>> {
    Ok(match normals::plane_partition_cell(w, rho).map_err(value_err)? {
        PlaneCell::Covered { layer, j } => Some((layer, j)),
        PlaneCell::Uncovered => None,
    })
}

/// Exact realising counts for each support of row `u` after resampling the
/// rows in `I0 + u`, as a dict.
#[pyfunction]
fn uniform_support_check<'py>(
    py: Python<'py>,
    m: &PyDigraph,
    j: Vec<usize>,
    u: usize,
    i0: Vec<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = ResamplerSpec::new(m.inner.clone(), j, u, i0).map_err(value_err)?;
    let check = py
        .detach(|| anticonc::uniform_support_check(&spec))
        .map_err(value_err)?;
    to_py(py, &check)
}

#[pyfunction]
fn coupling_experiment<'py>(
    py: Python<'py>,
    s_size: usize,
    d: usize,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = anticonc::coupling_experiment(s_size, d, trials, seed).map_err(value_err)?;
    to_py(py, &rep)
}

/// Checks `#{i : dist_i < rho} <= L delta m  =>  s_k >= rho sqrt(L delta)`.
#[pyfunction]
fn sv_from_distances<'py>(
    py: Python<'py>,
    rho: f64,
    delta: f64,
    l: f64,
    distances: Vec<f64>,
    svals: Vec<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let v = anticonc::sv_from_distances(rho, delta, l, distances.len(), &distances, &svals).map_err(value_err)?;
    to_py(py, &v)
}

#[pyfunction]
fn leave_one_out_distances(rows: Vec<Vec<Complex64>>) -> PyResult<Vec<f64>> {
    linalg::leave_one_out_distances(&square_matrix(rows)?).map_err(value_err)
}

#[pymodule]
fn circlaw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDigraph>()?;
    m.add_function(wrap_pyfunction!(enumerate_all, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(negative_second_moment, m)?)?;
    m.add_function(wrap_pyfunction!(leave_one_out_distances, m)?)?;
    m.add_function(wrap_pyfunction!(log_potential_circular, m)?)?;
    m.add_function(wrap_pyfunction!(radial_cdf_distance, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_vector, m)?)?;
    m.add_function(wrap_pyfunction!(plane_partition_cell, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_support_check, m)?)?;
    m.add_function(wrap_pyfunction!(coupling_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(sv_from_distances, m)?)?;
    m.add("LOG_FLOOR", DEFAULT_LOG_FLOOR)?;
    Ok(())
}
