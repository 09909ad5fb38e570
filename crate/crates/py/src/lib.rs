//! Python bindings: potentials, equilibrium measures, samplers and the main
//! diagnostics. Configurations cross the boundary as lists of floats.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use loggas_core::diagnostics::{
    empirical_stieltjes, gap_statistic, loop_residual, rigidity_report, universality_compare, GapEnsemble, GapKernel,
    GapScaling,
};
use loggas_core::sampler::{init_from_classical_locations, run_chain, sample_gaussian_beta_set, LocalConstraint};
use loggas_core::{samples_io, ChainConfig, PotentialKind, SolveOptions, SymTridiagonal, TargetSpec};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(loggas, NumericError, pyo3::exceptions::PyException);

fn numeric(e: loggas_core::Error) -> PyErr {
    match e {
        loggas_core::Error::InvalidArgument(_)
        | loggas_core::Error::InvalidPotential(_)
        | loggas_core::Error::NotConvex { .. }
        | loggas_core::Error::ShapeMismatch { .. }
        | loggas_core::Error::WindowOutOfRange { .. } => PyValueError::new_err(e.to_string()),
        other => NumericError::new_err(other.to_string()),
    }
}

fn scaling(name: &str) -> PyResult<GapScaling> {
    match name {
        "literal" => Ok(GapScaling::Literal),
        "unfolded" => Ok(GapScaling::Unfolded),
        other => Err(PyValueError::new_err(format!("scaling must be 'literal' or 'unfolded', got {other:?}"))),
    }
}

/// Convex polynomial potential: `quadratic` (a x^2), `quartic` (a x^2 + b x^4)
/// or `custom` (monomial coefficients, lowest first).
#[pyclass(name = "Potential", frozen)]
struct PyPotential {
    inner: loggas_core::Potential,
}

#[pymethods]
impl PyPotential {
    #[new]
    #[pyo3(signature = (kind = "quadratic", a = 1.0, b = 0.0, coeffs = None))]
    fn new(kind: &str, a: f64, b: f64, coeffs: Option<Vec<f64>>) -> PyResult<Self> {
        let k = match kind {
            "quadratic" => PotentialKind::Quadratic { a },
            "quartic" => PotentialKind::Quartic { a, b },
            "custom" => PotentialKind::Custom {
                coeffs: coeffs.ok_or_else(|| PyValueError::new_err("custom potentials need coeffs"))?,
            },
            other => return Err(PyValueError::new_err(format!("unknown potential kind {other:?}"))),
        };
        Ok(PyPotential {
            inner: loggas_core::Potential::new(k).map_err(numeric)?,
        })
    }

    fn value(&self, x: f64) -> f64 {
        self.inner.value(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.inner.first_derivative(x)
    }

    fn second_derivative(&self, x: f64) -> f64 {
        self.inner.second_derivative(x)
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Potential({:?})", self.inner.kind())
    }
}

#[pyclass(name = "EquilibriumMeasure", frozen)]
struct PyEquilibrium {
    inner: loggas_core::EquilibriumMeasure,
}

#[pymethods]
impl PyEquilibrium {
    #[new]
    #[pyo3(signature = (potential, quadrature = 256))]
    fn new(potential: &PyPotential, quadrature: usize) -> PyResult<Self> {
        let inner = loggas_core::EquilibriumMeasure::solve_with(
            &potential.inner,
            SolveOptions {
                quadrature_order: quadrature,
                ..SolveOptions::default()
            },
        )
        .map_err(numeric)?;
        Ok(PyEquilibrium { inner })
    }

    #[getter]
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    fn density(&self, t: f64) -> f64 {
        self.inner.density(t)
    }

    fn cdf(&self, t: f64) -> f64 {
        self.inner.cdf(t)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PyValueError::new_err(format!("p must lie in [0, 1], got {p}")));
        }
        Ok(self.inner.quantile(p))
    }

    fn classical_locations(&self, n: usize) -> Vec<f64> {
        self.inner.classical_locations(n).gamma
    }

    fn stieltjes(&self, z: Complex64) -> Complex64 {
        self.inner.stieltjes_m(z)
    }
}

#[pyclass(name = "SampleSet", frozen)]
struct PySampleSet {
    inner: loggas_core::SampleSet,
}

#[pymethods]
impl PySampleSet {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.meta.beta
    }

    #[getter]
    fn chain_ids(&self) -> Vec<usize> {
        self.inner.chain_ids.clone()
    }

    #[getter]
    fn acceptance(&self) -> Vec<f64> {
        self.inner.meta.acceptance.clone()
    }

    /// All configurations as a list of lists.
    fn configs(&self) -> Vec<Vec<f64>> {
        self.inner.configs.iter().map(|c| c.as_slice().to_vec()).collect()
    }

    fn __getitem__(&self, i: isize) -> PyResult<Vec<f64>> {
        let len = self.inner.len() as isize;
        let j = if i < 0 { i + len } else { i };
        if j < 0 || j >= len {
            return Err(pyo3::exceptions::PyIndexError::new_err("sample index out of range"));
        }
        Ok(self.inner.configs[j as usize].as_slice().to_vec())
    }

    /// Writes the binary sample format.
    fn save(&self, path: &str) -> PyResult<()> {
        let f = File::create(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        samples_io::write_binary(&mut BufWriter::new(f), &self.inner, [0; 32])
            .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))
    }

    #[staticmethod]
    fn load(path: &str, beta: f64) -> PyResult<Self> {
        let f = File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        let (_, inner) = samples_io::read_binary(&mut BufReader::new(f), beta)
            .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Ok(PySampleSet { inner })
    }
}

/// Exact beta-Hermite draws from the tridiagonal model (potential `x^2`).
#[pyfunction]
#[pyo3(signature = (n, beta, draws, streams = 20, seed = 0))]
fn sample_gaussian(py: Python<'_>, n: usize, beta: f64, draws: usize, streams: usize, seed: u64) -> PyResult<PySampleSet> {
    let inner = py
        .detach(|| sample_gaussian_beta_set(n, beta, draws, streams, seed))
        .map_err(numeric)?;
    Ok(PySampleSet { inner })
}

/// MALA chains on the beta-ensemble, optionally with the local gap
/// constraint `(k, m, eps)`.
#[pyfunction]
#[pyo3(signature = (potential, beta, n, n_steps, burn_in, thin = 1, n_chains = 1, seed = 0, step_size = 0.0, constraint = None))]
#[allow(clippy::too_many_arguments)]
fn run_mala(
    py: Python<'_>,
    potential: &PyPotential,
    beta: f64,
    n: usize,
    n_steps: usize,
    burn_in: usize,
    thin: usize,
    n_chains: usize,
    seed: u64,
    step_size: f64,
    constraint: Option<(usize, usize, f64)>,
) -> PyResult<PySampleSet> {
    let p = potential.inner.clone();
    let eq = loggas_core::EquilibriumMeasure::solve(&p).map_err(numeric)?;
    let mut target = TargetSpec::new(p, beta, n);
    if let Some((k, m, eps)) = constraint {
        target = target.with_constraint(LocalConstraint { k, m, eps });
    }
    target.validate().map_err(numeric)?;
    let cfg = ChainConfig {
        step_size,
        n_steps,
        burn_in,
        thin,
        n_chains,
        base_seed: seed,
        ..ChainConfig::default()
    };
    let init = init_from_classical_locations(&eq, &target);
    let inner = py.detach(|| run_chain(&target, &init, &cfg)).map_err(numeric)?;
    Ok(PySampleSet { inner })
}

/// Eigenvalues of the symmetric tridiagonal matrix, ascending.
#[pyfunction]
fn tridiagonal_eigenvalues(diag: Vec<f64>, offdiag: Vec<f64>) -> PyResult<Vec<f64>> {
    SymTridiagonal::new(diag, offdiag)
        .and_then(|t| t.eigenvalues())
        .map_err(numeric)
}

/// Per-index deviation quantiles; returns a dict.
#[pyfunction]
#[pyo3(signature = (samples, equilibrium, alpha = 0.1))]
fn rigidity<'py>(
    py: Python<'py>,
    samples: &PySampleSet,
    equilibrium: &PyEquilibrium,
    alpha: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let gamma = equilibrium.inner.classical_locations(samples.inner.n());
    let r = rigidity_report(&samples.inner, &gamma, alpha).map_err(numeric)?;
    let d = PyDict::new(py);
    d.set_item("median", r.median)?;
    d.set_item("q99", r.q99)?;
    d.set_item("bulk", r.bulk)?;
    d.set_item("bulk_median", r.bulk_median)?;
    Ok(d)
}

/// Windowed gap statistic `(value, stderr)` around `energy`.
#[pyfunction]
#[pyo3(signature = (samples, equilibrium, energy, k, width = 2.0, scaling = "literal"))]
fn gap_stat(
    samples: &PySampleSet,
    equilibrium: &PyEquilibrium,
    energy: f64,
    k: usize,
    width: f64,
    scaling: &str,
) -> PyResult<(f64, f64)> {
    let ens = GapEnsemble {
        samples: &samples.inner,
        equilibrium: &equilibrium.inner,
        energy,
    };
    let l = ens.window_start(k).map_err(numeric)?;
    let kernel = GapKernel::bump(width);
    kernel.validate().map_err(numeric)?;
    let g = gap_statistic(&samples.inner, l, k, ens.density(), &kernel, self::scaling(scaling)?).map_err(numeric)?;
    Ok((g.value, g.stderr))
}

/// Gap statistic of `target` minus `reference`: `(delta, combined_stderr)`.
#[pyfunction]
#[pyo3(signature = (target, target_eq, reference, reference_eq, k, energy = 0.0, width = 2.0, scaling = "literal"))]
#[allow(clippy::too_many_arguments)]
fn compare(
    target: &PySampleSet,
    target_eq: &PyEquilibrium,
    reference: &PySampleSet,
    reference_eq: &PyEquilibrium,
    k: usize,
    energy: f64,
    width: f64,
    scaling: &str,
) -> PyResult<(f64, f64)> {
    let t = GapEnsemble {
        samples: &target.inner,
        equilibrium: &target_eq.inner,
        energy,
    };
    let r = GapEnsemble {
        samples: &reference.inner,
        equilibrium: &reference_eq.inner,
        energy,
    };
    let c = universality_compare(&t, &r, k, &GapKernel::bump(width), self::scaling(scaling)?).map_err(numeric)?;
    Ok((c.delta, c.combined_stderr))
}

/// Empirical Stieltjes transform at `z` with the loop-equation residual.
#[pyfunction]
fn stieltjes<'py>(
    py: Python<'py>,
    samples: &PySampleSet,
    potential: &PyPotential,
    equilibrium: &PyEquilibrium,
    z: Complex64,
) -> PyResult<Bound<'py, PyDict>> {
    let est = empirical_stieltjes(&samples.inner, &potential.inner, &equilibrium.inner, z).map_err(numeric)?;
    let d = PyDict::new(py);
    d.set_item("m_hat", est.m_hat)?;
    d.set_item("m", equilibrium.inner.stieltjes_m(z))?;
    d.set_item("stderr", est.stderr)?;
    d.set_item("k_hat", est.k_hat)?;
    d.set_item("residual", loop_residual(&est, &equilibrium.inner))?;
    Ok(d)
}

#[pymodule]
fn loggas(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPotential>()?;
    m.add_class::<PyEquilibrium>()?;
    m.add_class::<PySampleSet>()?;
    m.add_function(wrap_pyfunction!(sample_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(run_mala, m)?)?;
    m.add_function(wrap_pyfunction!(tridiagonal_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(rigidity, m)?)?;
    m.add_function(wrap_pyfunction!(gap_stat, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(stieltjes, m)?)?;
    m.add("NumericError", m.py().get_type::<NumericError>())?;
    Ok(())
}
