//! Python bindings for the `wkbtm` solvers.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wkbtm::exact;
use wkbtm::experiments::{self, Averaging, EnergyGrid, ErrorConfig, PotentialSpec};
use wkbtm::polar::DEFAULT_STEPS;
use wkbtm::potential::{make_tabulated, DerivOrder};
use wkbtm::{Domain, Error, Method};

const DEFAULT_SEGMENTS: usize = 100_000;

fn py_err(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse_method(tag: &str) -> PyResult<Method> {
    tag.parse().map_err(py_err)
}

/// A potential V(x) in joules on a finite domain in metres.
#[pyclass(frozen, module = "wkbtm_py")]
struct Potential {
    inner: Box<dyn wkbtm::Potential>,
    // None for tables built from in-memory samples
    spec: Option<PotentialSpec>,
    domain: Domain,
}

impl Potential {
    fn from_spec(spec: PotentialSpec, domain: Domain) -> PyResult<Self> {
        let inner = spec.build(domain).map_err(py_err)?;
        let domain = inner.domain();
        Ok(Potential {
            inner,
            spec: Some(spec),
            domain,
        })
    }
}

#[pymethods]
impl Potential {
    /// Inverted parabola `-alpha x^2`.
    #[staticmethod]
    #[pyo3(signature = (alpha = 1.0, xmin = -2e-9, xmax = 2e-9))]
    fn parabolic(alpha: f64, xmin: f64, xmax: f64) -> PyResult<Self> {
        Self::from_spec(
            PotentialSpec::Parabolic { alpha },
            Domain::new(xmin, xmax).map_err(py_err)?,
        )
    }

    /// `v0 (sech^2(x/width) - 1)`.
    #[staticmethod]
    #[pyo3(signature = (v0 = 1e-18, width = 1e-9, xmin = -2e-9, xmax = 2e-9))]
    fn sech2(v0: f64, width: f64, xmin: f64, xmax: f64) -> PyResult<Self> {
        Self::from_spec(
            PotentialSpec::Sech2 { v0, width },
            Domain::new(xmin, xmax).map_err(py_err)?,
        )
    }

    #[staticmethod]
    #[pyo3(signature = (level = 0.0, xmin = -2e-9, xmax = 2e-9))]
    fn constant(level: f64, xmin: f64, xmax: f64) -> PyResult<Self> {
        Self::from_spec(
            PotentialSpec::Constant { level },
            Domain::new(xmin, xmax).map_err(py_err)?,
        )
    }

    /// Spline through a two-column `x V` text file.
    #[staticmethod]
    fn table(path: PathBuf) -> PyResult<Self> {
        Self::from_spec(PotentialSpec::Table { path }, Domain::standard())
    }

    /// Spline through `(x, V)` pairs.
    #[staticmethod]
    fn from_samples(samples: Vec<(f64, f64)>) -> PyResult<Self> {
        let tab = make_tabulated(&samples).map_err(py_err)?;
        let domain = wkbtm::Potential::domain(&tab);
        Ok(Potential {
            inner: Box::new(tab),
            spec: None,
            domain,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        (self.domain.lo, self.domain.hi)
    }

    fn params<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.inner.params() {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __call__(&self, x: f64) -> f64 {
        self.inner.value(x)
    }

    /// `derivative(x, order)` for order 1, 2 or 3.
    fn derivative(&self, x: f64, order: u8) -> PyResult<f64> {
        let order = match order {
            1 => DerivOrder::First,
            2 => DerivOrder::Second,
            3 => DerivOrder::Third,
            _ => return Err(PyValueError::new_err("order must be 1, 2 or 3")),
        };
        Ok(self.inner.deriv(x, order))
    }

    fn __repr__(&self) -> String {
        let params: Vec<String> = self
            .inner
            .params()
            .iter()
            .map(|(k, v)| format!("{k}={v:e}"))
            .collect();
        format!(
            "Potential.{}({}) on [{:e}, {:e}]",
            self.inner.name(),
            params.join(", "),
            self.domain.lo,
            self.domain.hi
        )
    }
}

/// Transmission coefficient of `potential` at `energy` (J).
///
/// `method` is one of tm-pw, tm-wkb1, tm-wkb3, de-pw, de-wkb, wkb-formula, exact.
#[pyfunction]
#[pyo3(signature = (potential, method, energy, n_steps = DEFAULT_SEGMENTS, de_steps = DEFAULT_STEPS))]
fn compute_tc(
    py: Python<'_>,
    potential: &Potential,
    method: &str,
    energy: f64,
    n_steps: usize,
    de_steps: usize,
) -> PyResult<f64> {
    let method = parse_method(method)?;
    let pot = potential.inner.as_ref();
    py.detach(|| experiments::compute_tc(pot, method, energy, n_steps, de_steps))
        .map(|r| r.tc)
        .map_err(py_err)
}

/// TC at each energy; failed points come back as None.
#[pyfunction]
#[pyo3(signature = (potential, method, energies, n_steps = DEFAULT_SEGMENTS, de_steps = DEFAULT_STEPS))]
fn tc_sweep(
    py: Python<'_>,
    potential: &Potential,
    method: &str,
    energies: Vec<f64>,
    n_steps: usize,
    de_steps: usize,
) -> PyResult<Vec<Option<f64>>> {
    let method = parse_method(method)?;
    let pot = potential.inner.as_ref();
    Ok(py.detach(|| {
        energies
            .iter()
            .map(|&e| {
                experiments::compute_tc(pot, method, e, n_steps, de_steps)
                    .ok()
                    .map(|r| r.tc)
            })
            .collect()
    }))
}

/// `count` uniform energies from `emin` to `emax`, both included.
#[pyfunction]
#[pyo3(signature = (emin = -2e-19, emax = 2e-19, count = 101))]
fn energy_grid(emin: f64, emax: f64, count: usize) -> PyResult<Vec<f64>> {
    let grid = EnergyGrid {
        min: emin,
        max: emax,
        count,
    };
    grid.validate().map_err(py_err)?;
    Ok(grid.points())
}

#[pyfunction]
fn exact_tc(potential: &Potential, energy: f64) -> PyResult<f64> {
    exact::exact_tc_for(potential.inner.as_ref(), energy).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (energy, alpha = 1.0))]
fn exact_tc_parabolic(energy: f64, alpha: f64) -> f64 {
    exact::exact_tc_parabolic(energy, alpha)
}

#[pyfunction]
#[pyo3(signature = (energy, v0 = 1e-18, width = 1e-9))]
fn exact_tc_sech2(energy: f64, v0: f64, width: f64) -> PyResult<f64> {
    exact::exact_tc_sech2(energy, v0, width).map_err(py_err)
}

/// `exp(-theta) / (1 + exp(-theta)/4)^2`.
#[pyfunction]
fn wkb_formula(theta: f64) -> f64 {
    exact::wkb_formula(theta)
}

/// Relative errors against the exact reference.
///
/// Returns a dict with `averages`, `max`, `ratios` (keyed `"a/b"`) and
/// `rows` as `(energy, method, n_steps, tc, tc_exact, rel_error)` tuples.
#[pyfunction]
#[pyo3(signature = (
    potential,
    methods = None,
    n_steps = DEFAULT_SEGMENTS,
    de_steps = DEFAULT_STEPS,
    emin = -2e-19,
    emax = 2e-19,
    count = 101,
    average = "arithmetic",
))]
#[allow(clippy::too_many_arguments)]
fn error_analysis<'py>(
    py: Python<'py>,
    potential: &Potential,
    methods: Option<Vec<String>>,
    n_steps: usize,
    de_steps: usize,
    emin: f64,
    emax: f64,
    count: usize,
    average: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = potential
        .spec
        .clone()
        .ok_or_else(|| PyValueError::new_err("no exact reference for a sampled potential"))?;
    let methods = match methods {
        Some(list) => list
            .iter()
            .map(|m| parse_method(m))
            .collect::<PyResult<Vec<_>>>()?,
        None => Method::NUMERICAL.to_vec(),
    };
    let config = ErrorConfig {
        potential: spec,
        domain: potential.domain,
        methods,
        n_steps,
        de_steps,
        energies: EnergyGrid {
            min: emin,
            max: emax,
            count,
        },
        averaging: average.parse::<Averaging>().map_err(py_err)?,
    };
    let report = py
        .detach(|| experiments::run_error_analysis(&config))
        .map_err(py_err)?;

    let out = PyDict::new(py);
    let averages = PyDict::new(py);
    let maxima = PyDict::new(py);
    for s in &report.summaries {
        averages.set_item(s.method.tag(), s.average)?;
        maxima.set_item(s.method.tag(), s.max)?;
    }
    let ratios = PyDict::new(py);
    for r in &report.ratios {
        ratios.set_item(format!("{}/{}", r.numerator, r.denominator), r.value)?;
    }
    let rows: Vec<_> = report
        .rows
        .iter()
        .map(|r| (r.energy, r.method.tag(), r.n_steps, r.tc, r.tc_exact, r.rel_error))
        .collect();
    out.set_item("averaging", average)?;
    out.set_item("averages", averages)?;
    out.set_item("max", maxima)?;
    out.set_item("ratios", ratios)?;
    out.set_item("rows", rows)?;
    Ok(out)
}

#[pymodule]
fn wkbtm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Potential>()?;
    m.add_function(wrap_pyfunction!(compute_tc, m)?)?;
    m.add_function(wrap_pyfunction!(tc_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(energy_grid, m)?)?;
    m.add_function(wrap_pyfunction!(exact_tc, m)?)?;
    m.add_function(wrap_pyfunction!(exact_tc_parabolic, m)?)?;
    m.add_function(wrap_pyfunction!(exact_tc_sech2, m)?)?;
    m.add_function(wrap_pyfunction!(wkb_formula, m)?)?;
    m.add_function(wrap_pyfunction!(error_analysis, m)?)?;
    let methods: Vec<&str> = Method::ALL.iter().map(|m| m.tag()).collect();
    m.add("METHODS", methods)?;
    m.add("HBAR", wkbtm::constants::HBAR)?;
    m.add("ELECTRON_MASS", wkbtm::constants::ELECTRON_MASS)?;
    Ok(())
}
