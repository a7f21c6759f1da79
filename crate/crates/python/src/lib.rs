//! Python bindings. Reports are returned as plain dicts and lists; systems,
//! critical points and periodic orbits are classes.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use syzygy::critical;
use syzygy::orbits::{self, Direction};
use syzygy::region::{self, ComponentLabel};
use syzygy::tangent::{self, ParameterPath, BASE_CASE_EPSILON};
use syzygy::{ConfigPoint, Error, PhaseState, SystemDescriptor, SystemKind};

create_exception!(syzygy_py, VerificationError, PyException, "A claim failed numerically.");

fn py_err(e: Error) -> PyErr {
    if e.is_verification_failure() {
        VerificationError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for syzygy::Result<T> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn component(name: &str) -> PyResult<ComponentLabel> {
    name.parse().or_py()
}

fn direction(name: &str) -> PyResult<Direction> {
    name.parse().or_py()
}

/// `(t, q1, q2, v1, v2)`
type Node = (f64, f64, f64, f64, f64);

fn points(curve: &[ConfigPoint]) -> Vec<(f64, f64)> {
    curve.iter().map(|p| (p.q1, p.q2)).collect()
}

/// A dynamical system: the restricted problem, the rotating Kepler problem or
/// Hill's lunar problem.
#[pyclass(frozen, name = "System")]
struct PySystem(SystemDescriptor);

#[pymethods]
impl PySystem {
    #[staticmethod]
    fn pcr3bp(mu: f64) -> PyResult<Self> {
        Ok(Self(SystemDescriptor::pcr3bp(mu).or_py()?))
    }

    #[staticmethod]
    fn rotating_kepler() -> Self {
        Self(SystemDescriptor::rotating_kepler())
    }

    #[staticmethod]
    fn hill_lunar() -> Self {
        Self(SystemDescriptor::hill_lunar())
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.0.kind {
            SystemKind::Pcr3bp => "pcr3bp",
            SystemKind::RotatingKepler => "rotating_kepler",
            SystemKind::HillLunar => "hill_lunar",
        }
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    fn potential(&self, q1: f64, q2: f64) -> PyResult<f64> {
        self.0.effective_potential(ConfigPoint::new(q1, q2)).or_py()
    }

    fn gradient(&self, q1: f64, q2: f64) -> PyResult<(f64, f64)> {
        let g = self.0.grad_v(ConfigPoint::new(q1, q2)).or_py()?;
        Ok((g[0], g[1]))
    }

    fn hessian(&self, q1: f64, q2: f64) -> PyResult<((f64, f64), (f64, f64))> {
        let h = self.0.hess_v(ConfigPoint::new(q1, q2)).or_py()?;
        Ok(((h.a11, h.a12), (h.a12, h.a22)))
    }

    fn hamiltonian(&self, q1: f64, q2: f64, v1: f64, v2: f64) -> PyResult<f64> {
        self.0.hamiltonian(&PhaseState::new(q1, q2, v1, v2)).or_py()
    }

    /// Time derivative `(q1', q2', v1', v2')` of a state.
    fn eom(&self, q1: f64, q2: f64, v1: f64, v2: f64) -> PyResult<(f64, f64, f64, f64)> {
        let d = self.0.eom(&PhaseState::new(q1, q2, v1, v2)).or_py()?;
        Ok((d.q.q1, d.q.q2, d.v[0], d.v[1]))
    }

    fn classify<'py>(&self, py: Python<'py>, c: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &region::system_topology(&self.0, c).or_py()?)
    }

    /// Component of the Hill's region containing `(q1, q2)`, or `None` when
    /// the point is outside the region.
    fn component_at(&self, c: f64, q1: f64, q2: f64) -> PyResult<Option<String>> {
        let m = region::contains(&self.0, c, ConfigPoint::new(q1, q2)).or_py()?;
        Ok(m.component.map(|l| format!("{l:?}").to_lowercase()))
    }

    #[pyo3(signature = (c, component = "bounded"))]
    fn trace_oval(&self, c: f64, component: &str) -> PyResult<Vec<(f64, f64)>> {
        let oval = region::trace_oval(&self.0, c, self::component(component)?).or_py()?;
        Ok(points(oval.vertices()))
    }

    /// Vertical tangents of the bounded oval as `(q1, q2, on_axis)`.
    fn vertical_tangents(&self, c: f64) -> PyResult<Vec<(f64, f64, bool)>> {
        let oval = region::trace_oval(&self.0, c, ComponentLabel::Bounded).or_py()?;
        let report = tangent::vertical_tangents(&oval).or_py()?;
        Ok(report.points.iter().map(|p| (p.location.q1, p.location.q2, p.on_axis)).collect())
    }

    /// Trajectory nodes `(t, q1, q2, v1, v2)` and the largest energy error.
    #[pyo3(signature = (state, t_end, tol = 1e-10))]
    fn integrate(&self, state: (f64, f64, f64, f64), t_end: f64, tol: f64) -> PyResult<(Vec<Node>, f64)> {
        let start = PhaseState::new(state.0, state.1, state.2, state.3);
        let traj = orbits::integrate(&self.0, start, t_end, tol).or_py()?;
        let nodes = traj.nodes.iter().map(|(t, s)| (*t, s.q.q1, s.q.q2, s.v[0], s.v[1])).collect();
        Ok((nodes, traj.energy_drift))
    }

    #[pyo3(signature = (c, q1, direction = "retrograde"))]
    fn find_symmetric_orbit(&self, c: f64, q1: f64, direction: &str) -> PyResult<PyPeriodicOrbit> {
        let orbit = orbits::find_symmetric_orbit(&self.0, c, q1, self::direction(direction)?).or_py()?;
        Ok(PyPeriodicOrbit(orbit))
    }

    fn __repr__(&self) -> String {
        format!("System(kind={:?}, mu={})", self.kind(), self.0.mu)
    }
}

#[pyclass(frozen, name = "CriticalPoint")]
struct PyCriticalPoint(critical::CriticalPoint);

#[pymethods]
impl PyCriticalPoint {
    #[getter]
    fn label(&self) -> String {
        format!("{:?}", self.0.label)
    }

    #[getter]
    fn q1(&self) -> f64 {
        self.0.location.q1
    }

    #[getter]
    fn q2(&self) -> f64 {
        self.0.location.q2
    }

    #[getter]
    fn value(&self) -> f64 {
        self.0.value
    }

    #[getter]
    fn morse_index(&self) -> u8 {
        self.0.morse_index
    }

    fn __repr__(&self) -> String {
        format!(
            "CriticalPoint({}, q=({}, {}), value={}, index={})",
            self.label(),
            self.q1(),
            self.q2(),
            self.0.value,
            self.0.morse_index
        )
    }
}

#[pyclass(frozen, name = "PeriodicOrbit")]
struct PyPeriodicOrbit(orbits::PeriodicOrbit);

#[pymethods]
impl PyPeriodicOrbit {
    #[getter]
    fn initial(&self) -> (f64, f64, f64, f64) {
        let s = self.0.initial;
        (s.q.q1, s.q.q2, s.v[0], s.v[1])
    }

    #[getter]
    fn period(&self) -> f64 {
        self.0.period
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.0.energy
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    #[getter]
    fn energy_drift(&self) -> f64 {
        self.0.energy_drift
    }

    /// One period as `(t, q1, q2, v1, v2)` nodes.
    #[pyo3(signature = (tol = 1e-12))]
    fn trajectory(&self, tol: f64) -> PyResult<Vec<Node>> {
        let traj = orbits::integrate(&self.0.system, self.0.initial, self.0.period, tol).or_py()?;
        Ok(traj.nodes.iter().map(|(t, s)| (*t, s.q.q1, s.q.q2, s.v[0], s.v[1])).collect())
    }

    /// Syzygy report as a dict.
    fn syzygies<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &orbits::verify_syzygy_theorem(&self.0).or_py()?)
    }

    fn __repr__(&self) -> String {
        format!(
            "PeriodicOrbit(q1={}, period={}, energy={}, residual={:e})",
            self.0.initial.q.q1, self.0.period, self.0.energy, self.0.residual
        )
    }
}

#[pyfunction]
fn lagrange_points(mu: f64) -> PyResult<Vec<PyCriticalPoint>> {
    Ok(critical::lagrange_points(mu).or_py()?.into_iter().map(PyCriticalPoint).collect())
}

#[pyfunction]
fn critical_energies<'py>(py: Python<'py>, mu: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &critical::critical_energies(mu).or_py()?)
}

#[pyfunction]
fn hill_critical_points() -> Vec<PyCriticalPoint> {
    let (plus, minus) = critical::hill_critical_points();
    vec![PyCriticalPoint(plus), PyCriticalPoint(minus)]
}

#[pyfunction]
fn hill_critical_value() -> f64 {
    critical::hill_critical_value()
}

/// `(class, component_count)` of the Hill's region.
#[pyfunction]
fn classify(mu: f64, c: f64) -> PyResult<(String, usize)> {
    let t = region::classify(mu, c).or_py()?;
    let class = serde_json::to_value(t.class).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    Ok((class, t.component_count))
}

#[pyfunction]
fn eval_w(mu: f64, q1: f64, q2: f64) -> PyResult<f64> {
    tangent::eval_w(mu, ConfigPoint::new(q1, q2)).or_py()
}

#[pyfunction]
fn trace_w_zero(mu: f64) -> PyResult<Vec<(f64, f64)>> {
    Ok(points(&tangent::trace_w_zero(mu).or_py()?.curve.vertices))
}

#[pyfunction]
fn base_case_certificate<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &tangent::base_case_certificate().or_py()?)
}

/// Tangent counts along the path of constant base-case normalized energy
/// from `mu = 0.1` to `mu = 0.9`.
#[pyfunction]
#[pyo3(signature = (samples = 200))]
fn verify_lemma<'py>(py: Python<'py>, samples: usize) -> PyResult<Bound<'py, PyAny>> {
    let s0 = critical::critical_energies(0.5).or_py()?.normalize(-2.0 + BASE_CASE_EPSILON);
    let path = ParameterPath::through(&[(0.1, s0), (0.9, s0)], samples).or_py()?;
    let report = py.detach(|| tangent::continuation_report(&path)).or_py()?;
    to_py(py, &report)
}

#[pymodule]
fn syzygy_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_class::<PyCriticalPoint>()?;
    m.add_class::<PyPeriodicOrbit>()?;
    m.add("VerificationError", m.py().get_type::<VerificationError>())?;
    m.add_function(wrap_pyfunction!(lagrange_points, m)?)?;
    m.add_function(wrap_pyfunction!(critical_energies, m)?)?;
    m.add_function(wrap_pyfunction!(hill_critical_points, m)?)?;
    m.add_function(wrap_pyfunction!(hill_critical_value, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(eval_w, m)?)?;
    m.add_function(wrap_pyfunction!(trace_w_zero, m)?)?;
    m.add_function(wrap_pyfunction!(base_case_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lemma, m)?)?;
    Ok(())
}
