//! Python bindings for the `safeq` simulator and algorithms.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use safeq::amplify::{self, Oracle};
use safeq::collision::{self, CollisionFn, CollisionInstance};
use safeq::minima::{self, OracleStyle};
use safeq::sim::{Complex, Gate};
use safeq::uncompute::{self, Expected};
use safeq::unifsup;

create_exception!(safeq, SafeqError, PyException);

fn err(e: safeq::Error) -> PyErr {
    SafeqError::new_err(e.to_string())
}

fn parse_gate(name: &str, theta: Option<f64>) -> PyResult<Gate> {
    let angle = || theta.ok_or_else(|| SafeqError::new_err(format!("{name} needs an angle")));
    Ok(match name.to_ascii_lowercase().as_str() {
        "h" => Gate::H,
        "x" => Gate::X,
        "y" => Gate::Y,
        "z" => Gate::Z,
        "rotx" | "rx" => Gate::RotX(angle()?),
        "roty" | "ry" => Gate::RotY(angle()?),
        "rotz" | "rz" => Gate::RotZ(angle()?),
        other => return Err(SafeqError::new_err(format!("unknown gate {other:?}"))),
    })
}

/// Ordered qubits read as an unsigned integer, least significant first.
#[pyclass(name = "Register", module = "safeq", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRegister(safeq::Register);

#[pymethods]
impl PyRegister {
    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Qubit positions inside the machine's basis index.
    fn indices(&self) -> Vec<usize> {
        self.0.indices()
    }

    fn slice(&self, start: usize, stop: usize) -> PyResult<PyRegister> {
        if start > stop || stop > self.0.len() {
            return Err(SafeqError::new_err("slice out of range"));
        }
        Ok(PyRegister(self.0.slice(start..stop)))
    }

    fn __repr__(&self) -> String {
        format!("Register({:?})", self.0.indices())
    }
}

#[pyclass(name = "Machine", module = "safeq")]
struct PyMachine(safeq::Machine);

impl PyMachine {
    fn one(&mut self, gate: Gate, reg: &PyRegister, bit: usize) -> PyResult<()> {
        let q = *reg
            .0
            .qubits()
            .get(bit)
            .ok_or_else(|| SafeqError::new_err("bit out of range"))?;
        self.0.apply(gate, q).map_err(err)
    }
}

#[pymethods]
impl PyMachine {
    #[new]
    #[pyo3(signature = (n_qubits, seed = 0))]
    fn new(n_qubits: usize, seed: u64) -> PyResult<Self> {
        safeq::Machine::new(n_qubits, seed).map(PyMachine).map_err(err)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    #[getter]
    fn queries(&self) -> u64 {
        self.0.queries()
    }

    #[getter]
    fn free_count(&self) -> usize {
        self.0.free_count()
    }

    fn allocate(&mut self, k: usize) -> PyResult<PyRegister> {
        self.0.allocate(k).map(PyRegister).map_err(err)
    }

    #[pyo3(signature = (reg, bit = 0))]
    fn h(&mut self, reg: &PyRegister, bit: usize) -> PyResult<()> {
        self.one(Gate::H, reg, bit)
    }

    #[pyo3(signature = (reg, bit = 0))]
    fn x(&mut self, reg: &PyRegister, bit: usize) -> PyResult<()> {
        self.one(Gate::X, reg, bit)
    }

    #[pyo3(signature = (reg, bit = 0))]
    fn y(&mut self, reg: &PyRegister, bit: usize) -> PyResult<()> {
        self.one(Gate::Y, reg, bit)
    }

    #[pyo3(signature = (reg, bit = 0))]
    fn z(&mut self, reg: &PyRegister, bit: usize) -> PyResult<()> {
        self.one(Gate::Z, reg, bit)
    }

    fn rot_x(&mut self, reg: &PyRegister, bit: usize, theta: f64) -> PyResult<()> {
        self.one(Gate::RotX(theta), reg, bit)
    }

    fn rot_y(&mut self, reg: &PyRegister, bit: usize, theta: f64) -> PyResult<()> {
        self.one(Gate::RotY(theta), reg, bit)
    }

    fn rot_z(&mut self, reg: &PyRegister, bit: usize, theta: f64) -> PyResult<()> {
        self.one(Gate::RotZ(theta), reg, bit)
    }

    /// Applies `gate` to `target[bit]` where the controls equal `polarity`.
    #[pyo3(signature = (controls, polarity, gate, target, bit = 0, theta = None))]
    fn controlled(
        &mut self,
        controls: &PyRegister,
        polarity: u64,
        gate: &str,
        target: &PyRegister,
        bit: usize,
        theta: Option<f64>,
    ) -> PyResult<()> {
        let gate = parse_gate(gate, theta)?;
        let t = *target
            .0
            .qubits()
            .get(bit)
            .ok_or_else(|| SafeqError::new_err("bit out of range"))?;
        self.0
            .apply_controlled(controls.0.qubits(), polarity, gate, t)
            .map_err(err)
    }

    fn global_phase(&mut self, r: f64) -> PyResult<()> {
        self.0.global_phase(r).map_err(err)
    }

    fn measure(&mut self, reg: &PyRegister) -> PyResult<u64> {
        self.0.measure(reg.0.clone()).map_err(err)
    }

    fn probabilities(&self, reg: &PyRegister) -> PyResult<Vec<f64>> {
        self.0.probabilities(&reg.0).map_err(err)
    }

    fn amplitudes(&self) -> Vec<Complex> {
        self.0.state().amplitudes().to_vec()
    }

    fn dup(&mut self, reg: &PyRegister) -> PyResult<PyRegister> {
        uncompute::dup(&mut self.0, &reg.0).map(PyRegister).map_err(err)
    }

    /// Forget `reg`: conditionally on an int or another register, or
    /// unconditionally when `expected` is None.
    #[pyo3(signature = (reg, expected = None))]
    fn forget(&mut self, reg: &PyRegister, expected: Option<&Bound<'_, PyAny>>) -> PyResult<()> {
        let x = reg.0.clone();
        match expected {
            None => uncompute::forget_unconditional(&mut self.0, x),
            Some(obj) => {
                if let Ok(other) = obj.cast::<PyRegister>() {
                    let other = other.get().0.clone();
                    uncompute::forget_conditional(&mut self.0, x, Expected::Register(&other))
                } else {
                    let v: u64 = obj.extract()?;
                    uncompute::forget_conditional(&mut self.0, x, Expected::Value(v))
                }
            }
        }
        .map_err(err)
    }

    /// Grover search over `arity` qubits for the listed indices.
    #[pyo3(signature = (arity, marked, marks = None))]
    fn grover(&mut self, arity: usize, marked: Vec<u64>, marks: Option<u64>) -> PyResult<u64> {
        let t = marks.unwrap_or(marked.len().max(1) as u64);
        let oracle = Oracle::new(arity, move |x| marked.contains(&x));
        amplify::grover(&mut self.0, &oracle, t).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Machine(n_qubits={}, free={}, seed={})",
            self.0.n_qubits(),
            self.0.free_count(),
            self.0.seed()
        )
    }
}

#[pyfunction]
fn runtime_budget(n: u64) -> u64 {
    minima::runtime_budget(n)
}

#[pyfunction]
fn grover_iterations(n: u64, t: u64) -> PyResult<u64> {
    amplify::grover_iterations(n, t).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (bound, seed = 0))]
fn random_int(bound: u64, seed: u64) -> PyResult<u64> {
    let mut m = safeq::Machine::new(minima::ceil_log2(bound).min(safeq::MAX_QUBITS), seed).map_err(err)?;
    collision::random_int(&mut m, bound).map_err(err)
}

/// Minimum search; returns a dict with value, index, steps, budget and queries.
#[pyfunction]
#[pyo3(signature = (table, seed = 0, ancilla = false))]
fn durr_hoyer<'py>(
    py: Python<'py>,
    table: Vec<u64>,
    seed: u64,
    ancilla: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let style = if ancilla {
        OracleStyle::Ancilla
    } else {
        OracleStyle::Diagonal
    };
    let mut m = safeq::Machine::new(minima::required_qubits(&table, style), seed).map_err(err)?;
    let out = minima::durr_hoyer_with(&mut m, &table, style).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("value", out.value)?;
    d.set_item("index", out.index)?;
    d.set_item("steps", out.steps)?;
    d.set_item("budget", out.budget)?;
    d.set_item("queries", out.queries)?;
    Ok(d)
}

/// Collision search for `F(x) = x mod modulus`; returns the colliding pair.
#[pyfunction]
#[pyo3(signature = (table, modulus, r = 0, seed = 0))]
fn find_collision(table: Vec<u64>, modulus: u64, r: u64, seed: u64) -> PyResult<(u64, u64)> {
    if modulus == 0 {
        return Err(SafeqError::new_err("modulus must be positive"));
    }
    let inst = CollisionInstance {
        table,
        f: CollisionFn::modulo(modulus),
        r,
    };
    let mut m = safeq::Machine::new(collision::required_qubits(&inst), seed).map_err(err)?;
    collision::find_collision(&mut m, &inst)
        .map(|o| o.pair)
        .map_err(err)
}

/// Amplitudes of the uniform superposition over `0..m`.
#[pyfunction]
#[pyo3(signature = (m, forget = false))]
fn prepare_uniform_m(m: u64, forget: bool) -> PyResult<Vec<Complex>> {
    let n = minima::ceil_log2(m) + usize::from(forget);
    let mut machine = safeq::Machine::new(n, 0).map_err(err)?;
    let reg = if forget {
        unifsup::prepare_uniform_m_with_forget(&mut machine, m)
    } else {
        unifsup::prepare_uniform_m(&mut machine, m)
    }
    .map_err(err)?;
    let len = 1usize << reg.len();
    Ok(machine.state().amplitudes()[..len].to_vec())
}

/// Runs a CLI configuration and returns the JSON report.
#[pyfunction]
fn run_report(argv: Vec<String>) -> PyResult<String> {
    let cfg = safeq::cli::parse_args(argv).map_err(|e| SafeqError::new_err(e.to_string()))?;
    let report = safeq::cli::run_and_report(&cfg).map_err(|e| SafeqError::new_err(e.to_string()))?;
    Ok(report.to_json())
}

#[pymodule]
#[pyo3(name = "safeq")]
fn safeq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SafeqError", m.py().get_type::<SafeqError>())?;
    m.add_class::<PyMachine>()?;
    m.add_class::<PyRegister>()?;
    m.add_function(wrap_pyfunction!(runtime_budget, m)?)?;
    m.add_function(wrap_pyfunction!(grover_iterations, m)?)?;
    m.add_function(wrap_pyfunction!(random_int, m)?)?;
    m.add_function(wrap_pyfunction!(durr_hoyer, m)?)?;
    m.add_function(wrap_pyfunction!(find_collision, m)?)?;
    m.add_function(wrap_pyfunction!(prepare_uniform_m, m)?)?;
    m.add_function(wrap_pyfunction!(run_report, m)?)?;
    Ok(())
}
