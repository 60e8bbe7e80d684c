//! Python bindings for `qmeasure`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qmeasure::criteria::{self, CaseConfig, CaseId, OutcomeMode, ProbeSpec};
use qmeasure::povm::{self, Outcome};
use qmeasure::{estimation, fisher, linalg, Mat2, Objective, OptimizerBudget, WeightMatrix};

type Matrix = Vec<Vec<num_complex::Complex64>>;

fn err(e: qmeasure::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rows(m: &Mat2) -> Matrix {
    m.a.iter().map(|row| row.to_vec()).collect()
}

fn dense(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn outcome(label: usize) -> PyResult<Outcome> {
    match label {
        1 => Ok(Outcome::First),
        2 => Ok(Outcome::Second),
        _ => Err(PyValueError::new_err(format!(
            "outcome must be 1 or 2, got {label}"
        ))),
    }
}

fn outcome_mode(mode: &str) -> PyResult<OutcomeMode> {
    match mode {
        "branch1" => Ok(OutcomeMode::Remembered(Outcome::First)),
        "branch2" => Ok(OutcomeMode::Remembered(Outcome::Second)),
        "forgotten" => Ok(OutcomeMode::Forgotten),
        other => Err(PyValueError::new_err(format!(
            "mode must be branch1, branch2 or forgotten, got '{other}'"
        ))),
    }
}

fn weights(w: Option<Vec<Vec<f64>>>, dim: usize) -> PyResult<WeightMatrix> {
    match w {
        None => Ok(WeightMatrix::identity(dim)),
        Some(rows) => {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(PyValueError::new_err("weight matrix must be square"));
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            WeightMatrix::new(nalgebra::DMatrix::from_row_slice(n, n, &flat)).map_err(err)
        }
    }
}

/// Qubit state in Bloch coordinates `(r, φ₁, φ₂)`.
#[pyclass(name = "QubitState", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyQubitState(linalg::QubitState);

#[pymethods]
impl PyQubitState {
    #[new]
    #[pyo3(signature = (r, phi1, phi2 = 0.0))]
    fn new(r: f64, phi1: f64, phi2: f64) -> PyResult<Self> {
        linalg::QubitState::new(r, phi1, phi2)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn from_bloch(v: [f64; 3]) -> PyResult<Self> {
        linalg::QubitState::from_bloch(&v).map(Self).map_err(err)
    }

    #[staticmethod]
    fn plus() -> Self {
        Self(linalg::QubitState::plus())
    }

    #[getter]
    fn r(&self) -> f64 {
        self.0.r
    }

    #[getter]
    fn phi1(&self) -> f64 {
        self.0.phi1
    }

    #[getter]
    fn phi2(&self) -> f64 {
        self.0.phi2
    }

    fn bloch(&self) -> [f64; 3] {
        self.0.bloch()
    }

    fn matrix(&self) -> Matrix {
        to_rows(&self.0.to_matrix())
    }

    fn __repr__(&self) -> String {
        format!(
            "QubitState(r={}, phi1={}, phi2={})",
            self.0.r, self.0.phi1, self.0.phi2
        )
    }
}

/// Two-outcome POVM `E₁ = αI + βσ_n`, `E₂ = I − E₁`.
#[pyclass(name = "Povm", frozen)]
struct PyPovm(povm::TwoOutcomePovm);

#[pymethods]
impl PyPovm {
    #[new]
    #[pyo3(signature = (alpha, beta, axis = [0.0, 0.0, 1.0]))]
    fn new(alpha: f64, beta: f64, axis: [f64; 3]) -> PyResult<Self> {
        povm::TwoOutcomePovm::new(alpha, beta, axis)
            .map(Self)
            .map_err(err)
    }

    fn effect(&self, outcome_label: usize) -> PyResult<Matrix> {
        Ok(to_rows(&self.0.effect(outcome(outcome_label)?)))
    }

    fn sqrt_effect(&self, outcome_label: usize) -> PyResult<Matrix> {
        Ok(to_rows(&self.0.sqrt_effect(outcome(outcome_label)?)))
    }
}

/// `[(Q_i, ρ_i or None)]` for both outcomes.
#[pyfunction]
fn encode_selective(povm: &PyPovm, probe: PyQubitState) -> Vec<(f64, Option<Matrix>)> {
    povm::encode_selective(&povm.0, &probe.0)
        .into_iter()
        .map(|b| (b.probability, b.state.as_ref().map(to_rows)))
        .collect()
}

#[pyfunction]
fn encode_nonselective(povm: &PyPovm, probe: PyQubitState) -> Matrix {
    to_rows(&povm::encode_nonselective(&povm.0, &probe.0))
}

/// How `(α, β, θ)` depend on the estimated parameters.
#[pyclass(name = "MeasurementFamily", frozen)]
struct PyFamily(povm::MeasurementFamily);

#[pymethods]
impl PyFamily {
    #[staticmethod]
    fn alpha_estimation(beta: f64) -> Self {
        Self(povm::MeasurementFamily::alpha_estimation(beta))
    }

    #[staticmethod]
    fn beta_estimation(alpha: f64) -> Self {
        Self(povm::MeasurementFamily::beta_estimation(alpha))
    }

    #[staticmethod]
    fn theta_beta_estimation(alpha: f64) -> Self {
        Self(povm::MeasurementFamily::theta_beta_estimation(alpha))
    }

    /// All three of `(α, β, θ)` as parameters.
    #[staticmethod]
    fn full() -> PyResult<Self> {
        let p = povm::ParamFn::param;
        povm::MeasurementFamily::new(3, p(0), p(1), p(2))
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }
}

#[pyclass(name = "FisherResult", frozen, get_all)]
struct PyFisherResult {
    qfim: Vec<Vec<f64>>,
    uhlmann: Vec<Vec<f64>>,
    conditioning: f64,
    achievable: bool,
    singular: bool,
}

fn fisher_result(r: &fisher::FisherReport) -> PyFisherResult {
    PyFisherResult {
        qfim: dense(&r.qfim),
        uhlmann: dense(&r.uhlmann),
        conditioning: r.conditioning,
        achievable: r.achievable,
        singular: r.singular,
    }
}

/// QFIM of the encoded family at `x`; `mode` is forgotten, branch1 or branch2.
#[pyfunction]
#[pyo3(signature = (family, probe, x, mode = "forgotten"))]
fn qfim(
    family: &PyFamily,
    probe: PyQubitState,
    x: Vec<f64>,
    mode: &str,
) -> PyResult<PyFisherResult> {
    let enc = match outcome_mode(mode)? {
        OutcomeMode::Forgotten => povm::family_nonselective(&family.0, &probe.0),
        OutcomeMode::Remembered(o) => povm::family_selective(&family.0, &probe.0, o),
    };
    fisher::qfim(&enc, &x)
        .map(|r| fisher_result(&r))
        .map_err(err)
}

/// QFI of a state and one derivative, both as 2×2 complex matrices.
#[pyfunction]
fn qfi(rho: Matrix, drho: Matrix) -> PyResult<f64> {
    let m = |v: &Matrix| -> PyResult<Mat2> {
        if v.len() != 2 || v.iter().any(|r| r.len() != 2) {
            return Err(PyValueError::new_err("expected a 2x2 matrix"));
        }
        Ok(Mat2::new(v[0][0], v[0][1], v[1][0], v[1][1]))
    };
    fisher::qfi(&m(&rho)?, &m(&drho)?).map_err(err)
}

fn error_pair(r: estimation::ErrorResult) -> (f64, String) {
    (r.value.value(), r.status.as_str().to_string())
}

/// `(Δ_OR, status)`.
#[pyfunction]
#[pyo3(signature = (family, probe, x, weights = None))]
fn or_error(
    family: &PyFamily,
    probe: PyQubitState,
    x: Vec<f64>,
    weights: Option<Vec<Vec<f64>>>,
) -> PyResult<(f64, String)> {
    let w = self::weights(weights, family.0.dim())?;
    estimation::or_error(&family.0, &probe.0, &x, &w)
        .map(error_pair)
        .map_err(err)
}

/// `(Δ_OF, status)`.
#[pyfunction]
#[pyo3(signature = (family, probe, x, weights = None))]
fn of_error(
    family: &PyFamily,
    probe: PyQubitState,
    x: Vec<f64>,
    weights: Option<Vec<Vec<f64>>>,
) -> PyResult<(f64, String)> {
    let w = self::weights(weights, family.0.dim())?;
    estimation::of_error(&family.0, &probe.0, &x, &w)
        .map(error_pair)
        .map_err(err)
}

/// `(best value, best probe, status)`; `budget` is `"RxPxQ[:ITER]"`.
#[pyfunction]
#[pyo3(signature = (objective, family, x, budget = None, weights = None))]
fn optimize_probe(
    objective: &str,
    family: &PyFamily,
    x: Vec<f64>,
    budget: Option<&str>,
    weights: Option<Vec<Vec<f64>>>,
) -> PyResult<(f64, PyQubitState, String)> {
    let objective: Objective = objective.parse().map_err(err)?;
    let budget: OptimizerBudget = match budget {
        Some(b) => b.parse().map_err(err)?,
        None => OptimizerBudget::default(),
    };
    let w = self::weights(weights, family.0.dim())?;
    let opt = estimation::optimize_probe(objective, &family.0, &x, &w, &budget).map_err(err)?;
    Ok((
        opt.best_value.value(),
        PyQubitState(opt.best_probe),
        opt.status.as_str().to_string(),
    ))
}

#[pyclass(name = "CaseResult", frozen, get_all)]
struct PyCaseResult {
    achievable: bool,
    invertible: bool,
    commuting: bool,
    biconditional: Option<bool>,
    conditioning: f64,
    fisher: Py<PyFisherResult>,
}

/// Run one of the cases I–IV. Give either `probe` or `orthogonal_r`.
#[pyfunction]
#[pyo3(signature = (case, alpha, beta, theta, probe = None, orthogonal_r = None, sign = 1.0, mode = "forgotten"))]
#[allow(clippy::too_many_arguments)]
fn run_case(
    py: Python<'_>,
    case: &str,
    alpha: f64,
    beta: f64,
    theta: f64,
    probe: Option<PyQubitState>,
    orthogonal_r: Option<f64>,
    sign: f64,
    mode: &str,
) -> PyResult<PyCaseResult> {
    let case: CaseId = case.parse().map_err(err)?;
    let spec = match (probe, orthogonal_r) {
        (Some(p), None) => ProbeSpec::State(p.0),
        (None, Some(r)) => ProbeSpec::Orthogonal { r, sign },
        _ => {
            return Err(PyValueError::new_err(
                "give exactly one of probe and orthogonal_r",
            ))
        }
    };
    let cfg = CaseConfig::new(case, alpha, beta, theta, spec, outcome_mode(mode)?);
    let rep = criteria::run_case(&cfg).map_err(err)?;
    let v = &rep.verdict;
    Ok(PyCaseResult {
        achievable: v.achievable,
        invertible: v.qfim_invertible,
        commuting: v.commuting(),
        biconditional: v.biconditional,
        conditioning: v.conditioning,
        fisher: Py::new(py, fisher_result(&rep.report))?,
    })
}

#[pymodule]
fn pyqmeasure(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyQubitState>()?;
    m.add_class::<PyPovm>()?;
    m.add_class::<PyFamily>()?;
    m.add_class::<PyFisherResult>()?;
    m.add_class::<PyCaseResult>()?;
    m.add_function(wrap_pyfunction!(encode_selective, m)?)?;
    m.add_function(wrap_pyfunction!(encode_nonselective, m)?)?;
    m.add_function(wrap_pyfunction!(qfi, m)?)?;
    m.add_function(wrap_pyfunction!(qfim, m)?)?;
    m.add_function(wrap_pyfunction!(or_error, m)?)?;
    m.add_function(wrap_pyfunction!(of_error, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_probe, m)?)?;
    m.add_function(wrap_pyfunction!(run_case, m)?)?;
    Ok(())
}
