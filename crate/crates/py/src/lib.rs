//! Python bindings. Matrices cross the boundary as lists of rows.

use affscale::io::generate::DEFAULT_RADIUS;
use affscale::io::{gen_central_path_sdp, gen_hp_instance};
use affscale::{
    BarrierOracle, DetBarrier, HpFamily, PowerSums, SdpInstance, SolveResult, SolverConfig, StepMode,
};
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

type Rows = Vec<Vec<f64>>;

fn py_err(err: affscale::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn to_matrix(rows: &Rows) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}

fn to_rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn sdp_instance(c: &Rows, constraints: &[Rows], b: Vec<f64>) -> PyResult<SdpInstance> {
    let mats = constraints.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
    let instance = SdpInstance::new(to_matrix(c)?, mats, DVector::from_vec(b)).map_err(py_err)?;
    instance.validate().map_err(py_err)?;
    Ok(instance)
}

fn family(name: &str, d: usize, k: Option<usize>) -> PyResult<HpFamily> {
    HpFamily::from_name(name, d, k).map_err(py_err)
}

fn result_dict<'py>(py: Python<'py>, result: &SolveResult) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("status", format!("{:?}", result.status))?;
    out.set_item("iterations", result.iterations())?;
    out.set_item("gaps", result.gaps())?;
    out.set_item("steps", result.trace.iter().map(|r| r.t).collect::<Vec<_>>())?;
    out.set_item("final_gap", result.final_gap)?;
    out.set_item("final_e", result.final_e.iter().copied().collect::<Vec<_>>())?;
    let v = &result.violations;
    let violations = PyDict::new(py);
    violations.set_item("primal_monotonicity", v.primal_monotonicity)?;
    violations.set_item("dual_monotonicity", v.dual_monotonicity)?;
    violations.set_item("ratio_bound", v.ratio_bound)?;
    violations.set_item("swath", v.swath)?;
    violations.set_item("dual_carry_over", v.dual_carry_over)?;
    out.set_item("violations", violations)?;
    out.set_item("message", result.message.clone())?;
    Ok(out)
}

fn config(alpha: f64, tol: f64, max_iters: usize, fixed_step: bool) -> SolverConfig {
    SolverConfig {
        alpha,
        gap_tol: tol,
        max_iters,
        step_mode: if fixed_step { StepMode::FixedHalfAlpha } else { StepMode::QTildeMinimizer },
        ..SolverConfig::default()
    }
}

/// `(kappa, beta, ratio_bound)` for `alpha` and degree `n`.
#[pyfunction]
fn schedule_constants(alpha: f64, n: usize) -> PyResult<(f64, f64, f64)> {
    let sc = affscale::schedule_constants(alpha, n).map_err(py_err)?;
    Ok((sc.kappa, sc.beta, sc.ratio_bound))
}

#[pyfunction]
fn power_sums(roots: Vec<f64>) -> (f64, f64, f64, f64) {
    let ps = PowerSums::from_roots(&roots);
    (ps.p1, ps.p2, ps.p3, ps.p4)
}

/// Power sums from ascending polynomial coefficients via Newton's identities.
#[pyfunction]
fn power_sums_from_coeffs(coeffs: Vec<f64>) -> PyResult<(f64, f64, f64, f64)> {
    let ps = PowerSums::from_coeffs(&coeffs).map_err(py_err)?;
    Ok((ps.p1, ps.p2, ps.p3, ps.p4))
}

#[pyfunction]
fn step_poly_coeffs(sums: (f64, f64, f64, f64), alpha: f64, n: usize) -> PyResult<(f64, f64, f64)> {
    let ps = PowerSums { p1: sums.0, p2: sums.1, p3: sums.2, p4: sums.3 };
    let poly = affscale::step_poly_coeffs(&ps, alpha, n).map_err(py_err)?;
    Ok((poly.a, poly.b, poly.c))
}

#[pyfunction]
fn direction_eigs_sdp(e: Rows, x: Rows) -> PyResult<Vec<f64>> {
    affscale::direction_eigs_sdp(&to_matrix(&e)?, &to_matrix(&x)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (family_name, d, x, e, k=None))]
fn direction_eigs_hp(family_name: &str, d: usize, x: Vec<f64>, e: Vec<f64>, k: Option<usize>) -> PyResult<Vec<f64>> {
    let family = family(family_name, d, k)?;
    affscale::direction_eigs_hp(&family, &DVector::from_vec(x), &DVector::from_vec(e), 1e-6).map_err(py_err)
}

/// Central-path SDP instance as a dict with keys `c`, `constraints`, `b`, `e0`.
#[pyfunction]
#[pyo3(signature = (n, m, seed, mu=1.0))]
fn generate_sdp(py: Python<'_>, n: usize, m: usize, seed: u64, mu: f64) -> PyResult<Bound<'_, PyDict>> {
    let (instance, e0) = gen_central_path_sdp(n, m, mu, seed).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("c", to_rows(&instance.c))?;
    out.set_item("constraints", instance.constraints.iter().map(to_rows).collect::<Vec<_>>())?;
    out.set_item("b", instance.b.iter().copied().collect::<Vec<_>>())?;
    out.set_item("e0", to_rows(&e0))?;
    Ok(out)
}

/// Solves the cone relaxation at `e`; returns `x`, `y`, `s` (matrices as rows) and `gap`.
#[pyfunction]
fn solve_qcp_sdp<'py>(
    py: Python<'py>,
    c: Rows,
    constraints: Vec<Rows>,
    b: Vec<f64>,
    e: Rows,
    alpha: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let instance = sdp_instance(&c, &constraints, b)?;
    let oracle = DetBarrier::new(instance.order()).map_err(py_err)?;
    let e = affscale::svec(&to_matrix(&e)?);
    let sol = affscale::solve_qcp(&oracle, &instance.to_program(), &e, alpha).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("x", to_rows(&affscale::smat(&sol.x_e)))?;
    out.set_item("y", sol.y_e.iter().copied().collect::<Vec<_>>())?;
    out.set_item("s", to_rows(&affscale::smat(&sol.s_e)))?;
    out.set_item("gap", sol.gap)?;
    out.set_item("lambda", sol.lambda_mult)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (c, constraints, b, e0, alpha=0.5, tol=1e-8, max_iters=500, fixed_step=false))]
#[allow(clippy::too_many_arguments)]
fn run_sdp<'py>(
    py: Python<'py>,
    c: Rows,
    constraints: Vec<Rows>,
    b: Vec<f64>,
    e0: Rows,
    alpha: f64,
    tol: f64,
    max_iters: usize,
    fixed_step: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let instance = sdp_instance(&c, &constraints, b)?;
    let oracle = DetBarrier::new(instance.order()).map_err(py_err)?;
    let e0 = affscale::svec(&to_matrix(&e0)?);
    let result =
        affscale::run(&oracle, &instance.to_program(), &e0, &config(alpha, tol, max_iters, fixed_step)).map_err(py_err)?;
    result_dict(py, &result)
}

/// Generates a hyperbolic instance for the named family and runs the solver on it.
#[pyfunction]
#[pyo3(signature = (family_name, d, m, seed, k=None, mu=1.0, alpha=0.5, tol=1e-8, max_iters=500))]
#[allow(clippy::too_many_arguments)]
fn run_hp<'py>(
    py: Python<'py>,
    family_name: &str,
    d: usize,
    m: usize,
    seed: u64,
    k: Option<usize>,
    mu: f64,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let family = family(family_name, d, k)?;
    let instance = gen_hp_instance(family, m, mu, seed, DEFAULT_RADIUS).map_err(py_err)?;
    let oracle = instance.oracle();
    let result = affscale::run(&oracle, &instance.program, &instance.e0, &config(alpha, tol, max_iters, false))
        .map_err(py_err)?;
    let out = result_dict(py, &result)?;
    out.set_item("degree", oracle.degree())?;
    Ok(out)
}

#[pymodule]
fn affscale_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(schedule_constants, m)?)?;
    m.add_function(wrap_pyfunction!(power_sums, m)?)?;
    m.add_function(wrap_pyfunction!(power_sums_from_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(step_poly_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(direction_eigs_sdp, m)?)?;
    m.add_function(wrap_pyfunction!(direction_eigs_hp, m)?)?;
    m.add_function(wrap_pyfunction!(generate_sdp, m)?)?;
    m.add_function(wrap_pyfunction!(solve_qcp_sdp, m)?)?;
    m.add_function(wrap_pyfunction!(run_sdp, m)?)?;
    m.add_function(wrap_pyfunction!(run_hp, m)?)?;
    Ok(())
}
