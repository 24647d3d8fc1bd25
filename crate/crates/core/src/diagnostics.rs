//! Independent checks of the identities the method relies on.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conic::{BarrierOracle, Membership, QuadCone, DEFAULT_TOL};
use crate::driver::step_poly_coeffs;
use crate::error::{check_dim, Error, Result};
use crate::hyperbolic::PowerSums;
use crate::sdp::{direction_eigs_sdp, pd_factor, svec, DetBarrier, SdpInstance};
use crate::qcp::solve_qcp;

/// Width of the band around the threshold excluded from equivalence checks.
pub const THRESHOLD_BAND: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub samples: usize,
    pub tolerance: f64,
    /// Samples that violate a strict or logical condition.
    pub failures: usize,
    pub pass: bool,
}

impl CheckReport {
    fn new(name: &str, tolerance: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            max_abs_err: 0.0,
            max_rel_err: 0.0,
            samples: 0,
            tolerance,
            failures: 0,
            pass: false,
        }
    }

    fn record(&mut self, abs: f64, rel: f64) {
        self.samples += 1;
        self.max_abs_err = self.max_abs_err.max(abs);
        self.max_rel_err = self.max_rel_err.max(rel);
    }

    fn finish(mut self) -> Self {
        self.pass = self.failures == 0 && self.max_rel_err <= self.tolerance;
        self
    }
}

/// `tr(((E + t X) S)^2)`.
pub fn trace_q(e: &DMatrix<f64>, x: &DMatrix<f64>, s: &DMatrix<f64>, t: f64) -> f64 {
    let m = (e + x * t) * s;
    m.dot(&m.transpose())
}

struct NormalizedStep {
    e: DMatrix<f64>,
    x: DMatrix<f64>,
    s: DMatrix<f64>,
    ps: PowerSums,
    t_e: f64,
    n: usize,
}

fn normalized_step(sdp: &SdpInstance, e: &DMatrix<f64>, alpha: f64) -> Result<NormalizedStep> {
    let n = sdp.order();
    let oracle = DetBarrier::new(n)?;
    let sol = solve_qcp(&oracle, &sdp.to_program(), &svec(e), alpha)?;
    let x = crate::sdp::smat(&sol.x_e);
    let s = crate::sdp::smat(&sol.s_e) / sol.gap;
    let ps = PowerSums::from_roots(&direction_eigs_sdp(e, &x)?);
    let poly = step_poly_coeffs(&ps, alpha, n)?;
    Ok(NormalizedStep { e: e.clone(), x, s, ps, t_e: poly.minimizer(), n })
}

/// Compares `trace_q` against `q~(t) / ((n - alpha^2) p1)^2` on `[0, 2 t_E]`.
pub fn q_scaling_check(sdp: &SdpInstance, e: &DMatrix<f64>, alpha: f64, t_samples: usize) -> Result<CheckReport> {
    let step = normalized_step(sdp, e, alpha)?;
    let poly = step_poly_coeffs(&step.ps, alpha, step.n)?;
    let scale = ((step.n as f64 - alpha * alpha) * step.ps.p1).powi(2);
    let mut report = CheckReport::new("q_scaling", 1e-8);
    let last = t_samples.saturating_sub(1).max(1) as f64;
    for i in 0..t_samples {
        let t = 2.0 * step.t_e * i as f64 / last;
        let direct = trace_q(&step.e, &step.x, &step.s, t);
        let scaled = poly.eval(t) / scale;
        let abs = (direct - scaled).abs();
        report.record(abs, abs / scaled.abs().max(f64::MIN_POSITIVE));
    }
    Ok(report.finish())
}

/// Checks `(E(t) PD and S in int K_{E(t)}(beta)*)  <=>  q(t) < 1/(n - beta^2)` on a grid.
pub fn membership_equiv_check(
    sdp: &SdpInstance,
    e: &DMatrix<f64>,
    alpha: f64,
    beta: f64,
    t_grid: &[f64],
) -> Result<CheckReport> {
    let step = normalized_step(sdp, e, alpha)?;
    let n = step.n;
    let oracle = DetBarrier::new(n)?;
    let threshold = 1.0 / (n as f64 - beta * beta);
    let s_vec = svec(&step.s);
    let mut report = CheckReport::new("membership_equiv", 0.0);
    for &t in t_grid {
        if t <= -1.0 {
            continue;
        }
        let q = trace_q(&step.e, &step.x, &step.s, t);
        if (q - threshold).abs() <= THRESHOLD_BAND {
            continue;
        }
        let e_t = (&step.e + &step.x * t) / (1.0 + t);
        let e_t_vec = svec(&e_t);
        let left = pd_factor(&e_t).is_ok()
            && QuadCone::new(&oracle, &e_t_vec, beta)
                .and_then(|cone| cone.classify_dual(&s_vec, DEFAULT_TOL))
                .map(|m| m == Membership::Interior)
                .unwrap_or(false);
        let right = q < threshold;
        report.record(0.0, 0.0);
        if left != right {
            report.failures += 1;
        }
    }
    report.max_abs_err = report.failures as f64;
    report.max_rel_err = report.failures as f64 / report.samples.max(1) as f64;
    Ok(report.finish())
}

/// Normalized dual matrix attached to a boundary point `X` of `K_E(alpha)`.
pub fn boundary_dual(e: &DMatrix<f64>, x: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    let n = e.nrows() as f64;
    let l = pd_factor(e)?;
    let inv = {
        let linv = l.solve_lower_triangular(&DMatrix::identity(e.nrows(), e.nrows())).ok_or(Error::NotInterior)?;
        linv.transpose() * linv
    };
    let along = inv.dot(x);
    if !(along > 0.0) {
        return Err(Error::domain("X is not in the positive half-cone"));
    }
    let inner = e - x * (alpha * alpha / along);
    Ok(&inv * inner * &inv / (n - alpha * alpha))
}

/// Verifies the strict decrease bound for `q` on `t_grid`, with `X` on the
/// boundary of `K_E(alpha)`.
pub fn decrease_bound_check(e: &DMatrix<f64>, x: &DMatrix<f64>, alpha: f64, t_grid: &[f64]) -> Result<CheckReport> {
    let n = e.nrows() as f64;
    let s = boundary_dual(e, x, alpha)?;
    let x_norm = {
        let lam = direction_eigs_sdp(e, x)?;
        lam.iter().map(|l| l * l).sum::<f64>().sqrt()
    };
    let base = n - alpha * alpha;
    let mut report = CheckReport::new("decrease_bound", 0.0);
    report.max_abs_err = f64::NEG_INFINITY;
    report.max_rel_err = f64::NEG_INFINITY;
    for &t in t_grid {
        if !(t > 0.0 && t <= alpha / x_norm * (1.0 + 1e-12)) {
            return Err(Error::domain(format!("grid point {t} outside (0, alpha/||X||_E]")));
        }
        let q = trace_q(e, x, &s, t);
        let rhs = (1.0 - 2.0 * t * ((1.0 - alpha) / base) * x_norm * (alpha - t * x_norm)) / base;
        report.record(q - rhs, (q - rhs) / rhs.abs());
        if q >= rhs {
            report.failures += 1;
        }
    }
    Ok(report.finish())
}

/// Central differences of the barrier value and gradient against the
/// analytic gradient and Hessian.
pub fn fd_check(oracle: &dyn BarrierOracle, x: &DVector<f64>, h: f64) -> Result<CheckReport> {
    let d = oracle.dim();
    check_dim(d, x.len())?;
    if !oracle.is_interior(x) {
        return Err(Error::NotInterior);
    }
    let mut report = CheckReport::new("finite_differences", 1e-5);
    let grad = oracle.gradient(x)?;
    let unit = |i: usize| DVector::from_fn(d, |j, _| f64::from(i == j));
    let mut fd_grad = DVector::zeros(d);
    for i in 0..d {
        let step = unit(i) * h;
        fd_grad[i] = (oracle.value(&(x + &step))? - oracle.value(&(x - &step))?) / (2.0 * h);
    }
    let abs = (&fd_grad - &grad).amax();
    report.record(abs, abs / grad.amax().max(f64::MIN_POSITIVE));
    for i in 0..d {
        let step = unit(i) * h;
        let fd = (oracle.gradient(&(x + &step))? - oracle.gradient(&(x - &step))?) / (2.0 * h);
        let exact = oracle.hessian_apply(x, &unit(i))?;
        let abs = (&fd - &exact).amax();
        report.record(abs, abs / exact.amax().max(f64::MIN_POSITIVE));
    }
    Ok(report.finish())
}

/// `t -> <s, H(e + t x)^{-1} s> / <e, s>^2`, undefined where `e + t x` is not interior.
pub fn conjecture_curve(
    oracle: &dyn BarrierOracle,
    e: &DVector<f64>,
    x_e: &DVector<f64>,
    s_e: &DVector<f64>,
    t_grid: &[f64],
) -> Result<Vec<Option<f64>>> {
    let denom = e.dot(s_e);
    if denom == 0.0 {
        return Err(Error::domain("<e, s> vanishes"));
    }
    Ok(t_grid
        .iter()
        .map(|&t| {
            let point = e + x_e * t;
            if !oracle.is_interior(&point) {
                return None;
            }
            oracle.hessian_solve(&point, s_e).ok().map(|w| s_e.dot(&w) / (denom * denom))
        })
        .collect())
}
