//! Exact solution of the quadratic-cone relaxation `QP_e(alpha)`:
//!
//! ```text
//! min <c, x>  s.t.  A x = b,  <e, x>_e >= alpha ||x||_e
//! ```
//!
//! The first-order system is linear in `(x, y, lambda)` with a one-dimensional
//! solution set. The optimum is the point of that line lying on the cone
//! boundary with the correct half-cone and multiplier signs.
//!
//! The solve works in the local frame of the barrier at `e`, where the metric
//! is Euclidean and `e` maps to a vector of norm `sqrt(n)`. Since `e` is
//! feasible, `x = e + d` with `d` in the null space of the constraints, and
//! stationarity forces `d` into the span of the projected objective and the
//! projected `e`. The problem therefore reduces to a conic section in at most
//! two dimensions, whose stationarity system has a one-dimensional solution
//! line. Working relative to `e` avoids solving against the constraint
//! matrix, which becomes ill conditioned in the local frame near optimality.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conic::BarrierOracle;
use crate::error::{check_dim, Error, Result};
use crate::poly::real_quadratic_roots;
use crate::program::ConicProgram;

/// Relative singular-value floor below which the reduced system is treated as
/// rank deficient beyond nullity one.
const RANK_TOL: f64 = 1e-13;

/// Relative length below which a projected direction is treated as dependent.
const BASIS_TOL: f64 = 1e-14;

/// Relative multiplier floor.
const MULTIPLIER_TOL: f64 = 1e-12;

/// Primal-dual optimum of `QP_e(alpha)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubproblemSolution {
    pub x_e: DVector<f64>,
    pub y_e: DVector<f64>,
    pub s_e: DVector<f64>,
    pub lambda_mult: f64,
    pub gap: f64,
    /// `||x_e||_e`.
    pub x_norm_e: f64,
    /// `<e, x_e>_e`.
    pub x_along_e: f64,
}

/// Relative residuals of the optimality identities of a [`SubproblemSolution`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub boundary: f64,
    pub dual: f64,
    pub complementarity: f64,
    pub gap_identity: f64,
    pub strong_duality: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        [self.primal, self.boundary, self.dual, self.complementarity, self.gap_identity, self.strong_duality]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

impl SubproblemSolution {
    /// Evaluates every optimality identity in ambient coordinates.
    pub fn residuals(
        &self,
        oracle: &dyn BarrierOracle,
        prog: &ConicProgram,
        e: &DVector<f64>,
        alpha: f64,
    ) -> Result<KktResiduals> {
        let g = oracle.gradient(e)?;
        let hx = oracle.hessian_apply(e, &self.x_e)?;
        let gx = g.dot(&self.x_e);
        let xhx = self.x_e.dot(&hx);
        let ax = &prog.a * &self.x_e;
        let aty = prog.a.transpose() * &self.y_e;
        let dual_scale = prog.c.norm().max(aty.norm()).max(self.s_e.norm());
        let primal_obj = prog.c.dot(&self.x_e);
        let dual_obj = prog.b.dot(&self.y_e);
        Ok(KktResiduals {
            primal: (&ax - &prog.b).norm() / prog.b.norm(),
            boundary: (gx * gx - alpha * alpha * xhx).abs() / (alpha * alpha * xhx),
            dual: (aty + &self.s_e - &prog.c).norm() / dual_scale,
            complementarity: self.x_e.dot(&self.s_e).abs() / (1.0 + self.x_e.norm() * self.s_e.norm()),
            gap_identity: (e.dot(&self.s_e) - self.gap).abs() / self.gap,
            strong_duality: (dual_obj - primal_obj).abs() / (1.0 + primal_obj.abs()).max(self.gap),
        })
    }
}

/// Ambient first-order system over unknowns `(x, y, lambda)`:
///
/// ```text
/// A x = b
/// <g,x> g - alpha^2 H x + A^T y + lambda c = 0
/// ```
pub fn assemble_first_order_system(
    oracle: &dyn BarrierOracle,
    prog: &ConicProgram,
    e: &DVector<f64>,
    alpha: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (m, d) = (prog.num_constraints(), prog.dim());
    if m == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    check_dim(oracle.dim(), d)?;
    check_dim(d, e.len())?;
    let g = oracle.gradient(e)?;
    let h = oracle.hessian_matrix(e)?;
    let mut sys = DMatrix::zeros(m + d, d + m + 1);
    sys.view_mut((0, 0), (m, d)).copy_from(&prog.a);
    let block = &g * g.transpose() - h * (alpha * alpha);
    sys.view_mut((m, 0), (d, d)).copy_from(&block);
    sys.view_mut((m, d), (d, m)).copy_from(&prog.a.transpose());
    sys.view_mut((m, d + m), (d, 1)).copy_from(&prog.c);
    let mut rhs = DVector::zeros(m + d);
    rhs.rows_mut(0, m).copy_from(&prog.b);
    Ok((sys, rhs))
}

/// Particular solution and unit null direction of an `r x (r + 1)` system.
fn affine_line(sys: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let (r, k) = sys.shape();
    debug_assert_eq!(k, r + 1);
    let mut padded = DMatrix::zeros(k, k);
    padded.view_mut((0, 0), (r, k)).copy_from(sys);
    let svd = padded.svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let top = svd.singular_values[order[0]];
    let second_smallest = svd.singular_values[order[k - 2]];
    if !(top > 0.0 && second_smallest > RANK_TOL * top) {
        return Err(Error::numerical("first-order system has nullity above one"));
    }
    let mut padded_rhs = DVector::zeros(k);
    padded_rhs.rows_mut(0, r).copy_from(rhs);
    let mut particular = DVector::zeros(k);
    for &i in &order[..k - 1] {
        let coef = u.column(i).dot(&padded_rhs) / svd.singular_values[i];
        particular += v_t.row(i).transpose() * coef;
    }
    let null = v_t.row(order[k - 1]).transpose();
    Ok((particular, null))
}

/// Orthonormal basis of the span of `vectors` inside the range of the
/// orthogonal projector `project`, dropping directions that are numerically
/// dependent on earlier ones.
fn orthonormal_basis(vectors: &[DVector<f64>], project: impl Fn(&DVector<f64>) -> DVector<f64>) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let scale = v.norm();
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &basis {
                let proj = u.dot(&w);
                w -= u * proj;
            }
            w = project(&w);
        }
        let len = w.norm();
        if len > BASIS_TOL * scale && len > 0.0 {
            basis.push(w / len);
        }
    }
    basis
}

/// Solves `QP_e(alpha)`. Returns `Err(NotInSwath)` when the relaxation has no
/// optimal solution.
pub fn solve_qcp(
    oracle: &dyn BarrierOracle,
    prog: &ConicProgram,
    e: &DVector<f64>,
    alpha: f64,
) -> Result<SubproblemSolution> {
    let (m, d) = (prog.num_constraints(), prog.dim());
    if m == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    check_dim(oracle.dim(), d)?;
    check_dim(d, e.len())?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    let n = oracle.degree() as f64;
    let a2 = alpha * alpha;

    let frame = oracle.local_frame(e)?;
    let e_loc = frame.to_local(e);
    let mut a_loc = DMatrix::zeros(d, m);
    for i in 0..m {
        a_loc.set_column(i, &frame.pullback(&prog.a.row(i).transpose()));
    }
    let c_loc = frame.pullback(&prog.c);
    if !c_loc.iter().all(|v| v.is_finite()) {
        return Err(Error::numerical("objective is not finite in the local frame"));
    }
    let qr = a_loc.qr();
    let (q, r) = (qr.q(), qr.r());
    let project = |v: &DVector<f64>| -> DVector<f64> {
        let mut w = v - &q * (q.transpose() * v);
        w -= &q * (q.transpose() * &w);
        w
    };
    let c_proj = project(&c_loc);
    if !(c_proj.norm() > BASIS_TOL * c_loc.norm()) {
        return Err(Error::numerical("objective is constant on the feasible set"));
    }
    let e_proj = project(&e_loc);

    // z = e~ + U xi. The constraint `<e, x>_e >= alpha ||x||_e` becomes
    // `phi(xi) = xi^T (h h^T - alpha^2 I) xi + 2 (n - alpha^2) h^T xi + n (n - alpha^2) >= 0`.
    let basis = orthonormal_basis(&[c_proj, e_proj], project);
    let k = basis.len();
    let u_mat = DMatrix::from_columns(&basis);
    let h = u_mat.transpose() * &e_loc;
    let g = u_mat.transpose() * &c_loc;
    let mut curvature = &h * h.transpose();
    for i in 0..k {
        curvature[(i, i)] -= a2;
    }
    let slack = n - a2;

    // Stationarity `M xi + slack h = nu g` with `nu > 0`.
    let mut sys = DMatrix::zeros(k, k + 1);
    sys.view_mut((0, 0), (k, k)).copy_from(&curvature);
    sys.set_column(k, &(-&g));
    let rhs = -&h * slack;
    let (particular, null) = affine_line(&sys, &rhs)?;
    let phi = |xi: &DVector<f64>| -> f64 { xi.dot(&(&curvature * xi)) + 2.0 * slack * h.dot(xi) + n * slack };
    let (xp, xn) = (particular.rows(0, k).into_owned(), null.rows(0, k).into_owned());
    let quad = xn.dot(&(&curvature * &xn));
    let lin = 2.0 * (xp.dot(&(&curvature * &xn)) + slack * h.dot(&xn));
    let cst = phi(&xp);

    let mut best: Option<(f64, DVector<f64>, f64)> = None;
    for sigma in real_quadratic_roots(quad, lin, cst) {
        let u = &particular + &null * sigma;
        let xi = u.rows(0, k).into_owned();
        let nu = u[k];
            if !(n + h.dot(&xi) > 0.0 && nu > 0.0) {
            continue;
        }
        let obj = g.dot(&xi);
        if best.as_ref().is_none_or(|(o, _, _)| obj < *o) {
            best = Some((obj, xi, nu));
        }
    }
    let (obj, xi, nu) = best.ok_or(Error::NotInSwath)?;
    if nu <= MULTIPLIER_TOL * u_scale(&particular, &null) {
        return Err(Error::numerical("multiplier is numerically zero"));
    }

    let step_loc = &u_mat * &xi;
    let z = &e_loc + &step_loc;
    let x_e = e + frame.to_ambient(&step_loc);
    let x_norm_e = z.norm();
    let x_along_e = e_loc.dot(&z);
    let gap = -obj;
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::numerical(format!("non-positive gap {gap:e}")));
    }
    let s_loc = (&e_loc - &z * (a2 / x_along_e)) * (gap / slack);
    let s_e = frame.push_dual(&s_loc);
    let y_e = r
        .solve_upper_triangular(&(q.transpose() * (&c_loc - &s_loc)))
        .filter(|y| y.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::numerical("constraints are dependent in the local frame"))?;
    Ok(SubproblemSolution { x_e, y_e, s_e, lambda_mult: -nu, gap, x_norm_e, x_along_e })
}

fn u_scale(particular: &DVector<f64>, null: &DVector<f64>) -> f64 {
    particular.norm().max(null.norm()).max(1.0)
}

/// `<c, e - x_e>`.
pub fn duality_gap(c: &DVector<f64>, e: &DVector<f64>, x_e: &DVector<f64>) -> f64 {
    c.dot(&(e - x_e))
}

/// Whether `QP_e(alpha)` attains its optimum.
pub fn in_swath(oracle: &dyn BarrierOracle, prog: &ConicProgram, e: &DVector<f64>, alpha: f64) -> Result<bool> {
    match solve_qcp(oracle, prog, e, alpha) {
        Ok(_) => Ok(true),
        Err(Error::NotInSwath) => Ok(false),
        Err(err) => Err(err),
    }
}
