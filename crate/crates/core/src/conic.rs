//! Local-metric geometry shared by every backend.
//!
//! A barrier oracle induces the local inner product `<u, v>_e = <u, H(e) v>`
//! at each interior point `e`. The circular cones `K_e(alpha)` and their duals
//! are classified through that metric.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::hyperbolic::PowerSums;
use crate::sdp::{smat, svec};

/// Default relative tolerance used for cone classifications.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative pivot threshold for positive-definiteness checks.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Barrier `f = -ln p` of a hyperbolic polynomial together with the eigenvalue
/// map it induces.
pub trait BarrierOracle: Send + Sync {
    /// Ambient coordinate dimension `d`.
    fn dim(&self) -> usize;

    /// Polynomial degree `n`.
    fn degree(&self) -> usize;

    fn value(&self, e: &DVector<f64>) -> Result<f64>;

    fn gradient(&self, e: &DVector<f64>) -> Result<DVector<f64>>;

    fn hessian_apply(&self, e: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>>;

    fn hessian_solve(&self, e: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        let frame = self.local_frame(e)?;
        Ok(frame.to_ambient(&frame.pullback(w)))
    }

    /// Eigenvalues of `x` in direction `e`, sorted ascending.
    fn direction_eigs(&self, e: &DVector<f64>, x: &DVector<f64>) -> Result<Vec<f64>>;

    /// Power sums of the eigenvalues of `x` in direction `e`.
    fn power_sums(&self, e: &DVector<f64>, x: &DVector<f64>) -> Result<PowerSums> {
        Ok(PowerSums::from_roots(&self.direction_eigs(e, x)?))
    }

    /// Dense Hessian matrix at `e`, assembled column by column.
    fn hessian_matrix(&self, e: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for j in 0..d {
            let col = self.hessian_apply(e, &DVector::from_fn(d, |i, _| f64::from(i == j)))?;
            h.set_column(j, &col);
        }
        Ok(h)
    }

    /// A linear map `T` with `T^T H(e) T = I`.
    fn local_frame(&self, e: &DVector<f64>) -> Result<LocalFrame> {
        LocalFrame::from_hessian(self.hessian_matrix(e)?)
    }

    /// Whether `e` lies in the open hyperbolicity cone.
    fn is_interior(&self, e: &DVector<f64>) -> bool;

    /// Family-native test for membership in the closed cone, with slack `tol`.
    fn contains(&self, x: &DVector<f64>, tol: f64) -> bool;
}

/// Coordinates in which the local metric at a fixed point becomes Euclidean.
///
/// `to_ambient` applies `T`, `pullback` applies `T^T`, and `to_local` applies
/// `T^{-1}`. Every variant satisfies `T^T H(e) T = I`.
#[derive(Clone, Debug)]
pub enum LocalFrame {
    /// `T z = svec(L smat(z) L^T)` with `E = L L^T`.
    Congruence { chol: DMatrix<f64> },
    /// `T = diag(scale)`.
    Diagonal { scale: DVector<f64> },
    /// Symmetric `T` stored with its inverse.
    Symmetric { t: DMatrix<f64>, t_inv: DMatrix<f64> },
    /// `T = L^{-T}` with `H = L L^T`.
    Cholesky { factor: DMatrix<f64> },
}

impl LocalFrame {
    /// Builds a frame from a dense Hessian by Cholesky factorization.
    pub fn from_hessian(h: DMatrix<f64>) -> Result<Self> {
        let scale = h.diagonal().amax();
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::NotInterior);
        }
        let sym_err = (&h - h.transpose()).amax();
        if sym_err > 1e-8 * scale {
            return Err(Error::numerical("Hessian is not symmetric"));
        }
        let chol = h.cholesky().ok_or(Error::NotInterior)?;
        let factor = chol.unpack();
        let min_pivot = factor.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
        if min_pivot <= PIVOT_THRESHOLD * scale {
            return Err(Error::NotInterior);
        }
        Ok(LocalFrame::Cholesky { factor })
    }

    /// Cholesky frame for a Hessian taken at a point already known to be
    /// interior, accepting any positive pivots. Near the boundary the Hessian
    /// condition number legitimately exceeds the pivot threshold.
    pub fn from_interior_hessian(h: DMatrix<f64>) -> Result<Self> {
        let chol = h.cholesky().ok_or_else(|| Error::numerical("Hessian factorization failed"))?;
        Ok(LocalFrame::Cholesky { factor: chol.unpack() })
    }

    pub fn to_ambient(&self, z: &DVector<f64>) -> DVector<f64> {
        match self {
            LocalFrame::Congruence { chol } => {
                let zm = smat(z);
                svec(&(chol * zm * chol.transpose()))
            }
            LocalFrame::Diagonal { scale } => scale.component_mul(z),
            LocalFrame::Symmetric { t, .. } => t * z,
            LocalFrame::Cholesky { factor } => factor
                .transpose()
                .solve_upper_triangular(z)
                .expect("factor has a positive diagonal"),
        }
    }

    pub fn pullback(&self, c: &DVector<f64>) -> DVector<f64> {
        match self {
            LocalFrame::Congruence { chol } => {
                let cm = smat(c);
                svec(&(chol.transpose() * cm * chol))
            }
            LocalFrame::Diagonal { scale } => scale.component_mul(c),
            LocalFrame::Symmetric { t, .. } => t * c,
            LocalFrame::Cholesky { factor } => factor
                .solve_lower_triangular(c)
                .expect("factor has a positive diagonal"),
        }
    }

    /// `T^{-T} s`, the inverse of [`LocalFrame::pullback`].
    pub fn push_dual(&self, s: &DVector<f64>) -> DVector<f64> {
        match self {
            LocalFrame::Congruence { chol } => {
                let sm = smat(s);
                let left = chol
                    .transpose()
                    .solve_upper_triangular(&sm)
                    .expect("factor has a positive diagonal");
                let both = chol
                    .transpose()
                    .solve_upper_triangular(&left.transpose())
                    .expect("factor has a positive diagonal");
                svec(&both)
            }
            LocalFrame::Diagonal { scale } => s.component_div(scale),
            LocalFrame::Symmetric { t_inv, .. } => t_inv * s,
            LocalFrame::Cholesky { factor } => factor * s,
        }
    }

    pub fn to_local(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            LocalFrame::Congruence { chol } => {
                let xm = smat(x);
                let left = chol
                    .solve_lower_triangular(&xm)
                    .expect("factor has a positive diagonal");
                let both = chol
                    .solve_lower_triangular(&left.transpose())
                    .expect("factor has a positive diagonal");
                svec(&both)
            }
            LocalFrame::Diagonal { scale } => x.component_div(scale),
            LocalFrame::Symmetric { t_inv, .. } => t_inv * x,
            LocalFrame::Cholesky { factor } => factor.transpose() * x,
        }
    }
}

/// Three-way classification against a cone with a tolerance band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

impl Membership {
    fn classify(margin: f64, band: f64) -> Self {
        if margin > band {
            Membership::Interior
        } else if margin >= -band {
            Membership::Boundary
        } else {
            Membership::Outside
        }
    }
}

/// The circular cone `K_e(alpha) = {x : <e,x>_e >= alpha ||x||_e}`.
pub struct QuadCone<'a> {
    oracle: &'a dyn BarrierOracle,
    center: &'a DVector<f64>,
    alpha: f64,
}

impl<'a> QuadCone<'a> {
    pub fn new(oracle: &'a dyn BarrierOracle, center: &'a DVector<f64>, alpha: f64) -> Result<Self> {
        check_dim(oracle.dim(), center.len())?;
        let n = oracle.degree() as f64;
        if !(alpha > 0.0 && alpha < n.sqrt()) {
            return Err(Error::domain(format!("alpha = {alpha} outside (0, sqrt(n))")));
        }
        Ok(QuadCone { oracle, center, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn center(&self) -> &DVector<f64> {
        self.center
    }

    /// Parameter of the primal cone whose Hessian image is the dual cone.
    pub fn dual_alpha(&self) -> f64 {
        (self.oracle.degree() as f64 - self.alpha * self.alpha).sqrt()
    }

    pub fn classify_primal(&self, x: &DVector<f64>, tol: f64) -> Result<Membership> {
        check_dim(self.oracle.dim(), x.len())?;
        let hx = self.oracle.hessian_apply(self.center, x)?;
        Ok(classify_with_hx(self.center, x, &hx, self.alpha, tol))
    }

    pub fn classify_dual(&self, s: &DVector<f64>, tol: f64) -> Result<Membership> {
        check_dim(self.oracle.dim(), s.len())?;
        // With w = H(e)^{-1} s: <e, w>_e = <e, s> and ||w||_e = |T^T s|.
        let pulled = self.oracle.local_frame(self.center)?.pullback(s);
        if pulled.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("dual vector is not finite in the local frame"));
        }
        let norm = pulled.norm();
        let along = self.center.dot(s);
        Ok(Membership::classify(along - self.dual_alpha() * norm, tol * (1.0 + norm)))
    }
}

fn classify_with_hx(e: &DVector<f64>, x: &DVector<f64>, hx: &DVector<f64>, alpha: f64, tol: f64) -> Membership {
    let along = e.dot(hx);
    let norm = x.dot(hx).max(0.0).sqrt();
    Membership::classify(along - alpha * norm, tol * (1.0 + norm))
}

/// `<u, H(e) v>`.
pub fn local_inner(oracle: &dyn BarrierOracle, e: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    check_dim(oracle.dim(), u.len())?;
    Ok(u.dot(&oracle.hessian_apply(e, v)?))
}

/// `||x||_e`.
pub fn local_norm(oracle: &dyn BarrierOracle, e: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
    Ok(local_inner(oracle, e, x, x)?.max(0.0).sqrt())
}

pub fn primal_cone_member(cone: &QuadCone<'_>, x: &DVector<f64>, tol: f64) -> Result<Membership> {
    cone.classify_primal(x, tol)
}

pub fn dual_cone_member(cone: &QuadCone<'_>, s: &DVector<f64>, tol: f64) -> Result<Membership> {
    cone.classify_dual(s, tol)
}

/// Step-size schedule derived from `alpha` and the degree.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScheduleConstants {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub ratio_bound: f64,
}

impl ScheduleConstants {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha = {alpha} outside (0, 1)")));
        }
        if n < 2 {
            return Err(Error::domain("degree must be at least 2"));
        }
        let kappa = alpha * ((1.0 - alpha) / 8.0).sqrt();
        Ok(ScheduleConstants {
            alpha,
            beta: next_alpha(alpha),
            kappa,
            ratio_bound: 1.0 - kappa / (kappa + (n as f64).sqrt()),
        })
    }
}

pub fn schedule_constants(alpha: f64, n: usize) -> Result<ScheduleConstants> {
    ScheduleConstants::new(alpha, n)
}

/// `alpha * sqrt((1 + alpha) / 2)`, the relaxed cone parameter.
pub fn next_alpha(alpha: f64) -> f64 {
    alpha * ((1.0 + alpha) / 2.0).sqrt()
}
