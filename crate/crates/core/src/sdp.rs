//! Semidefinite backend: scaled symmetric vectorization, the `-ln det`
//! barrier and SDP instances.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::conic::{BarrierOracle, LocalFrame, PIVOT_THRESHOLD};
use crate::error::{check_dim, Error, Result};
use crate::program::ConicProgram;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Dimension of the coordinate space of `n x n` symmetric matrices.
pub fn svec_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Recovers the matrix order from a coordinate dimension.
pub fn order_from_dim(d: usize) -> Option<usize> {
    let n = ((8.0 * d as f64 + 1.0).sqrt() - 1.0) / 2.0;
    let n = n.round() as usize;
    (svec_dim(n) == d).then_some(n)
}

/// Scaled vectorization of the lower triangle, off-diagonals weighted by `sqrt(2)`,
/// so that the dot product of coordinates equals the trace inner product.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut v = DVector::zeros(svec_dim(n));
    let mut k = 0;
    for i in 0..n {
        for j in 0..=i {
            v[k] = if i == j { m[(i, i)] } else { SQRT2 * 0.5 * (m[(i, j)] + m[(j, i)]) };
            k += 1;
        }
    }
    v
}

/// Inverse of [`svec`].
pub fn smat(v: &DVector<f64>) -> DMatrix<f64> {
    let n = order_from_dim(v.len()).expect("length is a triangular number");
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..=i {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let w = v[k] / SQRT2;
                m[(i, j)] = w;
                m[(j, i)] = w;
            }
            k += 1;
        }
    }
    m
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Cholesky factor of a strictly positive definite matrix, with a pivot check.
pub fn pd_factor(e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = e.diagonal().amax();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::NotInterior);
    }
    let l = e.clone().cholesky().ok_or(Error::NotInterior)?.unpack();
    if l.diagonal().iter().any(|&p| p * p <= PIVOT_THRESHOLD * scale) {
        return Err(Error::NotInterior);
    }
    Ok(l)
}

fn inverse_from_factor(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("factor has a positive diagonal");
    symmetrize(linv.transpose() * linv)
}

/// Eigenvalues of `X` in direction `E`, i.e. of `E^{-1/2} X E^{-1/2}`, ascending.
pub fn direction_eigs_sdp(e: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    let l = pd_factor(e)?;
    let left = l.solve_lower_triangular(x).ok_or(Error::NotInterior)?;
    let scaled = l.solve_lower_triangular(&left.transpose()).ok_or(Error::NotInterior)?;
    let mut eigs: Vec<f64> = SymmetricEigen::new(symmetrize(scaled)).eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// The `-ln det` barrier on `n x n` symmetric matrices in svec coordinates.
#[derive(Clone, Copy, Debug)]
pub struct DetBarrier {
    n: usize,
}

impl DetBarrier {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("matrix order must be at least 2"));
        }
        Ok(DetBarrier { n })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    fn factor(&self, e: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), e.len())?;
        pd_factor(&smat(e))
    }
}

pub fn det_barrier_oracle(n: usize) -> Result<DetBarrier> {
    DetBarrier::new(n)
}

impl BarrierOracle for DetBarrier {
    fn dim(&self) -> usize {
        svec_dim(self.n)
    }

    fn degree(&self) -> usize {
        self.n
    }

    fn value(&self, e: &DVector<f64>) -> Result<f64> {
        let l = self.factor(e)?;
        Ok(-2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>())
    }

    fn gradient(&self, e: &DVector<f64>) -> Result<DVector<f64>> {
        let l = self.factor(e)?;
        Ok(-svec(&inverse_from_factor(&l)))
    }

    fn hessian_apply(&self, e: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), v.len())?;
        let inv = inverse_from_factor(&self.factor(e)?);
        Ok(svec(&symmetrize(&inv * smat(v) * &inv)))
    }

    fn hessian_solve(&self, e: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), w.len())?;
        self.factor(e)?;
        let em = smat(e);
        Ok(svec(&symmetrize(&em * smat(w) * &em)))
    }

    fn direction_eigs(&self, e: &DVector<f64>, x: &DVector<f64>) -> Result<Vec<f64>> {
        check_dim(self.dim(), e.len())?;
        check_dim(self.dim(), x.len())?;
        direction_eigs_sdp(&smat(e), &smat(x))
    }

    fn local_frame(&self, e: &DVector<f64>) -> Result<LocalFrame> {
        Ok(LocalFrame::Congruence { chol: self.factor(e)? })
    }

    fn is_interior(&self, e: &DVector<f64>) -> bool {
        self.factor(e).is_ok()
    }

    fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let m = smat(x);
        let scale = m.norm();
        let min = SymmetricEigen::new(m).eigenvalues.min();
        min >= -tol * (1.0 + scale)
    }
}

/// `min tr(C X) s.t. tr(A_i X) = b_i, X PSD`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpInstance {
    pub c: DMatrix<f64>,
    pub constraints: Vec<DMatrix<f64>>,
    pub b: DVector<f64>,
    /// SDPA block structure the dense block was assembled from, if any.
    pub blocks: Option<Vec<i64>>,
}

impl SdpInstance {
    pub fn new(c: DMatrix<f64>, constraints: Vec<DMatrix<f64>>, b: DVector<f64>) -> Result<Self> {
        let n = c.nrows();
        if c.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.ncols() });
        }
        check_dim(constraints.len(), b.len())?;
        for a in &constraints {
            check_dim(n, a.nrows())?;
            check_dim(n, a.ncols())?;
        }
        Ok(SdpInstance {
            c: symmetrize(c),
            constraints: constraints.into_iter().map(symmetrize).collect(),
            b,
            blocks: None,
        })
    }

    pub fn order(&self) -> usize {
        self.c.nrows()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// `A(X) = (tr(A_i X))_i`.
    pub fn apply_constraints(&self, x: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.constraints.len(), self.constraints.iter().map(|a| a.dot(x)))
    }

    /// `A*(y) = sum_i y_i A_i`.
    pub fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let n = self.order();
        self.constraints.iter().zip(y.iter()).fold(DMatrix::zeros(n, n), |acc, (a, yi)| acc + a * *yi)
    }

    /// Linear data in svec coordinates.
    pub fn to_program(&self) -> ConicProgram {
        let d = svec_dim(self.order());
        let mut a = DMatrix::zeros(self.constraints.len(), d);
        for (i, ai) in self.constraints.iter().enumerate() {
            a.set_row(i, &svec(ai).transpose());
        }
        ConicProgram { a, b: self.b.clone(), c: svec(&self.c) }
    }

    pub fn validate(&self) -> Result<()> {
        self.to_program().validate()
    }
}
