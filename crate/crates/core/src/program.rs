//! Linear data `(A, b, c)` of a conic program in ambient coordinates.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Relative singular-value cutoff used for rank decisions on instance data.
const RANK_TOL: f64 = 1e-10;

/// `min <c, x> s.t. A x = b, x in the cone`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicProgram {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

impl ConicProgram {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        check_dim(a.ncols(), c.len())?;
        Ok(ConicProgram { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_constraints(&self) -> usize {
        self.a.nrows()
    }

    /// Checks `b != 0`, full row rank of `A`, and `c` outside the row space of `A`.
    pub fn validate(&self) -> Result<()> {
        if self.num_constraints() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if self.b.amax() == 0.0 {
            return Err(Error::InvariantViolation("b is zero".into()));
        }
        if !full_row_rank(&self.a) {
            return Err(Error::InvariantViolation("constraints are linearly dependent".into()));
        }
        if row_space_residual(&self.a, &self.c) <= RANK_TOL * (1.0 + self.c.norm()) {
            return Err(Error::InvariantViolation("c lies in the row space of A".into()));
        }
        Ok(())
    }

    /// Relative residual `||A x - b|| / (1 + ||b||)`.
    pub fn feasibility_residual(&self, x: &DVector<f64>) -> f64 {
        (&self.a * x - &self.b).norm() / (1.0 + self.b.norm())
    }
}

/// Whether the rows of `a` are linearly independent.
pub fn full_row_rank(a: &DMatrix<f64>) -> bool {
    let m = a.nrows();
    if m == 0 || m > a.ncols() || a.iter().any(|v| !v.is_finite()) {
        return m == 0;
    }
    let sv = a.transpose().singular_values();
    let max = sv.max();
    max > 0.0 && sv.min() > RANK_TOL * max
}

/// Distance from `c` to the row space of `a`.
pub fn row_space_residual(a: &DMatrix<f64>, c: &DVector<f64>) -> f64 {
    let qr = a.transpose().qr();
    let q = qr.q();
    let proj = &q * (q.transpose() * c);
    (c - proj).norm()
}
