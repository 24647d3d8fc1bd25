#![allow(dead_code)]

use affscale::{svec, ConicProgram, DetBarrier, SdpInstance};
use nalgebra::{dmatrix, dvector, DMatrix, DVector};

pub const SQRT7: f64 = 2.645_751_311_064_590_6;

/// `min tr(diag(1,2) X)  s.t.  tr(X) = 2,  X psd`, started at the identity.
pub fn diag2() -> SdpInstance {
    SdpInstance::new(dmatrix![1.0, 0.0; 0.0, 2.0], vec![DMatrix::identity(2, 2)], dvector![2.0]).unwrap()
}

pub fn diag2_parts() -> (DetBarrier, ConicProgram, DVector<f64>) {
    (DetBarrier::new(2).unwrap(), diag2().to_program(), svec(&DMatrix::identity(2, 2)))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!(rel_err(a, b) <= tol, "{a} vs {b}: relative error {:e} > {tol:e}", rel_err(a, b));
}

pub fn diag(v: &[f64]) -> DVector<f64> {
    svec(&DMatrix::from_diagonal(&DVector::from_column_slice(v)))
}
