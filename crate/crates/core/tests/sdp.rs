mod common;

use affscale::sdp::{order_from_dim, pd_factor, svec_dim};
use affscale::{direction_eigs_sdp, smat, svec, BarrierOracle, DetBarrier, Error, SdpInstance};
use common::{assert_close, diag, diag2, SQRT7};
use nalgebra::{dmatrix, dvector, DMatrix};
use proptest::prelude::*;

fn sym_from(entries: &[f64], n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_row_slice(n, n, &entries[..n * n]);
    (&g + g.transpose()) * 0.5
}

#[test]
fn barrier_at_identity() {
    let oracle = DetBarrier::new(3).unwrap();
    let e = svec(&DMatrix::identity(3, 3));
    assert!((oracle.gradient(&e).unwrap() + &e).amax() < 1e-15);
    assert!(oracle.value(&e).unwrap().abs() < 1e-15);
}

#[test]
fn barrier_examples_at_diag12() {
    let oracle = DetBarrier::new(2).unwrap();
    let e = diag(&[1.0, 2.0]);
    let h_i = oracle.hessian_apply(&e, &diag(&[1.0, 1.0])).unwrap();
    assert!((smat(&h_i) - dmatrix![1.0, 0.0; 0.0, 0.25]).amax() < 1e-15);
    assert_close(oracle.value(&e).unwrap(), -(2f64.ln()), 1e-15);
}

#[test]
fn barrier_rejects_non_interior_points() {
    let oracle = DetBarrier::new(2).unwrap();
    assert!(matches!(oracle.value(&diag(&[1.0, -1.0])), Err(Error::NotInterior)));
    assert!(matches!(pd_factor(&dmatrix![1.0, 0.0; 0.0, 0.0]), Err(Error::NotInterior)));
}

#[test]
fn direction_eigenvalue_examples() {
    let id = DMatrix::identity(2, 2);
    assert_eq!(direction_eigs_sdp(&id, &dmatrix![2.0, 0.0; 0.0, 0.0]).unwrap(), vec![0.0, 2.0]);
    let lam = direction_eigs_sdp(&id, &dmatrix![1.0 + SQRT7, 0.0; 0.0, 1.0 - SQRT7]).unwrap();
    assert_close(lam[0], 1.0 - SQRT7, 1e-14);
    assert_close(lam[1], 1.0 + SQRT7, 1e-14);
    let e = dmatrix![2.0, 0.5, 0.0; 0.5, 1.0, 0.2; 0.0, 0.2, 3.0];
    for l in direction_eigs_sdp(&e, &e).unwrap() {
        assert_close(l, 1.0, 1e-13);
    }
}

#[test]
fn svec_dimension_helpers() {
    assert_eq!(svec_dim(4), 10);
    assert_eq!(order_from_dim(10), Some(4));
    assert_eq!(order_from_dim(11), None);
}

#[test]
fn instance_maps_match_dense_definitions() {
    let sdp = SdpInstance::new(
        dmatrix![1.0, 0.5; 0.5, 2.0],
        vec![dmatrix![1.0, 0.0; 0.0, 1.0], dmatrix![0.0, 1.0; 1.0, 0.0]],
        dvector![2.0, 0.5],
    )
    .unwrap();
    let x = dmatrix![1.0, 0.25; 0.25, 1.0];
    assert!((sdp.apply_constraints(&x) - dvector![2.0, 0.5]).amax() < 1e-15);
    let y = dvector![0.3, -0.7];
    let adj = sdp.adjoint(&y);
    assert!((adj - dmatrix![0.3, -0.7; -0.7, 0.3]).amax() < 1e-15);
    let prog = sdp.to_program();
    assert!((&prog.a * svec(&x) - &prog.b).amax() < 1e-14);
    assert!((prog.c.dot(&svec(&x)) - sdp.c.dot(&x)).abs() < 1e-14);
    assert_eq!(sdp.order(), 2);
    assert_eq!(sdp.num_constraints(), 2);
    diag2().validate().unwrap();
}

#[test]
fn instance_invariants_are_enforced() {
    let zero_b = SdpInstance::new(dmatrix![1.0, 0.0; 0.0, 2.0], vec![DMatrix::identity(2, 2)], dvector![0.0]);
    assert!(zero_b.and_then(|s| s.validate()).is_err());
    let dependent = SdpInstance::new(
        dmatrix![1.0, 0.0; 0.0, 2.0],
        vec![DMatrix::identity(2, 2), DMatrix::identity(2, 2) * 2.0],
        dvector![1.0, 2.0],
    );
    assert!(dependent.and_then(|s| s.validate()).is_err());
    let c_in_rowspace = SdpInstance::new(DMatrix::identity(2, 2), vec![DMatrix::identity(2, 2)], dvector![2.0]);
    assert!(c_in_rowspace.and_then(|s| s.validate()).is_err());
}

proptest! {
    #[test]
    fn svec_is_an_isometry(a in prop::collection::vec(-3.0f64..3.0, 16), b in prop::collection::vec(-3.0f64..3.0, 16)) {
        let (x, y) = (sym_from(&a, 4), sym_from(&b, 4));
        prop_assert!((svec(&x).dot(&svec(&y)) - (&x * &y).trace()).abs() < 1e-12);
        prop_assert!((smat(&svec(&x)) - &x).amax() < 1e-15);
    }

    #[test]
    fn direction_eigs_match_generalized_eigenproblem(a in prop::collection::vec(-1.0f64..1.0, 9), b in prop::collection::vec(-2.0f64..2.0, 9)) {
        let g = DMatrix::from_row_slice(3, 3, &a);
        let e = &g * g.transpose() + DMatrix::identity(3, 3);
        let x = sym_from(&b, 3);
        let lam = direction_eigs_sdp(&e, &x).unwrap();
        let inv_sqrt = e.clone().symmetric_eigen();
        let root = &inv_sqrt.eigenvectors * DMatrix::from_diagonal(&inv_sqrt.eigenvalues.map(|v| 1.0 / v.sqrt())) * inv_sqrt.eigenvectors.transpose();
        let mut oracle: Vec<f64> = (&root * &x * &root).symmetric_eigenvalues().iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        for (l, o) in lam.iter().zip(&oracle) {
            prop_assert!((l - o).abs() < 1e-10 * (1.0 + o.abs()));
        }
        prop_assert!(lam.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn hessian_is_congruence_by_inverse(a in prop::collection::vec(-1.0f64..1.0, 9), b in prop::collection::vec(-2.0f64..2.0, 9)) {
        let g = DMatrix::from_row_slice(3, 3, &a);
        let e = &g * g.transpose() + DMatrix::identity(3, 3);
        let v = sym_from(&b, 3);
        let inv = e.clone().try_inverse().unwrap();
        let oracle = DetBarrier::new(3).unwrap();
        let hv = smat(&oracle.hessian_apply(&svec(&e), &svec(&v)).unwrap());
        prop_assert!((hv - &inv * &v * &inv).amax() < 1e-12);
        let back = oracle.hessian_solve(&svec(&e), &svec(&(&inv * &v * &inv))).unwrap();
        prop_assert!((smat(&back) - &v).amax() < 1e-10);
        let grad = smat(&oracle.gradient(&svec(&e)).unwrap());
        prop_assert!((grad + &inv).amax() < 1e-12);
    }
}
