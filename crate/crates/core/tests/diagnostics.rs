mod common;

use affscale::diagnostics::{
    boundary_dual, conjecture_curve, decrease_bound_check, fd_check, membership_equiv_check, q_scaling_check, trace_q,
};
use affscale::io::gen_central_path_sdp;
use affscale::{schedule_constants, smat, solve_qcp, svec, DetBarrier, Error, HpBarrier, HpFamily};
use common::{assert_close, diag2, diag2_parts, SQRT7};
use nalgebra::{dvector, DMatrix, DVector};
use proptest::prelude::*;

fn diag2_normalized() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (oracle, prog, e) = diag2_parts();
    let sol = solve_qcp(&oracle, &prog, &e, 0.5).unwrap();
    (smat(&e), smat(&sol.x_e), smat(&sol.s_e) / sol.gap)
}

/// A point on the boundary of `K_E(alpha)` built from an arbitrary symmetric `y`.
fn boundary_point(e: &DMatrix<f64>, y: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
    let n = e.nrows() as f64;
    let inv = e.clone().try_inverse().unwrap();
    let z = y - e * (inv.dot(y) / n);
    let z_norm = (&inv * &z * &inv).dot(&z).sqrt();
    let a = alpha * z_norm / (n * n - alpha * alpha * n).sqrt();
    e * a + z
}

#[test]
fn trace_q_examples() {
    let (e, x, s) = diag2_normalized();
    assert_close(trace_q(&e, &x, &s, 0.0), 1.0 / 1.75, 1e-12);
    assert!((trace_q(&e, &x, &s, 0.0) - 0.571_429).abs() < 1e-6);
    assert_close(trace_q(&e, &x, &s, 1.0 / 6.0), 0.5, 1e-12);
    assert_eq!(trace_q(&e, &x, &DMatrix::zeros(2, 2), 0.0), 0.0);
}

#[test]
fn trace_q_is_quadratic() {
    let (e, x, s) = diag2_normalized();
    let q = |t: f64| trace_q(&e, &x, &s, t);
    let (t0, t1, t2, t3) = (0.0, 0.3, 0.7, 1.9);
    let lagrange = q(t0) * (t3 - t1) * (t3 - t2) / ((t0 - t1) * (t0 - t2))
        + q(t1) * (t3 - t0) * (t3 - t2) / ((t1 - t0) * (t1 - t2))
        + q(t2) * (t3 - t0) * (t3 - t1) / ((t2 - t0) * (t2 - t1));
    assert_close(lagrange, q(t3), 1e-10);
}

#[test]
fn q_scaling_on_worked_and_generated_instances() {
    let (_, _, e) = diag2_parts();
    let report = q_scaling_check(&diag2(), &smat(&e), 0.5, 11).unwrap();
    assert!(report.pass, "{report:?}");
    assert_eq!(report.samples, 11);
    let (sdp, e0) = gen_central_path_sdp(6, 8, 1.0, 3).unwrap();
    let report = q_scaling_check(&sdp, &e0, 0.5, 11).unwrap();
    assert!(report.pass && report.max_rel_err <= 1e-8, "{report:?}");
}

#[test]
fn membership_equivalence_on_diag2() {
    let e = DMatrix::identity(2, 2);
    let beta = schedule_constants(0.5, 2).unwrap().beta;
    let t_e = 1.0 / 6.0;
    let delta = t_e - 0.0625;
    let grid = [0.0, t_e - delta * 0.999, t_e, t_e + delta * 0.999, 2.0 * t_e, 1e3];
    let report = membership_equiv_check(&diag2(), &e, 0.5, beta, &grid).unwrap();
    assert_eq!(report.failures, 0);
    assert!(report.pass);
    let (e_m, x, s) = diag2_normalized();
    assert!(trace_q(&e_m, &x, &s, t_e) < 1.0 / (2.0 - beta * beta));
    assert!(trace_q(&e_m, &x, &s, 1e3) > 1.0 / (2.0 - beta * beta));
}

#[test]
fn decrease_bound_on_diag2() {
    let (e, x, _) = diag2_normalized();
    let grid: Vec<f64> = (1..=20).map(|i| 0.125 * i as f64 / 20.0).collect();
    let report = decrease_bound_check(&e, &x, 0.5, &grid).unwrap();
    assert!(report.pass, "{report:?}");
    assert_eq!(report.samples, 20);
    assert!(decrease_bound_check(&e, &x, 0.5, &[0.2]).is_err());
}

#[test]
fn boundary_dual_matches_subproblem_dual() {
    let (e, x, s) = diag2_normalized();
    let built = boundary_dual(&e, &x, 0.5).unwrap();
    assert!((built - s).amax() < 1e-12);
    let expected = DMatrix::from_diagonal(&dvector![(7.0 - SQRT7) / 14.0, (7.0 + SQRT7) / 14.0]);
    assert!((boundary_dual(&e, &x, 0.5).unwrap() - expected).amax() < 1e-12);
}

#[test]
fn finite_differences_for_every_family() {
    let product = HpBarrier::new(HpFamily::Product { d: 5 }).unwrap();
    let report = fd_check(&product, &DVector::from_element(5, 1.0), 1e-5).unwrap();
    assert!(report.pass && report.max_abs_err < 1e-7, "{report:?}");

    let g = DMatrix::from_fn(4, 4, |i, j| ((i * 4 + j) as f64 * 0.7).sin());
    let e = svec(&(&g * g.transpose() + DMatrix::identity(4, 4)));
    for oracle in [
        Box::new(DetBarrier::new(4).unwrap()) as Box<dyn affscale::BarrierOracle>,
        Box::new(HpBarrier::new(HpFamily::Determinant { n: 4 }).unwrap()),
    ] {
        assert!(fd_check(oracle.as_ref(), &e, 1e-5).unwrap().pass);
    }
    let soc = HpBarrier::new(HpFamily::SecondOrder { d: 3 }).unwrap();
    assert!(fd_check(&soc, &dvector![0.1, 0.0, 1.0], 1e-5).unwrap().pass);
    let esym = HpBarrier::new(HpFamily::ElementarySymmetric { d: 6, k: 3 }).unwrap();
    assert!(fd_check(&esym, &dvector![1.0, 0.8, 1.2, 0.9, 1.1, 1.3], 1e-5).unwrap().pass);
    assert!(matches!(fd_check(&soc, &dvector![1.0, 0.0, 0.5], 1e-5), Err(Error::NotInterior)));
}

#[test]
fn conjecture_curve_examples() {
    let (oracle, prog, e) = diag2_parts();
    let sol = solve_qcp(&oracle, &prog, &e, 0.5).unwrap();
    let values = conjecture_curve(&oracle, &e, &sol.x_e, &sol.s_e, &[0.0]).unwrap();
    assert_close(values[0].unwrap(), 1.0 / 1.75, 1e-12);

    let t_max = 1.0 / (SQRT7 - 1.0);
    let grid: Vec<f64> = (1..=50).map(|i| t_max * i as f64 / 51.0).collect();
    let curve = conjecture_curve(&oracle, &e, &sol.x_e, &sol.s_e, &grid).unwrap();
    assert!(curve.iter().all(|v| v.is_some_and(f64::is_finite)));
    let beyond = conjecture_curve(&oracle, &e, &sol.x_e, &sol.s_e, &[2.0 * t_max]).unwrap();
    assert_eq!(beyond, vec![None]);
    assert!(matches!(
        conjecture_curve(&oracle, &e, &sol.x_e, &DVector::zeros(3), &[0.0]),
        Err(Error::DomainError(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decrease_bound_on_random_boundary_points(n in 3usize..=8, entries in prop::collection::vec(-1.0f64..1.0, 64), center in prop::collection::vec(-0.5f64..0.5, 64), alpha in 0.1f64..0.95) {
        let g = DMatrix::from_fn(n, n, |i, j| center[i * 8 + j]);
        let e = &g * g.transpose() + DMatrix::identity(n, n);
        let raw = DMatrix::from_fn(n, n, |i, j| entries[i * 8 + j]);
        let x = boundary_point(&e, &(&raw + raw.transpose()), alpha);
        let lam = affscale::direction_eigs_sdp(&e, &x).unwrap();
        let x_norm = lam.iter().map(|l| l * l).sum::<f64>().sqrt();
        let grid: Vec<f64> = (1..=20).map(|i| alpha / x_norm * i as f64 / 20.0).collect();
        let report = decrease_bound_check(&e, &x, alpha, &grid).unwrap();
        prop_assert!(report.pass, "{:?}", report);
    }

    #[test]
    fn scaling_and_equivalence_on_generated_instances(seed in 0u64..10_000, n in 3usize..=7) {
        let (sdp, e0) = gen_central_path_sdp(n, n + 1, 1.0, seed).unwrap();
        let report = q_scaling_check(&sdp, &e0, 0.5, 11).unwrap();
        prop_assert!(report.pass, "{:?}", report);
        let beta = schedule_constants(0.5, n).unwrap().beta;
        let grid: Vec<f64> = (0..60).map(|i| -0.5 + 0.1 * i as f64).collect();
        let report = membership_equiv_check(&sdp, &e0, 0.5, beta, &grid).unwrap();
        prop_assert_eq!(report.failures, 0);
    }
}
