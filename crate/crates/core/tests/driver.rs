mod common;

use affscale::conic::next_alpha;
use affscale::driver::{alpha_reduction_bound, halving_violations, halving_window, ratio_bound_violations};
use affscale::io::gen_central_path_sdp;
use affscale::{
    alpha_reduction_run, duality_gap, in_swath, next_iterate, run, schedule_constants, smat, solve_qcp, step_length,
    step_poly_coeffs, svec, DetBarrier, Error, HpBarrier, HpFamily, PowerSums, RunStatus, SolverConfig, StepMode,
};
use common::{assert_close, diag, diag2_parts, SQRT7};
use proptest::prelude::*;

#[test]
fn step_polynomial_examples() {
    let poly = step_poly_coeffs(&PowerSums::from_roots(&[2.0, 0.0]), 0.5, 2).unwrap();
    assert_eq!((poly.a, poly.b, poly.c), (9.0, -15.0, 7.0));
    let poly = step_poly_coeffs(&PowerSums::from_roots(&[1.0 + SQRT7, 1.0 - SQRT7]), 0.5, 2).unwrap();
    assert_close(poly.a, 31.5, 1e-14);
    assert_close(poly.b, -10.5, 1e-14);
    assert_close(poly.c, 7.0, 1e-15);
    let ps = PowerSums { p1: 2.0, p2: 16.0, p3: 44.0, p4: 184.0 };
    assert_eq!(step_poly_coeffs(&ps, 0.5, 2).unwrap().c, 7.0);
}

#[test]
fn step_polynomial_rejects_bad_power_sums() {
    let ps = PowerSums { p1: -1.0, p2: 1.0, p3: -1.0, p4: 1.0 };
    assert!(matches!(step_poly_coeffs(&ps, 0.5, 2), Err(Error::DomainError(_))));
    let flat = PowerSums { p1: 1.0, p2: 0.0, p3: 0.0, p4: 0.0 };
    assert!(matches!(step_poly_coeffs(&flat, 0.0, 2), Err(Error::ConvexityViolation(_))));
}

#[test]
fn step_length_examples() {
    let first = step_poly_coeffs(&PowerSums::from_roots(&[2.0, 0.0]), 0.5, 2).unwrap();
    assert_close(step_length(&first, 0.5, 2.0, StepMode::QTildeMinimizer).unwrap(), 5.0 / 6.0, 1e-15);
    let diag2 = step_poly_coeffs(&PowerSums::from_roots(&[1.0 + SQRT7, 1.0 - SQRT7]), 0.5, 2).unwrap();
    assert_close(step_length(&diag2, 0.5, 4.0, StepMode::QTildeMinimizer).unwrap(), 1.0 / 6.0, 1e-14);
    assert_eq!(step_length(&diag2, 0.5, 4.0, StepMode::FixedHalfAlpha).unwrap(), 0.0625);
    assert!(matches!(
        step_length(&diag2, 0.5, 0.5, StepMode::QTildeMinimizer),
        Err(Error::StepBoundViolation { .. })
    ));
}

#[test]
fn next_iterate_examples() {
    let e = diag(&[1.0, 1.0]);
    let x = diag(&[1.0 + SQRT7, 1.0 - SQRT7]);
    let next = smat(&next_iterate(&e, &x, 1.0 / 6.0).unwrap());
    assert_close(next[(0, 0)], (7.0 + SQRT7) / 7.0, 1e-14);
    assert_close(next[(1, 1)], (7.0 - SQRT7) / 7.0, 1e-14);
    assert!((next_iterate(&e, &x, 1e-14).unwrap() - &e).amax() < 1e-12);
    assert_eq!(next_iterate(&e, &e, 0.3).unwrap(), e);
    assert!(next_iterate(&e, &x, 0.0).is_err());
}

#[test]
fn duality_gap_examples() {
    let (_, prog, e) = diag2_parts();
    let x = diag(&[1.0 + SQRT7, 1.0 - SQRT7]);
    assert_close(duality_gap(&prog.c, &e, &x), SQRT7, 1e-15);
    assert_eq!(duality_gap(&prog.c, &e, &e), 0.0);
    assert_close(duality_gap(&(&prog.c * 2.0), &e, &x), 2.0 * SQRT7, 1e-15);
}

#[test]
fn diag2_one_step() {
    let (oracle, prog, e) = diag2_parts();
    let config = SolverConfig { max_iters: 1, ..SolverConfig::default() };
    let result = run(&oracle, &prog, &e, &config).unwrap();
    assert_eq!(result.status, RunStatus::MaxIters);
    assert_eq!(result.iterations(), 1);
    let row = &result.trace[0];
    assert_close(row.gap, SQRT7, 1e-12);
    assert_close(row.t, 1.0 / 6.0, 1e-12);
    assert_close(row.qtilde.a, 31.5, 1e-12);
    assert!(result.final_gap < SQRT7);
    assert!(row.primal_decrease && row.dual_increase && row.dual_carry_over);
    assert_close(row.gap, row.primal_obj - row.dual_obj, 1e-12);
    let e1 = smat(&result.final_e);
    assert_close(e1[(0, 0)], (7.0 + SQRT7) / 7.0, 1e-12);
}

#[test]
fn generated_instance_converges_cleanly() {
    let (sdp, e0) = gen_central_path_sdp(10, 20, 1.0, 7).unwrap();
    let oracle = DetBarrier::new(10).unwrap();
    let result = run(&oracle, &sdp.to_program(), &svec(&e0), &SolverConfig::default()).unwrap();
    assert_eq!(result.status, RunStatus::Converged);
    assert!(result.iterations() <= 500);
    assert!(result.final_gap <= 1e-8 * result.initial_gap());
    assert_eq!(result.violations.total(), 0, "{:?}", result.violations);
    let window = halving_window(result.schedule.ratio_bound);
    assert_eq!(halving_violations(&result.gaps(), window), 0);
    for row in &result.trace {
        assert!((row.gap - (row.primal_obj - row.dual_obj)).abs() <= 1e-8 * row.primal_obj.abs().max(row.gap));
        assert!(row.qtilde.b < 0.0);
    }
}

#[test]
fn fixed_step_mode_stays_in_the_swath() {
    let (sdp, e0) = gen_central_path_sdp(5, 6, 1.0, 4).unwrap();
    let oracle = DetBarrier::new(5).unwrap();
    let config = SolverConfig { step_mode: StepMode::FixedHalfAlpha, max_iters: 40, ..SolverConfig::default() };
    let result = run(&oracle, &sdp.to_program(), &svec(&e0), &config).unwrap();
    assert_eq!(result.status, RunStatus::MaxIters);
    assert_eq!(result.violations.total(), 0, "{:?}", result.violations);
}

#[test]
fn determinant_family_reproduces_sdp_gaps() {
    let (sdp, e0) = gen_central_path_sdp(4, 6, 1.0, 12).unwrap();
    let prog = sdp.to_program();
    let e0 = svec(&e0);
    let config = SolverConfig::default();
    let native = run(&DetBarrier::new(4).unwrap(), &prog, &e0, &config).unwrap();
    let hp = run(&HpBarrier::new(HpFamily::Determinant { n: 4 }).unwrap(), &prog, &e0, &config).unwrap();
    assert_eq!(native.status, RunStatus::Converged);
    assert_eq!(native.iterations(), hp.iterations());
    for (a, b) in native.gaps().iter().zip(hp.gaps()) {
        assert!((a - b).abs() <= 1e-6 * a);
    }
}

#[test]
fn run_rejects_bad_starts() {
    let (oracle, prog, _) = diag2_parts();
    assert!(matches!(run(&oracle, &prog, &diag(&[2.0, 0.0]), &SolverConfig::default()), Err(Error::NotInterior)));
    let bad = SolverConfig { alpha: 1.0, ..SolverConfig::default() };
    assert!(run(&oracle, &prog, &diag(&[1.0, 1.0]), &bad).is_err());
}

#[test]
fn alpha_schedule_and_bound() {
    assert!((next_alpha(0.5) - 0.433_012_7).abs() < 1e-7);
    assert_eq!(alpha_reduction_bound(0.9, 0.3), 33);
    let mut alpha = 0.9;
    let mut steps = 0;
    while alpha > 0.3 {
        alpha = next_alpha(alpha);
        steps += 1;
    }
    assert!(steps <= 33);
}

#[test]
fn alpha_reduction_lands_in_the_target_swath() {
    let (sdp, e0) = gen_central_path_sdp(5, 8, 1.0, 21).unwrap();
    let oracle = DetBarrier::new(5).unwrap();
    let prog = sdp.to_program();
    for (alpha0, target) in [(0.9, 0.3), (0.99, 0.5), (0.6, 0.1)] {
        let out = alpha_reduction_run(&oracle, &prog, &svec(&e0), alpha0, target).unwrap();
        assert!(out.iterations <= out.bound);
        assert!(out.final_alpha <= target);
        assert!(in_swath(&oracle, &prog, &out.e, target).unwrap());
    }
    assert!(alpha_reduction_run(&oracle, &prog, &svec(&e0), 1.0, 0.5).is_err());
}

#[test]
fn ratio_and_halving_counters() {
    let sc = schedule_constants(0.5, 4).unwrap();
    let geometric: Vec<f64> = (0..30).map(|i| 0.5f64.powi(i)).collect();
    assert_eq!(ratio_bound_violations(&geometric, sc.ratio_bound), 0);
    assert_eq!(halving_violations(&geometric, 1), 0);
    let stalled = vec![1.0, 0.99, 0.98, 0.97, 0.96, 0.95];
    assert_eq!(ratio_bound_violations(&stalled, sc.ratio_bound), 4);
    assert_eq!(halving_violations(&stalled, 2), 4);
    assert_eq!(halving_window(sc.ratio_bound), (2.0 * 2f64.ln() / -sc.ratio_bound.ln()).ceil() as usize);
}

#[test]
fn step_interval_keeps_iterates_interior_and_in_swath() {
    let (sdp, e0) = gen_central_path_sdp(6, 8, 1.0, 9).unwrap();
    let oracle = DetBarrier::new(6).unwrap();
    let prog = sdp.to_program();
    let e = svec(&e0);
    let alpha = 0.5;
    let sol = solve_qcp(&oracle, &prog, &e, alpha).unwrap();
    let lam = affscale::direction_eigs_sdp(&e0, &smat(&sol.x_e)).unwrap();
    let poly = step_poly_coeffs(&PowerSums::from_roots(&lam), alpha, 6).unwrap();
    let t_e = poly.minimizer();
    let delta = t_e - 0.5 * alpha / sol.x_norm_e;
    assert!(delta > 0.0);
    let beta = schedule_constants(alpha, 6).unwrap().beta;
    for i in 0..10 {
        let tau = t_e - delta + 2.0 * delta * (i as f64 + 0.5) / 10.0;
        let next = next_iterate(&e, &sol.x_e, tau).unwrap();
        assert!(affscale::BarrierOracle::is_interior(&oracle, &next));
        assert!(in_swath(&oracle, &prog, &next, beta).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_polynomial_value_and_slope_at_zero(roots in prop::collection::vec(-3.0f64..3.0, 2..8), alpha in 0.05f64..0.95) {
        let ps = PowerSums::from_roots(&roots);
        prop_assume!(ps.p1 > 1e-3);
        let boundary_ok = (ps.p1 - alpha * ps.p2.sqrt()).abs() < 1e-6 * ps.p1;
        let n = roots.len();
        if let Ok(poly) = step_poly_coeffs(&ps, alpha, n) {
            prop_assert_eq!(poly.eval(0.0), poly.c);
            prop_assert!((poly.c - (n as f64 - alpha * alpha) * ps.p1 * ps.p1).abs() <= 1e-12 * poly.c.abs());
            if boundary_ok {
                prop_assert!(poly.b < 0.0);
            }
        }
    }

    #[test]
    fn update_preserves_feasibility(t in 0.01f64..5.0) {
        let (oracle, prog, e) = diag2_parts();
        let sol = solve_qcp(&oracle, &prog, &e, 0.5).unwrap();
        let next = next_iterate(&e, &sol.x_e, t).unwrap();
        prop_assert!((&prog.a * &next - &prog.b).amax() < 1e-12);
    }
}

#[test]
fn hp_product_family_run_is_clean() {
    let instance = affscale::io::gen_hp_instance(HpFamily::Product { d: 10 }, 4, 1.0, 3, 0.5).unwrap();
    let result = run(&instance.oracle(), &instance.program, &instance.e0, &SolverConfig::default()).unwrap();
    assert_eq!(result.status, RunStatus::Converged);
    assert_eq!(result.violations.total(), 0, "{:?}", result.violations);
}
