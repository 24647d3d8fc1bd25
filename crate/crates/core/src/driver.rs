//! The affine-scaling iteration `e' = (e + t x_e) / (1 + t)`.
//!
//! Every iteration solves `QP_e(alpha)`, builds the step polynomial from the
//! power sums of the eigenvalues of `x_e` in direction `e`, and moves to the
//! next iterate. The guarantees of the method are checked online and counted
//! as violations in the result.

use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::conic::{next_alpha, BarrierOracle, Membership, QuadCone, ScheduleConstants, DEFAULT_TOL};
use crate::error::{check_dim, Error, Result};
use crate::hyperbolic::PowerSums;
use crate::program::ConicProgram;
use crate::qcp::{solve_qcp, SubproblemSolution};

/// Slack added to the two-step ratio bound.
pub const RATIO_SLACK: f64 = 1e-9;

/// Roundoff allowance, relative to the objective magnitude, for the dual
/// monotonicity check.
const DUAL_ROUNDOFF: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    /// `t = -b / (2a)`, the minimizer of the step polynomial.
    QTildeMinimizer,
    /// `t = alpha / (2 ||x_e||_e)`.
    FixedHalfAlpha,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub gap_tol: f64,
    pub max_iters: usize,
    pub step_mode: StepMode,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { alpha: 0.5, gap_tol: 1e-8, max_iters: 500, step_mode: StepMode::QTildeMinimizer, seed: 0 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!("alpha = {} outside (0, 1)", self.alpha)));
        }
        if !(self.gap_tol > 0.0) {
            return Err(Error::domain("gap tolerance must be positive"));
        }
        Ok(())
    }
}

/// Coefficients of `q~(t) = a t^2 + b t + c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPoly {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl StepPoly {
    pub fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }

    pub fn minimizer(&self) -> f64 {
        -self.b / (2.0 * self.a)
    }
}

pub fn step_poly_coeffs(ps: &PowerSums, alpha: f64, n: usize) -> Result<StepPoly> {
    let PowerSums { p1, p2, p3, p4 } = *ps;
    if !(p1 > 0.0) {
        return Err(Error::domain(format!("p1 = {p1:e} is not positive")));
    }
    let a2 = alpha * alpha;
    let a4 = a2 * a2;
    let poly = StepPoly {
        a: p1 * p1 * p2 - 2.0 * a2 * p1 * p3 + a4 * p4,
        b: 2.0 * a4 * p3 - 2.0 * p1 * p1 * p1,
        c: (n as f64 - a2) * p1 * p1,
    };
    if !(poly.a > 0.0) {
        return Err(Error::ConvexityViolation(poly.a));
    }
    Ok(poly)
}

pub fn step_length(poly: &StepPoly, alpha: f64, x_norm_e: f64, mode: StepMode) -> Result<f64> {
    if !(poly.a > 0.0) {
        return Err(Error::ConvexityViolation(poly.a));
    }
    if !(x_norm_e > 0.0) {
        return Err(Error::domain("||x_e||_e must be positive"));
    }
    let bound = 0.5 * alpha / x_norm_e;
    let t = match mode {
        StepMode::QTildeMinimizer => poly.minimizer(),
        StepMode::FixedHalfAlpha => bound,
    };
    let admissible = match mode {
        StepMode::QTildeMinimizer => t > bound,
        StepMode::FixedHalfAlpha => t > 0.0,
    };
    if admissible && t.is_finite() {
        Ok(t)
    } else {
        Err(Error::StepBoundViolation { t, bound })
    }
}

pub fn next_iterate(e: &DVector<f64>, x_e: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    check_dim(e.len(), x_e.len())?;
    if !(t > 0.0) {
        return Err(Error::domain("step must be positive"));
    }
    Ok((e + x_e * t) / (1.0 + t))
}

pub use crate::qcp::duality_gap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub alpha: f64,
    pub gap: f64,
    pub t: f64,
    pub x_norm_e: f64,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub qtilde: StepPoly,
    /// Seconds spent on this iteration.
    pub wallclock: f64,
    pub primal_decrease: bool,
    pub dual_increase: bool,
    pub dual_carry_over: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    pub primal_monotonicity: usize,
    pub dual_monotonicity: usize,
    pub ratio_bound: usize,
    pub swath: usize,
    pub dual_carry_over: usize,
}

impl Violations {
    pub fn total(&self) -> usize {
        self.primal_monotonicity + self.dual_monotonicity + self.ratio_bound + self.swath + self.dual_carry_over
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIters,
    NotInSwath,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: RunStatus,
    /// One record per step taken; record `k` describes iterate `e_k`.
    pub trace: Vec<IterationRecord>,
    pub final_e: DVector<f64>,
    pub final_x: DVector<f64>,
    pub final_y: DVector<f64>,
    pub final_s: DVector<f64>,
    /// Gap at the final iterate, `NaN` if the subproblem there was not solved.
    pub final_gap: f64,
    pub schedule: ScheduleConstants,
    pub violations: Violations,
    pub message: Option<String>,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// Gaps of every visited iterate, the final one included when known.
    pub fn gaps(&self) -> Vec<f64> {
        let mut gaps: Vec<f64> = self.trace.iter().map(|r| r.gap).collect();
        if self.final_gap.is_finite() {
            gaps.push(self.final_gap);
        }
        gaps
    }

    pub fn initial_gap(&self) -> f64 {
        self.gaps().first().copied().unwrap_or(f64::NAN)
    }
}

/// Counts indices `i` at which neither `ratio_i` nor `ratio_{i+1}` meets `bound + RATIO_SLACK`.
pub fn ratio_bound_violations(gaps: &[f64], bound: f64) -> usize {
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[1] / w[0]).collect();
    ratios.windows(2).filter(|w| w[0].min(w[1]) > bound + RATIO_SLACK).count()
}

/// Iterations within which the gap must halve when every second step meets
/// the ratio bound: `ceil(2 ln 2 / -ln(ratio_bound))`.
pub fn halving_window(ratio_bound: f64) -> usize {
    (2.0 * std::f64::consts::LN_2 / -ratio_bound.ln()).ceil() as usize
}

/// Counts start indices `i` from which the gap fails to halve within
/// `window` iterations. Starts too close to the end of the sequence to
/// contain a full window are skipped unless the halving already happened.
pub fn halving_violations(gaps: &[f64], window: usize) -> usize {
    (0..gaps.len())
        .filter(|&i| {
            let horizon = gaps.len().min(i + window + 1);
            let halved = gaps[i + 1..horizon].iter().any(|g| *g <= 0.5 * gaps[i]);
            !halved && i + window < gaps.len()
        })
        .count()
}

fn failure_status(err: &Error) -> Option<RunStatus> {
    match err {
        Error::NotInSwath => Some(RunStatus::NotInSwath),
        Error::NotInterior
        | Error::NumericalFailure(_)
        | Error::NonRealEigenvalues { .. }
        | Error::DegenerateLeadingCoefficient(_)
        | Error::ConvexityViolation(_)
        | Error::StepBoundViolation { .. }
        | Error::DomainError(_) => Some(RunStatus::NumericalFailure),
        _ => None,
    }
}

/// Runs the affine-scaling method from `e0` until the gap falls below
/// `gap_tol` times the initial gap or `max_iters` steps have been taken.
pub fn run(oracle: &dyn BarrierOracle, prog: &ConicProgram, e0: &DVector<f64>, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    check_dim(oracle.dim(), prog.dim())?;
    check_dim(oracle.dim(), e0.len())?;
    if !oracle.is_interior(e0) {
        return Err(Error::NotInterior);
    }
    let n = oracle.degree();
    let schedule = ScheduleConstants::new(config.alpha, n)?;
    let alpha = config.alpha;

    let mut result = SolveResult {
        status: RunStatus::NumericalFailure,
        trace: Vec::new(),
        final_e: e0.clone(),
        final_x: DVector::zeros(0),
        final_y: DVector::zeros(0),
        final_s: DVector::zeros(0),
        final_gap: f64::NAN,
        schedule,
        violations: Violations::default(),
        message: None,
    };
    let fail = |mut result: SolveResult, err: Error| -> Result<SolveResult> {
        match failure_status(&err) {
            Some(status) => {
                result.status = status;
                result.message = Some(err.to_string());
                Ok(result)
            }
            None => Err(err),
        }
    };

    let mut e = e0.clone();
    let mut sol = match solve_qcp(oracle, prog, &e, alpha) {
        Ok(sol) => sol,
        Err(err) => return fail(result, err),
    };
    let gap0 = sol.gap;

    loop {
        let clock = Instant::now();
        let gap = sol.gap;
        result.final_gap = gap;
        result.final_x = sol.x_e.clone();
        result.final_y = sol.y_e.clone();
        result.final_s = sol.s_e.clone();
        result.final_e = e.clone();
        if gap <= config.gap_tol * gap0 {
            result.status = RunStatus::Converged;
            break;
        }
        if result.trace.len() >= config.max_iters {
            result.status = RunStatus::MaxIters;
            break;
        }
        let step = match take_step(oracle, &e, &sol, alpha, n, config.step_mode) {
            Ok(step) => step,
            Err(err) => return fail(result, err),
        };
        let next_sol = match solve_qcp(oracle, prog, &step.e_next, alpha) {
            Ok(next) => next,
            Err(err) => {
                if matches!(err, Error::NotInSwath) {
                    result.violations.swath += 1;
                }
                return fail(result, err);
            }
        };
        let primal_obj = prog.c.dot(&e);
        let dual_obj = prog.b.dot(&sol.y_e);
        let primal_decrease = prog.c.dot(&step.e_next) < primal_obj;
        let roundoff = DUAL_ROUNDOFF * (1.0 + dual_obj.abs());
        let dual_increase = prog.b.dot(&next_sol.y_e) >= dual_obj - roundoff;
        let s_unit = &sol.s_e / sol.gap;
        let dual_carry_over = QuadCone::new(oracle, &step.e_next, schedule.beta)
            .and_then(|cone| cone.classify_dual(&s_unit, DEFAULT_TOL))
            .map(|m| m == Membership::Interior)
            .unwrap_or(false);
        result.violations.primal_monotonicity += usize::from(!primal_decrease);
        result.violations.dual_monotonicity += usize::from(!dual_increase);
        result.violations.dual_carry_over += usize::from(!dual_carry_over);
        result.trace.push(IterationRecord {
            k: result.trace.len(),
            alpha,
            gap,
            t: step.t,
            x_norm_e: sol.x_norm_e,
            primal_obj,
            dual_obj,
            qtilde: step.poly,
            wallclock: clock.elapsed().as_secs_f64(),
            primal_decrease,
            dual_increase,
            dual_carry_over,
        });
        e = step.e_next;
        sol = next_sol;
    }

    if config.step_mode == StepMode::QTildeMinimizer {
        result.violations.ratio_bound = ratio_bound_violations(&result.gaps(), schedule.ratio_bound);
    }
    Ok(result)
}

struct Step {
    t: f64,
    poly: StepPoly,
    e_next: DVector<f64>,
}

fn take_step(
    oracle: &dyn BarrierOracle,
    e: &DVector<f64>,
    sol: &SubproblemSolution,
    alpha: f64,
    n: usize,
    mode: StepMode,
) -> Result<Step> {
    let ps = oracle.power_sums(e, &sol.x_e)?;
    let boundary = (ps.p1 - alpha * ps.p2.max(0.0).sqrt()).abs();
    if boundary > 1e-6 * ps.p1.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::numerical(format!("power sums off the cone boundary by {boundary:e}")));
    }
    let poly = step_poly_coeffs(&ps, alpha, n)?;
    let t = step_length(&poly, alpha, sol.x_norm_e, mode)?;
    let e_next = next_iterate(e, &sol.x_e, t)?;
    if !oracle.is_interior(&e_next) {
        return Err(Error::numerical("next iterate left the cone interior"));
    }
    Ok(Step { t, poly, e_next })
}

/// Outcome of the shrinking-alpha schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaReduction {
    pub e: DVector<f64>,
    pub iterations: usize,
    pub final_alpha: f64,
    pub bound: usize,
}

/// `ceil((2 / ln(8/7)) ln(alpha0 / alpha) + (1 / ln(9/8)) ln((1 - alpha) / (1 - alpha0)))`.
pub fn alpha_reduction_bound(alpha0: f64, alpha: f64) -> usize {
    let raw = 2.0 / (8.0_f64 / 7.0).ln() * (alpha0 / alpha).ln()
        + 1.0 / (9.0_f64 / 8.0).ln() * ((1.0 - alpha) / (1.0 - alpha0)).ln();
    raw.ceil().max(0.0) as usize
}

/// Fixed half-alpha steps with `alpha_{i+1} = alpha_i sqrt((1 + alpha_i) / 2)`
/// until `alpha_i <= alpha_target`.
pub fn alpha_reduction_run(
    oracle: &dyn BarrierOracle,
    prog: &ConicProgram,
    e0: &DVector<f64>,
    alpha0: f64,
    alpha_target: f64,
) -> Result<AlphaReduction> {
    if !(alpha_target > 0.0 && alpha_target < alpha0 && alpha0 < 1.0) {
        return Err(Error::domain("need 0 < target < alpha0 < 1"));
    }
    let mut e = e0.clone();
    let mut alpha = alpha0;
    let mut iterations = 0;
    while alpha > alpha_target {
        let sol = solve_qcp(oracle, prog, &e, alpha)?;
        let t = 0.5 * alpha / sol.x_norm_e;
        e = next_iterate(&e, &sol.x_e, t)?;
        if !oracle.is_interior(&e) {
            return Err(Error::numerical("iterate left the cone interior"));
        }
        alpha = next_alpha(alpha);
        iterations += 1;
    }
    Ok(AlphaReduction { e, iterations, final_alpha: alpha, bound: alpha_reduction_bound(alpha0, alpha_target) })
}
