//! Primal affine-scaling interior-point method for semidefinite and
//! hyperbolic programs.
//!
//! Each iterate `e` is improved by solving the relaxation obtained by
//! replacing the cone with a circular cone around `e` in the local metric of
//! the barrier, then stepping towards the relaxed optimum by the minimizer of
//! an explicit quadratic built from eigenvalue power sums.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conic;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod hyperbolic;
pub mod io;
pub mod poly;
pub mod program;
pub mod qcp;
pub mod sdp;

pub use conic::{
    dual_cone_member, local_inner, local_norm, primal_cone_member, schedule_constants, BarrierOracle, LocalFrame,
    Membership, QuadCone, ScheduleConstants,
};
pub use driver::{
    alpha_reduction_run, next_iterate, run, step_length, step_poly_coeffs, RunStatus, SolveResult, SolverConfig,
    StepMode, StepPoly,
};
pub use error::{Error, Result};
pub use hyperbolic::{
    direction_eigs_hp, eval_p, hp_barrier_oracle, restricted_coeffs, HpBarrier, HpFamily, HpInstance, PowerSums,
};
pub use program::ConicProgram;
pub use qcp::{assemble_first_order_system, duality_gap, in_swath, solve_qcp, SubproblemSolution};
pub use sdp::{det_barrier_oracle, direction_eigs_sdp, smat, svec, DetBarrier, SdpInstance};
