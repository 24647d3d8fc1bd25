//! Reproducible instances whose start point lies on the central path.
//!
//! With `s0 = -mu g(e0)` and `c = A^T y0 + s0`, the pair `(e0, (y0, s0))` is
//! the central-path point at parameter `mu`, so `e0` lies in every swath.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::conic::BarrierOracle;
use crate::error::{Error, Result};
use crate::hyperbolic::{HpBarrier, HpFamily, HpInstance};
use crate::program::ConicProgram;
use crate::sdp::{svec, svec_dim, SdpInstance};

const MAX_ATTEMPTS: usize = 10;

/// Default radius, in the local norm at the canonical direction, of the
/// perturbation applied to the hyperbolic start point.
pub const DEFAULT_RADIUS: f64 = 0.5;

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| StandardNormal.sample(rng))
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, n, n);
    (&g + g.transpose()) * 0.5
}

/// SDP instance with `E0` on the central path at parameter `mu`.
pub fn gen_central_path_sdp(n: usize, m: usize, mu: f64, seed: u64) -> Result<(SdpInstance, DMatrix<f64>)> {
    if n < 2 {
        return Err(Error::domain("matrix order must be at least 2"));
    }
    if m == 0 || m >= svec_dim(n) {
        return Err(Error::domain(format!("constraint count {m} outside [1, {}]", svec_dim(n) - 1)));
    }
    if !(mu > 0.0) {
        return Err(Error::domain("mu must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let q = random_orthogonal(&mut rng, n);
        let eigs = DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0));
        let e0 = &q * DMatrix::from_diagonal(&eigs) * q.transpose();
        let e0 = (&e0 + e0.transpose()) * 0.5;
        let e0_inv = &q * DMatrix::from_diagonal(&eigs.map(|v| 1.0 / v)) * q.transpose();
        let e0_inv = (&e0_inv + e0_inv.transpose()) * 0.5;
        let constraints: Vec<DMatrix<f64>> = (0..m).map(|_| random_symmetric(&mut rng, n)).collect();
        let y0 = gaussian_vector(&mut rng, m);
        let b = DVector::from_iterator(m, constraints.iter().map(|a| a.dot(&e0)));
        let c = constraints.iter().zip(y0.iter()).fold(e0_inv * mu, |acc, (a, yi)| acc + a * *yi);
        let instance = SdpInstance::new(c, constraints, b)?;
        if instance.validate().is_ok() {
            return Ok((instance, e0));
        }
    }
    Err(Error::RetryExhausted)
}

/// Hyperbolic instance with `e0` on the central path at parameter `mu`.
///
/// `e0` is the canonical direction moved by a random vector of local norm at
/// most `radius < 1`. The determinant family reuses the SDP generator under
/// svec so both backends see identical data for a given seed.
pub fn gen_hp_instance(family: HpFamily, m: usize, mu: f64, seed: u64, radius: f64) -> Result<HpInstance> {
    family.validate()?;
    if let HpFamily::Determinant { n } = family {
        let (sdp, e0) = gen_central_path_sdp(n, m, mu, seed)?;
        return HpInstance::new(family, sdp.to_program(), svec(&e0));
    }
    let d = family.dim();
    if m == 0 || m >= d {
        return Err(Error::domain(format!("constraint count {m} outside [1, {}]", d - 1)));
    }
    if !(mu > 0.0) {
        return Err(Error::domain("mu must be positive"));
    }
    if !(0.0..1.0).contains(&radius) {
        return Err(Error::domain("radius must lie in [0, 1)"));
    }
    let oracle = HpBarrier::new(family)?;
    let center = family.canonical_direction();
    let frame = oracle.local_frame(&center)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let dir = gaussian_vector(&mut rng, d);
        let len = radius * rng.random::<f64>();
        let offset = if len > 0.0 { frame.to_ambient(&(dir.normalize() * len)) } else { DVector::zeros(d) };
        let e0 = &center + offset;
        let a = gaussian_matrix(&mut rng, m, d);
        let y0 = gaussian_vector(&mut rng, m);
        let b = &a * &e0;
        let c = a.transpose() * y0 - oracle.gradient(&e0)? * mu;
        let instance = HpInstance::new(family, ConicProgram::new(a, b, c)?, e0)?;
        if instance.validate().is_ok() {
            return Ok(instance);
        }
    }
    Err(Error::RetryExhausted)
}
