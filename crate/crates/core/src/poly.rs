//! Univariate polynomial utilities: stable quadratic roots, companion-matrix
//! roots and interpolation on Chebyshev nodes.
//!
//! Coefficient vectors are stored lowest degree first.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Real roots of `a t^2 + b t + c`, using the sign-matched numerator to avoid
/// cancellation. Falls back to the linear root when `a` is zero.
pub fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a == 0.0 {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sign = if b < 0.0 { -1.0 } else { 1.0 };
    let q = -0.5 * (b + sign * disc.sqrt());
    if q == 0.0 {
        return vec![0.0, 0.0];
    }
    vec![q / a, c / q]
}

/// Roots of a polynomial as `(re, im)` pairs, from the eigenvalues of its
/// companion matrix. The variable is rescaled first so that the monic
/// coefficients are of unit magnitude.
pub fn companion_roots(coeffs: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = coeffs.len().saturating_sub(1);
    let lead = coeffs.last().copied().unwrap_or(0.0);
    if n == 0 {
        return Ok(Vec::new());
    }
    if !(lead.is_finite() && lead.abs() >= f64::MIN_POSITIVE) {
        return Err(Error::DegenerateLeadingCoefficient(lead));
    }
    let monic: Vec<f64> = coeffs[..n].iter().map(|a| a / lead).collect();
    let rho = monic
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs().powf(1.0 / (n - k) as f64))
        .fold(0.0_f64, f64::max);
    let rho = if rho > 0.0 && rho.is_finite() { rho } else { 1.0 };
    let mut comp = DMatrix::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for (k, c) in monic.iter().enumerate() {
        comp[(k, n - 1)] = -c / rho.powi((n - k) as i32);
    }
    let eig = comp.complex_eigenvalues();
    Ok(eig.iter().map(|z| (z.re * rho, z.im * rho)).collect())
}

/// Chebyshev points of the first kind on `[-radius, radius]`.
pub fn chebyshev_nodes(count: usize, radius: f64) -> Vec<f64> {
    (0..count)
        .map(|j| radius * (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * count) as f64).cos())
        .collect()
}

/// Coefficients of the degree-`values.len() - 1` interpolant through
/// `(nodes[j], values[j])`, where the nodes lie in `[-radius, radius]`.
///
/// Returns the coefficients and the relative residual of the Vandermonde solve.
pub fn interpolate(nodes: &[f64], values: &[f64], radius: f64) -> Result<(Vec<f64>, f64)> {
    let k = nodes.len();
    let vander = DMatrix::from_fn(k, k, |i, j| (nodes[i] / radius).powi(j as i32));
    let rhs = DVector::from_column_slice(values);
    let scaled = vander
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("singular Vandermonde system"))?;
    let residual = (&vander * &scaled - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    let coeffs = scaled.iter().enumerate().map(|(j, c)| c / radius.powi(j as i32)).collect();
    Ok((coeffs, residual))
}

/// Coefficients of `prod_i (x_i + t e_i)`.
pub fn product_of_linears(x: &[f64], e: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    for (xi, ei) in x.iter().zip(e) {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k] += c * xi;
            next[k + 1] += c * ei;
        }
        coeffs = next;
    }
    coeffs
}

pub fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}
