//! Hyperbolic polynomial families, their barriers, eigenvalues in a direction
//! and power sums of those eigenvalues.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::conic::{BarrierOracle, LocalFrame};
use crate::error::{check_dim, Error, Result};
use crate::poly;
use crate::program::ConicProgram;
use crate::sdp::{pd_factor, smat, svec, svec_dim, DetBarrier};

/// Default tolerance on imaginary parts of computed eigenvalues.
pub const IMAG_TOL: f64 = 1e-6;

/// Largest accepted relative residual of a Vandermonde solve.
pub const VANDERMONDE_RESIDUAL: f64 = 1e-6;

/// A closed enumeration of hyperbolic polynomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum HpFamily {
    /// `x_1 x_2 ... x_d`.
    Product { d: usize },
    /// `x_d^2 - (x_1^2 + ... + x_{d-1}^2)`.
    SecondOrder { d: usize },
    /// `det` of an `n x n` symmetric matrix in svec coordinates.
    Determinant { n: usize },
    /// The elementary symmetric polynomial of degree `k` in `d` variables.
    ElementarySymmetric { d: usize, k: usize },
}

impl HpFamily {
    pub fn dim(&self) -> usize {
        match *self {
            HpFamily::Product { d } | HpFamily::SecondOrder { d } | HpFamily::ElementarySymmetric { d, .. } => d,
            HpFamily::Determinant { n } => svec_dim(n),
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            HpFamily::Product { d } => d,
            HpFamily::SecondOrder { .. } => 2,
            HpFamily::Determinant { n } => n,
            HpFamily::ElementarySymmetric { k, .. } => k,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HpFamily::Product { .. } => "product",
            HpFamily::SecondOrder { .. } => "second_order",
            HpFamily::Determinant { .. } => "determinant",
            HpFamily::ElementarySymmetric { .. } => "elementary_symmetric",
        }
    }

    /// Builds a family from its name and dimension parameters. For the
    /// determinant family `d` is the matrix order.
    pub fn from_name(name: &str, d: usize, k: Option<usize>) -> Result<Self> {
        let family = match name {
            "product" => HpFamily::Product { d },
            "second_order" | "soc" => HpFamily::SecondOrder { d },
            "determinant" | "det" => HpFamily::Determinant { n: d },
            "elementary_symmetric" | "esym" => HpFamily::ElementarySymmetric { d, k: k.unwrap_or(2) },
            other => return Err(Error::domain(format!("unknown family '{other}'"))),
        };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            HpFamily::Product { d } | HpFamily::SecondOrder { d } => d >= 2,
            HpFamily::Determinant { n } => n >= 2,
            HpFamily::ElementarySymmetric { d, k } => k >= 2 && k <= d,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid family parameters {self:?}")))
        }
    }

    /// The direction of hyperbolicity used to start and to define the cone.
    pub fn canonical_direction(&self) -> DVector<f64> {
        match *self {
            HpFamily::Product { d } | HpFamily::ElementarySymmetric { d, .. } => DVector::from_element(d, 1.0),
            HpFamily::SecondOrder { d } => {
                let mut e = DVector::zeros(d);
                e[d - 1] = 1.0;
                e
            }
            HpFamily::Determinant { n } => svec(&DMatrix::identity(n, n)),
        }
    }
}

/// Values `e_0(x), ..., e_k(x)` by the prefix recurrence.
pub fn elementary_symmetric(x: impl IntoIterator<Item = f64>, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for xi in x {
        for j in (1..=k).rev() {
            e[j] += xi * e[j - 1];
        }
    }
    e
}

pub fn eval_p(family: &HpFamily, x: &DVector<f64>) -> Result<f64> {
    check_dim(family.dim(), x.len())?;
    Ok(match *family {
        HpFamily::Product { .. } => x.iter().product(),
        HpFamily::SecondOrder { d } => x[d - 1] * x[d - 1] - x.rows(0, d - 1).norm_squared(),
        HpFamily::Determinant { .. } => smat(x).determinant(),
        HpFamily::ElementarySymmetric { k, .. } => elementary_symmetric(x.iter().copied(), k)[k],
    })
}

/// Coefficients `a_0..a_n` of `t -> p(x + t e)`.
pub fn restricted_coeffs(family: &HpFamily, x: &DVector<f64>, e: &DVector<f64>) -> Result<Vec<f64>> {
    check_dim(family.dim(), x.len())?;
    check_dim(family.dim(), e.len())?;
    match *family {
        HpFamily::Product { .. } => Ok(poly::product_of_linears(x.as_slice(), e.as_slice())),
        HpFamily::SecondOrder { d } => {
            let dot_j = |u: &DVector<f64>, v: &DVector<f64>| u[d - 1] * v[d - 1] - u.rows(0, d - 1).dot(&v.rows(0, d - 1));
            Ok(vec![dot_j(x, x), 2.0 * dot_j(x, e), dot_j(e, e)])
        }
        HpFamily::Determinant { .. } | HpFamily::ElementarySymmetric { .. } => {
            let n = family.degree();
            let radius = 1.0 + x.norm() / e.norm();
            let nodes = poly::chebyshev_nodes(n + 1, radius);
            let values = nodes
                .iter()
                .map(|t| eval_p(family, &(x + e * *t)))
                .collect::<Result<Vec<_>>>()?;
            let (coeffs, residual) = poly::interpolate(&nodes, &values, radius)?;
            if !(residual <= VANDERMONDE_RESIDUAL) {
                return Err(Error::numerical(format!("Vandermonde residual {residual:e}")));
            }
            Ok(coeffs)
        }
    }
}

/// Roots of `lambda -> p(lambda e - x)` together with the worst relative
/// imaginary residual encountered.
fn direction_roots(family: &HpFamily, x: &DVector<f64>, e: &DVector<f64>) -> Result<(Vec<f64>, f64)> {
    check_dim(family.dim(), x.len())?;
    check_dim(family.dim(), e.len())?;
    if let HpFamily::Product { .. } = family {
        if e.iter().any(|v| *v == 0.0) {
            return Err(Error::NotInterior);
        }
        let mut roots: Vec<f64> = x.iter().zip(e.iter()).map(|(xi, ei)| xi / ei).collect();
        roots.sort_by(f64::total_cmp);
        return Ok((roots, 0.0));
    }
    let coeffs = restricted_coeffs(family, &(-x), e)?;
    if coeffs.len() == 3 {
        let [c, b, a] = [coeffs[0], coeffs[1], coeffs[2]];
        if !(a.abs() >= f64::MIN_POSITIVE) {
            return Err(Error::DegenerateLeadingCoefficient(a));
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            let re = -b / (2.0 * a);
            let im = (-disc).sqrt() / (2.0 * a.abs());
            return Ok((vec![re, re], im / (1.0 + re.abs())));
        }
        let mut roots = poly::real_quadratic_roots(a, b, c);
        roots.sort_by(f64::total_cmp);
        return Ok((roots, 0.0));
    }
    let complex = poly::companion_roots(&coeffs)?;
    let worst = complex.iter().map(|(re, im)| im.abs() / (1.0 + re.abs())).fold(0.0, f64::max);
    let mut roots: Vec<f64> = complex.into_iter().map(|(re, _)| re).collect();
    roots.sort_by(f64::total_cmp);
    Ok((roots, worst))
}

/// Eigenvalues of `x` in direction `e`, ascending.
pub fn direction_eigs_hp(family: &HpFamily, x: &DVector<f64>, e: &DVector<f64>, tol: f64) -> Result<Vec<f64>> {
    let (roots, worst) = direction_roots(family, x, e)?;
    if worst > tol {
        return Err(Error::NonRealEigenvalues { max_imag: worst });
    }
    Ok(roots)
}

/// Power sums `p_k = sum_j lambda_j^k` for `k = 1..4`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSums {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl PowerSums {
    pub fn from_roots(lambda: &[f64]) -> Self {
        let mut s = [0.0; 4];
        for &l in lambda {
            let l2 = l * l;
            s[0] += l;
            s[1] += l2;
            s[2] += l2 * l;
            s[3] += l2 * l2;
        }
        PowerSums { p1: s[0], p2: s[1], p3: s[2], p4: s[3] }
    }

    /// From the leading coefficients `[a_n, a_{n-1}, ..., a_{n-4}]` of
    /// `prod_j (t + lambda_j)` scaled by `a_n`. Missing entries count as zero.
    pub fn from_top_coeffs(top: &[f64]) -> Result<Self> {
        let lead = top.first().copied().unwrap_or(0.0);
        if !(lead.is_finite() && lead.abs() >= f64::MIN_POSITIVE) {
            return Err(Error::DegenerateLeadingCoefficient(lead));
        }
        let e = |k: usize| top.get(k).map_or(0.0, |a| a / lead);
        let (e1, e2, e3, e4) = (e(1), e(2), e(3), e(4));
        Ok(PowerSums {
            p1: e1,
            p2: e1 * e1 - 2.0 * e2,
            p3: e1 * e1 * e1 - 3.0 * e1 * e2 + 3.0 * e3,
            p4: e1.powi(4) - 4.0 * e1 * e1 * e2 + 2.0 * e2 * e2 + 4.0 * e1 * e3 - 4.0 * e4,
        })
    }

    /// From a full coefficient vector `a_0..a_n` (lowest degree first).
    pub fn from_coeffs(coeffs: &[f64]) -> Result<Self> {
        let top: Vec<f64> = coeffs.iter().rev().take(5).copied().collect();
        Self::from_top_coeffs(&top)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p3, self.p4]
    }
}

pub fn power_sums_from_roots(lambda: &[f64]) -> PowerSums {
    PowerSums::from_roots(lambda)
}

pub fn power_sums_from_coeffs(coeffs: &[f64]) -> Result<PowerSums> {
    PowerSums::from_coeffs(coeffs)
}

/// Outcome of random hyperbolicity probing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub trials: usize,
    pub max_imag_residual: f64,
    pub failures: usize,
}

pub fn hyperbolicity_sample_check(family: &HpFamily, e: &DVector<f64>, trials: usize, seed: u64) -> SampleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SampleReport { trials, max_imag_residual: 0.0, failures: 0 };
    for _ in 0..trials {
        let x = DVector::from_fn(family.dim(), |_, _| StandardNormal.sample(&mut rng));
        match direction_roots(family, &x, e) {
            Ok((_, worst)) => {
                report.max_imag_residual = report.max_imag_residual.max(worst);
                if worst > IMAG_TOL {
                    report.failures += 1;
                }
            }
            Err(_) => report.failures += 1,
        }
    }
    report
}

/// `f = -ln p` for a family, with closed-form derivatives.
#[derive(Clone, Copy, Debug)]
pub struct HpBarrier {
    family: HpFamily,
}

pub fn hp_barrier_oracle(family: HpFamily) -> Result<HpBarrier> {
    HpBarrier::new(family)
}

impl HpBarrier {
    pub fn new(family: HpFamily) -> Result<Self> {
        family.validate()?;
        Ok(HpBarrier { family })
    }

    pub fn family(&self) -> &HpFamily {
        &self.family
    }

    fn det(&self) -> Option<DetBarrier> {
        match self.family {
            HpFamily::Determinant { n } => Some(DetBarrier::new(n).expect("validated order")),
            _ => None,
        }
    }

    fn require_interior(&self, x: &DVector<f64>) -> Result<()> {
        check_dim(self.family.dim(), x.len())?;
        if self.is_interior(x) {
            Ok(())
        } else {
            Err(Error::NotInterior)
        }
    }

    /// `(grad p, hess p)` of the elementary symmetric polynomial.
    fn esym_derivatives(x: &DVector<f64>, k: usize) -> (DVector<f64>, DMatrix<f64>) {
        let d = x.len();
        let grad = DVector::from_fn(d, |i, _| {
            elementary_symmetric(x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v), k - 1)[k - 1]
        });
        let mut hess = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in (i + 1)..d {
                let rest = x.iter().enumerate().filter(|(l, _)| *l != i && *l != j).map(|(_, v)| *v);
                let v = elementary_symmetric(rest, k - 2)[k - 2];
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        (grad, hess)
    }

    /// `grad p grad p^T - p hess p` for the elementary symmetric polynomial,
    /// evaluated entrywise as `e_{k-1}(x_ij)^2 - e_k(x_ij) e_{k-2}(x_ij)` with
    /// `x_ij` the vector with coordinates `i` and `j` removed, which avoids the
    /// cancellation between the two terms near the cone boundary.
    fn esym_hessian_numerator(x: &DVector<f64>, k: usize) -> DMatrix<f64> {
        let d = x.len();
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            let g = elementary_symmetric(x.iter().enumerate().filter(|(l, _)| *l != i).map(|(_, v)| *v), k - 1)[k - 1];
            out[(i, i)] = g * g;
            for j in (i + 1)..d {
                let rest = x.iter().enumerate().filter(|(l, _)| *l != i && *l != j).map(|(_, v)| *v);
                let sums = elementary_symmetric(rest, k);
                let v = sums[k - 1] * sums[k - 1] - sums[k] * sums[k - 2];
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

fn soc_split(x: &DVector<f64>) -> (f64, f64) {
    let d = x.len();
    (x[d - 1], x.rows(0, d - 1).norm())
}

/// `P(w) = 2 w w^T - det(w) J` for the second-order cone Jordan algebra.
fn soc_quadratic_representation(w: &DVector<f64>) -> DMatrix<f64> {
    let d = w.len();
    let det = w[d - 1] * w[d - 1] - w.rows(0, d - 1).norm_squared();
    let mut p = w * w.transpose() * 2.0;
    for i in 0..d {
        p[(i, i)] += if i == d - 1 { -det } else { det };
    }
    p
}

/// Spectral power `x^s` in the second-order cone Jordan algebra.
fn soc_power(x: &DVector<f64>, s: f64) -> DVector<f64> {
    let d = x.len();
    let (x0, r) = soc_split(x);
    let hi = x0 + r;
    let lo = (x0 * x0 - r * r) / hi;
    let (a, b) = (hi.powf(s), lo.powf(s));
    let mut out = DVector::zeros(d);
    if r > 0.0 {
        let half_diff = 0.5 * (a - b) / r;
        for i in 0..d - 1 {
            out[i] = half_diff * x[i];
        }
    }
    out[d - 1] = 0.5 * (a + b);
    out
}

impl BarrierOracle for HpBarrier {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn degree(&self) -> usize {
        self.family.degree()
    }

    fn value(&self, e: &DVector<f64>) -> Result<f64> {
        if let Some(det) = self.det() {
            return det.value(e);
        }
        self.require_interior(e)?;
        Ok(-eval_p(&self.family, e)?.ln())
    }

    fn gradient(&self, e: &DVector<f64>) -> Result<DVector<f64>> {
        if let Some(det) = self.det() {
            return det.gradient(e);
        }
        self.require_interior(e)?;
        Ok(match self.family {
            HpFamily::Product { .. } => e.map(|v| -1.0 / v),
            HpFamily::SecondOrder { d } => {
                let p = eval_p(&self.family, e)?;
                let mut g = e * (2.0 / p);
                g[d - 1] = -g[d - 1];
                g
            }
            HpFamily::ElementarySymmetric { k, .. } => {
                let p = eval_p(&self.family, e)?;
                let (grad, _) = Self::esym_derivatives(e, k);
                -grad / p
            }
            HpFamily::Determinant { .. } => unreachable!("handled by delegation"),
        })
    }

    fn hessian_apply(&self, e: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        if let Some(det) = self.det() {
            return det.hessian_apply(e, v);
        }
        self.require_interior(e)?;
        check_dim(self.dim(), v.len())?;
        Ok(match self.family {
            HpFamily::Product { .. } => v.component_div(&e.component_mul(e)),
            HpFamily::SecondOrder { d } => {
                let p = eval_p(&self.family, e)?;
                let mut je = e.clone();
                let mut jv = v.clone();
                for i in 0..d - 1 {
                    je[i] = -je[i];
                    jv[i] = -jv[i];
                }
                jv * (-2.0 / p) + &je * (4.0 * je.dot(v) / (p * p))
            }
            HpFamily::ElementarySymmetric { k, .. } => {
                let p = eval_p(&self.family, e)?;
                Self::esym_hessian_numerator(e, k) * v / (p * p)
            }
            HpFamily::Determinant { .. } => unreachable!("handled by delegation"),
        })
    }

    fn direction_eigs(&self, e: &DVector<f64>, x: &DVector<f64>) -> Result<Vec<f64>> {
        self.require_interior(e)?;
        direction_eigs_hp(&self.family, x, e, IMAG_TOL)
    }

    fn power_sums(&self, e: &DVector<f64>, x: &DVector<f64>) -> Result<PowerSums> {
        self.require_interior(e)?;
        PowerSums::from_coeffs(&restricted_coeffs(&self.family, x, e)?)
    }

    fn local_frame(&self, e: &DVector<f64>) -> Result<LocalFrame> {
        if let Some(det) = self.det() {
            return det.local_frame(e);
        }
        self.require_interior(e)?;
        match self.family {
            HpFamily::Product { .. } => Ok(LocalFrame::Diagonal { scale: e.clone() }),
            HpFamily::SecondOrder { .. } => {
                let half = soc_quadratic_representation(&soc_power(e, 0.5));
                let inv_half = soc_quadratic_representation(&soc_power(e, -0.5));
                Ok(LocalFrame::Symmetric {
                    t: half * std::f64::consts::FRAC_1_SQRT_2,
                    t_inv: inv_half * std::f64::consts::SQRT_2,
                })
            }
            HpFamily::ElementarySymmetric { .. } => LocalFrame::from_interior_hessian(self.hessian_matrix(e)?),
            HpFamily::Determinant { .. } => unreachable!("handled by delegation"),
        }
    }

    fn hessian_matrix(&self, e: &DVector<f64>) -> Result<DMatrix<f64>> {
        match self.family {
            HpFamily::ElementarySymmetric { k, .. } => {
                self.require_interior(e)?;
                let p = eval_p(&self.family, e)?;
                Ok(Self::esym_hessian_numerator(e, k) / (p * p))
            }
            _ => {
                let d = self.dim();
                let mut h = DMatrix::zeros(d, d);
                for j in 0..d {
                    let col = self.hessian_apply(e, &DVector::from_fn(d, |i, _| f64::from(i == j)))?;
                    h.set_column(j, &col);
                }
                Ok(h)
            }
        }
    }

    fn is_interior(&self, e: &DVector<f64>) -> bool {
        if e.len() != self.dim() || e.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.family {
            HpFamily::Product { .. } => e.iter().all(|v| *v > 0.0),
            HpFamily::SecondOrder { .. } => {
                let (x0, r) = soc_split(e);
                x0 > r
            }
            HpFamily::Determinant { .. } => pd_factor(&smat(e)).is_ok(),
            HpFamily::ElementarySymmetric { k, .. } => {
                elementary_symmetric(e.iter().copied(), k)[1..].iter().all(|v| *v > 0.0)
            }
        }
    }

    fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let slack = tol * (1.0 + x.norm());
        match self.family {
            HpFamily::Product { .. } => x.iter().all(|v| *v >= -slack),
            HpFamily::SecondOrder { .. } => {
                let (x0, r) = soc_split(x);
                x0 >= r - slack
            }
            HpFamily::Determinant { n } => DetBarrier::new(n).expect("validated order").contains(x, tol),
            HpFamily::ElementarySymmetric { .. } => {
                self.is_interior(&(x + self.family.canonical_direction() * slack))
            }
        }
    }
}

/// `min <c, x> s.t. A x = b, x in the closed hyperbolicity cone`, with a
/// strictly feasible starting point.
#[derive(Clone, Debug, PartialEq)]
pub struct HpInstance {
    pub family: HpFamily,
    pub program: ConicProgram,
    pub e0: DVector<f64>,
}

impl HpInstance {
    pub fn new(family: HpFamily, program: ConicProgram, e0: DVector<f64>) -> Result<Self> {
        family.validate()?;
        check_dim(family.dim(), program.dim())?;
        check_dim(family.dim(), e0.len())?;
        Ok(HpInstance { family, program, e0 })
    }

    pub fn oracle(&self) -> HpBarrier {
        HpBarrier::new(self.family).expect("validated family")
    }

    pub fn validate(&self) -> Result<()> {
        self.program.validate()?;
        let residual = (&self.program.a * &self.e0 - &self.program.b).norm() / self.program.b.norm();
        if residual > 1e-9 {
            return Err(Error::InvariantViolation(format!("A e0 differs from b by {residual:e}")));
        }
        if !self.oracle().is_interior(&self.e0) {
            return Err(Error::InvariantViolation("e0 is not interior".into()));
        }
        Ok(())
    }
}
