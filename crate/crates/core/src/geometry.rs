//! The group SU(n,1), its fractional-linear action on the unit ball, the
//! Cayley transform onto the Siegel domain, and the automorphy factor
//! `j_lambda` on the universal covering of the maximal abelian subgroups.

use crate::error::{Error, Result};
use crate::groups::SubgroupFamily;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Tolerance for membership and invariant checks on matrices.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// A point of the open unit ball in `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint(Vec<Complex64>);

impl BallPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        let norm_sq: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sq < 1.0) || coords.is_empty() {
            return Err(Error::OutsideBall { norm_sq });
        }
        Ok(Self(coords))
    }

    pub fn origin(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Construct from real and imaginary parts, mostly for tests.
    pub fn from_parts(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Hermitian inner product `<z, w> = sum z_j conj(w_j)`.
    pub fn inner(&self, other: &BallPoint) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

/// A point of the unbounded realization `D_n = { Im z_n - |z'|^2 > 0 }`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint(Vec<Complex64>);

impl SiegelPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        let defect = siegel_defect(&coords);
        if !(defect > 0.0) {
            return Err(Error::OutsideSiegelDomain { defect });
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    /// `Im z_n - |z'|^2`, positive on the domain.
    pub fn height(&self) -> f64 {
        siegel_defect(&self.0)
    }
}

fn siegel_defect(coords: &[Complex64]) -> f64 {
    match coords.split_last() {
        Some((last, head)) => last.im - head.iter().map(|c| c.norm_sqr()).sum::<f64>(),
        None => f64::NAN,
    }
}

/// Cayley transform `B^n -> D_n`.
pub fn cayley(z: &BallPoint) -> Result<SiegelPoint> {
    let c = z.coords();
    let n = c.len();
    let denom = ONE + c[n - 1];
    if denom.norm() < 1e-300 {
        return Err(Error::CayleyPole);
    }
    let mut out: Vec<Complex64> = c[..n - 1].iter().map(|zk| I * zk / denom).collect();
    out.push(I * (ONE - c[n - 1]) / denom);
    // The image is in D_n analytically; rounding may push points at the very
    // edge of the ball onto the boundary, so skip the strict check here.
    Ok(SiegelPoint(out))
}

/// Inverse Cayley transform `D_n -> B^n`.
pub fn cayley_inv(zeta: &SiegelPoint) -> Result<BallPoint> {
    let c = zeta.coords();
    let n = c.len();
    let denom = I + c[n - 1];
    if denom.norm() < 1e-300 {
        return Err(Error::CayleyPole);
    }
    // z_n = (i - zeta_n)/(i + zeta_n), z_k = 2 zeta_k / (i + zeta_n)
    let mut out: Vec<Complex64> = c[..n - 1].iter().map(|zk| 2.0 * zk / denom).collect();
    out.push((I - c[n - 1]) / denom);
    BallPoint::new(out)
}

/// An element of SU(n,1) as an `(n+1) x (n+1)` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    matrix: DMatrix<Complex64>,
}

impl GroupElement {
    /// Validates `det A = 1` and `A J A^* = J`.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let g = Self { matrix };
        let defect = g.membership_defect();
        if !(defect <= MEMBERSHIP_TOL) {
            return Err(Error::NotInGroup { defect });
        }
        Ok(g)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n + 1, n + 1),
        }
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Complex dimension `n` of the ball acted on.
    pub fn n(&self) -> usize {
        self.matrix.nrows() - 1
    }

    /// Largest deviation from the defining relations, scaled by the size of
    /// the entries so large group parameters are judged relatively.
    pub fn membership_defect(&self) -> f64 {
        let a = &self.matrix;
        let dim = a.nrows();
        if a.ncols() != dim || dim < 2 {
            return f64::INFINITY;
        }
        let j = signature(dim - 1);
        let lhs = a * &j * a.adjoint();
        let scale = a.iter().map(|c| c.norm_sqr()).fold(1.0, f64::max);
        let form = (lhs - &j).iter().map(|c| c.norm()).fold(0.0, f64::max) / scale;
        let det = (a.determinant() - ONE).norm();
        form.max(det)
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// `A^{-1} = J A^* J`.
    pub fn inverse(&self) -> GroupElement {
        let j = signature(self.n());
        GroupElement {
            matrix: &j * self.matrix.adjoint() * &j,
        }
    }

    /// The bottom row `(w^t, d)` evaluated against `(z, 1)`.
    pub fn denominator(&self, z: &BallPoint) -> Complex64 {
        let n = self.n();
        let mut acc = self.matrix[(n, n)];
        for (k, zk) in z.coords().iter().enumerate() {
            acc += self.matrix[(n, k)] * zk;
        }
        acc
    }

    /// Fractional-linear action `(a z + v) / (w^t z + d)`.
    pub fn act(&self, z: &BallPoint) -> Result<BallPoint> {
        let n = self.n();
        if z.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.dim(),
            });
        }
        let den = self.denominator(z);
        if den.norm() < 1e-14 {
            return Err(Error::SingularDenominator {
                modulus: den.norm(),
            });
        }
        let coords = (0..n)
            .map(|r| {
                let mut acc = self.matrix[(r, n)];
                for (k, zk) in z.coords().iter().enumerate() {
                    acc += self.matrix[(r, k)] * zk;
                }
                acc / den
            })
            .collect();
        BallPoint::new(coords)
    }
}

/// `J_{n,1} = diag(-1, ..., -1, 1)`.
pub fn signature(n: usize) -> DMatrix<Complex64> {
    let mut j = DMatrix::identity(n + 1, n + 1);
    for k in 0..n {
        j[(k, k)] = -ONE;
    }
    j
}

/// Fractional-linear action; free-function form of [`GroupElement::act`].
pub fn mobius_action(g: &GroupElement, z: &BallPoint) -> Result<BallPoint> {
    g.act(z)
}

/// An element of the universal covering of a maximal abelian subgroup:
/// torus angles in `[0, 1)`, real parameters, and an unreduced covering phase.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringElement {
    family: SubgroupFamily,
    torus: Vec<f64>,
    real: Vec<f64>,
    phase: f64,
}

impl CoveringElement {
    pub fn new(family: SubgroupFamily, torus: Vec<f64>, real: Vec<f64>, phase: f64) -> Result<Self> {
        if torus.len() != family.torus_dim() {
            return Err(Error::DimensionMismatch {
                expected: family.torus_dim(),
                got: torus.len(),
            });
        }
        if real.len() != family.real_dim() {
            return Err(Error::DimensionMismatch {
                expected: family.real_dim(),
                got: real.len(),
            });
        }
        if real.iter().any(|r| !r.is_finite()) || !phase.is_finite() {
            return Err(Error::Config("non-finite covering parameters".into()));
        }
        let torus: Vec<f64> = torus.into_iter().map(wrap_unit).collect();
        let e = Self {
            family,
            torus,
            real,
            phase,
        };
        let defect = e.constraint_defect();
        if defect > 1e-12 {
            return Err(Error::CoveringConstraint { defect });
        }
        Ok(e)
    }

    pub fn identity(family: SubgroupFamily) -> Self {
        Self {
            torus: vec![0.0; family.torus_dim()],
            real: vec![0.0; family.real_dim()],
            phase: 0.0,
            family,
        }
    }

    /// The lift of an orbit coordinate whose covering phase is the smallest
    /// solution of the determinant constraint, `x = -sum(theta) / (n + 1)`.
    pub fn lift(family: SubgroupFamily, torus: &[f64], real: &[f64]) -> Result<Self> {
        let phase = if family.has_phase() {
            -torus.iter().map(|&t| wrap_unit(t)).sum::<f64>() / (family.n() as f64 + 1.0)
        } else {
            0.0
        };
        Self::new(family, torus.to_vec(), real.to_vec(), phase)
    }

    pub fn family(&self) -> &SubgroupFamily {
        &self.family
    }

    pub fn torus(&self) -> &[f64] {
        &self.torus
    }

    pub fn real(&self) -> &[f64] {
        &self.real
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Distance of `(n+1) x + sum(theta)` from the nearest integer (zero when
    /// the family carries no covering phase and `x = 0`).
    pub fn constraint_defect(&self) -> f64 {
        if !self.family.has_phase() {
            return self.phase.abs();
        }
        let v = (self.family.n() as f64 + 1.0) * self.phase + self.torus.iter().sum::<f64>();
        (v - v.round()).abs()
    }

    /// Group product; parameters add, torus angles mod 1.
    pub fn compose(&self, other: &CoveringElement) -> Result<CoveringElement> {
        if self.family != other.family {
            return Err(Error::InvalidFamily("cannot compose elements of different families".into()));
        }
        Ok(CoveringElement {
            family: self.family.clone(),
            torus: self.torus.iter().zip(&other.torus).map(|(a, b)| wrap_unit(a + b)).collect(),
            real: self.real.iter().zip(&other.real).map(|(a, b)| a + b).collect(),
            phase: self.phase + other.phase,
        })
    }

    pub fn inverse(&self) -> CoveringElement {
        CoveringElement {
            family: self.family.clone(),
            torus: self.torus.iter().map(|a| wrap_unit(-a)).collect(),
            real: self.real.iter().map(|a| -a).collect(),
            phase: -self.phase,
        }
    }

    /// Image under the covering map.
    pub fn project(&self) -> GroupElement {
        self.family.matrix(&self.torus, &self.real, self.phase)
    }

    pub fn act(&self, z: &BallPoint) -> Result<BallPoint> {
        self.project().act(z)
    }

    /// `chi_lambda(h) = e^{2 pi i lambda x}`.
    pub fn character(&self, lambda: f64) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * lambda * self.phase)
    }

    /// Automorphy factor `j_lambda(h, z) = e^{-2 pi i lambda x} rho^{-lambda}`,
    /// where `rho = e^{-2 pi i x}(w^t z + d)` and its logarithm is continued
    /// along the one-parameter path from the identity.
    pub fn cocycle(&self, z: &BallPoint, lambda: f64) -> Result<Complex64> {
        if z.dim() != self.family.n() {
            return Err(Error::DimensionMismatch {
                expected: self.family.n(),
                got: z.dim(),
            });
        }
        let log_rho = continued_log(|tau| {
            let scaled: Vec<f64> = self.real.iter().map(|r| tau * r).collect();
            self.family.rho(&scaled, z.coords())
        })?;
        Ok((-lambda * log_rho).exp() * self.character(-lambda))
    }
}

/// Free-function form of [`CoveringElement::cocycle`].
pub fn cocycle(h: &CoveringElement, z: &BallPoint, lambda: f64) -> Result<Complex64> {
    h.cocycle(z, lambda)
}

/// Logarithm of `f(1)` continued from `f(0) = 1` along `tau in [0, 1]`.
pub(crate) fn continued_log<F: Fn(f64) -> Complex64>(f: F) -> Result<Complex64> {
    let mut prev = f(0.0);
    let mut arg = prev.arg();
    let mut tau: f64 = 0.0;
    let mut step: f64 = 0.125;
    while tau < 1.0 {
        let next = (tau + step).min(1.0);
        let cur = f(next);
        if !(cur.norm() > 1e-14) {
            return Err(Error::BranchCut { re: cur.re, im: cur.im });
        }
        let d = (cur / prev).arg();
        if d.abs() > 0.25 {
            step *= 0.5;
            if step < 1e-12 {
                return Err(Error::BranchCut { re: cur.re, im: cur.im });
            }
            continue;
        }
        arg += d;
        prev = cur;
        tau = next;
        step = (step * 2.0).min(0.25);
    }
    Ok(Complex64::new(prev.norm().ln(), arg))
}

/// Reduce an angle (in turns) to `[0, 1)`.
pub fn wrap_unit(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Principal power `w^{-lambda}`.
pub(crate) fn principal_pow(w: Complex64, lambda: f64) -> Complex64 {
    (-lambda * w.ln()).exp()
}
