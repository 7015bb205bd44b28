//! The five conjugacy classes of maximal abelian subgroups of SU(n,1):
//! parameterizations, basepoints, orbit maps, `D_lambda`, and the integral
//! kernel of `R R^*`.
//!
//! Orbit coordinates live on `T^m x R^d`. Torus angles are measured in turns
//! (`t_j = e^{2 pi i theta_j}`), real parameters are ordered as
//!
//! | family      | torus `m` | real `d` | real parameters      |
//! |-------------|-----------|----------|----------------------|
//! | `E(n)`      | `n`       | 0        |                      |
//! | `P(n)`      | `n - 1`   | 1        | `y`                  |
//! | `H(n)`      | `n - 1`   | 1        | `s`                  |
//! | `N(n)`      | 0         | `n`      | `s, b_1..b_{n-1}`    |
//! | `N(k,n)`    | `k`       | `n - k`  | `s, b_1..b_{n-k-1}`  |

use crate::error::{Error, Result};
use crate::geometry::{continued_log, principal_pow, wrap_unit, BallPoint, CoveringElement, GroupElement};
use crate::special::{gauss_legendre_unit, ln_gamma};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    QuasiElliptic,
    QuasiParabolic,
    QuasiHyperbolic,
    Nilpotent,
    QuasiNilpotent,
}

/// A maximal abelian subgroup family together with its dimension data.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubgroupFamily {
    kind: FamilyKind,
    n: usize,
    k: usize,
}

impl SubgroupFamily {
    pub fn new(kind: FamilyKind, n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidFamily("n must be positive".into()));
        }
        match kind {
            FamilyKind::QuasiNilpotent => {
                if n < 3 || k == 0 || k > n - 2 {
                    return Err(Error::InvalidFamily(format!(
                        "N(k,n) requires n >= 3 and 1 <= k <= n-2 (got k={k}, n={n})"
                    )));
                }
            }
            FamilyKind::Nilpotent if n < 2 => {
                return Err(Error::InvalidFamily("N(n) requires n >= 2".into()));
            }
            _ => {}
        }
        let k = if kind == FamilyKind::QuasiNilpotent { k } else { 0 };
        Ok(Self { kind, n, k })
    }

    pub fn quasi_elliptic(n: usize) -> Result<Self> {
        Self::new(FamilyKind::QuasiElliptic, n, 0)
    }

    pub fn quasi_parabolic(n: usize) -> Result<Self> {
        Self::new(FamilyKind::QuasiParabolic, n, 0)
    }

    pub fn quasi_hyperbolic(n: usize) -> Result<Self> {
        Self::new(FamilyKind::QuasiHyperbolic, n, 0)
    }

    pub fn nilpotent(n: usize) -> Result<Self> {
        Self::new(FamilyKind::Nilpotent, n, 0)
    }

    pub fn quasi_nilpotent(k: usize, n: usize) -> Result<Self> {
        Self::new(FamilyKind::QuasiNilpotent, n, k)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of torus factors `m` of the orbit `H / H_{z0}`.
    pub fn torus_dim(&self) -> usize {
        match self.kind {
            FamilyKind::QuasiElliptic => self.n,
            FamilyKind::QuasiParabolic | FamilyKind::QuasiHyperbolic => self.n - 1,
            FamilyKind::Nilpotent => 0,
            FamilyKind::QuasiNilpotent => self.k,
        }
    }

    /// Number of real factors `d` of the orbit.
    pub fn real_dim(&self) -> usize {
        match self.kind {
            FamilyKind::QuasiElliptic => 0,
            FamilyKind::QuasiParabolic | FamilyKind::QuasiHyperbolic => 1,
            FamilyKind::Nilpotent => self.n,
            FamilyKind::QuasiNilpotent => self.n - self.k,
        }
    }

    /// Whether the covering group carries the extra phase coordinate `x`.
    /// `P(1)`, `H(1)` and `N(n)` are simply connected.
    pub fn has_phase(&self) -> bool {
        match self.kind {
            FamilyKind::QuasiElliptic | FamilyKind::QuasiNilpotent => true,
            FamilyKind::QuasiParabolic | FamilyKind::QuasiHyperbolic => self.n > 1,
            FamilyKind::Nilpotent => false,
        }
    }

    /// Index of the first coordinate not rotated by the torus factor.
    fn torus_coords(&self) -> usize {
        self.torus_dim()
    }

    /// Modulus of the nonzero basepoint entries (all on torus coordinates).
    fn basepoint_entry(&self) -> f64 {
        match self.torus_dim() {
            0 => 0.0,
            m => 1.0 / (2.0 * m as f64).sqrt(),
        }
    }

    pub fn basepoint(&self) -> BallPoint {
        let mut z = vec![ZERO; self.n];
        let e = self.basepoint_entry();
        for c in z.iter_mut().take(self.torus_coords()) {
            *c = Complex64::new(e, 0.0);
        }
        BallPoint::new(z).expect("basepoint lies in the ball")
    }

    /// Short label such as `E(2)` or `N(1,3)`.
    pub fn label(&self) -> String {
        match self.kind {
            FamilyKind::QuasiElliptic => format!("E({})", self.n),
            FamilyKind::QuasiParabolic => format!("P({})", self.n),
            FamilyKind::QuasiHyperbolic => format!("H({})", self.n),
            FamilyKind::Nilpotent => format!("N({})", self.n),
            FamilyKind::QuasiNilpotent => format!("N({},{})", self.k, self.n),
        }
    }

    /// Projection of a covering element `(theta, real, x)` to SU(n,1).
    pub fn matrix(&self, torus: &[f64], real: &[f64], phase: f64) -> GroupElement {
        let n = self.n;
        let a = Complex64::from_polar(1.0, 2.0 * PI * phase);
        let mut m = DMatrix::<Complex64>::zeros(n + 1, n + 1);
        let mt = self.torus_coords();
        for (j, &th) in torus.iter().enumerate() {
            m[(j, j)] = a * Complex64::from_polar(1.0, 2.0 * PI * th);
        }
        match self.kind {
            FamilyKind::QuasiElliptic => {
                m[(n, n)] = a;
            }
            FamilyKind::QuasiParabolic => {
                let hy = 0.5 * real[0];
                m[(n - 1, n - 1)] = a * Complex64::new(1.0, hy);
                m[(n - 1, n)] = a * Complex64::new(0.0, hy);
                m[(n, n - 1)] = a * Complex64::new(0.0, -hy);
                m[(n, n)] = a * Complex64::new(1.0, -hy);
            }
            FamilyKind::QuasiHyperbolic => {
                let (sh, ch) = (real[0].sinh(), real[0].cosh());
                m[(n - 1, n - 1)] = a * ch;
                m[(n - 1, n)] = a * sh;
                m[(n, n - 1)] = a * sh;
                m[(n, n)] = a * ch;
            }
            FamilyKind::Nilpotent | FamilyKind::QuasiNilpotent => {
                let s = real[0];
                let b = &real[1..];
                let b2: f64 = b.iter().map(|x| x * x).sum();
                let up = Complex64::new(-0.5 * b2, 0.5 * s); // (is - |b|^2)/2
                for (i, &bi) in b.iter().enumerate() {
                    let j = mt + i;
                    m[(j, j)] = a;
                    m[(j, n - 1)] = a * Complex64::new(0.0, -bi);
                    m[(j, n)] = a * Complex64::new(0.0, -bi);
                    m[(n - 1, j)] = a * Complex64::new(0.0, -bi);
                    m[(n, j)] = a * Complex64::new(0.0, bi);
                }
                m[(n - 1, n - 1)] = a * (up + ONE);
                m[(n - 1, n)] = a * up;
                m[(n, n - 1)] = -a * up;
                m[(n, n)] = a * (ONE - up);
            }
        }
        GroupElement::from_matrix_unchecked(m)
    }

    /// `rho(r, z) = e^{-2 pi i x}(w^t z + d)`: the bottom row of the projected
    /// matrix with the central phase removed. Independent of the torus part.
    pub fn rho(&self, real: &[f64], z: &[Complex64]) -> Complex64 {
        let n = self.n;
        match self.kind {
            FamilyKind::QuasiElliptic => ONE,
            FamilyKind::QuasiParabolic => {
                let hy = Complex64::new(0.0, -0.5 * real[0]);
                hy * z[n - 1] + ONE + hy
            }
            FamilyKind::QuasiHyperbolic => real[0].sinh() * z[n - 1] + real[0].cosh(),
            FamilyKind::Nilpotent | FamilyKind::QuasiNilpotent => {
                let s = real[0];
                let b = &real[1..];
                let b2: f64 = b.iter().map(|x| x * x).sum();
                let low = Complex64::new(0.5 * b2, -0.5 * s); // (-is + |b|^2)/2
                let mt = self.torus_coords();
                let mut acc = low * z[n - 1] + low + ONE;
                for (i, &bi) in b.iter().enumerate() {
                    acc += Complex64::new(0.0, bi) * z[mt + i];
                }
                acc
            }
        }
    }

    /// Orbit map `m -> h . z0` in the family's closed form.
    pub fn orbit_point(&self, m: &OrbitCoordinate) -> Result<BallPoint> {
        self.check_coordinate(m)?;
        let n = self.n;
        let e = self.basepoint_entry();
        let t: Vec<Complex64> = m.torus.iter().map(|&th| Complex64::from_polar(1.0, 2.0 * PI * th)).collect();
        let mut z = vec![ZERO; n];
        match self.kind {
            FamilyKind::QuasiElliptic => {
                for j in 0..n {
                    z[j] = t[j] * e;
                }
            }
            FamilyKind::QuasiParabolic => {
                let y = m.real[0];
                let den = Complex64::new(2.0, -y);
                for j in 0..n - 1 {
                    z[j] = 2.0 * t[j] * e / den;
                }
                z[n - 1] = Complex64::new(0.0, y) / den;
            }
            FamilyKind::QuasiHyperbolic => {
                let s = m.real[0];
                for j in 0..n - 1 {
                    z[j] = t[j] * e / s.cosh();
                }
                z[n - 1] = Complex64::new(s.tanh(), 0.0);
            }
            FamilyKind::Nilpotent | FamilyKind::QuasiNilpotent => {
                let s = m.real[0];
                let b = &m.real[1..];
                let b2: f64 = b.iter().map(|x| x * x).sum();
                let den = Complex64::new(0.5 * b2 + 1.0, -0.5 * s);
                let mt = self.torus_coords();
                for j in 0..mt {
                    z[j] = t[j] * e / den;
                }
                for (i, &bi) in b.iter().enumerate() {
                    z[mt + i] = Complex64::new(0.0, -bi) / den;
                }
                z[n - 1] = Complex64::new(-0.5 * b2, 0.5 * s) / den;
            }
        }
        BallPoint::new(z)
    }

    /// `D_lambda(h) = j_lambda(h, z0)`.
    pub fn d_lambda(&self, h: &CoveringElement, lambda: f64) -> Result<Complex64> {
        h.cocycle(&self.basepoint(), lambda)
    }

    /// Phase-stripped `D_lambda` as a function of the real orbit parameters:
    /// `rho(r, z0)^{-lambda}`, principal branch (the base has positive real part).
    pub fn d_lambda_stripped(&self, real: &[f64], lambda: f64) -> Complex64 {
        let base = self.rho(real, self.basepoint().coords());
        principal_pow(base, lambda)
    }

    /// Base `B` of the convolution kernel `phi_H = B^{-lambda}` evaluated at the
    /// orbit difference `(torus, real)`.
    pub fn kernel_base(&self, torus: &[f64], real: &[f64]) -> Complex64 {
        let m = self.torus_dim();
        let tsum: Complex64 = torus.iter().map(|&th| Complex64::from_polar(1.0, 2.0 * PI * th)).sum();
        let avg = if m > 0 { tsum / (2.0 * m as f64) } else { ZERO };
        match self.kind {
            FamilyKind::QuasiElliptic => ONE - avg,
            FamilyKind::QuasiParabolic => Complex64::new(1.0, -0.5 * real[0]) - avg,
            FamilyKind::QuasiHyperbolic => Complex64::new(real[0].cosh(), 0.0) - avg,
            FamilyKind::Nilpotent | FamilyKind::QuasiNilpotent => {
                let b2: f64 = real[1..].iter().map(|x| x * x).sum();
                Complex64::new(0.5 * b2 + 1.0, -0.5 * real[0]) - avg
            }
        }
    }

    /// Closed form of `R_lambda(h, k)`.
    pub fn rr_kernel(&self, h: &CoveringElement, k: &CoveringElement, lambda: f64) -> Result<Complex64> {
        if h.family() != self || k.family() != self {
            return Err(Error::InvalidFamily("covering element from another family".into()));
        }
        let torus: Vec<f64> = h.torus().iter().zip(k.torus()).map(|(a, b)| wrap_unit(a - b)).collect();
        let real: Vec<f64> = h.real().iter().zip(k.real()).map(|(a, b)| a - b).collect();
        let base = self.kernel_base(&torus, &real);
        if base.re <= 0.0 {
            return Err(Error::BranchCut { re: base.re, im: base.im });
        }
        let phase = Complex64::from_polar(1.0, -2.0 * PI * lambda * (h.phase() - k.phase()));
        Ok(phase * principal_pow(base, lambda))
    }

    /// `R_lambda(h, k)` from its definition `D(h) conj(D(k)) K(h z0, k z0)`.
    pub fn rr_kernel_from_definition(
        &self,
        h: &CoveringElement,
        k: &CoveringElement,
        lambda: f64,
    ) -> Result<Complex64> {
        let z0 = self.basepoint();
        let hz = h.act(&z0)?;
        let kz = k.act(&z0)?;
        let kern = principal_pow(ONE - hz.inner(&kz), lambda);
        Ok(self.d_lambda(h, lambda)? * self.d_lambda(k, lambda)?.conj() * kern)
    }

    pub(crate) fn check_coordinate(&self, m: &OrbitCoordinate) -> Result<()> {
        if m.torus.len() != self.torus_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.torus_dim(),
                got: m.torus.len(),
            });
        }
        if m.real.len() != self.real_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.real_dim(),
                got: m.real.len(),
            });
        }
        Ok(())
    }

    /// Lower weight bound above which `D_lambda` is square integrable on the
    /// orbit, as derived from the tail exponents of `|D_lambda|^2`.
    pub fn l2_threshold(&self) -> f64 {
        match self.kind {
            FamilyKind::QuasiElliptic => f64::NEG_INFINITY,
            FamilyKind::QuasiParabolic | FamilyKind::QuasiHyperbolic => 0.5,
            FamilyKind::Nilpotent | FamilyKind::QuasiNilpotent => (self.real_dim() as f64 + 1.0) / 4.0,
        }
    }
}

impl fmt::Display for SubgroupFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A point of `H / H_{z0} = T^m x R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitCoordinate {
    pub torus: Vec<f64>,
    pub real: Vec<f64>,
}

impl OrbitCoordinate {
    pub fn new(torus: Vec<f64>, real: Vec<f64>) -> Result<Self> {
        if real.iter().chain(&torus).any(|x| !x.is_finite()) {
            return Err(Error::Config("orbit coordinates must be finite".into()));
        }
        Ok(Self {
            torus: torus.into_iter().map(wrap_unit).collect(),
            real,
        })
    }

    pub fn identity(family: &SubgroupFamily) -> Self {
        Self {
            torus: vec![0.0; family.torus_dim()],
            real: vec![0.0; family.real_dim()],
        }
    }

    /// Canonical lift to the covering group (see [`CoveringElement::lift`]).
    pub fn lift(&self, family: &SubgroupFamily) -> Result<CoveringElement> {
        CoveringElement::lift(family.clone(), &self.torus, &self.real)
    }
}

/// Free-function form of [`SubgroupFamily::basepoint`].
pub fn basepoint(family: &SubgroupFamily) -> BallPoint {
    family.basepoint()
}

/// Free-function form of [`SubgroupFamily::orbit_point`].
pub fn orbit_point(family: &SubgroupFamily, m: &OrbitCoordinate) -> Result<BallPoint> {
    family.orbit_point(m)
}

/// Free-function form of [`SubgroupFamily::d_lambda`].
pub fn d_lambda(family: &SubgroupFamily, h: &CoveringElement, lambda: f64) -> Result<Complex64> {
    family.d_lambda(h, lambda)
}

/// Free-function form of [`SubgroupFamily::rr_kernel`].
pub fn rr_kernel(family: &SubgroupFamily, h: &CoveringElement, k: &CoveringElement, lambda: f64) -> Result<Complex64> {
    family.rr_kernel(h, k, lambda)
}

/// Outcome of integrating `|D_lambda|^2` over the orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum L2Norm {
    Finite(f64),
    /// The truncated integrals did not settle; `partial` is the last value.
    Divergent { partial: f64, radius: f64 },
}

impl L2Norm {
    pub fn value(&self) -> Option<f64> {
        match *self {
            L2Norm::Finite(v) => Some(v),
            L2Norm::Divergent { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, L2Norm::Finite(_))
    }
}

/// Largest truncation radius tried before declaring divergence.
pub const L2_RADIUS_CAP: f64 = 65_536.0;
const L2_TAIL_TOL: f64 = 1e-10;

/// Squared `L^2` norm of `|D_lambda|` over `H / H_{z0}` (torus mass one,
/// Lebesgue measure on the real factors).
///
/// The real-parameter integral is truncated to `[-R, R]^d` with `R` doubling
/// from 1. Successive increments are extrapolated geometrically; once the
/// projected tail, or the change between two projections, drops below `1e-10`
/// (relative) the projected value is returned. Growing
/// increments, or reaching [`L2_RADIUS_CAP`], mark the integral divergent.
/// `level` sets the Gauss–Legendre order per panel.
pub fn dlambda_l2_norm_sq(family: &SubgroupFamily, lambda: f64, level: usize) -> Result<L2Norm> {
    if level == 0 || level > 12 {
        return Err(Error::Config(format!("level {level} outside 1..=12")));
    }
    let d = family.real_dim();
    if d == 0 {
        return Ok(L2Norm::Finite(1.0));
    }
    let rule = gauss_legendre_unit(8 * level + 8);
    let z0 = family.basepoint();
    let density = |s: f64, rho_b: f64| -> f64 {
        // |D|^2 depends on s and |b| only; b enters through |b|^2.
        let mut real = vec![0.0; d];
        real[0] = s;
        if d > 1 {
            real[1] = rho_b;
        }
        family.rho(&real, z0.coords()).norm_sqr().powf(-lambda)
    };
    let nb = d.saturating_sub(1);
    // Surface measure of the unit sphere in R^{nb}.
    let sphere = if nb > 0 {
        2.0 * PI.powf(nb as f64 / 2.0) / ln_gamma(nb as f64 / 2.0).exp()
    } else {
        1.0
    };
    let integrate_to = |r: f64| -> f64 {
        let panels = graded_panels(r);
        let line = |f: &dyn Fn(f64) -> f64| -> f64 {
            let mut acc = 0.0;
            for &(lo, hi) in &panels {
                let w = hi - lo;
                acc += w * rule.integrate(|u| f(lo + w * u));
            }
            acc
        };
        if nb == 0 {
            2.0 * line(&|s| density(s, 0.0))
        } else {
            let inner = |s: f64| line(&|rb| sphere * rb.powi(nb as i32 - 1) * density(s, rb));
            2.0 * line(&inner)
        }
    };
    let mut radius = 1.0;
    let mut prev = integrate_to(radius);
    let mut prev_inc = f64::NAN;
    let mut prev_extrap = f64::NAN;
    while radius < L2_RADIUS_CAP {
        radius *= 2.0;
        let cur = integrate_to(radius);
        let inc = (cur - prev).abs();
        let scale = cur.abs().max(1.0);
        if inc <= L2_TAIL_TOL * scale * 1e-2 {
            return Ok(L2Norm::Finite(cur));
        }
        if prev_inc.is_finite() && prev_inc > 0.0 {
            let q = inc / prev_inc;
            if q >= 0.99 {
                return Ok(L2Norm::Divergent { partial: cur, radius });
            }
            let tail = inc * q / (1.0 - q);
            let extrap = cur + tail;
            // Power-law tails make the geometric projection exact to leading
            // order; accept once two projections agree.
            if tail <= L2_TAIL_TOL * scale || (extrap - prev_extrap).abs() <= L2_TAIL_TOL * scale {
                return Ok(L2Norm::Finite(extrap));
            }
            prev_extrap = extrap;
        }
        prev_inc = inc;
        prev = cur;
    }
    Ok(L2Norm::Divergent { partial: prev, radius })
}

/// Panels `[0,1], [1,2], [2,4], ..., [r/2, r]` for a radius that is a power of two.
fn graded_panels(r: f64) -> Vec<(f64, f64)> {
    let mut v = vec![(0.0, 0.5), (0.5, 1.0f64.min(r))];
    let mut lo = 1.0;
    while lo < r {
        let hi = (2.0 * lo).min(r);
        // Split each octave in two so the rule resolves the profile.
        let mid = 0.5 * (lo + hi);
        v.push((lo, mid));
        v.push((mid, hi));
        lo = hi;
    }
    v
}

/// `D_lambda` is constant in modulus along the covering phase; the continued
/// logarithm of `rho` along the basepoint path is the principal one for every
/// family, so this helper exposes it for cross-checks.
pub fn d_lambda_continued(family: &SubgroupFamily, real: &[f64], lambda: f64) -> Result<Complex64> {
    let z0 = family.basepoint();
    let l = continued_log(|tau| {
        let scaled: Vec<f64> = real.iter().map(|r| tau * r).collect();
        family.rho(&scaled, z0.coords())
    })?;
    Ok((-lambda * l).exp())
}
