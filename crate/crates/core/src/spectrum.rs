//! Restriction to orbits, its adjoint, the orbit function `nu_phi` of a
//! symbol and the spectral function `eta = nu_hat / phi_hat_H`.
//!
//! `nu_phi(m) = <T_phi K_{m z0}, K_{z0}>`-type pairing with the phase of
//! `D_lambda` stripped, so that `nu_1 = phi_H`. Its group Fourier transform
//! is computed from an orbit decomposition of the ball: every point is
//! `h . u` with `u` on a transversal slice and
//!
//! `nu_hat(chi) = c (2 pi)^{d/2} int_slice phi(u) (1-|u|^2)^lambda |a_u_hat(chi)|^2 d sigma(u)`,
//!
//! where `a_u(m) = D(m) K(m z0, u)`. The slice integrals are done with
//! Gauss rules matched to each family, so no oscillatory quadrature is
//! needed.

use crate::bergman::{
    kernel, monomial_norm_sq, toeplitz_matrix, toeplitz_strip, BallQuadrature, BergmanParams, MultiIndex, Polynomial, SymbolFn,
};
use crate::error::{Error, Result};
use crate::fft::{wrapped_index, GridFft};
use crate::geometry::{BallPoint, CoveringElement};
use crate::groups::{FamilyKind, OrbitCoordinate, SubgroupFamily};
use crate::harmonic::{in_support, phi_h_hat, Frequency, OrbitFunction};
use crate::special::{gauss_hermite, gauss_jacobi_unit, gauss_laguerre, ln_factorial, ln_gamma, ln_gamma_complex};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `|phi_hat_H|` below which `eta` is reported as ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e-9;

/// Samples used by the invariance precondition of [`eta`].
pub const INVARIANCE_SAMPLES: usize = 64;

fn check_family(params: &BergmanParams, family: &SubgroupFamily) -> Result<()> {
    if family.n() != params.n() {
        return Err(Error::DimensionMismatch {
            expected: params.n(),
            got: family.n(),
        });
    }
    Ok(())
}

/// `R p (h) = D_lambda(h) p(h . z0)`.
pub fn restrict(params: &BergmanParams, p: &Polynomial, family: &SubgroupFamily, h: &CoveringElement) -> Result<Complex64> {
    check_family(params, family)?;
    if p.n != params.n() {
        return Err(Error::DimensionMismatch {
            expected: params.n(),
            got: p.n,
        });
    }
    if h.family() != family {
        return Err(Error::InvalidFamily(format!("element of {} used with {family}", h.family())));
    }
    let z = h.act(&family.basepoint())?;
    Ok(family.d_lambda(h, params.lambda())? * p.eval(z.coords()))
}

/// Phase-stripped restriction `D~(m) p(m . z0)` on orbit coordinates.
pub fn restrict_stripped(
    params: &BergmanParams,
    p: &Polynomial,
    family: &SubgroupFamily,
    m: &OrbitCoordinate,
) -> Result<Complex64> {
    check_family(params, family)?;
    let z = family.orbit_point(m)?;
    Ok(family.d_lambda_stripped(&m.real, params.lambda()) * p.eval(z.coords()))
}

/// `R* f (z) = int f(m) conj(D~(m)) K(z, m . z0) dm` on the sample grid of
/// `f`: torus average and trapezoid rule in the real directions.
pub fn adjoint_apply(params: &BergmanParams, f: &OrbitFunction, family: &SubgroupFamily, z: &BallPoint) -> Result<Complex64> {
    check_family(params, family)?;
    if f.torus_sizes().len() != family.torus_dim() || f.real_axes().len() != family.real_dim() {
        return Err(Error::DimensionMismatch {
            expected: family.torus_dim() + family.real_dim(),
            got: f.torus_sizes().len() + f.real_axes().len(),
        });
    }
    if z.dim() != params.n() {
        return Err(Error::DimensionMismatch {
            expected: params.n(),
            got: z.dim(),
        });
    }
    let boundary = f.boundary_max();
    if boundary > f.tail_tolerance() {
        return Err(Error::TailTruncation { boundary });
    }
    let lambda = params.lambda();
    let cell: f64 = f.torus_sizes().iter().map(|&m| 1.0 / m as f64).product();
    let axes = f.real_axes();
    let terms: Vec<Complex64> = f
        .points()
        .into_par_iter()
        .map(|(th, x, v)| {
            let w: f64 = axes.iter().zip(&x).map(|(a, &xi)| a.weight_at(xi)).product();
            let m = OrbitCoordinate { torus: th, real: x };
            let p = family.orbit_point(&m)?;
            let d = family.d_lambda_stripped(&m.real, lambda);
            Ok(v * d.conj() * kernel(params, z, &p) * (w * cell))
        })
        .collect::<Result<_>>()?;
    Ok(crate::special::pairwise_sum(&terms))
}

/// Truncation settings for [`nu_field`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuOptions {
    /// Taylor degree of the holomorphic factor.
    pub degree: u32,
    /// Radial quadrature level for the moments.
    pub level: usize,
}

impl Default for NuOptions {
    fn default() -> Self {
        Self { degree: 40, level: 3 }
    }
}

/// `nu_phi(m) = D~(m) G(m . z0)` with `G(w) = sum_beta c_beta w^beta`,
/// where `c_beta` are the Taylor coefficients of `w -> (T_phi K_{z0})`
/// paired against `z^beta`.
#[derive(Debug, Clone)]
pub struct NuField {
    params: BergmanParams,
    family: SubgroupFamily,
    degree: u32,
    coeffs: Vec<(MultiIndex, Complex64)>,
}

impl NuField {
    pub fn family(&self) -> &SubgroupFamily {
        &self.family
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coefficients(&self) -> &[(MultiIndex, Complex64)] {
        &self.coeffs
    }

    /// Truncated `G(w)`.
    pub fn holomorphic_part(&self, w: &[Complex64]) -> Complex64 {
        let terms: Vec<Complex64> = self.coeffs.iter().map(|(b, c)| c * b.monomial(w)).collect();
        crate::special::pairwise_sum(&terms)
    }

    pub fn eval(&self, m: &OrbitCoordinate) -> Result<Complex64> {
        let w = self.family.orbit_point(m)?;
        Ok(self.family.d_lambda_stripped(&m.real, self.params.lambda()) * self.holomorphic_part(w.coords()))
    }

    /// Size of the top-degree terms at `m . z0`, a rough truncation estimate.
    pub fn tail_estimate(&self, m: &OrbitCoordinate) -> Result<f64> {
        let w = self.family.orbit_point(m)?;
        let d = self.family.d_lambda_stripped(&m.real, self.params.lambda()).norm();
        Ok(d * self
            .coeffs
            .iter()
            .filter(|(b, _)| b.degree() == self.degree)
            .map(|(b, c)| (c * b.monomial(w.coords())).norm())
            .sum::<f64>())
    }
}

fn next_pow2(k: usize) -> usize {
    k.max(1).next_power_of_two()
}

/// Build the Taylor representation of `nu_phi`.
///
/// The torus coordinates of `z0` are equal, so the pairing of `phi K_{z0}`
/// against `z^beta` only needs moments of `phi` that are radial in the
/// torus coordinates and Fourier in the others.
pub fn nu_field(params: &BergmanParams, phi: &SymbolFn, family: &SubgroupFamily, opts: NuOptions) -> Result<NuField> {
    check_family(params, family)?;
    let n = params.n();
    let lambda = params.lambda();
    let m = family.torus_dim();
    let rest = n - m;
    let deg = opts.degree;
    let radial = 6 * opts.level + 4;
    let quad = BallQuadrature::with_orders(params, opts.level, radial.max(deg as usize / 2 + 2), 1);
    let angles = if rest > 0 { next_pow2(2 * deg as usize + 2) } else { 1 };
    let dims = vec![angles; rest];
    let fft = GridFft::forward(&dims);
    let cells = angles.pow(rest as u32);
    let betas = MultiIndex::up_to(n, deg);
    let nodes = quad.radial_nodes();
    let chunk = 64;
    let partial: Vec<Vec<Complex64>> = nodes
        .par_chunks(chunk)
        .map(|block| {
            let mut acc = vec![ZERO; betas.len()];
            let mut z = vec![ZERO; n];
            let mut vals = vec![ZERO; cells];
            for node in block {
                for (cell, v) in vals.iter_mut().enumerate() {
                    for j in 0..m {
                        z[j] = Complex64::new(node.r[j], 0.0);
                    }
                    let mut c = cell;
                    for j in (m..n).rev() {
                        let k = c % angles;
                        c /= angles;
                        z[j] = Complex64::from_polar(node.r[j], 2.0 * PI * k as f64 / angles as f64);
                    }
                    *v = phi.eval(&z);
                }
                fft.process(&mut vals);
                let scale = node.weight / cells as f64;
                let pows: Vec<Vec<f64>> = node
                    .r
                    .iter()
                    .map(|&r| {
                        let mut p = vec![1.0; 2 * deg as usize + 1];
                        for e in 1..p.len() {
                            p[e] = p[e - 1] * r;
                        }
                        p
                    })
                    .collect();
                let mut freq = vec![0i64; rest];
                for (a, b) in acc.iter_mut().zip(&betas) {
                    let mut mono = 1.0;
                    for j in 0..m {
                        mono *= pows[j][2 * b.0[j] as usize];
                    }
                    for j in m..n {
                        mono *= pows[j][b.0[j] as usize];
                        freq[j - m] = b.0[j] as i64;
                    }
                    *a += vals[wrapped_index(&freq, &dims)] * (mono * scale);
                }
            }
            acc
        })
        .collect();
    let mut moments = vec![ZERO; betas.len()];
    for p in &partial {
        for (a, v) in moments.iter_mut().zip(p) {
            *a += v;
        }
    }
    let e = family.basepoint().coords().first().map_or(0.0, |c| c.re);
    let ln_e = if m > 0 { e.ln() } else { 0.0 };
    let ln_g = ln_gamma(lambda);
    let coeffs = betas
        .into_iter()
        .zip(moments)
        .map(|(b, mom)| {
            let tor: u32 = b.0[..m].iter().sum();
            let ln_fact: f64 = b.0[..m].iter().map(|&k| ln_factorial(k)).sum();
            let ln_kappa = ln_gamma(lambda + tor as f64) - ln_g - ln_fact + tor as f64 * ln_e;
            let c = mom * (ln_kappa.exp() / monomial_norm_sq(params, &b));
            (b, c)
        })
        .collect();
    Ok(NuField {
        params: *params,
        family: family.clone(),
        degree: deg,
        coeffs,
    })
}

/// `nu_phi` at one orbit point.
pub fn nu_phi(
    params: &BergmanParams,
    phi: &SymbolFn,
    family: &SubgroupFamily,
    m: &OrbitCoordinate,
    opts: NuOptions,
) -> Result<Complex64> {
    nu_field(params, phi, family, opts)?.eval(m)
}

/// Nodes `u` on the slice and weights with `nu_hat(chi) = sum w phi(u)`.
#[derive(Debug, Clone)]
pub struct SpectralRule {
    points: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
}

impl SpectralRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum w phi(u)`.
    pub fn apply(&self, phi: &SymbolFn) -> Complex64 {
        let terms: Vec<Complex64> = self.points.iter().zip(&self.weights).map(|(u, &w)| phi.eval(u) * w).collect();
        crate::special::pairwise_sum(&terms)
    }

    /// Value of the rule on `phi = 1`, equal to `phi_hat_H` up to quadrature error.
    pub fn mass(&self) -> f64 {
        crate::special::pairwise_sum(&self.weights.iter().map(|&w| Complex64::new(w, 0.0)).collect::<Vec<_>>()).re
    }
}

/// Points `omega` on the simplex `sum omega_j < 1` with weights for
/// `prod omega_j^{alpha_j} (1 - sum omega)^b`, by stick-breaking.
fn dirichlet_rule(alpha: &[i64], b: f64, order: usize) -> Vec<(Vec<f64>, f64)> {
    let k = alpha.len();
    let mut out = vec![(Vec::with_capacity(k), 1.0, 1.0)];
    for j in 0..k {
        let later: i64 = alpha[j + 1..].iter().sum();
        let rule = gauss_jacobi_unit(order, b + later as f64 + (k - 1 - j) as f64, alpha[j] as f64);
        let mut next = Vec::with_capacity(out.len() * order);
        for (omega, rest, w) in &out {
            for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
                let mut o: Vec<f64> = omega.clone();
                o.push(rest * x);
                next.push((o, rest * (1.0 - x), w * wx));
            }
        }
        out = next;
    }
    out.into_iter().map(|(o, _, w)| (o, w)).collect()
}

/// Quadrature orders derived from a level.
fn orders(level: usize) -> (usize, usize, usize, usize) {
    (4 * level + 8, 10 * level + 20, 6 * level + 12, 10 * level + 20)
}

/// Build the slice rule for `nu_hat` at an in-support frequency.
pub fn spectral_rule(params: &BergmanParams, family: &SubgroupFamily, f: &Frequency, level: usize) -> Result<SpectralRule> {
    check_family(params, family)?;
    if f.alpha.len() != family.torus_dim() || f.xi.len() != family.real_dim() {
        return Err(Error::DimensionMismatch {
            expected: family.torus_dim() + family.real_dim(),
            got: f.alpha.len() + f.xi.len(),
        });
    }
    if !in_support(family, f) {
        return Err(Error::OutOfSupport);
    }
    let n = params.n();
    let nf = n as f64;
    let lambda = params.lambda();
    let k = family.torus_dim();
    let d = family.real_dim();
    let a = f.degree() as f64;
    let c = lambda + a;
    let ln_e = if k > 0 { -0.5 * (2.0 * k as f64).ln() } else { 0.0 };
    let ln_afact: f64 = f.alpha.iter().map(|&x| ln_factorial(x as u32)).sum();
    let ln_amp = ln_gamma(c) - ln_gamma(lambda) - ln_afact;
    let ln_c = params.c_lambda().ln();
    let ln_nfact = ln_factorial(n as u32);
    let common = ln_c + ln_nfact + 2.0 * ln_amp + 2.0 * a * ln_e;
    let b = lambda - nf - 1.0;
    let (o_dir, o_lag, o_herm, o_ang) = orders(level);
    let dir = dirichlet_rule(&f.alpha, b, o_dir);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match family.kind() {
        FamilyKind::QuasiElliptic => {
            let pre = common.exp();
            for (omega, w) in dir {
                points.push(omega.iter().map(|&o| Complex64::new(o.sqrt(), 0.0)).collect());
                weights.push(pre * w);
            }
        }
        FamilyKind::QuasiHyperbolic => {
            let xi = f.xi[0];
            let lg = ln_gamma_complex(Complex64::new(0.5 * c, 0.5 * xi)).re;
            let ln_pre = common + 0.5 * (2.0 * PI).ln() - nf * PI.ln() + k as f64 * PI.ln() - (2.0 * PI).ln()
                + (c - 1.0) * 4f64.ln()
                + 4.0 * lg
                - 2.0 * ln_gamma(c)
                + (0.5 * PI).ln();
            let ang = gauss_jacobi_unit(o_ang, c - 2.0, c - 2.0);
            for (v, wv) in ang.nodes.iter().zip(&ang.weights) {
                let theta = PI * (v - 0.5);
                let s = (PI * v).sin() / (v * (1.0 - v));
                let ln_w = ln_pre + (c - 2.0) * s.ln() - xi * theta;
                let tau = (0.5 * theta).tan();
                let q = 1.0 - tau * tau;
                for (omega, w) in &dir {
                    let mut u: Vec<Complex64> = omega.iter().map(|&o| Complex64::new((q * o).sqrt(), 0.0)).collect();
                    u.push(Complex64::new(0.0, tau));
                    points.push(u);
                    weights.push(ln_w.exp() * wv * w);
                }
            }
        }
        FamilyKind::QuasiParabolic | FamilyKind::Nilpotent | FamilyKind::QuasiNilpotent => {
            let y = f.xi[0];
            let xb = &f.xi[1..];
            let nb = d - 1;
            let xb2: f64 = xb.iter().map(|x| x * x).sum();
            let lag_a = c - d as f64 - 1.0;
            let ln_pre = common + 0.5 * d as f64 * (2.0 * PI).ln() - nf * PI.ln() + k as f64 * PI.ln()
                + (2.0 * c - 1.0) * 2f64.ln()
                + PI.ln()
                - 2.0 * ln_gamma(c)
                - nb as f64 * (2.0 * y).ln()
                + (2.0 * c - 2.0) * y.ln()
                - 2.0 * y
                - xb2 / (4.0 * y)
                - (lag_a + 1.0) * (2.0 * y).ln()
                - nb as f64 * (2.0 * y.sqrt()).ln();
            let pre = ln_pre.exp();
            let lag = gauss_laguerre(o_lag, lag_a);
            let herm = gauss_hermite(o_herm);
            let herm_count = herm.nodes.len().pow(nb as u32);
            for (x, wx) in lag.nodes.iter().zip(&lag.weights) {
                let g = x / (2.0 * y);
                for hc in 0..herm_count {
                    let mut p = vec![0.0; nb];
                    let mut wp = 1.0;
                    let mut rem = hc;
                    for (i, pi) in p.iter_mut().enumerate() {
                        let j = rem % herm.nodes.len();
                        rem /= herm.nodes.len();
                        *pi = -xb[i] / (4.0 * y) + herm.nodes[j] / (2.0 * y.sqrt());
                        wp *= herm.weights[j];
                    }
                    let p2: f64 = p.iter().map(|v| v * v).sum();
                    let c0 = g + p2;
                    let tau = (1.0 - c0) / (1.0 + c0);
                    let q = 4.0 * g / ((1.0 + c0) * (1.0 + c0));
                    for (omega, w) in &dir {
                        let mut u: Vec<Complex64> =
                            omega.iter().map(|&o| Complex64::new((q * o).sqrt(), 0.0)).collect();
                        u.extend(p.iter().map(|&pi| Complex64::new(2.0 * pi / (1.0 + c0), 0.0)));
                        u.push(Complex64::new(tau, 0.0));
                        points.push(u);
                        weights.push(pre * wx * wp * w);
                    }
                }
            }
        }
    }
    Ok(SpectralRule { points, weights })
}

/// `nu_hat_phi` at an in-support frequency.
pub fn nu_hat(params: &BergmanParams, phi: &SymbolFn, family: &SubgroupFamily, f: &Frequency, level: usize) -> Result<Complex64> {
    Ok(spectral_rule(params, family, f, level)?.apply(phi))
}

/// Quality of an `eta` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Ok,
    IllConditioned,
    OutOfSupport,
}

impl Condition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Ok => "ok",
            Condition::IllConditioned => "ill_conditioned",
            Condition::OutOfSupport => "out_of_support",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaValue {
    pub frequency: Frequency,
    /// `NaN` off the support.
    pub eta: Complex64,
    pub nu_hat: Complex64,
    pub phi_hat: f64,
    pub condition: Condition,
}

fn eta_unchecked(params: &BergmanParams, phi: &SymbolFn, family: &SubgroupFamily, f: &Frequency, level: usize) -> Result<EtaValue> {
    let phi_hat = phi_h_hat(family, f, params.lambda())?;
    if !in_support(family, f) {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        return Ok(EtaValue {
            frequency: f.clone(),
            eta: nan,
            nu_hat: ZERO,
            phi_hat,
            condition: Condition::OutOfSupport,
        });
    }
    let nu = nu_hat(params, phi, family, f, level)?;
    let condition = if phi_hat.abs() < ILL_CONDITIONED {
        Condition::IllConditioned
    } else {
        Condition::Ok
    };
    Ok(EtaValue {
        frequency: f.clone(),
        eta: nu / phi_hat,
        nu_hat: nu,
        phi_hat,
        condition,
    })
}

fn check_invariance(phi: &SymbolFn, family: &SubgroupFamily) -> Result<()> {
    let defect = crate::bergman::invariance_defect(phi, family, INVARIANCE_SAMPLES);
    if !(defect <= crate::bergman::INVARIANCE_TOL) {
        return Err(Error::InvarianceViolation { defect });
    }
    Ok(())
}

/// `eta_phi(chi) = nu_hat_phi(chi) / phi_hat_H(chi)`.
pub fn eta(params: &BergmanParams, phi: &SymbolFn, family: &SubgroupFamily, f: &Frequency, level: usize) -> Result<EtaValue> {
    check_family(params, family)?;
    check_invariance(phi, family)?;
    if !in_support(family, f) {
        return Err(Error::OutOfSupport);
    }
    eta_unchecked(params, phi, family, f, level)
}

/// `eta` on a list of frequencies; off-support entries are kept and flagged.
#[derive(Debug, Clone)]
pub struct SpectralDensity {
    pub family: SubgroupFamily,
    pub lambda: f64,
    pub values: Vec<EtaValue>,
}

pub fn spectral_density(
    params: &BergmanParams,
    phi: &SymbolFn,
    family: &SubgroupFamily,
    freqs: &[Frequency],
    level: usize,
) -> Result<SpectralDensity> {
    check_family(params, family)?;
    check_invariance(phi, family)?;
    let values = freqs
        .par_iter()
        .map(|f| eta_unchecked(params, phi, family, f, level))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralDensity {
        family: family.clone(),
        lambda: params.lambda(),
        values,
    })
}

/// Diagonal of the Toeplitz matrix of a torus-invariant symbol: the
/// eigenvalues on the monomials `z^alpha`, `|alpha| <= degree`.
pub fn oracle_eigenvalues(params: &BergmanParams, phi: &SymbolFn, degree: u32, level: usize) -> Result<Vec<(MultiIndex, f64)>> {
    let n = params.n();
    if !phi.is_torus_invariant() {
        let torus = SubgroupFamily::quasi_elliptic(n)?;
        if !crate::bergman::invariance_check(phi, &torus, INVARIANCE_SAMPLES) {
            return Err(Error::NotTorusInvariant);
        }
    }
    let t = toeplitz_matrix(params, phi, degree, level)?;
    Ok(t.indices.iter().cloned().zip(t.diagonal().into_iter().map(|v| v.re)).collect())
}

/// Default gap between the kept block and the inner summation degree.
pub const COMMUTATOR_MARGIN: u32 = 40;

/// Settings for [`commutator_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorOptions {
    /// Degree of the intermediate sum in the products; `None` means
    /// `degree + COMMUTATOR_MARGIN`.
    pub inner_degree: Option<u32>,
    pub level: usize,
}

impl Default for CommutatorOptions {
    fn default() -> Self {
        Self {
            inner_degree: None,
            level: 4,
        }
    }
}

/// Frobenius norm of the degree-`degree` block of `T1 T2 - T2 T1`, with
/// products summed over monomials up to the inner degree.
pub fn commutator_norm(
    params: &BergmanParams,
    phi1: &SymbolFn,
    phi2: &SymbolFn,
    degree: u32,
    opts: CommutatorOptions,
) -> Result<f64> {
    let inner = opts.inner_degree.unwrap_or(degree + COMMUTATOR_MARGIN).max(degree);
    let base = BallQuadrature::new(params, opts.level)?;
    // Radial products of degree <= 2 inner and angular differences up to
    // inner are integrated without aliasing.
    let radial = base.radial_order().max(inner as usize / 2 + 2);
    let angles = base.angles().max((2 * inner as usize + 2).next_power_of_two());
    let quad = BallQuadrature::with_orders(params, opts.level, radial, angles);
    let keep = MultiIndex::up_to(params.n(), degree).len();
    let t1 = toeplitz_strip(&quad, phi1, inner, keep);
    let t2 = toeplitz_strip(&quad, phi2, inner, keep);
    let a: DMatrix<Complex64> = t1.entries.rows(0, keep) * t2.entries.columns(0, keep);
    let b: DMatrix<Complex64> = t2.entries.rows(0, keep) * t1.entries.columns(0, keep);
    Ok((a - b).norm())
}
