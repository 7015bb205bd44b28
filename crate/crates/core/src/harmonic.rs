//! Fourier analysis on `H / H_{z0} = T^m x R^d`: the kernels `phi_H`, their
//! transforms, numerical group Fourier transforms and the square-root kernel
//! `omega_H`.
//!
//! Conventions: torus coefficients are `int_T f(theta) e^{-2 pi i alpha theta} d theta`
//! (Haar mass one), real axes use `(2 pi)^{-1/2} int f(x) e^{-i xi x} dx`.
//! For the nilpotent families the first real frequency `xi[0]` is the one
//! dual to `s` (often written `y`).

use crate::error::{Error, Result};
use crate::fft::{wrapped_index, GridFft};
use crate::geometry::principal_pow;
use crate::groups::{FamilyKind, OrbitCoordinate, SubgroupFamily};
use crate::integrate::{fourier_weights, full_line_nodes, positive_axis_weights, DeRule};
use crate::special::{ln_factorial, ln_gamma, ln_gamma_complex};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A character of `T^m x R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequency {
    pub alpha: Vec<i64>,
    pub xi: Vec<f64>,
}

impl Frequency {
    pub fn new(alpha: Vec<i64>, xi: Vec<f64>) -> Result<Self> {
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("frequencies must be finite".into()));
        }
        Ok(Self { alpha, xi })
    }

    pub fn zero(family: &SubgroupFamily) -> Self {
        Self {
            alpha: vec![0; family.torus_dim()],
            xi: vec![0.0; family.real_dim()],
        }
    }

    pub fn degree(&self) -> i64 {
        self.alpha.iter().sum()
    }

    fn check(&self, family: &SubgroupFamily) -> Result<()> {
        if self.alpha.len() != family.torus_dim() {
            return Err(Error::DimensionMismatch {
                expected: family.torus_dim(),
                got: self.alpha.len(),
            });
        }
        if self.xi.len() != family.real_dim() {
            return Err(Error::DimensionMismatch {
                expected: family.real_dim(),
                got: self.xi.len(),
            });
        }
        Ok(())
    }
}

/// `phi_H(theta, r) = B(theta, r)^{-lambda}`, principal branch, where `B` is
/// [`SubgroupFamily::kernel_base`].
pub fn phi_h_at(family: &SubgroupFamily, torus: &[f64], real: &[f64], lambda: f64) -> Complex64 {
    principal_pow(family.kernel_base(torus, real), lambda)
}

/// `phi_H` at an orbit coordinate.
pub fn phi_h(family: &SubgroupFamily, m: &OrbitCoordinate, lambda: f64) -> Result<Complex64> {
    family.check_coordinate(m)?;
    Ok(phi_h_at(family, &m.torus, &m.real, lambda))
}

/// Whether `phi_H_hat` can be nonzero at `f`: torus part nonnegative and,
/// for the parabolic and nilpotent families, the first real frequency positive.
pub fn in_support(family: &SubgroupFamily, f: &Frequency) -> bool {
    if f.alpha.iter().any(|&a| a < 0) {
        return false;
    }
    match family.kind() {
        FamilyKind::QuasiElliptic | FamilyKind::QuasiHyperbolic => true,
        FamilyKind::QuasiParabolic | FamilyKind::Nilpotent | FamilyKind::QuasiNilpotent => f.xi[0] > 0.0,
    }
}

fn ln_alpha_factorial(alpha: &[i64]) -> f64 {
    alpha.iter().map(|&a| ln_factorial(a as u32)).sum()
}

/// Closed form of the group Fourier transform of `phi_H`.
///
/// * `E(n)`: `(2n)^{-|a|} Gamma(lambda+|a|) / (Gamma(lambda) a!)`
/// * `P(n)`: `2^lambda sqrt(2 pi) xi^{lambda+|a|-1} e^{-2 xi} / (Gamma(lambda) (n-1)^{|a|} a!)`, `xi > 0`
/// * `H(n)`: `2^{lambda-1} |Gamma((lambda+|a|+i xi)/2)|^2 / (sqrt(2 pi) Gamma(lambda) (n-1)^{|a|} a!)`
/// * `N(n)`: `2^lambda sqrt(2 pi) y^{lambda-1} (2y)^{-(n-1)/2} e^{-2y - |xi|^2/(4y)} / Gamma(lambda)`, `y > 0`
/// * `N(k,n)`: `2^lambda sqrt(2 pi) y^{lambda+|a|-1} (2y)^{-(n-k-1)/2} e^{-2y - |xi|^2/(4y)} / (Gamma(lambda) k^{|a|} a!)`, `y > 0`
pub fn phi_h_hat(family: &SubgroupFamily, f: &Frequency, lambda: f64) -> Result<f64> {
    f.check(family)?;
    if !in_support(family, f) {
        return Ok(0.0);
    }
    let n = family.n() as f64;
    let a = f.degree() as f64;
    let ln_afact = ln_alpha_factorial(&f.alpha);
    let ln_sqrt_2pi = 0.5 * (2.0 * PI).ln();
    let ln_g = ln_gamma(lambda);
    let ln_val = match family.kind() {
        FamilyKind::QuasiElliptic => -a * (2.0 * n).ln() + ln_gamma(lambda + a) - ln_g - ln_afact,
        FamilyKind::QuasiParabolic => {
            let xi = f.xi[0];
            let torus_scale = if family.n() > 1 { a * (n - 1.0).ln() } else { 0.0 };
            lambda * 2f64.ln() + ln_sqrt_2pi + (lambda + a - 1.0) * xi.ln() - 2.0 * xi
                - ln_g
                - torus_scale
                - ln_afact
        }
        FamilyKind::QuasiHyperbolic => {
            let xi = f.xi[0];
            let torus_scale = if family.n() > 1 { a * (n - 1.0).ln() } else { 0.0 };
            let lg = ln_gamma_complex(Complex64::new(0.5 * (lambda + a), 0.5 * xi));
            (lambda - 1.0) * 2f64.ln() - ln_sqrt_2pi + 2.0 * lg.re - ln_g - torus_scale - ln_afact
        }
        FamilyKind::Nilpotent | FamilyKind::QuasiNilpotent => {
            let k = family.torus_dim() as f64;
            let y = f.xi[0];
            let b2: f64 = f.xi[1..].iter().map(|x| x * x).sum();
            let nb = (family.real_dim() - 1) as f64;
            let torus_scale = if k > 0.0 { a * k.ln() } else { 0.0 };
            lambda * 2f64.ln() + ln_sqrt_2pi + (lambda + a - 1.0) * y.ln()
                - 0.5 * nb * (2.0 * y).ln()
                - 2.0 * y
                - b2 / (4.0 * y)
                - ln_g
                - torus_scale
                - ln_afact
        }
    };
    Ok(ln_val.exp())
}

/// Tolerance below which a negative transform value is rounding noise.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// `sqrt(phi_H_hat)`, zero off the support.
pub fn omega_h_hat(family: &SubgroupFamily, f: &Frequency, lambda: f64) -> Result<f64> {
    let v = phi_h_hat(family, f, lambda)?;
    if v < -POSITIVITY_TOL {
        return Err(Error::PositivityViolation { value: v });
    }
    Ok(v.max(0.0).sqrt())
}

/// A symmetric truncated real axis `x_j = -L + j h`, `j = 0..=2L/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealAxis {
    pub half_width: f64,
    pub step: f64,
}

impl RealAxis {
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if !(half_width > 0.0 && step > 0.0) || !half_width.is_finite() {
            return Err(Error::Config("real axis needs positive half-width and step".into()));
        }
        let ratio = 2.0 * half_width / step;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::Config("2L/h must be an integer".into()));
        }
        Ok(Self { half_width, step })
    }

    pub fn len(&self) -> usize {
        (2.0 * self.half_width / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.step
    }

    /// Trapezoid weight of the node nearest to `x`.
    pub(crate) fn weight_at(&self, x: f64) -> f64 {
        let j = ((x + self.half_width) / self.step).round().clamp(0.0, (self.len() - 1) as f64);
        self.weight(j as usize)
    }

    fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.len() {
            0.5 * self.step
        } else {
            self.step
        }
    }
}

/// Default tail tolerance of [`OrbitFunction`].
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Samples of a function on a uniform grid of `T^m x R^d`
/// (row-major, torus axes first).
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitFunction {
    torus: Vec<usize>,
    real: Vec<RealAxis>,
    samples: Vec<Complex64>,
    tail_tol: f64,
}

impl OrbitFunction {
    /// Sample `f(theta, x)` on the grid. Torus sizes must be powers of two.
    pub fn sample<F>(torus: Vec<usize>, real: Vec<RealAxis>, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64]) -> Complex64 + Sync,
    {
        if torus.iter().any(|&m| m == 0 || !m.is_power_of_two()) {
            return Err(Error::Config("torus grid sizes must be powers of two".into()));
        }
        let dims: Vec<usize> = torus.iter().copied().chain(real.iter().map(|a| a.len())).collect();
        let total: usize = dims.iter().product();
        let (m, d) = (torus.len(), real.len());
        let samples = (0..total)
            .into_par_iter()
            .map(|flat| {
                let idx = unflatten(flat, &dims);
                let th: Vec<f64> = (0..m).map(|j| idx[j] as f64 / torus[j] as f64).collect();
                let x: Vec<f64> = (0..d).map(|j| real[j].node(idx[m + j])).collect();
                f(&th, &x)
            })
            .collect();
        Ok(Self {
            torus,
            real,
            samples,
            tail_tol: DEFAULT_TAIL_TOL,
        })
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tol = tol;
        self
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tol
    }

    pub fn torus_sizes(&self) -> &[usize] {
        &self.torus
    }

    pub fn real_axes(&self) -> &[RealAxis] {
        &self.real
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    fn dims(&self) -> Vec<usize> {
        self.torus.iter().copied().chain(self.real.iter().map(|a| a.len())).collect()
    }

    /// Largest `|f|` on grid points with some real coordinate at `+-L`.
    pub fn boundary_max(&self) -> f64 {
        if self.real.is_empty() {
            return 0.0;
        }
        let dims = self.dims();
        let m = self.torus.len();
        self.samples
            .iter()
            .enumerate()
            .filter(|(flat, _)| {
                let idx = unflatten(*flat, &dims);
                (0..self.real.len()).any(|j| idx[m + j] == 0 || idx[m + j] + 1 == dims[m + j])
            })
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// `(theta, x) -> value` at every grid point, for export.
    pub fn points(&self) -> Vec<(Vec<f64>, Vec<f64>, Complex64)> {
        let dims = self.dims();
        let m = self.torus.len();
        self.samples
            .iter()
            .enumerate()
            .map(|(flat, v)| {
                let idx = unflatten(flat, &dims);
                let th = (0..m).map(|j| idx[j] as f64 / self.torus[j] as f64).collect();
                let x = (0..self.real.len()).map(|j| self.real[j].node(idx[m + j])).collect();
                (th, x, *v)
            })
            .collect()
    }
}

fn unflatten(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for j in (0..dims.len()).rev() {
        idx[j] = flat % dims[j];
        flat /= dims[j];
    }
    idx
}

/// Group Fourier transform of grid samples: FFT along the torus axes and the
/// trapezoid rule on the truncated real grid.
pub fn group_fourier(f: &OrbitFunction, freqs: &[Frequency]) -> Result<Vec<Complex64>> {
    let boundary = f.boundary_max();
    if boundary > f.tail_tol {
        return Err(Error::TailTruncation { boundary });
    }
    let m = f.torus.len();
    let d = f.real.len();
    for q in freqs {
        if q.alpha.len() != m || q.xi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: m + d,
                got: q.alpha.len() + q.xi.len(),
            });
        }
    }
    let torus_total: usize = f.torus.iter().product();
    let real_dims: Vec<usize> = f.real.iter().map(|a| a.len()).collect();
    let real_total: usize = real_dims.iter().product();
    // Torus FFT for every real node; layout [real node][torus mode].
    let fft = GridFft::forward(&f.torus);
    let per_node: Vec<Vec<Complex64>> = (0..real_total)
        .into_par_iter()
        .map(|r| {
            let mut buf: Vec<Complex64> = (0..torus_total).map(|t| f.samples[t * real_total + r]).collect();
            fft.process(&mut buf);
            let inv = 1.0 / torus_total as f64;
            buf.iter_mut().for_each(|v| *v *= inv);
            buf
        })
        .collect();
    let norm = (2.0 * PI).powf(-0.5 * d as f64);
    let out = freqs
        .par_iter()
        .map(|q| {
            let ti = wrapped_index(&q.alpha, &f.torus);
            let mut acc = ZERO;
            for (r, coeffs) in per_node.iter().enumerate() {
                let idx = unflatten(r, &real_dims);
                let mut w = 1.0;
                let mut phase = 0.0;
                for j in 0..d {
                    let x = f.real[j].node(idx[j]);
                    w *= f.real[j].weight(idx[j]);
                    phase -= q.xi[j] * x;
                }
                acc += coeffs[ti] * Complex64::from_polar(w, phase);
            }
            acc * norm
        })
        .collect();
    Ok(out)
}

/// Settings for [`fourier_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericFourier {
    /// Torus grid points per axis (power of two).
    pub torus_points: usize,
    pub rule: DeRule,
}

impl Default for NumericFourier {
    fn default() -> Self {
        Self {
            torus_points: 64,
            rule: DeRule::default(),
        }
    }
}

/// Group Fourier transform of a callable `f(theta, x)` on `T^m x R^d`
/// whose real-axis decay may be only algebraic: FFT along the torus axes and
/// nested double-exponential Fourier quadrature along each real axis.
pub fn fourier_numeric<F>(
    torus_dim: usize,
    real_dim: usize,
    f: F,
    freqs: &[Frequency],
    opts: NumericFourier,
) -> Result<Vec<Complex64>>
where
    F: Fn(&[f64], &[f64]) -> Complex64 + Sync,
{
    if !opts.torus_points.is_power_of_two() {
        return Err(Error::Config("torus grid sizes must be powers of two".into()));
    }
    for q in freqs {
        if q.alpha.len() != torus_dim || q.xi.len() != real_dim {
            return Err(Error::DimensionMismatch {
                expected: torus_dim + real_dim,
                got: q.alpha.len() + q.xi.len(),
            });
        }
    }
    let dims = vec![opts.torus_points; torus_dim];
    let torus_total: usize = dims.iter().product();
    let fft = GridFft::forward(&dims);
    let angles: Vec<Vec<f64>> = (0..torus_total)
        .map(|flat| {
            unflatten(flat, &dims)
                .into_iter()
                .map(|k| k as f64 / opts.torus_points as f64)
                .collect()
        })
        .collect();
    let torus_coeffs = |x: &[f64]| -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = angles.iter().map(|th| f(th, x)).collect();
        fft.process(&mut buf);
        buf
    };
    // Group by real frequency so one pass serves every torus mode.
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for (i, q) in freqs.iter().enumerate() {
        match groups.iter_mut().find(|(xi, _)| xi.iter().zip(&q.xi).all(|(a, b)| a.to_bits() == b.to_bits())) {
            Some(g) => g.1.push(i),
            None => groups.push((q.xi.clone(), vec![i])),
        }
    }
    let norm = (2.0 * PI).powf(-0.5 * real_dim as f64) / torus_total as f64;
    let mut out = vec![ZERO; freqs.len()];
    for (xi, members) in groups {
        let weights: Vec<Vec<(f64, Complex64)>> = xi.iter().map(|&x| fourier_weights(x, opts.rule)).collect();
        let acc = if real_dim == 0 {
            torus_coeffs(&[])
        } else {
            // Outer parallel loop over the last axis, nested loops inside.
            let last = real_dim - 1;
            let partial: Vec<Vec<Complex64>> = weights[last]
                .par_iter()
                .map(|&(x_last, w_last)| {
                    let mut acc = vec![ZERO; torus_total];
                    let mut x = vec![0.0; real_dim];
                    x[last] = x_last;
                    nested_accumulate(&weights, last, &mut x, w_last, &torus_coeffs, &mut acc);
                    acc
                })
                .collect();
            let mut acc = vec![ZERO; torus_total];
            for p in partial {
                for (a, v) in acc.iter_mut().zip(p) {
                    *a += v;
                }
            }
            acc
        };
        for i in members {
            out[i] = acc[wrapped_index(&freqs[i].alpha, &dims)] * norm;
        }
    }
    Ok(out)
}

fn nested_accumulate<G>(
    weights: &[Vec<(f64, Complex64)>],
    axis: usize,
    x: &mut Vec<f64>,
    w: Complex64,
    eval: &G,
    acc: &mut [Complex64],
) where
    G: Fn(&[f64]) -> Vec<Complex64>,
{
    if axis == 0 {
        for (a, v) in acc.iter_mut().zip(eval(x)) {
            *a += w * v;
        }
        return;
    }
    for &(xj, wj) in &weights[axis - 1] {
        let ww = w * wj;
        if ww.norm() < 1e-300 {
            continue;
        }
        x[axis - 1] = xj;
        nested_accumulate(weights, axis - 1, x, ww, eval, acc);
    }
}

/// Numerical group Fourier transform of `phi_H`.
pub fn phi_h_hat_numeric(
    family: &SubgroupFamily,
    lambda: f64,
    freqs: &[Frequency],
    opts: NumericFourier,
) -> Result<Vec<Complex64>> {
    for q in freqs {
        q.check(family)?;
    }
    fourier_numeric(
        family.torus_dim(),
        family.real_dim(),
        |th, x| phi_h_at(family, th, x, lambda),
        freqs,
        opts,
    )
}

/// Frequencies probed by [`bspace_support_check`]: every torus mode the
/// grid resolves (`|alpha_j| < M/2`, capped at 8) times real frequencies in
/// `{0, +-1/2, +-1, +-2, +-4}`.
pub fn probe_frequencies(torus_sizes: &[usize], real_dim: usize) -> Vec<Frequency> {
    let reals = [-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0];
    let ranges: Vec<i64> = torus_sizes.iter().map(|&m| ((m / 2) as i64 - 1).clamp(0, 8)).collect();
    let mut alphas: Vec<Vec<i64>> = vec![Vec::new()];
    for &r in &ranges {
        alphas = alphas
            .into_iter()
            .flat_map(|a| {
                (-r..=r).map(move |k| {
                    let mut b = a.clone();
                    b.push(k);
                    b
                })
            })
            .collect();
    }
    let mut xis: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..real_dim {
        xis = xis
            .into_iter()
            .flat_map(|a| {
                reals.iter().map(move |&k| {
                    let mut b = a.clone();
                    b.push(k);
                    b
                })
            })
            .collect();
    }
    alphas
        .iter()
        .flat_map(|a| xis.iter().map(move |x| Frequency { alpha: a.clone(), xi: x.clone() }))
        .collect()
}

/// True iff the transform of `f` is below `tol` at every probed frequency
/// where `phi_H_hat` vanishes.
pub fn bspace_support_check(f: &OrbitFunction, family: &SubgroupFamily, lambda: f64, tol: f64) -> Result<bool> {
    if f.torus_sizes().len() != family.torus_dim() || f.real_axes().len() != family.real_dim() {
        return Err(Error::DimensionMismatch {
            expected: family.torus_dim() + family.real_dim(),
            got: f.torus_sizes().len() + f.real_axes().len(),
        });
    }
    let probes: Vec<Frequency> = probe_frequencies(f.torus_sizes(), family.real_dim())
        .into_iter()
        .filter(|q| phi_h_hat(family, q, lambda).map(|v| v == 0.0).unwrap_or(false))
        .collect();
    let values = group_fourier(f, &probes)?;
    Ok(values.iter().all(|v| v.norm() <= tol))
}

/// Settings for [`synthesize_omega`] and [`omega_self_convolution`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaOptions {
    /// Torus modes with `|alpha| <= max_mode` are kept.
    pub max_mode: usize,
    /// Torus grid points per axis for spatial convolution (power of two).
    pub torus_points: usize,
    pub rule: DeRule,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self {
            max_mode: 40,
            torus_points: 128,
            rule: DeRule::with_step(0.0625),
        }
    }
}

/// Spatial `omega_H` synthesized from `sqrt(phi_H_hat)` by inverse transform.
/// Supported for families with at most one real factor.
#[derive(Debug, Clone)]
pub struct OmegaField {
    family: SubgroupFamily,
    lambda: f64,
    modes: Vec<Vec<i64>>,
    opts: OmegaOptions,
}

pub fn synthesize_omega(family: &SubgroupFamily, lambda: f64, opts: OmegaOptions) -> Result<OmegaField> {
    if family.real_dim() > 1 {
        return Err(Error::Config(format!(
            "spatial synthesis of omega is limited to one real factor ({} has {})",
            family.label(),
            family.real_dim()
        )));
    }
    if !opts.torus_points.is_power_of_two() || opts.torus_points <= 2 * opts.max_mode {
        return Err(Error::Config("torus grid must be a power of two above twice the mode cutoff".into()));
    }
    let m = family.torus_dim();
    let modes = crate::bergman::MultiIndex::up_to(m, opts.max_mode as u32)
        .into_iter()
        .map(|a| a.0.into_iter().map(i64::from).collect())
        .collect();
    Ok(OmegaField {
        family: family.clone(),
        lambda,
        modes,
        opts,
    })
}

impl OmegaField {
    pub fn family(&self) -> &SubgroupFamily {
        &self.family
    }

    pub fn modes(&self) -> &[Vec<i64>] {
        &self.modes
    }

    /// Real-axis profiles `omega_alpha(y)` for every kept torus mode.
    pub fn mode_profiles(&self, real: &[f64]) -> Result<Vec<Complex64>> {
        let lambda = self.lambda;
        let fam = &self.family;
        if fam.real_dim() == 0 {
            return self
                .modes
                .iter()
                .map(|a| omega_h_hat(fam, &Frequency { alpha: a.clone(), xi: vec![] }, lambda).map(|v| v.into()))
                .collect();
        }
        let y = real[0];
        let norm = 1.0 / (2.0 * PI).sqrt();
        // e^{i xi y}: positive-axis rule when the support is xi > 0, otherwise
        // the full line with the sign of y flipped.
        let nodes = match fam.kind() {
            FamilyKind::QuasiParabolic => positive_axis_weights(y, self.opts.rule),
            _ => fourier_weights(-y, self.opts.rule),
        };
        self.modes
            .iter()
            .map(|a| {
                let mut acc = ZERO;
                for &(xi, w) in &nodes {
                    let v = omega_h_hat(fam, &Frequency { alpha: a.clone(), xi: vec![xi] }, lambda)?;
                    acc += w * v;
                }
                Ok(acc * norm)
            })
            .collect()
    }

    /// `omega_H(theta, y)`.
    pub fn eval(&self, torus: &[f64], real: &[f64]) -> Result<Complex64> {
        let prof = self.mode_profiles(real)?;
        Ok(self.combine(&prof, torus))
    }

    fn combine(&self, profiles: &[Complex64], torus: &[f64]) -> Complex64 {
        self.modes
            .iter()
            .zip(profiles)
            .map(|(a, p)| {
                let ph: f64 = a.iter().zip(torus).map(|(&k, &t)| k as f64 * t).sum();
                p * Complex64::from_polar(1.0, 2.0 * PI * ph)
            })
            .sum()
    }
}

/// `(omega * omega)(theta, y)` with Haar mass one on the torus and the
/// self-dual measure `dx / sqrt(2 pi)` on the real factor, evaluated in
/// space: trapezoid over a torus grid and double-exponential quadrature on
/// the real line.
pub fn omega_self_convolution(field: &OmegaField, m: &OrbitCoordinate) -> Result<Complex64> {
    let fam = field.family();
    fam.check_coordinate(m)?;
    let tm = fam.torus_dim();
    let np = field.opts.torus_points;
    let grid_total = np.pow(tm as u32);
    let grid: Vec<Vec<f64>> = (0..grid_total)
        .map(|flat| unflatten(flat, &vec![np; tm]).into_iter().map(|k| k as f64 / np as f64).collect())
        .collect();
    let torus_conv = |left: &[Complex64], right: &[Complex64]| -> Complex64 {
        let sum: Complex64 = grid
            .par_iter()
            .map(|phi| {
                let shifted: Vec<f64> = m.torus.iter().zip(phi).map(|(t, p)| t - p).collect();
                field.combine(left, &shifted) * field.combine(right, phi)
            })
            .sum();
        sum / grid_total as f64
    };
    if fam.real_dim() == 0 {
        let prof = field.mode_profiles(&[])?;
        return Ok(torus_conv(&prof, &prof));
    }
    let y = m.real[0];
    let nodes = full_line_nodes(field.opts.rule);
    let mut acc = ZERO;
    for (u, w) in nodes {
        let left = field.mode_profiles(&[y - u])?;
        let right = field.mode_profiles(&[u])?;
        acc += torus_conv(&left, &right) * w;
    }
    Ok(acc / (2.0 * PI).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fam_e(n: usize) -> SubgroupFamily {
        SubgroupFamily::quasi_elliptic(n).unwrap()
    }

    #[test]
    fn phi_examples() {
        let e2 = fam_e(2);
        let v = phi_h(&e2, &OrbitCoordinate::new(vec![0.0, 0.0], vec![]).unwrap(), 2.0).unwrap();
        assert_relative_eq!(v.re, 4.0, max_relative = 1e-14);
        let p2 = SubgroupFamily::quasi_parabolic(2).unwrap();
        let v = phi_h(&p2, &OrbitCoordinate::new(vec![0.0], vec![0.0]).unwrap(), 2.0).unwrap();
        assert_relative_eq!(v.re, 4.0, max_relative = 1e-14);
        let n2 = SubgroupFamily::nilpotent(2).unwrap();
        let v = phi_h(&n2, &OrbitCoordinate::new(vec![], vec![0.0, 0.0]).unwrap(), 2.0).unwrap();
        assert_relative_eq!(v.re, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn phi_matches_stripped_rr_kernel() {
        use crate::geometry::CoveringElement;
        let fams = [
            fam_e(2),
            SubgroupFamily::quasi_parabolic(2).unwrap(),
            SubgroupFamily::quasi_hyperbolic(2).unwrap(),
            SubgroupFamily::nilpotent(2).unwrap(),
            SubgroupFamily::quasi_nilpotent(1, 3).unwrap(),
        ];
        for fam in fams {
            let lambda = fam.n() as f64 + 0.5;
            let torus: Vec<f64> = (0..fam.torus_dim()).map(|j| 0.2 + 0.3 * j as f64).collect();
            let real: Vec<f64> = (0..fam.real_dim()).map(|j| 0.8 - 0.5 * j as f64).collect();
            let h = CoveringElement::lift(fam.clone(), &torus, &real).unwrap();
            let e = CoveringElement::identity(fam.clone());
            let r = fam.rr_kernel(&h, &e, lambda).unwrap() * h.character(lambda);
            let p = phi_h_at(&fam, &torus, &real, lambda);
            assert!((r - p).norm() < 1e-12 * p.norm(), "{fam}");
        }
    }

    #[test]
    fn closed_form_examples() {
        let e = fam_e(1);
        let f = |a: i64| Frequency::new(vec![a], vec![]).unwrap();
        assert_relative_eq!(phi_h_hat(&fam_e(3), &Frequency::zero(&fam_e(3)), 4.5).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(phi_h_hat(&e, &f(1), 2.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(omega_h_hat(&e, &f(1), 2.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_eq!(omega_h_hat(&e, &f(-1), 2.0).unwrap(), 0.0);
        let h2 = SubgroupFamily::quasi_hyperbolic(2).unwrap();
        let neg = Frequency::new(vec![-1], vec![0.3]).unwrap();
        assert_eq!(phi_h_hat(&h2, &neg, 2.5).unwrap(), 0.0);
        let n2 = SubgroupFamily::nilpotent(2).unwrap();
        assert_eq!(phi_h_hat(&n2, &Frequency::new(vec![], vec![-0.5, 1.0]).unwrap(), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn grid_transform_of_gaussian_and_torus() {
        let axis = RealAxis::new(12.0, 1.0 / 16.0).unwrap();
        let g = OrbitFunction::sample(vec![], vec![axis], |_, x| Complex64::new((-0.5 * x[0] * x[0]).exp(), 0.0)).unwrap();
        let freqs: Vec<Frequency> = (-8..=8).map(|k| Frequency::new(vec![], vec![0.5 * k as f64]).unwrap()).collect();
        let vals = group_fourier(&g, &freqs).unwrap();
        for (q, v) in freqs.iter().zip(vals) {
            let exact = (-0.5 * q.xi[0] * q.xi[0]).exp();
            assert!((v - exact).norm() <= 1e-10);
        }
        let one = OrbitFunction::sample(vec![16], vec![], |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let fr: Vec<Frequency> = (-3..=3).map(|k| Frequency::new(vec![k], vec![]).unwrap()).collect();
        let vals = group_fourier(&one, &fr).unwrap();
        for (q, v) in fr.iter().zip(vals) {
            let exact = if q.alpha[0] == 0 { 1.0 } else { 0.0 };
            assert!((v - exact).norm() < 1e-15);
        }
        let slow = OrbitFunction::sample(vec![], vec![RealAxis::new(4.0, 0.5).unwrap()], |_, x| {
            Complex64::new(1.0 / (1.0 + x[0] * x[0]), 0.0)
        })
        .unwrap();
        assert!(matches!(group_fourier(&slow, &freqs), Err(Error::TailTruncation { .. })));
    }

    #[test]
    fn e2_grid_transform_matches_closed_form() {
        let e2 = fam_e(2);
        let f = OrbitFunction::sample(vec![256, 256], vec![], |th, x| phi_h_at(&e2, th, x, 2.5)).unwrap();
        let freqs: Vec<Frequency> = crate::bergman::MultiIndex::up_to(2, 10)
            .into_iter()
            .map(|a| Frequency::new(a.0.iter().map(|&k| k as i64).collect(), vec![]).unwrap())
            .collect();
        let vals = group_fourier(&f, &freqs).unwrap();
        for (q, v) in freqs.iter().zip(vals) {
            let c = phi_h_hat(&e2, q, 2.5).unwrap();
            assert!((v - c).norm() <= 1e-8, "{q:?}");
        }
    }

    #[test]
    fn support_check() {
        let e1 = fam_e(1);
        let phi = OrbitFunction::sample(vec![64], vec![], |th, x| phi_h_at(&e1, th, x, 2.0)).unwrap();
        assert!(bspace_support_check(&phi, &e1, 2.0, 1e-10).unwrap());
        let conj_t = OrbitFunction::sample(vec![64], vec![], |th, _| Complex64::from_polar(1.0, -2.0 * PI * th[0])).unwrap();
        assert!(!bspace_support_check(&conj_t, &e1, 2.0, 1e-10).unwrap());
        let zero = OrbitFunction::sample(vec![64], vec![], |_, _| ZERO).unwrap();
        assert!(bspace_support_check(&zero, &e1, 2.0, 1e-10).unwrap());
    }

    #[test]
    fn numeric_transform_of_p1_kernel() {
        let p1 = SubgroupFamily::quasi_parabolic(1).unwrap();
        let freqs: Vec<Frequency> = [-1.0, 0.0, 0.5, 2.0].iter().map(|&x| Frequency::new(vec![], vec![x]).unwrap()).collect();
        let vals = phi_h_hat_numeric(&p1, 2.5, &freqs, NumericFourier::default()).unwrap();
        for (q, v) in freqs.iter().zip(vals) {
            let c = phi_h_hat(&p1, q, 2.5).unwrap();
            assert!((v - c).norm() <= 1e-10 * c.max(1.0), "{q:?}: {v} vs {c}");
        }
    }
}
