//! Weighted Bergman spaces `H^2_lambda(B^n)`: measure, reproducing kernel,
//! monomial basis, quadrature and truncated Toeplitz matrices.

use crate::error::{Error, Result};
use crate::fft::{wrapped_index, GridFft};
use crate::geometry::{principal_pow, BallPoint, CoveringElement, GroupElement};
use crate::groups::{FamilyKind, SubgroupFamily};
use crate::special::{gauss_jacobi_unit, ln_factorial, ln_gamma, pairwise_sum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// The pair `(n, lambda)` with `lambda > n` and the normalizing constant
/// `c_lambda = Gamma(lambda) / (n! Gamma(lambda - n))` of
/// `d mu_lambda = c_lambda (1 - |z|^2)^{lambda - n - 1} dv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BergmanParams {
    n: usize,
    lambda: f64,
    c_lambda: f64,
}

impl BergmanParams {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n == 0 || !lambda.is_finite() || lambda <= n as f64 {
            return Err(Error::InvalidWeight { n, lambda });
        }
        let ln_c = ln_gamma(lambda) - ln_factorial(n as u32) - ln_gamma(lambda - n as f64);
        Ok(Self {
            n,
            lambda,
            c_lambda: ln_c.exp(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c_lambda(&self) -> f64 {
        self.c_lambda
    }
}

/// Exponent vector of the monomial `z^alpha`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn ln_factorial(&self) -> f64 {
        self.0.iter().map(|&a| ln_factorial(a)).sum()
    }

    /// All multi-indices of total degree exactly `d` in lexicographically
    /// descending order (`(d,0,..)` first).
    pub fn of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fill_degree(&mut cur, 0, d, &mut out);
        out
    }

    /// All multi-indices with `|alpha| <= max_degree` in graded
    /// lexicographic order.
    pub fn up_to(n: usize, max_degree: u32) -> Vec<MultiIndex> {
        (0..=max_degree).flat_map(|d| Self::of_degree(n, d)).collect()
    }

    /// `z^alpha`.
    pub fn monomial(&self, z: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(z)
            .fold(Complex64::new(1.0, 0.0), |acc, (&a, &zj)| acc * zj.powu(a))
    }
}

fn fill_degree(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    let n = cur.len();
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a;
        fill_degree(cur, pos + 1, remaining - a, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `K_lambda(z, w) = (1 - <z, w>)^{-lambda}`.
pub fn kernel(params: &BergmanParams, z: &BallPoint, w: &BallPoint) -> Complex64 {
    principal_pow(Complex64::new(1.0, 0.0) - z.inner(w), params.lambda)
}

/// `ln ||z^alpha||^2 = ln alpha! + ln Gamma(lambda) - ln Gamma(lambda + |alpha|)`.
pub fn ln_monomial_norm_sq(params: &BergmanParams, alpha: &MultiIndex) -> f64 {
    alpha.ln_factorial() + ln_gamma(params.lambda) - ln_gamma(params.lambda + alpha.degree() as f64)
}

/// `||z^alpha||^2` in `H^2_lambda`.
pub fn monomial_norm_sq(params: &BergmanParams, alpha: &MultiIndex) -> f64 {
    ln_monomial_norm_sq(params, alpha).exp()
}

/// A polynomial `sum c_alpha z^alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub n: usize,
    pub terms: Vec<(MultiIndex, Complex64)>,
}

impl Polynomial {
    pub fn new(n: usize, terms: Vec<(MultiIndex, Complex64)>) -> Result<Self> {
        for (a, _) in &terms {
            if a.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: a.len() });
            }
        }
        Ok(Self { n, terms })
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self {
            n,
            terms: vec![(MultiIndex::zero(n), c)],
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(a, _)| a.degree()).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(a, c)| c * a.monomial(z)).sum()
    }

    /// Random polynomial with every monomial of degree `<= degree` and
    /// coefficients uniform in the unit square.
    pub fn random<R: Rng>(rng: &mut R, n: usize, degree: u32) -> Self {
        let terms = MultiIndex::up_to(n, degree)
            .into_iter()
            .map(|a| (a, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        Self { n, terms }
    }
}

/// Lowest and highest supported quadrature levels.
pub const MIN_LEVEL: usize = 1;
pub const MAX_LEVEL: usize = 10;

/// A radial node of [`BallQuadrature`]: moduli `r_j` with `sum r_j^2 < 1`
/// and the weight it carries (angular average excluded).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialNode {
    pub r: Vec<f64>,
    pub weight: f64,
}

/// Product rule for `d mu_lambda` in polar coordinates `z_j = r_j e^{2 pi i theta_j}`.
///
/// With `u_j = r_j^2` the measure becomes
/// `c_lambda n! (1 - s)^{lambda-n-1} du dtheta` on the simplex `sum u_j < 1`.
/// The total `s = sum u_j` gets a Gauss–Jacobi rule for
/// `(1-s)^{lambda-n-1} s^{n-1}`, the direction `u / s` is integrated over the
/// standard simplex by stick-breaking with Gauss–Jacobi factors, and each
/// angle by the uniform trapezoid rule. Level `l` uses `6 l + 4` nodes per
/// radial factor and `2^{l+2}` angles per coordinate, so the cost grows like
/// `(6l)^n 4^{n l}`.
#[derive(Debug, Clone)]
pub struct BallQuadrature {
    params: BergmanParams,
    level: usize,
    nodes: Vec<RadialNode>,
    radial: usize,
    angles: usize,
}

impl BallQuadrature {
    pub fn new(params: &BergmanParams, level: usize) -> Result<Self> {
        if !(MIN_LEVEL..=MAX_LEVEL).contains(&level) {
            return Err(Error::Config(format!(
                "quadrature level {level} outside {MIN_LEVEL}..={MAX_LEVEL}"
            )));
        }
        let q = 6 * level + 4;
        Ok(Self::with_orders(params, level, q, 1usize << (level + 2)))
    }

    pub(crate) fn with_orders(params: &BergmanParams, level: usize, radial: usize, angles: usize) -> Self {
        let n = params.n;
        let total = normalized(gauss_jacobi_unit(radial, params.lambda - n as f64 - 1.0, n as f64 - 1.0));
        // Stick-breaking factor i (0-based) carries weight (1-w)^{n-2-i}.
        let sticks: Vec<(Vec<f64>, Vec<f64>)> = (0..n.saturating_sub(1))
            .map(|i| normalized(gauss_jacobi_unit(radial, (n - 2 - i) as f64, 0.0)))
            .collect();
        let mut nodes = Vec::new();
        let mut dir = vec![0.0; n];
        let mut frac = vec![0usize; sticks.len()];
        loop {
            let mut rest = 1.0;
            let mut wdir = 1.0;
            for (i, &fi) in frac.iter().enumerate() {
                let (x, w) = (sticks[i].0[fi], sticks[i].1[fi]);
                dir[i] = rest * x;
                rest *= 1.0 - x;
                wdir *= w;
            }
            dir[n - 1] = rest;
            for (s, ws) in total.0.iter().zip(&total.1) {
                nodes.push(RadialNode {
                    r: dir.iter().map(|v| (s * v).sqrt()).collect(),
                    weight: ws * wdir,
                });
            }
            // Advance the odometer over stick indices.
            let mut pos = 0;
            while pos < frac.len() {
                frac[pos] += 1;
                if frac[pos] < radial {
                    break;
                }
                frac[pos] = 0;
                pos += 1;
            }
            if pos == frac.len() {
                break;
            }
        }
        Self {
            params: *params,
            level,
            nodes,
            radial,
            angles,
        }
    }

    pub fn params(&self) -> &BergmanParams {
        &self.params
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn radial_nodes(&self) -> &[RadialNode] {
        &self.nodes
    }

    /// Radial order (nodes per radial factor).
    pub fn radial_order(&self) -> usize {
        self.radial
    }

    /// Angles per coordinate.
    pub fn angles(&self) -> usize {
        self.angles
    }

    /// `int f d mu_lambda`.
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        let n = self.params.n;
        let m = self.angles;
        let cells = m.pow(n as u32);
        let inv = 1.0 / cells as f64;
        let partial: Vec<Complex64> = self
            .nodes
            .par_iter()
            .map(|node| {
                let mut z = vec![Complex64::new(0.0, 0.0); n];
                let mut vals = Vec::with_capacity(cells);
                for cell in 0..cells {
                    angle_point(&node.r, cell, m, &mut z);
                    vals.push(f(&z));
                }
                pairwise_sum(&vals) * (node.weight * inv)
            })
            .collect();
        pairwise_sum(&partial)
    }

    /// `int f d mu_lambda` for an integrand that depends on the moduli only.
    pub fn integrate_radial<F>(&self, f: F) -> Complex64
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let partial: Vec<Complex64> = self.nodes.par_iter().map(|node| f(&node.r) * node.weight).collect();
        pairwise_sum(&partial)
    }

    /// Angular Fourier coefficients `int f(r e^{2 pi i theta}) e^{-2 pi i kappa theta} d theta`
    /// of `f` at one radial node, for every `kappa` on the grid.
    pub(crate) fn angular_coefficients<F>(&self, node: &RadialNode, fft: &GridFft, f: &F) -> Vec<Complex64>
    where
        F: Fn(&[Complex64]) -> Complex64,
    {
        let n = self.params.n;
        let m = self.angles;
        let cells = m.pow(n as u32);
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        let mut vals: Vec<Complex64> = (0..cells)
            .map(|cell| {
                angle_point(&node.r, cell, m, &mut z);
                f(&z)
            })
            .collect();
        fft.process(&mut vals);
        let inv = 1.0 / cells as f64;
        vals.iter_mut().for_each(|v| *v *= inv);
        vals
    }
}

fn normalized(rule: crate::special::Rule) -> (Vec<f64>, Vec<f64>) {
    let total: f64 = rule.weights.iter().sum();
    (rule.nodes, rule.weights.iter().map(|w| w / total).collect())
}

/// Point with moduli `r` and the angles of grid cell `cell` (row-major).
fn angle_point(r: &[f64], cell: usize, m: usize, z: &mut [Complex64]) {
    let n = r.len();
    let mut rem = cell;
    for j in (0..n).rev() {
        let k = rem % m;
        rem /= m;
        z[j] = Complex64::from_polar(r[j], 2.0 * PI * k as f64 / m as f64);
    }
}

/// Free-function form of [`BallQuadrature::integrate`].
pub fn ball_quadrature<F>(params: &BergmanParams, integrand: F, level: usize) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    Ok(BallQuadrature::new(params, level)?.integrate(integrand))
}

type Evaluator = dyn Fn(&[Complex64]) -> Complex64 + Send + Sync;

/// A bounded symbol on the ball with a declared invariance group.
#[derive(Clone)]
pub struct SymbolFn {
    name: String,
    eval: Arc<Evaluator>,
    invariance: Option<SubgroupFamily>,
    bound: f64,
}

impl SymbolFn {
    pub fn new<F>(name: impl Into<String>, bound: f64, invariance: Option<SubgroupFamily>, f: F) -> Self
    where
        F: Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            invariance,
            bound,
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let inv = SubgroupFamily::quasi_elliptic(n).ok();
        Self::new(format!("const({c})"), c.abs(), inv, move |_| Complex64::new(c, 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn invariance(&self) -> Option<&SubgroupFamily> {
        self.invariance.as_ref()
    }

    /// Replace the declared invariance group.
    pub fn with_invariance(mut self, family: Option<SubgroupFamily>) -> Self {
        self.invariance = family;
        self
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        (self.eval)(z)
    }

    pub fn at(&self, z: &BallPoint) -> Complex64 {
        (self.eval)(z.coords())
    }

    /// Declared to depend on `(|z_1|, ..., |z_n|)` only.
    pub fn is_torus_invariant(&self) -> bool {
        matches!(self.invariance.as_ref().map(|f| f.kind()), Some(FamilyKind::QuasiElliptic))
    }

    /// Number of leading coordinates whose phases the symbol ignores.
    pub fn invariant_phases(&self) -> usize {
        self.invariance.as_ref().map_or(0, |f| f.torus_dim())
    }

    /// Largest `|phi|` on `samples` random points of radius below 0.999.
    pub fn sampled_sup(&self, n: usize, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| self.at(&random_point(&mut rng, n, 0.999)).norm())
            .fold(0.0, f64::max)
    }

    /// `|phi| <= bound` on sampled points.
    pub fn check_bound(&self, n: usize, samples: usize) -> bool {
        self.sampled_sup(n, samples, 0x5eed) <= self.bound * (1.0 + 1e-12)
    }

    /// Pointwise `a phi + b psi`; the invariance tag survives only when both agree.
    pub fn combine(a: f64, phi: &SymbolFn, b: f64, psi: &SymbolFn) -> SymbolFn {
        let (f, g) = (phi.eval.clone(), psi.eval.clone());
        let invariance = if phi.invariance == psi.invariance {
            phi.invariance.clone()
        } else {
            None
        };
        SymbolFn {
            name: format!("{a}*{}+{b}*{}", phi.name, psi.name),
            eval: Arc::new(move |z| a * f(z) + b * g(z)),
            invariance,
            bound: a.abs() * phi.bound + b.abs() * psi.bound,
        }
    }
}

impl fmt::Debug for SymbolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolFn")
            .field("name", &self.name)
            .field("invariance", &self.invariance.as_ref().map(|x| x.label()))
            .field("bound", &self.bound)
            .finish()
    }
}

/// `z -> phi(g^{-1} z)`; the invariance tag is cleared.
pub fn symbol_pullback(g: &GroupElement, phi: &SymbolFn) -> SymbolFn {
    let ginv = g.inverse();
    let f = phi.eval.clone();
    SymbolFn {
        name: format!("pullback({})", phi.name),
        eval: Arc::new(move |z| match BallPoint::new(z.to_vec()).and_then(|p| ginv.act(&p)) {
            Ok(w) => f(w.coords()),
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }),
        invariance: None,
        bound: phi.bound,
    }
}

/// Uniformly random point of the ball of the given radius (rejection sampling).
pub fn random_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> BallPoint {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let ns: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if ns < 1.0 {
            return BallPoint::new(v.into_iter().map(|x| x * radius).collect()).expect("inside ball");
        }
    }
}

/// Random covering element with torus angles uniform in `[0,1)` and real
/// parameters uniform in `[-spread, spread]`.
pub fn random_element<R: Rng>(rng: &mut R, family: &SubgroupFamily, spread: f64) -> CoveringElement {
    let torus: Vec<f64> = (0..family.torus_dim()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let real: Vec<f64> = (0..family.real_dim()).map(|_| rng.gen_range(-spread..spread)).collect();
    CoveringElement::lift(family.clone(), &torus, &real).expect("lift of valid coordinates")
}

/// Tolerance of [`invariance_check`].
pub const INVARIANCE_TOL: f64 = 1e-9;

/// Largest `|phi(h z) - phi(z)|` over `samples` seeded random pairs.
pub fn invariance_defect(phi: &SymbolFn, family: &SubgroupFamily, samples: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a7_1a7);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let z = random_point(&mut rng, family.n(), 0.95);
        let h = random_element(&mut rng, family, 2.0);
        let Ok(hz) = h.act(&z) else {
            return f64::INFINITY;
        };
        let d = (phi.at(&hz) - phi.at(&z)).norm();
        if !d.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(d);
    }
    worst
}

/// `max |phi(h z) - phi(z)| <= 1e-9` over sampled `(h, z)`.
pub fn invariance_check(phi: &SymbolFn, family: &SubgroupFamily, samples: usize) -> bool {
    invariance_defect(phi, family, samples) <= INVARIANCE_TOL
}

/// Truncated matrix of `T_phi` in the orthonormal basis `z^alpha / ||z^alpha||`,
/// `|alpha| <= D`, graded lexicographic order. Entry `(beta, gamma)` is
/// `<phi e_gamma, e_beta>`.
#[derive(Debug, Clone)]
pub struct ToeplitzMatrix {
    pub params: BergmanParams,
    pub degree: u32,
    pub indices: Vec<MultiIndex>,
    pub entries: DMatrix<Complex64>,
    /// Set when the quadrature cannot resolve every entry exactly for
    /// polynomial-times-trigonometric integrands of this degree.
    pub underresolved: bool,
}

impl ToeplitzMatrix {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.indices.iter().position(|a| a == alpha)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.entries[(i, i)]).collect()
    }

    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Spectral norm via the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.entries.clone().singular_values().max()
    }

    /// Leading block on the indices of degree `<= d`.
    pub fn truncate(&self, d: u32) -> ToeplitzMatrix {
        let keep = self.indices.iter().take_while(|a| a.degree() <= d).count();
        ToeplitzMatrix {
            params: self.params,
            degree: d.min(self.degree),
            indices: self.indices[..keep].to_vec(),
            entries: self.entries.view((0, 0), (keep, keep)).into_owned(),
            underresolved: self.underresolved,
        }
    }
}

/// Truncated Toeplitz matrix of `phi` by quadrature.
///
/// Symbols tagged torus-invariant get the analytic diagonal structure; other
/// symbols are sampled on the full angular grid and their angular Fourier
/// coefficients paired with the radial moduli.
pub fn toeplitz_matrix(params: &BergmanParams, phi: &SymbolFn, degree: u32, level: usize) -> Result<ToeplitzMatrix> {
    let quad = BallQuadrature::new(params, level)?;
    Ok(toeplitz_with(&quad, phi, degree))
}

pub(crate) fn toeplitz_with(quad: &BallQuadrature, phi: &SymbolFn, degree: u32) -> ToeplitzMatrix {
    toeplitz_strip(quad, phi, degree, usize::MAX)
}

/// Like [`toeplitz_with`], but only entries in the first `keep` rows or
/// columns are computed; the rest stay zero.
pub(crate) fn toeplitz_strip(quad: &BallQuadrature, phi: &SymbolFn, degree: u32, keep: usize) -> ToeplitzMatrix {
    let params = *quad.params();
    let n = params.n;
    let indices = MultiIndex::up_to(n, degree);
    let dim = indices.len();
    let norms: Vec<f64> = indices.iter().map(|a| ln_monomial_norm_sq(&params, a)).collect();
    let radial_exact = quad.radial_order() as u32 > degree + 1;
    let mut entries = DMatrix::<Complex64>::zeros(dim, dim);
    if phi.is_torus_invariant() {
        let diag: Vec<Complex64> = indices
            .par_iter()
            .zip(&norms)
            .map(|(a, &ln_norm)| {
                let scale = (-ln_norm).exp();
                quad.integrate_radial(|r| {
                    let z: Vec<Complex64> = r.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                    let mono: f64 = r.iter().zip(&a.0).map(|(x, &k)| x.powi(2 * k as i32)).product();
                    phi.eval(&z) * mono
                }) * scale
            })
            .collect();
        for (i, v) in diag.into_iter().enumerate() {
            entries[(i, i)] = v;
        }
        return ToeplitzMatrix {
            params,
            degree,
            indices,
            entries,
            underresolved: !radial_exact,
        };
    }
    let m = quad.angles();
    let dims = vec![m; n];
    let fft = GridFft::forward(&dims);
    let span = 2 * degree as i64 + 1;
    let diffs: Vec<Vec<i64>> = (0..span.pow(n as u32))
        .map(|mut c| {
            let mut v = vec![0i64; n];
            for j in (0..n).rev() {
                v[j] = c % span - degree as i64;
                c /= span;
            }
            v
        })
        .collect();
    // Per radial node: the Fourier coefficients at every needed difference.
    let coeffs: Vec<Vec<Complex64>> = quad
        .radial_nodes()
        .par_iter()
        .map(|node| {
            let all = quad.angular_coefficients(node, &fft, &|z: &[Complex64]| phi.eval(z));
            diffs.iter().map(|k| all[wrapped_index(k, &dims)] * node.weight).collect()
        })
        .collect();
    let diff_pos = |beta: &MultiIndex, gamma: &MultiIndex| -> usize {
        let mut idx = 0usize;
        for j in 0..n {
            let k = beta.0[j] as i64 - gamma.0[j] as i64 + degree as i64;
            idx = idx * span as usize + k as usize;
        }
        idx
    };
    let nodes = quad.radial_nodes();
    let cells: Vec<usize> = (0..dim * dim)
        .filter(|flat| flat / dim < keep || flat % dim < keep)
        .collect();
    let values: Vec<Complex64> = cells
        .par_iter()
        .map(|&flat| {
            let (bi, gi) = (flat / dim, flat % dim);
            let (beta, gamma) = (&indices[bi], &indices[gi]);
            let pos = diff_pos(beta, gamma);
            let mut acc = Complex64::new(0.0, 0.0);
            for (node, c) in nodes.iter().zip(&coeffs) {
                let mono: f64 = node
                    .r
                    .iter()
                    .zip(beta.0.iter().zip(&gamma.0))
                    .map(|(x, (&b, &g))| x.powi((b + g) as i32))
                    .product();
                acc += c[pos] * mono;
            }
            acc * (-0.5 * (norms[bi] + norms[gi])).exp()
        })
        .collect();
    for (&flat, v) in cells.iter().zip(values) {
        entries[(flat / dim, flat % dim)] = v;
    }
    ToeplitzMatrix {
        params,
        degree,
        indices,
        entries,
        underresolved: !radial_exact || 2 * degree as usize >= m,
    }
}

const MAX_ALIAS_ANGLES: usize = 1 << 12;

/// `|<p, K_w> - p(w)|` with the inner product evaluated by quadrature.
pub fn reproducing_check(params: &BergmanParams, p: &Polynomial, w: &BallPoint, level: usize) -> Result<f64> {
    if p.n != params.n || w.dim() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: if p.n != params.n { p.n } else { w.dim() },
        });
    }
    let lambda = params.lambda;
    let wc = w.coords().to_vec();
    let base = BallQuadrature::new(params, level)?;
    // The kernel is not a trig polynomial: raise the angle count until the
    // aliased tail |w|^M M^lambda is below roundoff.
    let rho = wc.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut angles = base.angles();
    while rho > 0.0 && angles < MAX_ALIAS_ANGLES && angles as f64 * rho.ln() + lambda * (angles as f64).ln() > (1e-16f64).ln() {
        angles *= 2;
    }
    let rule = BallQuadrature::with_orders(params, level, base.radial_order(), angles);
    let inner = rule.integrate(|z| {
        // conj(K(z, w)) = K(w, z) = (1 - sum w_j conj(z_j))^{-lambda}
        let s: Complex64 = wc.iter().zip(z).map(|(a, b)| a * b.conj()).sum();
        p.eval(z) * principal_pow(Complex64::new(1.0, 0.0) - s, lambda)
    });
    Ok((inner - p.eval(w.coords())).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn params_validate_weight() {
        assert!(BergmanParams::new(2, 2.0).is_err());
        assert!(BergmanParams::new(1, 0.5).is_err());
        let p = BergmanParams::new(1, 2.0).unwrap();
        assert_relative_eq!(p.c_lambda(), 1.0, max_relative = 1e-14);
        let p = BergmanParams::new(2, 3.5).unwrap();
        // Gamma(3.5) / (2 Gamma(1.5)) = 2.5 * 1.5 / 2
        assert_relative_eq!(p.c_lambda(), 1.875, max_relative = 1e-14);
    }

    #[test]
    fn graded_lex_order() {
        let idx = MultiIndex::up_to(2, 2);
        let want: Vec<Vec<u32>> = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]];
        assert_eq!(idx.into_iter().map(|a| a.0).collect::<Vec<_>>(), want);
        assert_eq!(MultiIndex::up_to(3, 4).len(), 35);
    }

    #[test]
    fn kernel_examples() {
        let p = BergmanParams::new(1, 2.0).unwrap();
        let z = BallPoint::new(vec![Complex64::new(0.5, 0.5)]).unwrap();
        assert_relative_eq!(kernel(&p, &z, &z).re, 4.0, max_relative = 1e-14);
        assert_eq!(kernel(&p, &BallPoint::origin(1), &z), c(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p2 = BergmanParams::new(2, 3.7).unwrap();
        for _ in 0..1000 {
            let a = random_point(&mut rng, 2, 0.99);
            let b = random_point(&mut rng, 2, 0.99);
            let k1 = kernel(&p2, &a, &b);
            let k2 = kernel(&p2, &b, &a).conj();
            assert!((k1 - k2).norm() <= 1e-13 * k1.norm().max(1.0));
            assert!(kernel(&p2, &a, &a).re >= 1.0);
        }
    }

    #[test]
    fn kernel_expansion_converges() {
        let p = BergmanParams::new(2, 3.5).unwrap();
        let z = BallPoint::new(vec![Complex64::new(0.5, 0.2), Complex64::new(-0.3, 0.4)]).unwrap();
        let w = BallPoint::new(vec![Complex64::new(0.1, -0.6), Complex64::new(0.2, 0.1)]).unwrap();
        assert!(z.inner(&w).norm() <= 0.5);
        let exact = kernel(&p, &z, &w);
        let series: Complex64 = MultiIndex::up_to(2, 60)
            .iter()
            .map(|a| a.monomial(z.coords()) * a.monomial(w.coords()).conj() / monomial_norm_sq(&p, a))
            .sum();
        assert!((series - exact).norm() <= 1e-8 * exact.norm());
    }

    #[test]
    fn monomial_norms() {
        let p1 = BergmanParams::new(1, 2.0).unwrap();
        assert_relative_eq!(monomial_norm_sq(&p1, &MultiIndex(vec![0])), 1.0, max_relative = 1e-15);
        for k in 0..10u32 {
            assert_relative_eq!(
                monomial_norm_sq(&p1, &MultiIndex(vec![k])),
                1.0 / (k as f64 + 1.0),
                max_relative = 1e-13
            );
        }
        let big = monomial_norm_sq(&p1, &MultiIndex(vec![400]));
        assert!(big.is_finite() && big > 0.0);
    }

    #[test]
    fn quadrature_basics() {
        for n in 1..=2 {
            let p = BergmanParams::new(n, n as f64 + 1.5).unwrap();
            let q = BallQuadrature::new(&p, 3).unwrap();
            assert!((q.integrate(|_| c(1.0)) - 1.0).norm() < 1e-12);
            assert!(q.integrate(|z| z[0]).norm() < 1e-13);
        }
        let p = BergmanParams::new(1, 2.0).unwrap();
        let v = ball_quadrature(&p, |z| c(z[0].norm_sqr()), 2).unwrap();
        assert!((v - 0.5).norm() < 1e-9);
        assert!(ball_quadrature(&p, |_| c(1.0), 0).is_err());
        assert!(ball_quadrature(&p, |_| c(1.0), MAX_LEVEL + 1).is_err());
    }

    #[test]
    fn toeplitz_examples() {
        let p = BergmanParams::new(1, 2.0).unwrap();
        let modsq = SymbolFn::new("|z|^2", 1.0, SubgroupFamily::quasi_elliptic(1).ok(), |z| {
            c(z[0].norm_sqr())
        });
        let t = toeplitz_matrix(&p, &modsq, 4, 2).unwrap();
        let want = [0.5, 2.0 / 3.0, 0.75, 0.8, 5.0 / 6.0];
        for (k, w) in want.iter().enumerate() {
            assert!((t.entries[(k, k)] - w).norm() < 1e-12);
        }
        assert!(!t.underresolved);
        let id = toeplitz_matrix(&BergmanParams::new(2, 3.5).unwrap(), &SymbolFn::constant(2, 1.0), 3, 2).unwrap();
        assert!((id.entries.clone() - DMatrix::<Complex64>::identity(10, 10)).norm() < 1e-12);
    }

    #[test]
    fn toeplitz_of_real_symbol_is_hermitian_and_bounded() {
        let p = BergmanParams::new(2, 3.0).unwrap();
        let phi = SymbolFn::new("Re z1 + |z2|^2", 2.0, None, |z| c(z[0].re + z[1].norm_sqr()));
        let t = toeplitz_matrix(&p, &phi, 4, 3).unwrap();
        assert!(t.hermitian_defect() < 1e-9);
        assert!(t.operator_norm() <= 2.0 + 1e-6);
        // The generic path agrees with the diagonal path for an invariant symbol.
        let inv = SymbolFn::new("|z1|^2", 1.0, None, |z| c(z[0].norm_sqr()));
        let tagged = inv.clone().with_invariance(SubgroupFamily::quasi_elliptic(2).ok());
        let a = toeplitz_matrix(&p, &inv, 3, 3).unwrap();
        let b = toeplitz_matrix(&p, &tagged, 3, 3).unwrap();
        assert!((a.entries - b.entries).norm() < 1e-12);
    }

    #[test]
    fn pullback_and_invariance() {
        let rot = GroupElement::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ])))
        .unwrap();
        let phi = SymbolFn::new("|z|^2", 1.0, None, |z| c(z[0].norm_sqr()));
        let pulled = symbol_pullback(&rot, &phi);
        assert!(pulled.invariance().is_none());
        let half = BallPoint::new(vec![c(0.5)]).unwrap();
        assert!((pulled.at(&half) - 0.25).norm() < 1e-15);
        let id = symbol_pullback(&GroupElement::identity(1), &phi);
        assert_eq!(id.at(&half), phi.at(&half));

        let e2 = SubgroupFamily::quasi_elliptic(2).unwrap();
        let modsq = SymbolFn::new("|z|^2", 1.0, None, |z| c(z[0].norm_sqr() + z[1].norm_sqr()));
        assert!(invariance_check(&modsq, &e2, 200));
        let re = SymbolFn::new("Re z1", 1.0, None, |z| c(z[0].re));
        assert!(!invariance_check(&re, &e2, 200));
    }

    #[test]
    fn reproducing_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = BergmanParams::new(1, 2.5).unwrap();
        let w = BallPoint::new(vec![c(0.4)]).unwrap();
        for _ in 0..5 {
            let poly = Polynomial::random(&mut rng, 1, 5);
            assert!(reproducing_check(&p, &poly, &w, 4).unwrap() <= 1e-8);
        }
        let one = Polynomial::constant(1, c(1.0));
        assert!(reproducing_check(&p, &one, &w, 4).unwrap() <= 1e-12);
        let z3 = Polynomial::new(1, vec![(MultiIndex(vec![3]), c(1.0))]).unwrap();
        assert!(reproducing_check(&p, &z3, &BallPoint::origin(1), 2).unwrap() <= 1e-12);
    }
}
