//! Special functions and one-dimensional quadrature rules.
//!
//! Gamma functions use the Lanczos approximation (g = 7, nine terms) with
//! the reflection formula for arguments left of `Re z = 1/2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the complex Gamma function (principal branch for `Re z >= 1/2`).
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_complex(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Complex Gamma function.
pub fn gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return PI / (s * gamma_complex(Complex64::new(1.0, 0.0) - z));
    }
    ln_gamma_complex(z).exp()
}

/// `ln |Gamma(x)|` for real `x` (poles map to `+inf`).
pub fn ln_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::INFINITY;
    }
    if x < 0.5 {
        let s = (PI * x).sin().abs();
        return PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Real Gamma function.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x == x.floor() && x <= 171.0 {
        return (1..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    ln_gamma(x).exp()
}

/// `ln Beta(a, b)` for positive real arguments.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln(k!)`, exact summation for small `k`.
pub fn ln_factorial(k: u32) -> f64 {
    if k < 32 {
        (2..=k).map(|j| (j as f64).ln()).sum()
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// A one-dimensional quadrature rule: nodes and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss–Legendre rule with `n` points on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Rule {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Jacobi rule with `n` points on `[0, 1]` for the weight
/// `(1 - x)^a x^b`, built by Golub–Welsch.
pub fn gauss_jacobi_unit(n: usize, a: f64, b: f64) -> Rule {
    assert!(n > 0, "Gauss-Jacobi rule needs at least one node");
    assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
    let ab = a + b;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        *d = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
    }
    for (j, o) in off.iter_mut().enumerate() {
        let k = (j + 1) as f64;
        let num = 4.0 * k * (k + a) * (k + b) * (k + ab);
        let den = (2.0 * k + ab).powi(2) * (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0);
        *o = (num / den).sqrt();
    }
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = diag[k];
        if k + 1 < n {
            jm[(k, k + 1)] = off[k];
            jm[(k + 1, k)] = off[k];
        }
    }
    // Total mass on [-1, 1].
    let ln_mu0 = (ab + 1.0) * 2f64.ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(ab + 2.0);
    let eig = jm.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    // Map t in [-1,1] to x = (1+t)/2; (1-t)^a (1+t)^b dt = 2^{a+b+1} (1-x)^a x^b dx.
    let scale = (ln_mu0 - (ab + 1.0) * 2f64.ln()).exp();
    Rule {
        nodes: pairs.iter().map(|p| 0.5 * (1.0 + p.0)).collect(),
        weights: pairs.iter().map(|p| p.1 * scale).collect(),
    }
}

/// Golub–Welsch nodes and weights from a symmetric tridiagonal Jacobi matrix
/// and the total mass of the weight.
fn golub_welsch(diag: &[f64], off: &[f64], mass: f64) -> Rule {
    let n = diag.len();
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = diag[k];
        if k + 1 < n {
            jm[(k, k + 1)] = off[k];
            jm[(k + 1, k)] = off[k];
        }
    }
    let eig = jm.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], v0 * v0 * mass)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Generalized Gauss–Laguerre rule on `(0, inf)` for the weight `x^a e^{-x}`.
pub fn gauss_laguerre(n: usize, a: f64) -> Rule {
    assert!(n > 0, "Gauss-Laguerre rule needs at least one node");
    assert!(a > -1.0, "Laguerre exponent must exceed -1");
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + a + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|k| (k as f64 * (k as f64 + a)).sqrt()).collect();
    golub_welsch(&diag, &off, gamma(a + 1.0))
}

/// Gauss–Hermite rule on the real line for the weight `e^{-x^2}`.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n > 0, "Gauss-Hermite rule needs at least one node");
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (0.5 * k as f64).sqrt()).collect();
    golub_welsch(&diag, &off, PI.sqrt())
}

/// Numerically stable pairwise sum of complex values (deterministic order).
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    if values.len() <= 16 {
        return values.iter().copied().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_integers_and_half() {
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-15);
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(3.5), 15.0 / 8.0 * PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(200.0), 857.933_669_825_857_2, max_relative = 1e-14);
    }

    #[test]
    fn complex_gamma_matches_modulus_identity() {
        // |Gamma(1/2 + i t)|^2 = pi / cosh(pi t)
        for &t in &[0.0, 0.3, 1.0, 2.5, 6.0] {
            let g = gamma_complex(Complex64::new(0.5, t));
            let expected = PI / (PI * t).cosh();
            assert_relative_eq!(g.norm_sqr(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn complex_gamma_recurrence_and_reflection() {
        let z = Complex64::new(1.3, -2.1);
        let lhs = gamma_complex(z + 1.0);
        let rhs = z * gamma_complex(z);
        assert!((lhs - rhs).norm() < 1e-13 * lhs.norm());
        let w = Complex64::new(-0.7, 0.4);
        let refl = gamma_complex(w) * gamma_complex(Complex64::new(1.0, 0.0) - w) * (w * PI).sin();
        assert!((refl - PI).norm() < 1e-12);
    }

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre_unit(7);
        // degree 13 is exact for 7 nodes
        let v = rule.integrate(|x| x.powi(13));
        assert_relative_eq!(v, 1.0 / 14.0, max_relative = 1e-14);
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobi_reproduces_beta_moments() {
        let (a, b) = (0.5, 1.0);
        let rule = gauss_jacobi_unit(12, a, b);
        for k in 0..20 {
            let v = rule.integrate(|x| x.powi(k));
            let exact = ln_beta(b + 1.0 + k as f64, a + 1.0).exp();
            assert_relative_eq!(v, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn laguerre_and_hermite_moments() {
        let a = 0.7;
        let rule = gauss_laguerre(30, a);
        for k in 0..10 {
            let exact = gamma(a + 1.0 + k as f64);
            assert_relative_eq!(rule.integrate(|x| x.powi(k)), exact, max_relative = 1e-12);
        }
        let h = gauss_hermite(24);
        assert_relative_eq!(h.integrate(|x| x * x), 0.5 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(h.integrate(|x| x.cos()), PI.sqrt() * (-0.25f64).exp(), max_relative = 1e-13);
    }
}
