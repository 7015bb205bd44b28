//! Double-exponential quadrature on infinite intervals, including the
//! Ooura–Mori rule for Fourier-type integrals with slowly decaying integrands.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Step size of the double-exponential rules; halving it roughly squares the error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeRule {
    pub step: f64,
    /// Transformed variable runs over `[-span, span]`.
    pub span: f64,
}

impl Default for DeRule {
    fn default() -> Self {
        Self { step: 0.125, span: 6.5 }
    }
}

impl DeRule {
    pub fn with_step(step: f64) -> Self {
        Self { step, ..Self::default() }
    }

    fn steps(&self) -> i64 {
        (self.span / self.step).ceil() as i64
    }
}

/// `int_0^inf f(x) dx` with `x = exp(pi/2 sinh t)`.
pub fn half_line<F: FnMut(f64) -> Complex64>(mut f: F, rule: DeRule) -> Complex64 {
    half_line_nodes(rule).into_iter().map(|(x, w)| f(x) * w).sum()
}

/// `int_{-inf}^{inf} f(x) dx` with `x = sinh(pi/2 sinh t)`.
pub fn full_line<F: FnMut(f64) -> Complex64>(mut f: F, rule: DeRule) -> Complex64 {
    full_line_nodes(rule).into_iter().map(|(x, w)| f(x) * w).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oscillation {
    Sin,
    Cos,
}

/// Ooura–Mori transform `phi(t) = t / (1 - exp(-u(t)))` with
/// `u = 2t + a(1 - e^{-t}) + b(e^t - 1)`; returns `(phi, phi')` or `None`
/// where the node has collapsed onto the origin.
fn om_map(t: f64, a: f64, b: f64) -> Option<(f64, f64)> {
    let u = 2.0 * t + a * (1.0 - (-t).exp()) + b * (t.exp() - 1.0);
    let du = 2.0 + a * (-t).exp() + b * t.exp();
    if t.abs() < 1e-12 {
        let c2 = 0.5 * (b - a);
        let lead = 2.0 + a + b;
        return Some((1.0 / lead, 0.5 - c2 / (lead * lead)));
    }
    if -u > 700.0 {
        return None;
    }
    let one_minus_e = -(-u).exp_m1();
    let e = (-u).exp();
    let phi = t / one_minus_e;
    let dphi = (one_minus_e - t * e * du) / (one_minus_e * one_minus_e);
    Some((phi, dphi))
}

/// `int_0^inf f(x) sin(omega x) dx` or the cosine analogue, `omega > 0`.
pub fn fourier_half_line<F: FnMut(f64) -> Complex64>(
    mut f: F,
    omega: f64,
    kind: Oscillation,
    rule: DeRule,
) -> Complex64 {
    oscillatory_nodes(omega, kind, rule).into_iter().map(|(x, w)| f(x) * w).sum()
}

/// `int_{-inf}^{inf} f(x) e^{-i xi x} dx` for a decaying, possibly slowly
/// decaying, integrand.
pub fn fourier_full_line<F: FnMut(f64) -> Complex64>(mut f: F, xi: f64, rule: DeRule) -> Complex64 {
    if xi == 0.0 {
        return half_line(|x| f(x) + f(-x), rule);
    }
    let omega = xi.abs();
    let sign = xi.signum();
    let even = fourier_half_line(|x| f(x) + f(-x), omega, Oscillation::Cos, rule);
    let odd = fourier_half_line(|x| f(x) - f(-x), omega, Oscillation::Sin, rule);
    even - Complex64::new(0.0, sign) * odd
}

/// `int_0^inf g(x) e^{i y x} dx`.
pub fn fourier_positive_axis<F: FnMut(f64) -> Complex64>(mut g: F, y: f64, rule: DeRule) -> Complex64 {
    if y == 0.0 {
        return half_line(g, rule);
    }
    let omega = y.abs();
    let c = fourier_half_line(&mut g, omega, Oscillation::Cos, rule);
    let s = fourier_half_line(&mut g, omega, Oscillation::Sin, rule);
    c + Complex64::new(0.0, y.signum()) * s
}

/// Nodes `y_j` and complex weights `W_j` with
/// `int_{-inf}^{inf} f(y) e^{-i xi y} dy ~ sum_j W_j f(y_j)`.
/// Weights below `1e-300` in modulus are dropped.
pub fn fourier_weights(xi: f64, rule: DeRule) -> Vec<(f64, Complex64)> {
    let mut out = Vec::new();
    if xi == 0.0 {
        for (x, w) in half_line_nodes(rule) {
            out.push((x, Complex64::new(w, 0.0)));
            out.push((-x, Complex64::new(w, 0.0)));
        }
    } else {
        let omega = xi.abs();
        let sign = xi.signum();
        for (x, w) in oscillatory_nodes(omega, Oscillation::Cos, rule) {
            out.push((x, Complex64::new(w, 0.0)));
            out.push((-x, Complex64::new(w, 0.0)));
        }
        for (x, w) in oscillatory_nodes(omega, Oscillation::Sin, rule) {
            out.push((x, Complex64::new(0.0, -sign * w)));
            out.push((-x, Complex64::new(0.0, sign * w)));
        }
    }
    out.retain(|(_, w)| w.norm() > 1e-300);
    out
}

/// Nodes and weights with `int_0^inf g(x) e^{i y x} dx ~ sum_j W_j g(x_j)`.
pub fn positive_axis_weights(y: f64, rule: DeRule) -> Vec<(f64, Complex64)> {
    let mut out: Vec<(f64, Complex64)> = if y == 0.0 {
        half_line_nodes(rule).into_iter().map(|(x, w)| (x, Complex64::new(w, 0.0))).collect()
    } else {
        let omega = y.abs();
        let mut v: Vec<(f64, Complex64)> = oscillatory_nodes(omega, Oscillation::Cos, rule)
            .into_iter()
            .map(|(x, w)| (x, Complex64::new(w, 0.0)))
            .collect();
        v.extend(
            oscillatory_nodes(omega, Oscillation::Sin, rule)
                .into_iter()
                .map(|(x, w)| (x, Complex64::new(0.0, y.signum() * w))),
        );
        v
    };
    out.retain(|(_, w)| w.norm() > 1e-300);
    out
}

/// Exp-sinh nodes on `(0, inf)` at half the rule step, step included in the weights.
pub fn half_line_nodes(rule: DeRule) -> Vec<(f64, f64)> {
    let h = 0.5 * rule.step;
    (-2 * rule.steps()..=2 * rule.steps())
        .filter_map(|k| {
            let t = k as f64 * h;
            let x = (0.5 * PI * t.sinh()).exp();
            let w = 0.5 * PI * t.cosh() * x * h;
            (x > 0.0 && x.is_finite() && w.is_finite()).then_some((x, w))
        })
        .collect()
}

/// Sinh-sinh nodes on the real line at half the rule step, step included in the weights.
pub fn full_line_nodes(rule: DeRule) -> Vec<(f64, f64)> {
    let h = 0.5 * rule.step;
    (-2 * rule.steps()..=2 * rule.steps())
        .filter_map(|k| {
            let t = k as f64 * h;
            let s = 0.5 * PI * t.sinh();
            let x = s.sinh();
            let w = 0.5 * PI * t.cosh() * s.cosh() * h;
            (x.is_finite() && w.is_finite()).then_some((x, w))
        })
        .collect()
}

/// Ooura–Mori nodes on `(0, inf)` for `sin(omega x)` or `cos(omega x)`;
/// the oscillating factor and the step are folded into the weights.
pub fn oscillatory_nodes(omega: f64, kind: Oscillation, rule: DeRule) -> Vec<(f64, f64)> {
    assert!(omega > 0.0, "oscillation frequency must be positive");
    let h = rule.step;
    let m = PI / h;
    let b = 0.25;
    let a = b / (1.0 + m * (1.0 + m).ln() / (4.0 * PI)).sqrt();
    let offset = match kind {
        Oscillation::Sin => 0.0,
        Oscillation::Cos => -0.5,
    };
    (-rule.steps()..=rule.steps())
        .filter_map(|k| {
            let t = (k as f64 + offset) * h;
            let (phi, dphi) = om_map(t, a, b)?;
            let x = m * phi / omega;
            let osc = match kind {
                Oscillation::Sin => (m * phi).sin(),
                Oscillation::Cos => (m * phi).cos(),
            };
            let w = osc * dphi * m * h / omega;
            (x > 0.0 && w != 0.0 && w.is_finite()).then_some((x, w))
        })
        .collect()
}

/// `sum_j W_j f(y_j)` for a node list.
pub fn apply<F: FnMut(f64) -> Complex64>(nodes: &[(f64, Complex64)], mut f: F) -> Complex64 {
    nodes.iter().map(|&(x, w)| w * f(x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn de_rules_on_known_integrals() {
        let r = DeRule::default();
        // int_0^inf x^{-1/2} / (1 + x) = pi
        let v = half_line(|x| re(1.0 / (x.sqrt() * (1.0 + x))), r);
        assert!((v.re - PI).abs() < 1e-12, "{v}");
        // int_R (1 + x^2)^{-3/2} = 2
        let v = full_line(|x| re((1.0 + x * x).powf(-1.5)), r);
        assert!((v.re - 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn ooura_mori_on_algebraic_tails() {
        let r = DeRule::default();
        // int_0^inf sin(x)/x = pi/2
        let v = fourier_half_line(|x| re(1.0 / x), 1.0, Oscillation::Sin, r);
        assert!((v.re - 0.5 * PI).abs() < 1e-12, "{v}");
        // int_0^inf cos(w x)/(1+x^2) = pi/2 e^{-w}
        for &w in &[0.3, 1.0, 6.0] {
            let v = fourier_half_line(|x| re(1.0 / (1.0 + x * x)), w, Oscillation::Cos, r);
            assert!((v.re - 0.5 * PI * (-w).exp()).abs() < 1e-12, "{w}: {v}");
        }
    }

    #[test]
    fn full_line_transform_of_complex_power() {
        // int (2 - i y)^{-a} e^{-i xi y} dy = 2 pi / Gamma(a) xi^{a-1} e^{-2 xi} for xi > 0, else 0
        let a: f64 = 2.5;
        let ga = crate::special::gamma(a);
        let r = DeRule::default();
        for &xi in &[-3.0, -0.5, 0.0, 0.5, 1.0, 4.0, 6.0] {
            let f = |y: f64| (-a * Complex64::new(2.0, -y).ln()).exp();
            let v = fourier_full_line(f, xi, r);
            let w = apply(&fourier_weights(xi, r), f);
            assert!((v - w).norm() < 1e-14);
            let exact = if xi > 0.0 {
                2.0 * PI / ga * f64::powf(xi, a - 1.0) * (-2.0 * xi).exp()
            } else {
                0.0
            };
            assert!((v - exact).norm() < 1e-11, "xi={xi}: {v} vs {exact}");
        }
    }

    #[test]
    fn positive_axis_transform() {
        // int_0^inf x e^{-x} e^{i y x} dx = (1 - i y)^{-2}
        let r = DeRule::default();
        for &y in &[-2.0, 0.0, 0.7, 5.0] {
            let v = apply(&positive_axis_weights(y, r), |x| Complex64::new(x * (-x).exp(), 0.0));
            let exact = Complex64::new(1.0, -y).powi(-2);
            assert!((v - exact).norm() < 1e-12, "{y}: {v}");
        }
    }
}
