//! `bt verify`: quick self-checks of the library, reported as JSON.

use bt_core::bergman::{
    random_element, random_point, reproducing_check, BergmanParams, Polynomial, SymbolFn,
};
use bt_core::groups::{dlambda_l2_norm_sq, OrbitCoordinate, SubgroupFamily};
use bt_core::harmonic::{
    omega_h_hat, omega_self_convolution, phi_h, phi_h_hat, phi_h_hat_numeric, synthesize_omega, Frequency,
    NumericFourier, OmegaOptions, POSITIVITY_TOL,
};
use bt_core::integrate::DeRule;
use bt_core::special::ln_gamma;
use bt_core::spectrum::{commutator_norm, eta, nu_field, oracle_eigenvalues, CommutatorOptions, NuOptions};
use bt_core::symbols::{self, parse_symbol};
use bt_core::Result;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const SUITES: &[&str] = &[
    "oracle",
    "fourier-closed-forms",
    "identity",
    "positivity",
    "reproducing",
    "cocycle",
    "commutator",
    "omega",
    "thresholds",
];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured error, or `null` when the check failed to run.
    pub error: Option<f64>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub passed: bool,
    pub level: usize,
    pub suites: Vec<SuiteReport>,
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    /// Record `error <= tolerance`, or the failure to compute it.
    fn record(&mut self, name: impl Into<String>, error: Result<f64>, tolerance: f64) {
        let name = name.into();
        let check = match error {
            Ok(e) => Check {
                name,
                passed: e <= tolerance,
                error: Some(e),
                tolerance,
                message: None,
            },
            Err(err) => Check {
                name,
                passed: false,
                error: None,
                tolerance,
                message: Some(err.to_string()),
            },
        };
        self.checks.push(check);
    }

    /// Record `value >= bound` as a lower-bound check (stored as `bound - value <= 0`).
    fn at_least(&mut self, name: impl Into<String>, value: Result<f64>, bound: f64) {
        self.record(name, value.map(|v| (bound - v).max(0.0)), 0.0);
    }
}

fn families(n: usize) -> Vec<SubgroupFamily> {
    let mut v = vec![
        SubgroupFamily::quasi_elliptic(n).unwrap(),
        SubgroupFamily::quasi_parabolic(n).unwrap(),
        SubgroupFamily::quasi_hyperbolic(n).unwrap(),
    ];
    if n >= 2 {
        v.push(SubgroupFamily::nilpotent(n).unwrap());
        v.push(SubgroupFamily::quasi_nilpotent(1, n + 1).unwrap());
    }
    v
}

fn freq(a: Vec<i64>, x: Vec<f64>) -> Frequency {
    Frequency::new(a, x).expect("finite frequency")
}

/// A few in-support frequencies of a family.
fn sample_frequencies(fam: &SubgroupFamily) -> Vec<Frequency> {
    let m = fam.torus_dim();
    let d = fam.real_dim();
    let alphas: Vec<Vec<i64>> = if m == 0 {
        vec![vec![]]
    } else {
        vec![vec![0; m], (0..m as i64).map(|j| j + 1).collect(), vec![3; m]]
    };
    let mut out = Vec::new();
    for (i, a) in alphas.iter().enumerate() {
        let y = [0.75, 2.0, 4.5][i % 3];
        let xi = (0..d).map(|j| if j == 0 { y } else { 1.0 - y }).collect();
        out.push(freq(a.clone(), xi));
    }
    out
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn oracle(level: usize) -> Suite {
    let mut s = Suite::new();
    let p1 = BergmanParams::new(1, 2.0).unwrap();
    let e1 = SubgroupFamily::quasi_elliptic(1).unwrap();
    let phi = symbols::modulus_sq(1);
    for k in 0..=8 {
        let exact = (k as f64 + 1.0) / (k as f64 + 2.0);
        let got = eta(&p1, &phi, &e1, &freq(vec![k], vec![]), level).map(|v| (v.eta.re - exact).abs());
        s.record(format!("E(1) modulus_sq eta({k})"), got, 1e-6);
    }
    let p2 = BergmanParams::new(2, 3.5).unwrap();
    let e2 = SubgroupFamily::quasi_elliptic(2).unwrap();
    for spec in ["coord_sq(1)", "product_sq", "defect"] {
        let phi = parse_symbol(spec, &e2).unwrap();
        let err = oracle_eigenvalues(&p2, &phi, 6, level.max(3)).and_then(|diag| {
            let mut worst: f64 = 0.0;
            for (a, v) in diag {
                let alpha = a.0.iter().map(|&k| k as i64).collect();
                let e = eta(&p2, &phi, &e2, &freq(alpha, vec![]), level)?;
                worst = worst.max((e.eta.re - v).abs());
            }
            Ok(worst)
        });
        s.record(format!("E(2) {spec} eta vs Toeplitz diagonal"), err, 1e-5);
    }
    s
}

fn fourier_closed_forms(_level: usize) -> Suite {
    let mut s = Suite::new();
    for fam in families(2) {
        let lambda = fam.n() as f64 + 0.5;
        let opts = NumericFourier {
            torus_points: if fam.real_dim() >= 2 { 32 } else { 64 },
            rule: DeRule::with_step(0.1),
        };
        let mut freqs = sample_frequencies(&fam);
        let m = fam.torus_dim();
        let d = fam.real_dim();
        // Off the support where the family has one.
        freqs.push(freq(
            vec![-1; m],
            (0..d).map(|j| if j == 0 && m == 0 { -1.5 } else { 0.5 }).collect(),
        ));
        let got = phi_h_hat_numeric(&fam, lambda, &freqs, opts);
        match got {
            Ok(values) => {
                for (f, v) in freqs.iter().zip(values) {
                    let exact = phi_h_hat(&fam, f, lambda).unwrap();
                    let label = format!("{fam} lambda={lambda} alpha={:?} xi={:?}", f.alpha, f.xi);
                    if exact == 0.0 {
                        s.record(format!("{label} off support"), Ok(v.norm()), 1e-8);
                    } else {
                        s.record(label, Ok((v - exact).norm() / exact), 1e-6);
                    }
                }
            }
            Err(e) => s.record(format!("{fam} numeric transform"), Err(e), 1e-6),
        }
    }
    s
}

fn identity(level: usize) -> Suite {
    let mut s = Suite::new();
    for fam in families(2) {
        let params = BergmanParams::new(fam.n(), fam.n() as f64 + 0.5).unwrap();
        let one = SymbolFn::constant(fam.n(), 1.0);
        for f in sample_frequencies(&fam) {
            let got = eta(&params, &one, &fam, &f, level).map(|v| (v.eta - 1.0).norm());
            s.record(format!("{fam} eta_1 at alpha={:?} xi={:?}", f.alpha, f.xi), got, 1e-6);
        }
        let err = nu_field(&params, &one, &fam, NuOptions::default()).and_then(|field| {
            let mut worst: f64 = 0.0;
            for t in 0..4 {
                let t = t as f64;
                let m = OrbitCoordinate::new(
                    vec![0.17 * t; fam.torus_dim()],
                    (0..fam.real_dim()).map(|j| 0.6 * t - 0.3 * j as f64).collect(),
                )?;
                let a = field.eval(&m)?;
                let b = phi_h(&fam, &m, params.lambda())?;
                worst = worst.max((a - b).norm());
            }
            Ok(worst)
        });
        s.record(format!("{fam} nu_1 = phi_H"), err, 1e-6);
    }
    s
}

fn positivity(_level: usize) -> Suite {
    let mut s = Suite::new();
    for fam in families(2) {
        for lambda in [fam.n() as f64 + 0.5, fam.n() as f64 + 1.5] {
            let mut worst = f64::INFINITY;
            for a in 0..6i64 {
                for j in -12..=12 {
                    let x = 0.5 * j as f64;
                    let f = freq(vec![a; fam.torus_dim()], vec![x; fam.real_dim()]);
                    worst = worst.min(phi_h_hat(&fam, &f, lambda).unwrap_or(f64::NEG_INFINITY));
                }
            }
            s.at_least(format!("{fam} lambda={lambda} min phi_hat"), Ok(worst), -POSITIVITY_TOL);
        }
    }
    s
}

fn reproducing(level: usize) -> Suite {
    let mut s = Suite::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=2usize {
        for lambda in [n as f64 + 1.0, n as f64 + 2.5] {
            let params = BergmanParams::new(n, lambda).unwrap();
            let mut worst: Result<f64> = Ok(0.0);
            for _ in 0..10 {
                let p = Polynomial::random(&mut rng, n, 5);
                let w = random_point(&mut rng, n, 0.5);
                worst = worst.and_then(|acc| Ok(acc.max(reproducing_check(&params, &p, &w, level.max(3))?)));
            }
            s.record(format!("n={n} lambda={lambda}"), worst, 1e-8);
        }
    }
    s
}

fn cocycle(_level: usize) -> Suite {
    let mut s = Suite::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for fam in families(2) {
        let lambda = fam.n() as f64 + 0.5;
        let mut worst: Result<f64> = Ok(0.0);
        for _ in 0..25 {
            let g = random_element(&mut rng, &fam, 2.0);
            let h = random_element(&mut rng, &fam, 2.0);
            let z = random_point(&mut rng, fam.n(), 0.9);
            worst = worst.and_then(|acc| {
                let gh = g.compose(&h)?;
                let lhs = gh.cocycle(&z, lambda)?;
                let rhs = g.cocycle(&h.act(&z)?, lambda)? * h.cocycle(&z, lambda)?;
                Ok(acc.max((lhs - rhs).norm() / rhs.norm().max(1.0)))
            });
        }
        s.record(format!("{fam}"), worst, 1e-10);
    }
    s
}

fn commutator(level: usize) -> Suite {
    let mut s = Suite::new();
    let opts = CommutatorOptions {
        level: level.max(3),
        ..CommutatorOptions::default()
    };
    let p = BergmanParams::new(2, 3.0).unwrap();
    let a = symbols::coord_sq(2, 1).unwrap();
    let b = symbols::product_sq(2);
    s.record("E(2) coord_sq(1), product_sq", commutator_norm(&p, &a, &b, 8, opts), 0.0);
    let pairs = [
        ("P", "height_decay(1)", "torus_ratio(1)"),
        ("H", "angle_sine", "torus_ratio(1)"),
        ("N", "height_decay(1)", "transverse_decay(1,1)"),
    ];
    for (name, x, y) in pairs {
        let fam = crate::config::parse_family(name, 2, None).unwrap();
        let got = parse_symbol(x, &fam)
            .and_then(|u| Ok((u, parse_symbol(y, &fam)?)))
            .and_then(|(u, v)| commutator_norm(&p, &u, &v, 3, opts));
        s.record(format!("{fam} {x}, {y}"), got, 1e-6);
    }
    let re = symbols::re_coord(2, 1).unwrap();
    let im = SymbolFn::new("im_z1", 1.0, None, |z| Complex64::new(z[0].im, 0.0));
    s.at_least("negative control re z1, im z1", commutator_norm(&p, &re, &im, 3, opts), 1e-2);
    s
}

fn omega(_level: usize) -> Suite {
    let mut s = Suite::new();
    for fam in families(2) {
        let lambda = fam.n() as f64 + 0.5;
        let mut worst: f64 = 0.0;
        for f in sample_frequencies(&fam) {
            let (w, p) = (omega_h_hat(&fam, &f, lambda).unwrap(), phi_h_hat(&fam, &f, lambda).unwrap());
            worst = worst.max(relative(w * w, p));
        }
        s.record(format!("{fam} omega_hat^2 = phi_hat"), Ok(worst), 4.0 * f64::EPSILON);
    }
    for name in ["E", "P"] {
        let fam = crate::config::parse_family(name, 2, None).unwrap();
        let lambda = 3.0;
        let err = synthesize_omega(&fam, lambda, OmegaOptions::default()).and_then(|field| {
            let mut worst: f64 = 0.0;
            for t in 0..3 {
                let t = t as f64;
                let m = OrbitCoordinate::new(vec![0.21 * t; fam.torus_dim()], vec![0.8 * t - 0.5; fam.real_dim()])?;
                let conv = omega_self_convolution(&field, &m)?;
                worst = worst.max((conv - phi_h(&fam, &m, lambda)?).norm());
            }
            Ok(worst)
        });
        s.record(format!("{fam} omega * omega = phi_H"), err, 1e-5);
    }
    s
}

fn thresholds(level: usize) -> Suite {
    let mut s = Suite::new();
    for n in 1..=2 {
        for fam in families(n) {
            let lambda = fam.n() as f64 + 0.5;
            let got = dlambda_l2_norm_sq(&fam, lambda, level.max(2)).map(|v| if v.is_finite() { 0.0 } else { 1.0 });
            s.record(format!("{fam} lambda={lambda} converges"), got, 0.0);
        }
        let fam = SubgroupFamily::quasi_hyperbolic(n).unwrap();
        for lambda in [n as f64 + 0.5, n as f64 + 2.0] {
            let exact = (0.5 * std::f64::consts::PI.ln() + ln_gamma(lambda) - ln_gamma(lambda + 0.5)).exp();
            let got = dlambda_l2_norm_sq(&fam, lambda, level.max(2))
                .map(|v| v.value().map_or(f64::INFINITY, |v| relative(v, exact)));
            s.record(format!("{fam} lambda={lambda} Beta closed form"), got, 1e-8);
        }
    }
    s
}

/// Run the named suite (or `all`).
pub fn run(selector: &str, level: usize) -> std::result::Result<Report, String> {
    let names: Vec<&str> = if selector == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&selector) {
        vec![selector]
    } else {
        return Err(format!("unknown suite {selector:?}; expected all or one of {}", SUITES.join(", ")));
    };
    let suites: Vec<SuiteReport> = names
        .into_iter()
        .map(|name| {
            let suite = match name {
                "oracle" => oracle(level),
                "fourier-closed-forms" => fourier_closed_forms(level),
                "identity" => identity(level),
                "positivity" => positivity(level),
                "reproducing" => reproducing(level),
                "cocycle" => cocycle(level),
                "commutator" => commutator(level),
                "omega" => omega(level),
                "thresholds" => thresholds(level),
                _ => unreachable!(),
            };
            SuiteReport {
                suite: name.into(),
                passed: suite.checks.iter().all(|c| c.passed),
                checks: suite.checks,
            }
        })
        .collect();
    Ok(Report {
        passed: suites.iter().all(|s| s.passed),
        level,
        suites,
    })
}
