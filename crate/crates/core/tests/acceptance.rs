//! Release gate: one test per acceptance criterion, each printing a single
//! PASS/FAIL line. The tests hold a shared lock so runtimes are measured
//! without contention.

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
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

static SERIAL: Mutex<()> = Mutex::new(());

/// Print the verdict line uncaptured and fail the test if needed.
fn verdict(id: u32, title: &str, ok: bool, detail: String) {
    let line = format!("criterion {id} [{}] {title}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

fn five_families() -> Vec<SubgroupFamily> {
    vec![
        SubgroupFamily::quasi_elliptic(2).unwrap(),
        SubgroupFamily::quasi_parabolic(2).unwrap(),
        SubgroupFamily::quasi_hyperbolic(2).unwrap(),
        SubgroupFamily::nilpotent(2).unwrap(),
        SubgroupFamily::quasi_nilpotent(1, 3).unwrap(),
    ]
}

fn freq(a: Vec<i64>, x: Vec<f64>) -> Frequency {
    Frequency::new(a, x).unwrap()
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

#[test]
fn criterion_1_quasi_elliptic_spectra() {
    let _g = lock();
    let start = Instant::now();
    let params = BergmanParams::new(1, 2.0).unwrap();
    let e1 = SubgroupFamily::quasi_elliptic(1).unwrap();
    let phi = symbols::modulus_sq(1);
    let mut worst1: f64 = 0.0;
    for k in 0..=8 {
        let v = eta(&params, &phi, &e1, &freq(vec![k], vec![]), 3).unwrap();
        worst1 = worst1.max((v.eta - (k as f64 + 1.0) / (k as f64 + 2.0)).norm());
    }
    let t1 = start.elapsed();

    let start = Instant::now();
    let params = BergmanParams::new(2, 3.5).unwrap();
    let e2 = SubgroupFamily::quasi_elliptic(2).unwrap();
    let mut worst2: f64 = 0.0;
    for spec in ["coord_sq(1)", "product_sq", "defect"] {
        let phi = parse_symbol(spec, &e2).unwrap();
        for (a, oracle) in oracle_eigenvalues(&params, &phi, 6, 3).unwrap() {
            let alpha: Vec<i64> = a.0.iter().map(|&k| k as i64).collect();
            let v = eta(&params, &phi, &e2, &freq(alpha, vec![]), 3).unwrap();
            worst2 = worst2.max((v.eta - oracle).norm());
        }
    }
    let t2 = start.elapsed();
    let ok = worst1 <= 1e-6 && t1 < Duration::from_secs(5) && worst2 <= 1e-5 && t2 < Duration::from_secs(120);
    verdict(
        1,
        "quasi-elliptic spectra",
        ok,
        format!("E(1) max err {worst1:.2e} in {t1:.2?}; E(2) vs oracle max err {worst2:.2e} in {t2:.2?}"),
    );
}

/// Torus parts `alpha_j in [-2, 8]` with `sum alpha_j <= 8`.
fn alpha_grid(m: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (-2..=8).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .filter(|q| q.iter().sum::<i64>() <= 8)
            .collect();
    }
    out
}

fn xi_grid(d: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (-4..=4).map(|j| 1.5 * j as f64).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

#[test]
fn criterion_2_closed_form_transforms() {
    let _g = lock();
    let start = Instant::now();
    let mut worst_rel: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    let mut notes = Vec::new();
    for fam in five_families() {
        let torus_points = match (fam.torus_dim(), fam.real_dim()) {
            (_, 0) => 256,
            (_, 1) => 64,
            _ => 32,
        };
        let opts = NumericFourier {
            torus_points,
            rule: DeRule::with_step(0.1),
        };
        let mut freqs = Vec::new();
        for a in alpha_grid(fam.torus_dim()) {
            for x in xi_grid(fam.real_dim()) {
                freqs.push(freq(a.clone(), x));
            }
        }
        for lambda in [fam.n() as f64 + 0.5, fam.n() as f64 + 1.5] {
            let numeric = phi_h_hat_numeric(&fam, lambda, &freqs, opts).unwrap();
            let (mut rel, mut abs): (f64, f64) = (0.0, 0.0);
            for (f, v) in freqs.iter().zip(&numeric) {
                let exact = phi_h_hat(&fam, f, lambda).unwrap();
                if exact == 0.0 {
                    abs = abs.max(v.norm());
                } else {
                    rel = rel.max((v - exact).norm() / exact);
                }
            }
            notes.push(format!("{fam}@{lambda}: {rel:.1e}/{abs:.1e}"));
            worst_rel = worst_rel.max(rel);
            worst_abs = worst_abs.max(abs);
        }
    }
    let t = start.elapsed();
    let ok = worst_rel <= 1e-6 && worst_abs <= 1e-8 && t < Duration::from_secs(300);
    verdict(
        2,
        "closed-form Fourier transforms",
        ok,
        format!(
            "max rel {worst_rel:.2e} on support, max abs {worst_abs:.2e} off support, {t:.1?} [{}]",
            notes.join(", ")
        ),
    );
}

#[test]
fn criterion_3_constant_symbol() {
    let _g = lock();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_nu: f64 = 0.0;
    let mut worst_eta: f64 = 0.0;
    for fam in five_families() {
        let params = BergmanParams::new(fam.n(), fam.n() as f64 + 1.5).unwrap();
        let one = SymbolFn::constant(fam.n(), 1.0);
        let field = nu_field(&params, &one, &fam, NuOptions::default()).unwrap();
        for _ in 0..50 {
            let torus = (0..fam.torus_dim()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let real = (0..fam.real_dim()).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let m = OrbitCoordinate::new(torus, real).unwrap();
            let a = field.eval(&m).unwrap();
            let b = phi_h(&fam, &m, params.lambda()).unwrap();
            worst_nu = worst_nu.max((a - b).norm());
        }
        let mut count = 0;
        while count < 20 {
            let alpha: Vec<i64> = (0..fam.torus_dim()).map(|_| rng.gen_range(0..=6)).collect();
            let xi: Vec<f64> = (0..fam.real_dim()).map(|_| rng.gen_range(-6.0..6.0)).collect();
            let f = freq(alpha, xi);
            let Ok(v) = eta(&params, &one, &fam, &f, 3) else { continue };
            worst_eta = worst_eta.max((v.eta - 1.0).norm());
            count += 1;
        }
    }
    let ok = worst_nu <= 1e-6 && worst_eta <= 1e-6;
    verdict(
        3,
        "constant symbol identity",
        ok,
        format!("max |nu_1 - phi_H| {worst_nu:.2e}, max |eta_1 - 1| {worst_eta:.2e}"),
    );
}

#[test]
fn criterion_4_positivity() {
    let _g = lock();
    let mut families = Vec::new();
    for n in 1..=3 {
        families.push(SubgroupFamily::quasi_elliptic(n).unwrap());
        families.push(SubgroupFamily::quasi_parabolic(n).unwrap());
        families.push(SubgroupFamily::quasi_hyperbolic(n).unwrap());
        if n >= 2 {
            families.push(SubgroupFamily::nilpotent(n).unwrap());
        }
        for k in 1..n.saturating_sub(1) {
            families.push(SubgroupFamily::quasi_nilpotent(k, n).unwrap());
        }
    }
    let mut min = f64::INFINITY;
    let mut samples = 0usize;
    let mut errors = 0usize;
    for fam in &families {
        for lambda in [fam.n() as f64 + 0.5, fam.n() as f64 + 1.5, fam.n() as f64 + 4.0] {
            for a in alpha_grid(fam.torus_dim().min(2)) {
                let mut alpha = a.clone();
                alpha.resize(fam.torus_dim(), 1);
                for x in xi_grid(fam.real_dim().min(2)) {
                    let mut xi = x.clone();
                    xi.resize(fam.real_dim(), 0.25);
                    let f = freq(alpha.clone(), xi);
                    let v = phi_h_hat(fam, &f, lambda).unwrap();
                    min = min.min(v);
                    samples += 1;
                    if omega_h_hat(fam, &f, lambda).is_err() {
                        errors += 1;
                    }
                }
            }
        }
    }
    let ok = min >= -POSITIVITY_TOL && errors == 0;
    verdict(
        4,
        "positivity of the kernel transform",
        ok,
        format!("min phi_hat {min:.3e} over {samples} frequencies in {} families", families.len()),
    );
}

#[test]
fn criterion_5_reproducing_property() {
    let _g = lock();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=2usize {
        for lambda in [n as f64 + 1.0, n as f64 + 2.5] {
            let params = BergmanParams::new(n, lambda).unwrap();
            for _ in 0..50 {
                let degree = rng.gen_range(0..=5);
                let p = Polynomial::random(&mut rng, n, degree);
                let w = random_point(&mut rng, n, 0.5);
                worst = worst.max(reproducing_check(&params, &p, &w, 4).unwrap());
                count += 1;
            }
        }
    }
    verdict(
        5,
        "reproducing property",
        worst <= 1e-8,
        format!("max |<p, K_w> - p(w)| {worst:.2e} over {count} polynomials"),
    );
}

#[test]
fn criterion_6_cocycle_identity() {
    let _g = lock();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for fam in five_families() {
        let lambda = fam.n() as f64 + 0.5;
        for _ in 0..100 {
            let g = random_element(&mut rng, &fam, 2.0);
            let h = random_element(&mut rng, &fam, 2.0);
            let z = random_point(&mut rng, fam.n(), 0.9);
            let lhs = g.compose(&h).unwrap().cocycle(&z, lambda).unwrap();
            let rhs = g.cocycle(&h.act(&z).unwrap(), lambda).unwrap() * h.cocycle(&z, lambda).unwrap();
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
    }
    verdict(
        6,
        "cocycle identity",
        worst <= 1e-10,
        format!("max |j(gh,z) - j(g,hz) j(h,z)| {worst:.2e} over 500 pairs"),
    );
}

#[test]
fn criterion_7_commutativity() {
    let _g = lock();
    let opts = CommutatorOptions::default();
    let params = BergmanParams::new(2, 3.0).unwrap();
    let e2 = SubgroupFamily::quasi_elliptic(2).unwrap();
    let torus_pairs = [("coord_sq(1)", "product_sq"), ("modulus_sq", "coord_sq(2)"), ("defect", "product_sq")];
    let mut worst_e: f64 = 0.0;
    for (a, b) in torus_pairs {
        let a = parse_symbol(a, &e2).unwrap();
        let b = parse_symbol(b, &e2).unwrap();
        worst_e = worst_e.max(commutator_norm(&params, &a, &b, 8, opts).unwrap());
    }
    let invariant_pairs = [
        (SubgroupFamily::quasi_parabolic(2).unwrap(), "height_decay(1)", "torus_ratio(1)"),
        (SubgroupFamily::quasi_hyperbolic(2).unwrap(), "angle_sine", "torus_ratio(1)"),
        (SubgroupFamily::nilpotent(2).unwrap(), "height_decay(1)", "transverse_decay(1,1)"),
    ];
    let mut worst_inv: f64 = 0.0;
    let mut notes = Vec::new();
    for (fam, a, b) in invariant_pairs {
        let a = parse_symbol(a, &fam).unwrap();
        let b = parse_symbol(b, &fam).unwrap();
        let v = commutator_norm(&params, &a, &b, 5, opts).unwrap();
        notes.push(format!("{fam} {v:.1e}"));
        worst_inv = worst_inv.max(v);
    }
    let re = symbols::re_coord(2, 1).unwrap();
    let im = SymbolFn::new("im_z1", 1.0, None, |z| Complex64::new(z[0].im, 0.0));
    let control = commutator_norm(&params, &re, &im, 5, opts).unwrap();
    let ok = worst_e == 0.0 && worst_inv <= 1e-6 && control >= 1e-2;
    verdict(
        7,
        "commutativity",
        ok,
        format!(
            "torus-invariant max {worst_e:.1e}; invariant pairs max {worst_inv:.2e} [{}]; control {control:.3e}",
            notes.join(", ")
        ),
    );
}

#[test]
fn criterion_8_omega_square_root() {
    let _g = lock();
    let mut worst_sq: f64 = 0.0;
    for fam in five_families() {
        let lambda = fam.n() as f64 + 1.0;
        for a in alpha_grid(fam.torus_dim()) {
            for x in xi_grid(fam.real_dim()) {
                let f = freq(a.clone(), x);
                let w = omega_h_hat(&fam, &f, lambda).unwrap();
                let p = phi_h_hat(&fam, &f, lambda).unwrap();
                let rel = if p == 0.0 { (w * w).abs() } else { (w * w - p).abs() / p };
                worst_sq = worst_sq.max(rel);
            }
        }
    }
    let mut worst_conv: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for fam in [SubgroupFamily::quasi_elliptic(2).unwrap(), SubgroupFamily::quasi_parabolic(2).unwrap()] {
        let lambda = 3.0;
        let field = synthesize_omega(&fam, lambda, OmegaOptions::default()).unwrap();
        for _ in 0..10 {
            let torus = (0..fam.torus_dim()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let real = (0..fam.real_dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let m = OrbitCoordinate::new(torus, real).unwrap();
            let c = omega_self_convolution(&field, &m).unwrap();
            worst_conv = worst_conv.max((c - phi_h(&fam, &m, lambda).unwrap()).norm());
        }
    }
    // Squaring a correctly rounded square root is exact up to two roundings.
    let ok = worst_sq <= 2.0 * f64::EPSILON && worst_conv <= 1e-5;
    verdict(
        8,
        "omega square root",
        ok,
        format!("max rel |omega_hat^2 - phi_hat| {worst_sq:.2e}; max |omega*omega - phi_H| {worst_conv:.2e}"),
    );
}

#[test]
fn criterion_9_integrability_thresholds() {
    let _g = lock();
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 1..=3usize {
        let mut families = vec![
            SubgroupFamily::quasi_elliptic(n).unwrap(),
            SubgroupFamily::quasi_parabolic(n).unwrap(),
            SubgroupFamily::quasi_hyperbolic(n).unwrap(),
        ];
        families.extend(SubgroupFamily::nilpotent(n).ok());
        families.extend((1..n.saturating_sub(1)).map(|k| SubgroupFamily::quasi_nilpotent(k, n).unwrap()));
        for fam in families {
            for lambda in [n as f64 + 0.1, n as f64 + 0.5, n as f64 + 2.0] {
                checked += 1;
                if !dlambda_l2_norm_sq(&fam, lambda, 4).unwrap().is_finite() {
                    failures.push(format!("{fam}@{lambda}"));
                }
            }
        }
    }
    let mut worst_beta: f64 = 0.0;
    for n in 1..=3usize {
        let fam = SubgroupFamily::quasi_hyperbolic(n).unwrap();
        for lambda in [n as f64 + 0.1, n as f64 + 0.5, n as f64 + 2.0] {
            // int cosh^{-2 lambda} s ds = B(1/2, lambda)
            let exact = (0.5 * std::f64::consts::PI.ln() + ln_gamma(lambda) - ln_gamma(lambda + 0.5)).exp();
            let v = dlambda_l2_norm_sq(&fam, lambda, 4).unwrap().value().unwrap_or(f64::INFINITY);
            worst_beta = worst_beta.max((v - exact).abs() / exact);
        }
    }
    let ok = failures.is_empty() && worst_beta <= 1e-8;
    verdict(
        9,
        "square-integrability thresholds",
        ok,
        format!(
            "{} of {checked} converged; H(n) vs Beta max rel {worst_beta:.2e}{}",
            checked - failures.len(),
            if failures.is_empty() { String::new() } else { format!("; divergent: {}", failures.join(" ")) }
        ),
    );
}
