//! A small library of bounded symbols, most of them invariant under one of
//! the subgroup families.
//!
//! Noncompact families act by affine maps after the Cayley transform
//! `zeta' = i z' / (1 + z_n)`, `zeta_n = i (1 - z_n) / (1 + z_n)`, so their
//! invariant symbols are written in terms of
//!
//! * `P(n)`: `Im zeta_n` and `|zeta_j|` for `j < n`,
//! * `H(n)`: `arg zeta_n` and `|zeta_j|^2 / Im zeta_n`,
//! * `N(k,n)`: `|zeta_j|` for the `k` torus coordinates, `Im zeta_j` for the
//!   remaining `n-k-1`, and the height `Im zeta_n - |zeta'|^2`.
//!
//! Specs are parsed by [`parse_symbol`]; coordinate indices are 1-based.

use crate::bergman::SymbolFn;
use crate::error::{Error, Result};
use crate::groups::{FamilyKind, SubgroupFamily};
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Cayley image of a ball point without domain checks.
fn siegel(z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    let den = Complex64::new(1.0, 0.0) + z[n - 1];
    let mut out: Vec<Complex64> = z[..n - 1].iter().map(|c| I * c / den).collect();
    out.push(I * (Complex64::new(1.0, 0.0) - z[n - 1]) / den);
    out
}

fn height(zeta: &[Complex64]) -> f64 {
    let (last, head) = zeta.split_last().expect("nonempty");
    last.im - head.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

fn elliptic(n: usize) -> Option<SubgroupFamily> {
    SubgroupFamily::quasi_elliptic(n).ok()
}

fn check_index(j: usize, upper: usize, what: &str) -> Result<usize> {
    if j == 0 || j > upper {
        return Err(Error::Config(format!("{what} index {j} outside 1..={upper}")));
    }
    Ok(j - 1)
}

pub fn constant(n: usize, c: f64) -> SymbolFn {
    SymbolFn::constant(n, c)
}

/// `|z|^2`.
pub fn modulus_sq(n: usize) -> SymbolFn {
    SymbolFn::new("modulus_sq", 1.0, elliptic(n), |z| real(z.iter().map(|c| c.norm_sqr()).sum()))
}

/// `|z_j|^2`.
pub fn coord_sq(n: usize, j: usize) -> Result<SymbolFn> {
    let i = check_index(j, n, "coordinate")?;
    Ok(SymbolFn::new(format!("coord_sq({j})"), 1.0, elliptic(n), move |z| real(z[i].norm_sqr())))
}

/// `prod_j |z_j|^2`.
pub fn product_sq(n: usize) -> SymbolFn {
    SymbolFn::new("product_sq", 1.0, elliptic(n), |z| real(z.iter().map(|c| c.norm_sqr()).product()))
}

/// `1 - |z|^2`.
pub fn defect(n: usize) -> SymbolFn {
    SymbolFn::new("defect", 1.0, elliptic(n), |z| real(1.0 - z.iter().map(|c| c.norm_sqr()).sum::<f64>()))
}

/// `Re z_j`, invariant under no family; used as a negative control.
pub fn re_coord(n: usize, j: usize) -> Result<SymbolFn> {
    let i = check_index(j, n, "coordinate")?;
    Ok(SymbolFn::new(format!("re_coord({j})"), 1.0, None, move |z| real(z[i].re)))
}

/// `exp(-a Im zeta_n)` for `P(n)`, `exp(-a (Im zeta_n - |zeta'|^2))` for the
/// nilpotent families.
pub fn height_decay(family: &SubgroupFamily, a: f64) -> Result<SymbolFn> {
    if !(a >= 0.0) {
        return Err(Error::Config("height_decay needs a >= 0".into()));
    }
    let name = format!("height_decay({a})");
    let fam = Some(family.clone());
    match family.kind() {
        FamilyKind::QuasiParabolic => Ok(SymbolFn::new(name, 1.0, fam, move |z| {
            let zeta = siegel(z);
            real((-a * zeta[zeta.len() - 1].im).exp())
        })),
        FamilyKind::Nilpotent | FamilyKind::QuasiNilpotent => Ok(SymbolFn::new(name, 1.0, fam, move |z| {
            real((-a * height(&siegel(z))).exp())
        })),
        _ => Err(Error::Config(format!("height_decay is not invariant under {family}"))),
    }
}

/// `|zeta_j|^2 / Im zeta_n` for `P(n)` and `H(n)`; `|zeta_j|^2 / (1 + |zeta_j|^2)`
/// for the torus coordinates of `N(k,n)`.
pub fn torus_ratio(family: &SubgroupFamily, j: usize) -> Result<SymbolFn> {
    let i = check_index(j, family.torus_dim(), "torus coordinate")?;
    let name = format!("torus_ratio({j})");
    let fam = Some(family.clone());
    match family.kind() {
        FamilyKind::QuasiParabolic | FamilyKind::QuasiHyperbolic => Ok(SymbolFn::new(name, 1.0, fam, move |z| {
            let zeta = siegel(z);
            real(zeta[i].norm_sqr() / zeta[zeta.len() - 1].im)
        })),
        FamilyKind::QuasiNilpotent => Ok(SymbolFn::new(name, 1.0, fam, move |z| {
            let a = siegel(z)[i].norm_sqr();
            real(a / (1.0 + a))
        })),
        _ => Err(Error::Config(format!("torus_ratio is not defined for {family}"))),
    }
}

/// `sin(arg zeta_n)` for `H(n)`.
pub fn angle_sine(family: &SubgroupFamily) -> Result<SymbolFn> {
    if family.kind() != FamilyKind::QuasiHyperbolic {
        return Err(Error::Config(format!("angle_sine is not invariant under {family}")));
    }
    Ok(SymbolFn::new("angle_sine", 1.0, Some(family.clone()), |z| {
        let zeta = siegel(z);
        let w = zeta[zeta.len() - 1];
        real(w.im / w.norm())
    }))
}

/// `exp(-a (Im zeta_{k+j})^2)` for the `j`-th transverse coordinate of a
/// nilpotent family.
pub fn transverse_decay(family: &SubgroupFamily, j: usize, a: f64) -> Result<SymbolFn> {
    if !matches!(family.kind(), FamilyKind::Nilpotent | FamilyKind::QuasiNilpotent) {
        return Err(Error::Config(format!("transverse_decay is not invariant under {family}")));
    }
    if !(a >= 0.0) {
        return Err(Error::Config("transverse_decay needs a >= 0".into()));
    }
    let nb = family.real_dim() - 1;
    let i = family.torus_dim() + check_index(j, nb, "transverse coordinate")?;
    Ok(SymbolFn::new(format!("transverse_decay({j},{a})"), 1.0, Some(family.clone()), move |z| {
        let t = siegel(z)[i].im;
        real((-a * t * t).exp())
    }))
}

/// Names accepted by [`parse_symbol`].
pub const GENERATORS: &[&str] = &[
    "const(c)",
    "modulus_sq",
    "coord_sq(j)",
    "product_sq",
    "defect",
    "re_coord(j)",
    "height_decay(a)",
    "torus_ratio(j)",
    "angle_sine",
    "transverse_decay(j,a)",
];

/// Build a symbol from a spec such as `const(1)`, `coord_sq(2)` or
/// `height_decay(0.5)`.
pub fn parse_symbol(spec: &str, family: &SubgroupFamily) -> Result<SymbolFn> {
    let spec = spec.trim();
    let (name, args) = match spec.find('(') {
        Some(open) => {
            let close = spec
                .strip_suffix(')')
                .ok_or_else(|| Error::Config(format!("unbalanced parentheses in symbol {spec:?}")))?;
            (&spec[..open], close[open + 1..].split(',').map(str::trim).collect::<Vec<_>>())
        }
        None => (spec, Vec::new()),
    };
    let num = |k: usize| -> Result<f64> {
        args.get(k)
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::Config(format!("symbol {spec:?}: argument {} must be a number", k + 1)))
    };
    let idx = |k: usize| -> Result<usize> {
        args.get(k)
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::Config(format!("symbol {spec:?}: argument {} must be an index", k + 1)))
    };
    let arity = |k: usize| -> Result<()> {
        let got = if args.len() == 1 && args[0].is_empty() { 0 } else { args.len() };
        if got != k {
            return Err(Error::Config(format!("symbol {spec:?} takes {k} argument(s)")));
        }
        Ok(())
    };
    let n = family.n();
    match name {
        "const" => {
            arity(1)?;
            Ok(constant(n, num(0)?))
        }
        "modulus_sq" => {
            arity(0)?;
            Ok(modulus_sq(n))
        }
        "coord_sq" => {
            arity(1)?;
            coord_sq(n, idx(0)?)
        }
        "product_sq" => {
            arity(0)?;
            Ok(product_sq(n))
        }
        "defect" => {
            arity(0)?;
            Ok(defect(n))
        }
        "re_coord" => {
            arity(1)?;
            re_coord(n, idx(0)?)
        }
        "height_decay" => {
            arity(1)?;
            height_decay(family, num(0)?)
        }
        "torus_ratio" => {
            arity(1)?;
            torus_ratio(family, idx(0)?)
        }
        "angle_sine" => {
            arity(0)?;
            angle_sine(family)
        }
        "transverse_decay" => {
            arity(2)?;
            transverse_decay(family, idx(0)?, num(1)?)
        }
        _ => Err(Error::Config(format!(
            "unknown symbol generator {name:?}; expected one of {}",
            GENERATORS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::{invariance_check, invariance_defect};

    fn families() -> Vec<SubgroupFamily> {
        vec![
            SubgroupFamily::quasi_elliptic(2).unwrap(),
            SubgroupFamily::quasi_parabolic(2).unwrap(),
            SubgroupFamily::quasi_hyperbolic(2).unwrap(),
            SubgroupFamily::nilpotent(2).unwrap(),
            SubgroupFamily::quasi_nilpotent(1, 3).unwrap(),
        ]
    }

    #[test]
    fn generators_are_invariant_where_declared() {
        let specs = [
            "const(2)",
            "modulus_sq",
            "coord_sq(1)",
            "product_sq",
            "defect",
            "height_decay(0.7)",
            "torus_ratio(1)",
            "angle_sine",
            "transverse_decay(1,0.5)",
        ];
        for fam in families() {
            for spec in specs {
                let Ok(phi) = parse_symbol(spec, &fam) else { continue };
                let declared = phi.invariance().cloned().unwrap_or_else(|| fam.clone());
                assert!(invariance_check(&phi, &declared, 64), "{spec} under {declared}");
                assert!(phi.check_bound(fam.n(), 200), "{spec} bound");
            }
        }
    }

    #[test]
    fn noncompact_generators_break_other_symmetries() {
        let p2 = SubgroupFamily::quasi_parabolic(2).unwrap();
        let h2 = SubgroupFamily::quasi_hyperbolic(2).unwrap();
        let phi = parse_symbol("height_decay(1)", &p2).unwrap();
        assert!(invariance_defect(&phi, &h2, 64) > 1e-3);
        let re = parse_symbol("re_coord(1)", &p2).unwrap();
        assert!(!invariance_check(&re, &p2, 64));
    }

    #[test]
    fn parse_errors() {
        let e2 = SubgroupFamily::quasi_elliptic(2).unwrap();
        assert!(parse_symbol("bogus", &e2).is_err());
        assert!(parse_symbol("coord_sq(3)", &e2).is_err());
        assert!(parse_symbol("const(x)", &e2).is_err());
        assert!(parse_symbol("const(1", &e2).is_err());
        assert!(parse_symbol("height_decay(1)", &e2).is_err());
        assert!(parse_symbol("modulus_sq(1)", &e2).is_err());
    }
}
