//! Job configuration: JSON file plus command-line overrides.

use bt_core::bergman::BergmanParams;
use bt_core::groups::SubgroupFamily;
use bt_core::harmonic::Frequency;
use bt_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

/// Upper bound on the number of frequencies in one job.
pub const MAX_ROWS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn default_alpha_max() -> i64 {
    4
}

fn default_xi_max() -> f64 {
    4.0
}

fn default_xi_step() -> f64 {
    1.0
}

fn default_level() -> usize {
    3
}

fn default_format() -> Format {
    Format::Csv
}

/// A spectrum job. Keys serialize in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// `E`, `P`, `H` or `N`.
    pub family: String,
    pub n: usize,
    /// Torus rank of a quasi-nilpotent family.
    #[serde(default)]
    pub k: Option<usize>,
    pub lambda: f64,
    #[serde(default)]
    pub symbol: Option<String>,
    #[serde(default)]
    pub alpha_min: i64,
    #[serde(default = "default_alpha_max")]
    pub alpha_max: i64,
    /// Defaults to `-xi_max`.
    #[serde(default)]
    pub xi_min: Option<f64>,
    #[serde(default = "default_xi_max")]
    pub xi_max: f64,
    #[serde(default = "default_xi_step")]
    pub xi_step: f64,
    #[serde(default = "default_level")]
    pub level: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: Format,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Read a JSON config file into a key map.
pub fn read_config_file(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(config_error(format!("{}: expected a JSON object", path.display()))),
        Err(e) => Err(config_error(format!("{}: {e}", path.display()))),
    }
}

impl JobConfig {
    /// Deserialize from a key map (file contents with flags already merged in).
    pub fn from_map(map: Map<String, Value>) -> Result<Self> {
        let cfg: JobConfig = serde_json::from_value(Value::Object(map)).map_err(|e| config_error(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    #[cfg(test)]
    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str(text) {
            Ok(Value::Object(map)) => Self::from_map(map),
            Ok(_) => Err(config_error("expected a JSON object")),
            Err(e) => Err(config_error(e.to_string())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.family()?;
        self.params()?;
        if self.alpha_min > self.alpha_max {
            return Err(config_error("alpha_min exceeds alpha_max"));
        }
        let xi_min = self.xi_min();
        if !(self.xi_max.is_finite() && xi_min.is_finite()) {
            return Err(config_error("frequency box must be finite"));
        }
        if xi_min > self.xi_max {
            return Err(config_error("xi_min exceeds xi_max"));
        }
        if !(self.xi_step > 0.0 && self.xi_step.is_finite()) {
            return Err(config_error("xi_step must be positive"));
        }
        if !(1..=8).contains(&self.level) {
            return Err(config_error(format!("level {} outside 1..=8", self.level)));
        }
        let fam = self.family()?;
        let alphas = (self.alpha_max - self.alpha_min + 1) as f64;
        let xis = ((self.xi_max - xi_min) / self.xi_step).floor() + 1.0;
        let rows = alphas.powi(fam.torus_dim() as i32) * xis.powi(fam.real_dim() as i32);
        if rows > MAX_ROWS as f64 {
            return Err(config_error(format!("frequency box has {rows} points (limit {MAX_ROWS})")));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<BergmanParams> {
        BergmanParams::new(self.n, self.lambda)
    }

    pub fn family(&self) -> Result<SubgroupFamily> {
        parse_family(&self.family, self.n, self.k)
    }

    pub fn xi_min(&self) -> f64 {
        self.xi_min.unwrap_or(-self.xi_max)
    }

    /// Requested frequencies: `alpha` in graded-lex order, then `xi`
    /// lexicographically ascending.
    pub fn frequencies(&self) -> Result<Vec<Frequency>> {
        let fam = self.family()?;
        let alphas = alpha_box(fam.torus_dim(), self.alpha_min, self.alpha_max);
        let axis = grid(self.xi_min(), self.xi_max, self.xi_step);
        let xis = cartesian(&axis, fam.real_dim());
        let mut out = Vec::with_capacity(alphas.len() * xis.len());
        for a in &alphas {
            for x in &xis {
                out.push(Frequency::new(a.clone(), x.clone())?);
            }
        }
        Ok(out)
    }
}

/// `E`, `P`, `H`, `N` (case-insensitive, long names accepted); `k > 0`
/// selects the quasi-nilpotent family `N(k,n)`.
pub fn parse_family(name: &str, n: usize, k: Option<usize>) -> Result<SubgroupFamily> {
    let key = name.trim().to_ascii_lowercase();
    let fam = match key.as_str() {
        "e" | "quasi-elliptic" | "elliptic" => SubgroupFamily::quasi_elliptic(n),
        "p" | "quasi-parabolic" | "parabolic" => SubgroupFamily::quasi_parabolic(n),
        "h" | "quasi-hyperbolic" | "hyperbolic" => SubgroupFamily::quasi_hyperbolic(n),
        "n" | "nilpotent" | "quasi-nilpotent" => match k {
            None | Some(0) => SubgroupFamily::nilpotent(n),
            Some(k) => SubgroupFamily::quasi_nilpotent(k, n),
        },
        _ => return Err(config_error(format!("unknown family {name:?}; expected E, P, H or N"))),
    }?;
    if k.is_some_and(|k| k > 0) && !key.starts_with('n') && !key.contains("nilpotent") {
        return Err(config_error("k applies to the nilpotent family only"));
    }
    Ok(fam)
}

/// `lo, lo + step, ...` up to `hi` (inclusive up to rounding).
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|j| lo + j as f64 * step).collect()
}

fn cartesian(axis: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
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

/// Integer box `[lo, hi]^dim` sorted by total degree, then lexicographically.
pub fn alpha_box(dim: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (lo..=hi).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out.sort_by(|a, b| a.iter().sum::<i64>().cmp(&b.iter().sum::<i64>()).then_with(|| a.cmp(b)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> JobConfig {
        JobConfig::from_json(r#"{"family": "N", "n": 3, "k": 1, "lambda": 4.5, "symbol": "height_decay(0.5)"}"#).unwrap()
    }

    #[test]
    fn round_trip() {
        let cfg = sample();
        assert_eq!(JobConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let mut other = cfg.clone();
        other.xi_min = Some(0.25);
        other.format = Format::Json;
        other.out = Some("rows.json".into());
        assert_eq!(JobConfig::from_json(&other.to_json()).unwrap(), other);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(JobConfig::from_json(r#"{"family": "E", "n": 2, "lambda": 2.0}"#).is_err());
        assert!(JobConfig::from_json(r#"{"family": "Q", "n": 2, "lambda": 3.0}"#).is_err());
        assert!(JobConfig::from_json(r#"{"family": "E", "n": 2, "lambda": 3.0, "xi_step": 0}"#).is_err());
        assert!(JobConfig::from_json(r#"{"family": "E", "n": 2, "lambda": 3.0, "colour": 1}"#).is_err());
        assert!(JobConfig::from_json(r#"{"family": "P", "n": 2, "k": 1, "lambda": 3.0}"#).is_err());
    }

    #[test]
    fn frequency_order() {
        let a = alpha_box(2, 0, 2);
        assert_eq!(a[..4], [vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2]]);
        assert_eq!(grid(-1.0, 1.0, 0.5), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let cfg = sample();
        let f = cfg.frequencies().unwrap();
        assert_eq!(f.len(), 5 * 9 * 9);
        assert_eq!(f[0].alpha, vec![0]);
        assert_eq!(f[0].xi, vec![-4.0, -4.0]);
        assert_eq!(f[1].xi, vec![-4.0, -3.0]);
    }
}
