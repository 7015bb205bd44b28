//! `bt spectrum`: the spectral function of an invariant symbol on a frequency box.

use crate::config::{Format, JobConfig};
use crate::output::{finite, fmt_f64, sink, write_csv, write_json};
use bt_core::spectrum::{spectral_density, EtaValue};
use bt_core::symbols::parse_symbol;
use bt_core::{Error, Result};
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    alpha: Vec<i64>,
    xi: Vec<f64>,
    eta_re: Option<f64>,
    eta_im: Option<f64>,
    phi_hat_abs: f64,
    condition: &'static str,
}

#[derive(Serialize)]
struct Document<'a> {
    family: String,
    n: usize,
    lambda: f64,
    symbol: &'a str,
    level: usize,
    rows: Vec<Row>,
}

pub fn run(cfg: &JobConfig) -> Result<()> {
    let params = cfg.params()?;
    let family = cfg.family()?;
    let spec = cfg
        .symbol
        .as_deref()
        .ok_or_else(|| Error::Config("spectrum needs --symbol".into()))?;
    let phi = parse_symbol(spec, &family)?;
    let freqs = cfg.frequencies()?;
    let density = spectral_density(&params, &phi, &family, &freqs, cfg.level)?;
    let out = sink(cfg.out.as_deref()).map_err(io_error)?;
    match cfg.format {
        Format::Csv => {
            let mut header: Vec<String> = (1..=family.torus_dim()).map(|j| format!("alpha_{j}")).collect();
            header.extend((1..=family.real_dim()).map(|j| format!("xi_{j}")));
            header.extend(["eta_re", "eta_im", "phi_hat_abs", "condition"].map(String::from));
            let rows: Vec<Vec<String>> = density.values.iter().map(csv_row).collect();
            write_csv(out, &header, &rows).map_err(io_error)
        }
        Format::Json => {
            let doc = Document {
                family: family.label(),
                n: family.n(),
                lambda: params.lambda(),
                symbol: spec,
                level: cfg.level,
                rows: density
                    .values
                    .iter()
                    .map(|v| Row {
                        alpha: v.frequency.alpha.clone(),
                        xi: v.frequency.xi.clone(),
                        eta_re: finite(v.eta.re),
                        eta_im: finite(v.eta.im),
                        phi_hat_abs: v.phi_hat.abs(),
                        condition: v.condition.as_str(),
                    })
                    .collect(),
            };
            write_json(out, &doc).map_err(io_error)
        }
    }
}

fn csv_row(v: &EtaValue) -> Vec<String> {
    let mut row: Vec<String> = v.frequency.alpha.iter().map(|a| a.to_string()).collect();
    row.extend(v.frequency.xi.iter().map(|&x| fmt_f64(x)));
    row.push(fmt_f64(v.eta.re));
    row.push(fmt_f64(v.eta.im));
    row.push(fmt_f64(v.phi_hat.abs()));
    row.push(v.condition.as_str().into());
    row
}

pub fn io_error(e: std::io::Error) -> Error {
    Error::Config(format!("output: {e}"))
}
