//! `bt kernel-table`: samples of the convolution kernel or its transform.

use crate::config::{grid, JobConfig};
use crate::output::{fmt_f64, sink, write_csv};
use crate::spectrum::io_error;
use bt_core::harmonic::{phi_h_at, phi_h_hat};
use bt_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Table {
    /// `phi_H(theta, x)` on a torus grid times a real grid.
    Samples,
    /// `phi_hat_H(alpha, xi)` on the frequency box.
    Transform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub torus_points: usize,
    pub x_max: f64,
    pub x_step: f64,
}

pub fn run(cfg: &JobConfig, table: Table, sample_grid: SampleGrid) -> Result<()> {
    let params = cfg.params()?;
    let family = cfg.family()?;
    let lambda = params.lambda();
    let (m, d) = (family.torus_dim(), family.real_dim());
    let (header, rows) = match table {
        Table::Samples => {
            let SampleGrid {
                torus_points,
                x_max,
                x_step,
            } = sample_grid;
            if torus_points == 0 || !torus_points.is_power_of_two() {
                return Err(Error::Config("torus-points must be a power of two".into()));
            }
            if !(x_max >= 0.0 && x_max.is_finite() && x_step > 0.0 && x_step.is_finite()) {
                return Err(Error::Config("real grid needs x-max >= 0 and x-step > 0".into()));
            }
            let axis = grid(-x_max, x_max, x_step);
            let total = torus_points.pow(m as u32) as f64 * (axis.len() as f64).powi(d as i32);
            if total > crate::config::MAX_ROWS as f64 {
                return Err(Error::Config(format!("sample grid has {total} points")));
            }
            let total = total as usize;
            let mut header: Vec<String> = (1..=m).map(|j| format!("theta_{j}")).collect();
            header.extend((1..=d).map(|j| format!("x_{j}")));
            header.extend(["phi_re", "phi_im"].map(String::from));
            let rows = (0..total)
                .map(|mut flat| {
                    let mut x = vec![0.0; d];
                    for v in x.iter_mut().rev() {
                        *v = axis[flat % axis.len()];
                        flat /= axis.len();
                    }
                    let mut th = vec![0.0; m];
                    for v in th.iter_mut().rev() {
                        *v = (flat % torus_points) as f64 / torus_points as f64;
                        flat /= torus_points;
                    }
                    let phi = phi_h_at(&family, &th, &x, lambda);
                    let mut row: Vec<String> = th.iter().chain(&x).map(|&v| fmt_f64(v)).collect();
                    row.push(fmt_f64(phi.re));
                    row.push(fmt_f64(phi.im));
                    row
                })
                .collect();
            (header, rows)
        }
        Table::Transform => {
            let mut header: Vec<String> = (1..=m).map(|j| format!("alpha_{j}")).collect();
            header.extend((1..=d).map(|j| format!("xi_{j}")));
            header.push("phi_hat".into());
            let rows = cfg
                .frequencies()?
                .iter()
                .map(|f| {
                    let v = phi_h_hat(&family, f, lambda)?;
                    let mut row: Vec<String> = f.alpha.iter().map(|a| a.to_string()).collect();
                    row.extend(f.xi.iter().map(|&x| fmt_f64(x)));
                    row.push(fmt_f64(v));
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            (header, rows)
        }
    };
    let out = sink(cfg.out.as_deref()).map_err(io_error)?;
    write_csv(out, &header, &rows).map_err(io_error)
}
