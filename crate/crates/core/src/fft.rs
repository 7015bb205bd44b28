//! Multidimensional discrete Fourier transforms on uniform torus grids.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Plans for a fixed grid shape (row-major, last axis fastest).
#[derive(Clone)]
pub(crate) struct GridFft {
    dims: Vec<usize>,
    plans: Vec<Arc<dyn Fft<f64>>>,
}

impl GridFft {
    pub fn forward(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let plans = dims.iter().map(|&d| planner.plan_fft_forward(d)).collect();
        Self { dims: dims.to_vec(), plans }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    /// In-place unnormalized transform along every axis.
    pub fn process(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        let total = data.len();
        let mut stride = 1;
        for axis in (0..self.dims.len()).rev() {
            let d = self.dims[axis];
            if d > 1 {
                let plan = &self.plans[axis];
                let mut line = vec![Complex64::new(0.0, 0.0); d];
                let block = stride * d;
                for start in (0..total).step_by(block) {
                    for off in 0..stride {
                        for (j, v) in line.iter_mut().enumerate() {
                            *v = data[start + off + j * stride];
                        }
                        plan.process(&mut line);
                        for (j, v) in line.iter().enumerate() {
                            data[start + off + j * stride] = *v;
                        }
                    }
                }
            }
            stride *= d;
        }
    }
}

/// Flat index of a (possibly negative) frequency on the grid, reduced mod each axis.
pub(crate) fn wrapped_index(freq: &[i64], dims: &[usize]) -> usize {
    let mut idx = 0;
    for (&k, &d) in freq.iter().zip(dims) {
        idx = idx * d + k.rem_euclid(d as i64) as usize;
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn recovers_single_mode() {
        let dims = [8, 4];
        let mut data: Vec<Complex64> = (0..32)
            .map(|i| {
                let (a, b) = ((i / 4) as f64, (i % 4) as f64);
                Complex64::from_polar(1.0, 2.0 * PI * (3.0 * a / 8.0 - b / 4.0))
            })
            .collect();
        GridFft::forward(&dims).process(&mut data);
        let hit = wrapped_index(&[3, -1], &dims);
        for (i, v) in data.iter().enumerate() {
            let expected = if i == hit { 32.0 } else { 0.0 };
            assert!((v.re - expected).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }
}
