//! Thin wrapper around rustfft for transforms along the transverse axis.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward/inverse FFT pair for one transverse size.
pub struct TransverseFft {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl TransverseFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Self { n, fwd, inv }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// In-place forward transform of a contiguous row.
    pub fn forward(&self, row: &mut [Complex64]) {
        debug_assert_eq!(row.len(), self.n);
        self.fwd.process(row);
    }

    /// In-place inverse transform of a contiguous row, normalized by 1/n.
    pub fn inverse(&self, row: &mut [Complex64]) {
        debug_assert_eq!(row.len(), self.n);
        self.inv.process(row);
        let s = 1.0 / self.n as f64;
        for v in row.iter_mut() {
            *v *= s;
        }
    }

    /// Transverse power spectrum of each row of `data` (rows indexed by the
    /// longitudinal axis, columns by X). Returned in FFT ordering, scaled so
    /// that the spectrum of a unit-norm row sums to the row's squared norm
    /// under the grid's quadrature.
    pub fn row_spectra(&self, data: &Array2<Complex64>) -> Array2<f64> {
        let (nr, nc) = data.dim();
        debug_assert_eq!(nc, self.n);
        let mut out = Array2::zeros((nr, nc));
        let mut buf = vec![Complex64::default(); nc];
        for (i, row) in data.outer_iter().enumerate() {
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = *v;
            }
            self.fwd.process(&mut buf);
            let s = 1.0 / nc as f64;
            for (j, v) in buf.iter().enumerate() {
                out[[i, j]] = v.norm_sqr() * s * s;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_round_trip() {
        let fft = TransverseFft::new(16);
        let orig: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new(i as f64, -(i as f64) * 0.5))
            .collect();
        let mut row = orig.clone();
        fft.forward(&mut row);
        fft.inverse(&mut row);
        for (a, b) in row.iter().zip(orig.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_spectrum_is_a_single_bin() {
        let n = 32;
        let fft = TransverseFft::new(n);
        let mut data = Array2::zeros((1, n));
        for m in 0..n {
            let phase = 2.0 * std::f64::consts::PI * 3.0 * m as f64 / n as f64;
            data[[0, m]] = Complex64::from_polar(1.0, phase);
        }
        let spec = fft.row_spectra(&data);
        let peak = (0..n).max_by(|&a, &b| spec[[0, a]].total_cmp(&spec[[0, b]])).unwrap();
        assert_eq!(peak, 3);
    }
}
