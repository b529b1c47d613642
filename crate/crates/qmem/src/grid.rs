//! Discretization of the dimensionless coordinates.
//!
//! The longitudinal coordinate `zeta` and the integrated-pulse coordinate
//! `eps` both live on the fixed interval [0, 1]; the transverse coordinate
//! `X` lives on a periodic interval `[-x_half_width, x_half_width)`.
//! Setting `n_x = 1` selects the purely longitudinal model with the
//! transverse Laplacian disabled.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{QmemError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_eps: usize,
    pub n_zeta: usize,
    pub n_x: usize,
    pub x_half_width: f64,
}

impl GridSpec {
    pub fn new(n_eps: usize, n_zeta: usize, n_x: usize, x_half_width: f64) -> Result<Self> {
        if n_eps < 2 || n_zeta < 2 {
            return Err(QmemError::Grid(format!(
                "need at least 2 points along eps and zeta, got {n_eps} x {n_zeta}"
            )));
        }
        if n_x < 1 {
            return Err(QmemError::Grid("n_x must be at least 1".into()));
        }
        if n_x > 1 && !(x_half_width > 0.0) {
            return Err(QmemError::Grid(format!(
                "x_half_width must be positive when n_x > 1, got {x_half_width}"
            )));
        }
        Ok(Self { n_eps, n_zeta, n_x, x_half_width })
    }

    /// Purely longitudinal grid (no transverse dimension).
    pub fn new_1d(n_eps: usize, n_zeta: usize) -> Result<Self> {
        Self::new(n_eps, n_zeta, 1, 1.0)
    }

    pub fn is_1d(&self) -> bool {
        self.n_x == 1
    }

    pub fn d_eps(&self) -> f64 {
        1.0 / (self.n_eps - 1) as f64
    }

    pub fn d_zeta(&self) -> f64 {
        1.0 / (self.n_zeta - 1) as f64
    }

    /// Transverse spacing. For the 1D model this is a unit weight so that
    /// norms reduce to single-axis integrals.
    pub fn d_x(&self) -> f64 {
        if self.n_x == 1 {
            1.0
        } else {
            2.0 * self.x_half_width / self.n_x as f64
        }
    }

    pub fn eps_nodes(&self) -> Vec<f64> {
        let d = self.d_eps();
        (0..self.n_eps).map(|i| i as f64 * d).collect()
    }

    pub fn zeta_nodes(&self) -> Vec<f64> {
        let d = self.d_zeta();
        (0..self.n_zeta).map(|i| i as f64 * d).collect()
    }

    /// Transverse nodes, periodic convention (no duplicate endpoint).
    pub fn x_nodes(&self) -> Vec<f64> {
        if self.n_x == 1 {
            return vec![0.0];
        }
        let d = self.d_x();
        (0..self.n_x)
            .map(|m| -self.x_half_width + m as f64 * d)
            .collect()
    }

    /// Transverse wavenumbers in FFT ordering.
    pub fn kx_nodes(&self) -> Vec<f64> {
        if self.n_x == 1 {
            return vec![0.0];
        }
        let n = self.n_x;
        let dk = 2.0 * PI / (n as f64 * self.d_x());
        (0..n)
            .map(|m| {
                let s = if m <= n / 2 { m as isize } else { m as isize - n as isize };
                s as f64 * dk
            })
            .collect()
    }

    pub fn d_kx(&self) -> f64 {
        2.0 * PI / (self.n_x as f64 * self.d_x())
    }

    /// Trapezoidal quadrature weights along eps.
    pub fn eps_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.n_eps, self.d_eps())
    }

    /// Trapezoidal quadrature weights along zeta.
    pub fn zeta_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.n_zeta, self.d_zeta())
    }

    /// Same grid refined by an integer factor along eps and zeta (node
    /// counts map n -> (n-1)*factor + 1 so the endpoints are shared).
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_eps: (self.n_eps - 1) * factor + 1,
            n_zeta: (self.n_zeta - 1) * factor + 1,
            n_x: self.n_x,
            x_half_width: self.x_half_width,
        }
    }
}

fn trapezoid_weights(n: usize, d: f64) -> Vec<f64> {
    (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * d } else { d })
        .collect()
}
