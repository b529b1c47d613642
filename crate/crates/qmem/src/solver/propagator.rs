//! Discrete marching core shared by the single-mode and two-component
//! solvers.
//!
//! The dynamics is a pair of coupled first-order transport equations: at
//! each eps the optical amplitudes a_j are slaved to the spin wave b by a
//! zeta initial-value sweep,
//!
//! ```text
//! d a_j / d zeta = g_j exp[i (px_j X + rz_j zeta)] b + (i / 4q) d^2 a_j / dX^2
//! ```
//!
//! and the spin wave advances in eps,
//!
//! ```text
//! d b / d eps = - sum_j h_j exp[-i (px_j X + rz_j zeta)] a_j .
//! ```
//!
//! The sweep uses exact Fourier-space propagation of the transverse
//! Laplacian over each d-zeta interval with trapezoidal accumulation of the
//! source; the eps update is trapezoidal with one predictor-corrector
//! iteration. Both directions are second order.
//!
//! [`Propagator::march_adjoint`] is the exact adjoint of the discrete
//! forward map (plain Euclidean inner products): every elementary step is
//! transposed in reverse order, so power iteration on the composed map
//! reproduces dense-matrix singular values to roundoff.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::fft::TransverseFft;
use crate::grid::GridSpec;

/// One coupling channel between an optical component and the spin wave.
#[derive(Debug, Clone, Copy)]
pub struct Channel {
    /// Coupling in the optical equation.
    pub g: Complex64,
    /// Coupling in the spin-wave equation.
    pub h: Complex64,
    /// Transverse phase coefficient (control momentum).
    pub px: f64,
    /// Longitudinal phase coefficient; complex parts describe Stark-type
    /// amplitude modification.
    pub rz: Complex64,
}

impl Channel {
    pub fn real(c: f64, px: f64) -> Self {
        Self { g: Complex64::new(c, 0.0), h: Complex64::new(c, 0.0), px, rz: Complex64::default() }
    }
}

pub struct MarchOutput {
    /// Spin wave at the final eps node.
    pub b: Array2<Complex64>,
    /// Per channel: optical amplitude at the last zeta node, one row per
    /// eps node (consistent sweeps, including the final node).
    pub transmitted: Vec<Array2<Complex64>>,
}

pub struct Propagator {
    grid: GridSpec,
    channels: Vec<Channel>,
    /// Per channel, per (zeta, X): g * exp(+i theta).
    ge: Vec<Array2<Complex64>>,
    /// Per channel, per (zeta, X): h * exp(-i theta).
    he: Vec<Array2<Complex64>>,
    /// Diffraction half of the split step, diagonal in k_x.
    diff: Vec<Complex64>,
    mask: Option<Vec<f64>>,
    fft: Option<TransverseFft>,
}

impl Propagator {
    pub fn new(grid: GridSpec, q: f64, channels: Vec<Channel>, absorbing_mask: bool) -> Self {
        let zetas = grid.zeta_nodes();
        let xs = grid.x_nodes();
        let mut ge = Vec::with_capacity(channels.len());
        let mut he = Vec::with_capacity(channels.len());
        for ch in &channels {
            let mut gph = Array2::zeros((grid.n_zeta, grid.n_x));
            let mut hph = Array2::zeros((grid.n_zeta, grid.n_x));
            for (l, z) in zetas.iter().enumerate() {
                for (m, x) in xs.iter().enumerate() {
                    let theta = Complex64::new(ch.px * x, 0.0) + ch.rz * *z;
                    let i_theta = Complex64::new(0.0, 1.0) * theta;
                    gph[[l, m]] = ch.g * i_theta.exp();
                    hph[[l, m]] = ch.h * (-i_theta).exp();
                }
            }
            ge.push(gph);
            he.push(hph);
        }

        let d_zeta = grid.d_zeta();
        let diff = grid
            .kx_nodes()
            .iter()
            .map(|k| (Complex64::new(0.0, -k * k * d_zeta / (4.0 * q))).exp())
            .collect();

        let mask = if absorbing_mask && !grid.is_1d() {
            let xh = grid.x_half_width;
            Some(
                grid.x_nodes()
                    .iter()
                    .map(|x| {
                        let edge = 0.8 * xh;
                        if x.abs() <= edge {
                            1.0
                        } else {
                            let s = (x.abs() - edge) / (xh - edge);
                            (std::f64::consts::FRAC_PI_2 * s.min(1.0)).cos().powi(2)
                        }
                    })
                    .collect(),
            )
        } else {
            None
        };

        let fft = if grid.is_1d() { None } else { Some(TransverseFft::new(grid.n_x)) };

        Self { grid, channels, ge, he, diff, mask, fft }
    }

    fn apply_diffraction(&self, row: &mut [Complex64], adjoint: bool) {
        let Some(fft) = &self.fft else { return };
        fft.forward(row);
        for (v, d) in row.iter_mut().zip(self.diff.iter()) {
            *v *= if adjoint { d.conj() } else { *d };
        }
        fft.inverse(row);
    }

    fn apply_mask(&self, row: &mut [Complex64]) {
        if let Some(mask) = &self.mask {
            for (v, m) in row.iter_mut().zip(mask.iter()) {
                *v *= *m;
            }
        }
    }

    /// zeta sweep of all optical channels for a fixed spin wave `b` and
    /// per-channel boundary rows at zeta = 0. Returns the full (zeta, X)
    /// optical profiles.
    fn sweep(&self, b: &Array2<Complex64>, boundary: &[Array1<Complex64>]) -> Vec<Array2<Complex64>> {
        let (nz, nx) = (self.grid.n_zeta, self.grid.n_x);
        let half_dz = 0.5 * self.grid.d_zeta();
        let mut out = Vec::with_capacity(self.channels.len());
        let mut row = vec![Complex64::default(); nx];
        for (c, ge) in self.ge.iter().enumerate() {
            let mut a = Array2::zeros((nz, nx));
            a.row_mut(0).assign(&boundary[c]);
            for l in 0..nz - 1 {
                for m in 0..nx {
                    row[m] = a[[l, m]] + half_dz * ge[[l, m]] * b[[l, m]];
                }
                self.apply_diffraction(&mut row, false);
                for m in 0..nx {
                    row[m] += half_dz * ge[[l + 1, m]] * b[[l + 1, m]];
                }
                self.apply_mask(&mut row);
                for m in 0..nx {
                    a[[l + 1, m]] = row[m];
                }
            }
            out.push(a);
        }
        out
    }

    /// Adjoint of [`Propagator::sweep`]: consumes cotangents of the full
    /// optical profiles and returns (cotangent of b, per-channel cotangent
    /// of the boundary row).
    fn sweep_adjoint(
        &self,
        abars: &mut [Array2<Complex64>],
    ) -> (Array2<Complex64>, Vec<Array1<Complex64>>) {
        let (nz, nx) = (self.grid.n_zeta, self.grid.n_x);
        let half_dz = 0.5 * self.grid.d_zeta();
        let mut bbar = Array2::zeros((nz, nx));
        let mut fbars = Vec::with_capacity(self.channels.len());
        let mut t = vec![Complex64::default(); nx];
        for (c, ge) in self.ge.iter().enumerate() {
            let abar = &mut abars[c];
            for l in (0..nz - 1).rev() {
                for m in 0..nx {
                    t[m] = abar[[l + 1, m]];
                }
                self.apply_mask(&mut t);
                for m in 0..nx {
                    bbar[[l + 1, m]] += half_dz * ge[[l + 1, m]].conj() * t[m];
                }
                self.apply_diffraction(&mut t, true);
                for m in 0..nx {
                    abar[[l, m]] += t[m];
                    bbar[[l, m]] += half_dz * ge[[l, m]].conj() * t[m];
                }
            }
            fbars.push(abar.row(0).to_owned());
        }
        (bbar, fbars)
    }

    /// March the coupled system over eps in [0, 1].
    ///
    /// `b0` is the spin wave at eps = 0; `inputs[c]` holds the zeta = 0
    /// boundary row of channel c at each eps node (zero for retrieval).
    pub fn march(&self, b0: &Array2<Complex64>, inputs: &[Array2<Complex64>]) -> MarchOutput {
        let (ne, nz, nx) = (self.grid.n_eps, self.grid.n_zeta, self.grid.n_x);
        assert_eq!(inputs.len(), self.channels.len());
        let d_eps = self.grid.d_eps();
        let mut b = b0.clone();
        let mut transmitted = vec![Array2::zeros((ne, nx)); self.channels.len()];

        let boundary_rows = |k: usize| -> Vec<Array1<Complex64>> {
            inputs.iter().map(|f| f.row(k).to_owned()).collect()
        };

        for k in 0..ne - 1 {
            let a_k = self.sweep(&b, &boundary_rows(k));
            for (c, a) in a_k.iter().enumerate() {
                transmitted[c].row_mut(k).assign(&a.row(nz - 1));
            }
            // predictor
            let mut bstar = b.clone();
            for (c, a) in a_k.iter().enumerate() {
                let he = &self.he[c];
                for l in 0..nz {
                    for m in 0..nx {
                        bstar[[l, m]] -= d_eps * he[[l, m]] * a[[l, m]];
                    }
                }
            }
            let a_star = self.sweep(&bstar, &boundary_rows(k + 1));
            // corrector
            for c in 0..self.channels.len() {
                let he = &self.he[c];
                let (a0, a1) = (&a_k[c], &a_star[c]);
                for l in 0..nz {
                    for m in 0..nx {
                        b[[l, m]] -= 0.5 * d_eps * he[[l, m]] * (a0[[l, m]] + a1[[l, m]]);
                    }
                }
            }
        }
        let a_final = self.sweep(&b, &boundary_rows(ne - 1));
        for (c, a) in a_final.iter().enumerate() {
            transmitted[c].row_mut(ne - 1).assign(&a.row(nz - 1));
        }
        MarchOutput { b, transmitted }
    }

    /// Exact adjoint of [`Propagator::march`] with respect to the plain
    /// Euclidean inner products: maps cotangents of (final spin wave,
    /// transmitted rows) to cotangents of (initial spin wave, inputs).
    pub fn march_adjoint(
        &self,
        bbar_final: &Array2<Complex64>,
        trans_bars: &[Array2<Complex64>],
    ) -> (Array2<Complex64>, Vec<Array2<Complex64>>) {
        let (ne, nz, nx) = (self.grid.n_eps, self.grid.n_zeta, self.grid.n_x);
        let nch = self.channels.len();
        let d_eps = self.grid.d_eps();
        let mut bbar = bbar_final.clone();
        let mut inbars = vec![Array2::zeros((ne, nx)); nch];

        // final consistent sweep
        {
            let mut abars: Vec<Array2<Complex64>> =
                (0..nch).map(|_| Array2::zeros((nz, nx))).collect();
            for (c, ab) in abars.iter_mut().enumerate() {
                ab.row_mut(nz - 1).assign(&trans_bars[c].row(ne - 1));
            }
            let (db, fb) = self.sweep_adjoint(&mut abars);
            bbar += &db;
            for (c, f) in fb.into_iter().enumerate() {
                inbars[c].row_mut(ne - 1).assign(&f);
            }
        }

        for k in (0..ne - 1).rev() {
            // corrector: cotangents of a_k and a_star
            let mut tbars: Vec<Array2<Complex64>> = Vec::with_capacity(nch);
            for he in &self.he {
                let mut t = Array2::zeros((nz, nx));
                for l in 0..nz {
                    for m in 0..nx {
                        t[[l, m]] = -0.5 * d_eps * he[[l, m]].conj() * bbar[[l, m]];
                    }
                }
                tbars.push(t);
            }
            // predictor sweep adjoint
            let mut astar_bars: Vec<Array2<Complex64>> = tbars.clone();
            let (bstar_bar, fb_next) = self.sweep_adjoint(&mut astar_bars);
            for (c, f) in fb_next.into_iter().enumerate() {
                let mut row = inbars[c].row_mut(k + 1);
                row += &f;
            }
            // cotangent of a_k: corrector term + predictor b* term + recording
            let mut ak_bars = tbars;
            for (c, ab) in ak_bars.iter_mut().enumerate() {
                let he = &self.he[c];
                for l in 0..nz {
                    for m in 0..nx {
                        ab[[l, m]] -= d_eps * he[[l, m]].conj() * bstar_bar[[l, m]];
                    }
                }
                let mut last = ab.row_mut(nz - 1);
                last += &trans_bars[c].row(k);
            }
            let (b_from_a, fb_k) = self.sweep_adjoint(&mut ak_bars);
            for (c, f) in fb_k.into_iter().enumerate() {
                let mut row = inbars[c].row_mut(k);
                row += &f;
            }
            bbar += &bstar_bar;
            bbar += &b_from_a;
        }
        (bbar, inbars)
    }
}
