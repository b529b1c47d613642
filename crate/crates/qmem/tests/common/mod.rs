//! Shared helpers for the integration tests: an independent dense-matrix
//! singular-value oracle built on a hand-rolled complex Hermitian Jacobi
//! eigensolver (no reuse of the library's power iteration).
#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;

use qmem::grid::GridSpec;
use qmem::modes::{assemble_dense_map, map_weights, MapKind};
use qmem::params::MemoryParams;

/// Eigenvalues of a complex Hermitian matrix by cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(mut h: Array2<Complex64>) -> Vec<f64> {
    let n = h.nrows();
    assert_eq!(n, h.ncols());
    for _ in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += h[[p, q]].norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = h[[p, q]];
                if b.norm() < 1e-300 {
                    continue;
                }
                let phi = b.arg();
                let theta = 0.5 * (-2.0 * b.norm()).atan2(h[[p, p]].re - h[[q, q]].re);
                let (s, c) = theta.sin_cos();
                let e = Complex64::from_polar(1.0, phi);
                // unitary: u_pp = c, u_pq = s, u_qp = -s e^{-i phi}, u_qq = c e^{-i phi}
                let (upp, upq) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
                let (uqp, uqq) = (-s * e.conj(), c * e.conj());
                for k in 0..n {
                    let (hp, hq) = (h[[k, p]], h[[k, q]]);
                    h[[k, p]] = hp * upp + hq * uqp;
                    h[[k, q]] = hp * upq + hq * uqq;
                }
                for k in 0..n {
                    let (hp, hq) = (h[[p, k]], h[[q, k]]);
                    h[[p, k]] = upp.conj() * hp + uqp.conj() * hq;
                    h[[q, k]] = upq.conj() * hp + uqq.conj() * hq;
                }
            }
        }
    }
    (0..n).map(|i| h[[i, i]].re).collect()
}

/// All singular values (descending) of the quadrature-weighted map
/// W_out^{1/2} A W_in^{-1/2}, via Jacobi eigenvalues of B^H B.
pub fn dense_singular_values(
    params: &MemoryParams,
    grid: &GridSpec,
    kind: MapKind,
) -> Vec<f64> {
    let a = assemble_dense_map(params, grid, kind).unwrap();
    let (w_in, w_out) = map_weights(grid, kind);
    let (n_out, n_in) = a.dim();
    let mut b = Array2::zeros((n_out, n_in));
    for i in 0..n_out {
        for j in 0..n_in {
            b[[i, j]] = a[[i, j]] * (w_out[i].sqrt() / w_in[j].sqrt());
        }
    }
    let mut gram = Array2::zeros((n_in, n_in));
    for i in 0..n_in {
        for j in 0..n_in {
            let mut acc = Complex64::default();
            for k in 0..n_out {
                acc += b[[k, i]].conj() * b[[k, j]];
            }
            gram[[i, j]] = acc;
        }
    }
    let mut eigs = hermitian_eigenvalues(gram);
    eigs.sort_by(f64::total_cmp);
    eigs.iter().rev().map(|l| l.max(0.0).sqrt()).collect()
}
