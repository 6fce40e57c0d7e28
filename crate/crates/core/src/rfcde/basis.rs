//! Orthonormal cosine basis on `[0, 1]` and its tensor product on `[0, 1]^2`.

use std::f64::consts::{PI, SQRT_2};

/// `phi_0(u) = 1`, `phi_j(u) = sqrt(2) cos(j pi u)` for `j = 1..n`, written
/// into `out[..n]`.
pub fn cosine(u: f64, out: &mut [f64]) {
    for (j, v) in out.iter_mut().enumerate() {
        *v = if j == 0 {
            1.0
        } else {
            SQRT_2 * (j as f64 * PI * u).cos()
        };
    }
}

/// Number of basis functions for a response of dimension `dim`.
pub fn basis_len(n_basis: usize, dim: usize) -> usize {
    n_basis.pow(dim as u32)
}

/// Evaluates the (tensor) basis at a rescaled response `u` (`u.len()` is the
/// response dimension, 1 or 2). `out` must hold `basis_len(n_basis, u.len())`
/// values; the 2D layout is `out[j * n_basis + k] = phi_j(u0) phi_k(u1)`.
pub fn evaluate(u: &[f64], n_basis: usize, out: &mut [f64]) {
    match u.len() {
        1 => cosine(u[0], out),
        2 => {
            let mut a = vec![0.0; n_basis];
            let mut b = vec![0.0; n_basis];
            cosine(u[0], &mut a);
            cosine(u[1], &mut b);
            for (j, aj) in a.iter().enumerate() {
                for (k, bk) in b.iter().enumerate() {
                    out[j * n_basis + k] = aj * bk;
                }
            }
        }
        d => panic!("unsupported response dimension {d}"),
    }
}
