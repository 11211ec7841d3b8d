//! Orthonormal type-II discrete cosine transform.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

/// Forward transform matrix `C` with `C[k, i] = s_k cos(π(2i+1)k / 2n)`.
/// It is orthogonal, so the inverse transform is `Cᵀ`.
pub fn dct_matrix(n: usize) -> DMatrix<f64> {
    assert!(n >= 1, "DCT length must be positive");
    let nf = n as f64;
    DMatrix::from_fn(n, n, |k, i| {
        let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        scale * (PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos()
    })
}

pub fn dct_forward(x: &DVector<f64>) -> DVector<f64> {
    dct_matrix(x.len()) * x
}

pub fn dct_inverse(theta: &DVector<f64>) -> DVector<f64> {
    dct_matrix(theta.len()).tr_mul(theta)
}
