//! Small dense complex-matrix helpers. Everything here operates on matrices no
//! larger than the antenna counts, so naive O(n^3) routines are plenty.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CVec = Array1<Complex64>;
pub type CMat = Array2<Complex64>;

/// Conjugate transpose.
pub fn hermitian(a: &CMat) -> CMat {
    let (m, n) = a.dim();
    CMat::from_shape_fn((n, m), |(i, j)| a[(j, i)].conj())
}

/// Outer product u * v^H.
pub fn outer(u: &CVec, v: &CVec) -> CMat {
    CMat::from_shape_fn((u.len(), v.len()), |(i, j)| u[i] * v[j].conj())
}

/// Inner product u^H * v (conjugate on the first argument).
pub fn inner(u: &CVec, v: &CVec) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Plain (unconjugated) dot product of two vectors.
pub fn dot_unconj(u: &CVec, v: &CVec) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}

pub fn norm2(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Maximum absolute column sum, used for cheap condition estimates.
pub fn one_norm(a: &CMat) -> f64 {
    let (m, n) = a.dim();
    (0..n)
        .map(|j| (0..m).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Invert a square matrix by Gauss-Jordan elimination with partial pivoting.
/// Returns the inverse together with the 1-norm condition estimate
/// ||A||_1 * ||A^-1||_1. Exactly singular pivots give an infinite estimate.
pub fn invert_with_condition(a: &CMat) -> Result<(CMat, f64)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!(
            "cannot invert a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let norm_a = one_norm(a);
    let mut work = a.clone();
    let mut inv = CMat::eye(n);

    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, work[(r, col)].norm()))
            .fold((col, 0.0), |best, cand| if cand.1 > best.1 { cand } else { best });
        if pivot_mag == 0.0 {
            return Ok((inv, f64::INFINITY));
        }
        if pivot_row != col {
            for j in 0..n {
                work.swap((pivot_row, j), (col, j));
                inv.swap((pivot_row, j), (col, j));
            }
        }
        let piv = work[(col, col)];
        for j in 0..n {
            work[(col, j)] /= piv;
            inv[(col, j)] /= piv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = work[(r, col)];
            if factor == Complex64::ZERO {
                continue;
            }
            for j in 0..n {
                let wcj = work[(col, j)];
                let icj = inv[(col, j)];
                work[(r, j)] -= factor * wcj;
                inv[(r, j)] -= factor * icj;
            }
        }
    }

    let cond = norm_a * one_norm(&inv);
    Ok((inv, cond))
}
