//! Thin bridge to the dense linear-algebra backend.
//!
//! faer is built without its thread pool, so every factorization here is
//! single-threaded and bitwise reproducible.

use faer::{Mat, MatRef, Side};
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn to_faer(a: &Array2<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_faer(m: MatRef<'_, Complex64>) -> Array2<Complex64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

fn failed(what: &str, e: impl std::fmt::Debug) -> Error {
    Error::DecompositionFailed(format!("{what}: {e:?}"))
}

/// Thin SVD `a = U diag(s) V^H`, singular values in nonincreasing order.
pub(crate) struct Svd {
    pub s: Vec<f64>,
    pub u: Array2<Complex64>,
    pub v: Array2<Complex64>,
}

pub(crate) fn thin_svd(a: &Mat<Complex64>) -> Result<Svd> {
    let svd = a.thin_svd().map_err(|e| failed("svd", e))?;
    let diag = svd.S().column_vector();
    let k = diag.nrows();
    let s_raw: Vec<f64> = (0..k).map(|i| diag[i].re).collect();
    let u_raw = from_faer(svd.U());
    let v_raw = from_faer(svd.V());
    let order = descending_order(&s_raw);
    let s = order.iter().map(|&i| s_raw[i]).collect();
    let u = Array2::from_shape_fn((u_raw.nrows(), k), |(r, c)| u_raw[[r, order[c]]]);
    let v = Array2::from_shape_fn((v_raw.nrows(), k), |(r, c)| v_raw[[r, order[c]]]);
    Ok(Svd { s, u, v })
}

pub(crate) fn singular_values(a: &Mat<Complex64>) -> Result<Vec<f64>> {
    let mut s = a.singular_values().map_err(|e| failed("singular values", e))?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Eigenvalues of a Hermitian matrix, descending.
pub(crate) fn hermitian_eigenvalues(a: &Mat<Complex64>) -> Result<Vec<f64>> {
    let mut s = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| failed("eigenvalues", e))?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Eigenpairs of a small Hermitian matrix, eigenvalues ascending.
pub(crate) fn hermitian_eigen(a: &Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    let evd = to_faer(a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| failed("eigendecomposition", e))?;
    let n = a.nrows();
    let diag = evd.S().column_vector();
    let vals: Vec<f64> = (0..n).map(|i| diag[i].re).collect();
    let vecs = from_faer(evd.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted = order.iter().map(|&i| vals[i]).collect();
    let vecs = Array2::from_shape_fn((n, n), |(r, c)| vecs[[r, order[c]]]);
    Ok((sorted, vecs))
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable: equal values keep the backend's order
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    order
}
