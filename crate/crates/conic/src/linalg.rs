//! Dense complex linear-algebra helpers shared by the solvers and callers.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// `(M + M^H) / 2`.
pub fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

/// Real inner product `Re Tr(A^H B)`.
pub fn inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `Re Tr(A B)` without forming the product.
pub fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

pub fn trace(m: &DMatrix<C64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order; column `i` of the returned matrix pairs with value `i`.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = hermitize(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Largest eigenvalue and a unit eigenvector for it.
pub fn leading_eigenpair(m: &DMatrix<C64>) -> (f64, DVector<C64>) {
    let (values, vectors) = hermitian_eigen(m);
    (values[0], vectors.column(0).into_owned())
}

pub fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let eig = hermitize(m).symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Real symmetric matrix `S` with `a^H M a = x^T S x` for `x = [Re a; Im a]`.
pub fn real_form(m: &DMatrix<C64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let h = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            s[(i, j)] = h.re;
            s[(n + i, n + j)] = h.re;
            s[(i, n + j)] = -h.im;
            s[(n + i, j)] = h.im;
        }
    }
    s
}

/// `[Re v; Im v]`.
pub fn to_real(v: &DVector<C64>) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// Inverse of [`to_real`].
pub fn from_real(x: &DVector<f64>) -> DVector<C64> {
    let n = x.len() / 2;
    DVector::from_fn(n, |i, _| C64::new(x[i], x[n + i]))
}

/// `v v^H`.
pub fn outer(v: &DVector<C64>) -> DMatrix<C64> {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_form_reproduces_hermitian_quadratic() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.5, -1.0),
                C64::new(0.5, 1.0),
                C64::new(3.0, 0.0),
            ],
        );
        let a = DVector::from_vec(vec![C64::new(1.0, -2.0), C64::new(0.3, 0.7)]);
        let direct = (a.adjoint() * &m * &a)[(0, 0)].re;
        let x = to_real(&a);
        let lifted = (x.transpose() * real_form(&m) * &x)[(0, 0)];
        assert!((direct - lifted).abs() < 1e-12);
        assert_eq!(from_real(&x), a);
    }

    #[test]
    fn eigen_sorted_descending() {
        let v = DVector::from_vec(vec![C64::new(1.0, 1.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.0)]);
        let m = outer(&v);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - v.norm_squared()).abs() < 1e-12);
        assert!(vals[1].abs() < 1e-12 && vals[2].abs() < 1e-12);
        let u = vecs.column(0);
        let overlap = (u.adjoint() * &v)[(0, 0)].norm();
        assert!((overlap - v.norm()).abs() < 1e-10);
    }
}
