//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};

use crate::scalar::{lit, Real};

pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

/// Real part of the trace.
pub fn trace_re<T: Real>(m: &CMat<T>) -> T {
    (0..m.nrows().min(m.ncols())).fold(T::zero(), |acc, i| acc + m[(i, i)].re)
}

/// `Re Tr(A B)` without forming the product.
pub fn trace_prod_re<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    let mut acc = T::zero();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let x = a[(i, j)] * b[(j, i)];
            acc += x.re;
        }
    }
    acc
}

/// `(M + Mᴴ)/2`.
pub fn hermitize<T: Real>(m: &CMat<T>) -> CMat<T> {
    let half = lit::<T>(0.5);
    (m + m.adjoint()).map(|z| z * half)
}

pub fn frobenius_sq<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

pub fn frobenius<T: Real>(m: &CMat<T>) -> T {
    frobenius_sq(m).sqrt()
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

pub fn scaled_identity<T: Real>(n: usize, s: T) -> CMat<T> {
    CMat::from_diagonal_element(n, n, Complex::new(s, T::zero()))
}

pub fn scale<T: Real>(m: &CMat<T>, s: T) -> CMat<T> {
    m.map(|z| z * s)
}

/// Natural-log determinant of a Hermitian positive-definite matrix, or `None`
/// when the Cholesky factorisation fails.
pub fn logdet_hpd<T: Real>(m: &CMat<T>) -> Option<T> {
    let chol = hermitize(m).cholesky()?;
    let l = chol.l_dirty();
    let mut acc = T::zero();
    for i in 0..l.nrows() {
        let z = l[(i, i)];
        // Complex Cholesky happily takes square roots of negative pivots.
        if z.re <= T::zero() || !z.re.is_finite() || z.im.abs() > z.re * lit(1e-8) {
            return None;
        }
        acc += z.re.ln();
    }
    Some(acc + acc)
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn inv_hpd<T: Real>(m: &CMat<T>) -> Option<CMat<T>> {
    logdet_hpd(m)?;
    let chol = hermitize(m).cholesky()?;
    Some(hermitize(&chol.inverse()))
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order; eigenvector `i` is column `i`.
pub fn hermitian_eigen<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let n = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max<T: Real>(m: &CMat<T>) -> T {
    hermitian_eigen(m).0.first().copied().unwrap_or_else(T::zero)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min<T: Real>(m: &CMat<T>) -> T {
    hermitian_eigen(m).0.last().copied().unwrap_or_else(T::zero)
}

/// `a bᵀ` (plain transpose).
pub fn outer_transpose<T: Real>(a: &CVec<T>, b: &CVec<T>) -> CMat<T> {
    a * b.transpose()
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(m: &CMat<T>) -> Vec<T> {
    let mut s: Vec<T> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn logdet_matches_product_of_eigenvalues() {
        let m = CMat::<f64>::from_row_slice(
            2,
            2,
            &[cplx(3.0, 0.0), cplx(1.0, 1.0), cplx(1.0, -1.0), cplx(2.0, 0.0)],
        );
        // det = 6 - 2 = 4
        assert!((logdet_hpd(&m).unwrap() - 4f64.ln()).abs() < 1e-12);
        let inv = inv_hpd(&m).unwrap();
        let id = &m * &inv;
        assert!((frobenius(&(id - identity::<f64>(2)))) < 1e-12);
    }

    #[test]
    fn eigen_sorted_descending() {
        let m = CMat::<f64>::from_diagonal(&CVec::from_vec(vec![
            cplx(1.0, 0.0),
            cplx(3.0, 0.0),
            cplx(2.0, 0.0),
        ]));
        let (vals, vecs) = hermitian_eigen(&m);
        assert_eq!(vals, vec![3.0, 2.0, 1.0]);
        assert!((vecs[(1, 0)].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn not_positive_definite() {
        let m = scaled_identity::<f64>(2, -1.0);
        assert!(logdet_hpd(&m).is_none());
    }
}
