//! Real coordinates for Hermitian matrices in an orthonormal basis.
//!
//! Order: the `n` diagonal entries, then for every `i < j` the pair
//! `√2·Re X_ij`, `√2·Im X_ij`. With this basis `⟨X, Y⟩ = Re Tr(XY)` is the
//! Euclidean inner product of the coordinate vectors.

use nalgebra::{Complex, DMatrix};

use crate::linalg::CMat;
use crate::scalar::{lit, Real};

pub fn dim(n: usize) -> usize {
    n * n
}

/// Coordinates of a Hermitian matrix (only the upper triangle is read).
pub fn to_coords<T: Real>(x: &CMat<T>, out: &mut [T]) {
    let n = x.nrows();
    let r2 = lit::<T>(2.0).sqrt();
    for i in 0..n {
        out[i] = x[(i, i)].re;
    }
    let mut p = n;
    for i in 0..n {
        for j in (i + 1)..n {
            out[p] = r2 * x[(i, j)].re;
            out[p + 1] = r2 * x[(i, j)].im;
            p += 2;
        }
    }
}

pub fn coords_of<T: Real>(x: &CMat<T>) -> Vec<T> {
    let mut v = vec![T::zero(); dim(x.nrows())];
    to_coords(x, &mut v);
    v
}

pub fn from_coords<T: Real>(v: &[T], n: usize) -> CMat<T> {
    let inv_r2 = T::one() / lit::<T>(2.0).sqrt();
    let mut x = CMat::zeros(n, n);
    for i in 0..n {
        x[(i, i)] = Complex::new(v[i], T::zero());
    }
    let mut p = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = Complex::new(v[p] * inv_r2, v[p + 1] * inv_r2);
            x[(i, j)] = z;
            x[(j, i)] = z.conj();
            p += 2;
        }
    }
    x
}

/// Matrix of the congruence `X ↦ A X A` (A Hermitian) in coordinates, so that
/// `xᵀ·T(A)·y = Re Tr(A X A Y)`. For A ≻ 0, `T(A)⁻¹ = T(A⁻¹)`.
pub fn congruence<T: Real>(a: &CMat<T>) -> DMatrix<T> {
    let n = a.nrows();
    let d = dim(n);
    let r2 = lit::<T>(2.0).sqrt();
    let inv_r2 = T::one() / r2;
    let mut t = DMatrix::zeros(d, d);
    // Column q holds the coordinates of A E_q A; entry (r, s) of that matrix
    // equals A_ri A_js for E = e_ij.
    let basis = basis_pairs(n);
    for (q, &(i, j, kind)) in basis.iter().enumerate() {
        let entry = |r: usize, s: usize| -> Complex<T> {
            match kind {
                Kind::Diag => a[(r, i)] * a[(i, s)],
                Kind::Re => (a[(r, i)] * a[(j, s)] + a[(r, j)] * a[(i, s)]).scale(inv_r2),
                Kind::Im => {
                    let z = a[(r, i)] * a[(j, s)] - a[(r, j)] * a[(i, s)];
                    Complex::new(-z.im, z.re).scale(inv_r2)
                }
            }
        };
        for (p, &(r, s, pk)) in basis.iter().enumerate() {
            t[(p, q)] = match pk {
                Kind::Diag => entry(r, r).re,
                Kind::Re => r2 * entry(r, s).re,
                Kind::Im => r2 * entry(r, s).im,
            };
        }
    }
    t
}

#[derive(Clone, Copy)]
enum Kind {
    Diag,
    Re,
    Im,
}

fn basis_pairs(n: usize) -> Vec<(usize, usize, Kind)> {
    let mut out: Vec<(usize, usize, Kind)> = (0..n).map(|i| (i, i, Kind::Diag)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((i, j, Kind::Re));
            out.push((i, j, Kind::Im));
        }
    }
    out
}
