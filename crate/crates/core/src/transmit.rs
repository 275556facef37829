//! Transmit beamformers and their Gram (covariance) lifting.
//!
//! Index 0 is the sensing beam `W_0`; index `k + 1` serves receiver `k`.

use crate::linalg::{hermitian_eigen, trace_re, CMat};
use crate::scalar::{cnt, Real};

/// Beamformers `W_0..W_K`, each N_t × L.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet<T: Real> {
    pub w: Vec<CMat<T>>,
}

/// Gram matrices `Q_i = W_i W_iᴴ`, each N_t × N_t.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSet<T: Real> {
    pub q: Vec<CMat<T>>,
}

impl<T: Real> BeamformerSet<T> {
    pub fn zeros(k: usize, n_t: usize, l: usize) -> Self {
        Self { w: vec![CMat::zeros(n_t, l); k + 1] }
    }

    /// Equal power per beam, each beam using the first `l` antennas as streams.
    pub fn uniform(k: usize, n_t: usize, l: usize, p_t: T) -> Self {
        let amp = (p_t / cnt::<T>((k + 1) * l)).sqrt();
        let mut w = CMat::zeros(n_t, l);
        for i in 0..l.min(n_t) {
            w[(i, i)] = crate::scalar::creal(amp);
        }
        Self { w: vec![w; k + 1] }
    }

    pub fn grams(&self) -> GramSet<T> {
        GramSet { q: self.w.iter().map(|w| w * w.adjoint()).collect() }
    }

    pub fn total_power(&self) -> T {
        self.w.iter().fold(T::zero(), |acc, w| acc + crate::linalg::frobenius_sq(w))
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { w: self.w.iter().map(|w| w.map(|z| z * s)).collect() }
    }

    pub fn receivers(&self) -> usize {
        self.w.len().saturating_sub(1)
    }

    /// Every stream column of every beam, in beam order.
    pub fn columns(&self) -> Vec<crate::linalg::CVec<T>> {
        self.w
            .iter()
            .flat_map(|w| (0..w.ncols()).map(move |c| w.column(c).into_owned()))
            .collect()
    }
}

impl<T: Real> GramSet<T> {
    pub fn zeros(k: usize, n_t: usize) -> Self {
        Self { q: vec![CMat::zeros(n_t, n_t); k + 1] }
    }

    /// `Q_i = P/((K+1)·N_t)·I` for every beam.
    pub fn uniform(k: usize, n_t: usize, p_t: T) -> Self {
        let s = p_t / cnt::<T>((k + 1) * n_t);
        Self { q: vec![crate::linalg::scaled_identity(n_t, s); k + 1] }
    }

    pub fn n_t(&self) -> usize {
        self.q.first().map_or(0, |q| q.nrows())
    }

    pub fn receivers(&self) -> usize {
        self.q.len().saturating_sub(1)
    }

    /// `Σ_i Q_i`.
    pub fn sum(&self) -> CMat<T> {
        let n = self.n_t();
        self.q.iter().fold(CMat::zeros(n, n), |acc, q| acc + q)
    }

    pub fn total_power(&self) -> T {
        self.q.iter().fold(T::zero(), |acc, q| acc + trace_re(q))
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { q: self.q.iter().map(|q| q.map(|z| z * s)).collect() }
    }

    /// Largest `rank` eigen-directions of every Gram, scaled by the square
    /// root of their eigenvalues (negative eigenvalues clipped to zero).
    pub fn factor(&self, rank: usize) -> BeamformerSet<T> {
        let w = self
            .q
            .iter()
            .map(|q| {
                let (vals, vecs) = hermitian_eigen(q);
                let mut w = CMat::zeros(q.nrows(), rank);
                for c in 0..rank.min(vals.len()) {
                    let s = vals[c].max(T::zero()).sqrt();
                    for r in 0..q.nrows() {
                        w[(r, c)] = vecs[(r, c)] * s;
                    }
                }
                w
            })
            .collect();
        BeamformerSet { w }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_sets_spend_the_budget() {
        let b = BeamformerSet::<f64>::uniform(3, 4, 2, 2.0);
        assert!((b.total_power() - 2.0).abs() < 1e-12);
        let g = GramSet::<f64>::uniform(3, 4, 2.0);
        assert!((g.total_power() - 2.0).abs() < 1e-12);
        assert!((b.grams().total_power() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn factor_round_trips_full_rank() {
        let g = GramSet::<f64>::uniform(1, 2, 1.0);
        let back = g.factor(2).grams();
        for (a, b) in g.q.iter().zip(&back.q) {
            assert!(crate::linalg::frobenius(&(a - b)) < 1e-12);
        }
    }
}
