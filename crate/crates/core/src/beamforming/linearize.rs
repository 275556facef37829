//! First-order inner approximation of the rate constraints.
//!
//! `R_k = logdet(σ²I + H·S_A·Hᴴ) − logdet(σ²I + H·S_I·Hᴴ)` (natural log,
//! divided by ln 2), where `S_A` sums the Grams receiver `k` hears and `S_I`
//! the ones that interfere with it. Replacing the concave second term by its
//! tangent at `Q̄` gives a concave lower bound that is exact at `Q̄`.

use crate::error::{IsacError, Result};
use crate::linalg::{hermitize, inv_hpd, logdet_hpd, scaled_identity, trace_prod_re, CMat};
use crate::scalar::{lit, Real};
use crate::transmit::GramSet;

/// Linearized rate constraint `value(Q) ≥ 0` of receiver `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedRate<T: Real> {
    pub k: usize,
    /// Receiver cooperates in sensing, so the sensing beam does not interfere.
    pub b_k: bool,
    pub h: CMat<T>,
    pub sigma2: T,
    /// `Hᴴ Ψ̄⁻¹ H`.
    pub g_bar: CMat<T>,
    /// `[logdet Ψ̄ − Tr(Ḡ·S̄_I)]/ln2 + R_th`.
    pub offset: T,
}

impl<T: Real> LinearizedRate<T> {
    /// Whether Gram `i` (0 = sensing) is heard by receiver `k`.
    pub fn hears(&self, i: usize) -> bool {
        i != 0 || !self.b_k
    }

    /// Whether Gram `i` interferes with receiver `k`.
    pub fn interferes(&self, i: usize) -> bool {
        self.hears(i) && i != self.k + 1
    }

    fn sum_over(&self, q: &[CMat<T>], pick: impl Fn(usize) -> bool) -> CMat<T> {
        let n = self.h.ncols();
        q.iter()
            .enumerate()
            .filter(|(i, _)| pick(*i))
            .fold(CMat::zeros(n, n), |acc, (_, x)| acc + x)
    }

    /// `σ²I + H·S_A·Hᴴ`.
    pub fn heard_cov(&self, q: &[CMat<T>]) -> CMat<T> {
        let s = self.sum_over(q, |i| self.hears(i));
        hermitize(&(scaled_identity(self.h.nrows(), self.sigma2) + &self.h * s * self.h.adjoint()))
    }

    /// Constraint value, or `None` if the heard covariance is not positive definite.
    pub fn value(&self, q: &[CMat<T>]) -> Option<T> {
        let ln2 = lit::<T>(2f64.ln());
        let ld = logdet_hpd(&self.heard_cov(q))?;
        let s_i = self.sum_over(q, |i| self.interferes(i));
        Some((ld - trace_prod_re(&self.g_bar, &s_i)) / ln2 - self.offset)
    }

    /// `Hᴴ M⁻¹ H` with `M` the heard covariance; the gradient block of the
    /// log-det term for every heard Gram.
    pub fn heard_gradient(&self, q: &[CMat<T>]) -> Option<CMat<T>> {
        let m_inv = inv_hpd(&self.heard_cov(q))?;
        Some(hermitize(&(self.h.adjoint() * m_inv * &self.h)))
    }
}

/// Linearizes receiver `k`'s rate constraint at `q_bar`.
pub fn sca_linearize<T: Real>(
    k: usize,
    b_k: bool,
    q_bar: &GramSet<T>,
    h: &CMat<T>,
    sigma2: T,
    r_th: T,
) -> Result<LinearizedRate<T>> {
    let mut lin = LinearizedRate {
        k,
        b_k,
        h: h.clone(),
        sigma2,
        g_bar: CMat::zeros(h.ncols(), h.ncols()),
        offset: T::zero(),
    };
    let s_i = lin.sum_over(&q_bar.q, |i| lin.interferes(i));
    let psi = hermitize(&(scaled_identity(h.nrows(), sigma2) + h * &s_i * h.adjoint()));
    let psi_inv = inv_hpd(&psi).ok_or(IsacError::SingularCovariance(k))?;
    let ld = logdet_hpd(&psi).ok_or(IsacError::SingularCovariance(k))?;
    lin.g_bar = hermitize(&(h.adjoint() * psi_inv * h));
    lin.offset = (ld - trace_prod_re(&lin.g_bar, &s_i)) / lit::<T>(2f64.ln()) + r_th;
    Ok(lin)
}
