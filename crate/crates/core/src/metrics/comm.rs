//! Achievable rates, interference covariances and cooperation cost.

use crate::error::{IsacError, Result};
use crate::linalg::{hermitize, identity, inv_hpd, logdet_hpd, scaled_identity, CMat};
use crate::scalar::{lit, Real};
use crate::scenario::{cooperation_price, Layout};
use crate::transmit::GramSet;

/// Interference-plus-noise covariance `Ψ_k` seen by receiver `k`: noise, the
/// other communication beams, and the sensing beam unless `k` cooperates in
/// sensing (`b_k = true`) and can cancel it.
pub fn interference_cov<T: Real>(k: usize, b_k: bool, grams: &GramSet<T>, h: &CMat<T>, sigma2: T) -> CMat<T> {
    let mut psi = scaled_identity(h.nrows(), sigma2);
    for (i, q) in grams.q.iter().enumerate() {
        let skip = i == k + 1 || (i == 0 && b_k);
        if !skip {
            psi += h * q * h.adjoint();
        }
    }
    hermitize(&psi)
}

/// `log₂det(I + Ψ_k⁻¹ H Q_k Hᴴ)`, equal to `log₂det(I + W_kᴴHᴴΨ_k⁻¹HW_k)`.
pub fn rate<T: Real>(k: usize, b: &[bool], grams: &GramSet<T>, h_comm: &[CMat<T>], sigma2: T) -> Result<T> {
    let h = &h_comm[k];
    let psi = interference_cov(k, b[k], grams, h, sigma2);
    let signal = h * &grams.q[k + 1] * h.adjoint();
    let ld_psi = logdet_hpd(&psi).ok_or(IsacError::SingularCovariance(k))?;
    let ld_all = logdet_hpd(&(psi + signal)).ok_or(IsacError::SingularCovariance(k))?;
    Ok(((ld_all - ld_psi) / lit::<T>(2f64.ln())).max(T::zero()))
}

/// Rates of every receiver.
pub fn rates<T: Real>(b: &[bool], grams: &GramSet<T>, h_comm: &[CMat<T>], sigma2: T) -> Result<Vec<T>> {
    (0..h_comm.len()).map(|k| rate(k, b, grams, h_comm, sigma2)).collect()
}

/// Rate through the whitened form `log₂det(I + Ψ^{-1/2} H Q Hᴴ Ψ^{-1/2})`
/// computed with an explicit inverse; used to cross-check [`rate`].
pub fn rate_via_inverse<T: Real>(k: usize, b: &[bool], grams: &GramSet<T>, h_comm: &[CMat<T>], sigma2: T) -> Result<T> {
    let h = &h_comm[k];
    let psi = interference_cov(k, b[k], grams, h, sigma2);
    let inv = inv_hpd(&psi).ok_or(IsacError::SingularCovariance(k))?;
    let m = identity(h.nrows()) + inv * h * &grams.q[k + 1] * h.adjoint();
    // det of a product of PD matrices is real and positive.
    let d = m.determinant();
    Ok(d.re.ln() / lit::<T>(2f64.ln()))
}

/// `Ω = Σ_k b_k υ_k` with `prices` indexed by receiver.
pub fn cooperation_cost<T: Real>(b: &[bool], prices: &[T]) -> T {
    b.iter()
        .zip(prices)
        .filter(|(sel, _)| **sel)
        .fold(T::zero(), |acc, (_, &p)| acc + p)
}

/// Cost of a selection, pricing each member against the selected group.
/// An empty selection costs nothing.
pub fn group_cost<T: Real>(layout: &Layout<T>, b: &[bool], rho: T) -> Result<T> {
    let group: Vec<usize> = (0..b.len()).filter(|&k| b[k]).collect();
    if group.is_empty() {
        return Ok(T::zero());
    }
    let prices = cooperation_price(layout, &group, rho)?;
    Ok(prices.into_iter().fold(T::zero(), |a, p| a + p))
}
