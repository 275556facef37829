//! Closed-form delay/Doppler Fisher information and its CRB.
//!
//! Entries are ordered (delay, Doppler). The delay coordinate is the delay in
//! seconds and the Doppler coordinate is the normalized shift `f·Δt`.

use nalgebra::Matrix2;

use crate::channel::ChannelSet;
use crate::error::{IsacError, Result};
use crate::linalg::{trace_prod_re, trace_re, CMat};
use crate::metrics::pulse::PulseIntegrals;
use crate::scalar::{cnt, lit, to_f64, Real};
use crate::scenario::{GeometrySummary, ScenarioConfig};
use crate::transmit::GramSet;

/// Denominators at or below this are reported as a singular FIM.
pub const SINGULAR_FIM_FLOOR: f64 = 1e-30;

/// Per-receiver FIM scale factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FimConstants<T> {
    pub iota: Vec<T>,
    pub chi: Vec<T>,
    pub varsigma: Vec<T>,
    pub kappa1: T,
    pub kappa2: T,
}

impl<T: Real> FimConstants<T> {
    pub fn new(cfg: &ScenarioConfig<T>, geo: &GeometrySummary<T>, pulse: &PulseIntegrals<T>) -> Self {
        let pi = T::pi();
        let b = cfg.bandwidth;
        let m = cnt::<T>(cfg.m);
        let noise = cfg.sensing_noise();
        let mut out = Self {
            iota: Vec::with_capacity(geo.eta.len()),
            chi: Vec::with_capacity(geo.eta.len()),
            varsigma: Vec::with_capacity(geo.eta.len()),
            kappa1: pulse.kappa1,
            kappa2: pulse.kappa2,
        };
        for (k, &eta) in geo.eta.iter().enumerate() {
            let s = m * eta / ((T::one() + cfg.rician_alpha[k]) * noise);
            out.iota.push(lit::<T>(4.0) * b * pulse.f_g * s);
            out.chi.push(lit::<T>(64.0) * pi * pi * b * b * b * pulse.f_tg * s);
            out.varsigma.push(lit::<T>(16.0) * pi * b * b * pulse.f_tgdot * s);
        }
        out
    }

    pub fn receivers(&self) -> usize {
        self.iota.len()
    }

    /// Constants for a subset of receivers, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            iota: idx.iter().map(|&i| self.iota[i]).collect(),
            chi: idx.iter().map(|&i| self.chi[i]).collect(),
            varsigma: idx.iter().map(|&i| self.varsigma[i]).collect(),
            kappa1: self.kappa1,
            kappa2: self.kappa2,
        }
    }

    /// Closed-form FIM of receiver `k` for a given Υ.
    pub fn fim(&self, k: usize, upsilon: T) -> Matrix2<T> {
        Matrix2::new(
            self.iota[k] * upsilon,
            self.varsigma[k] * upsilon,
            self.varsigma[k] * upsilon,
            self.chi[k] * upsilon,
        )
    }
}

/// `Υ_k = α_k·Tr(LᴴL·S) + N_r·Tr(S)` for the summed Gram `S = Σ Q_i`.
pub fn upsilon<T: Real>(gram_sum: &CMat<T>, los_k: &CMat<T>, alpha_k: T, n_r: usize) -> T {
    let lhl = los_k.adjoint() * los_k;
    alpha_k * trace_prod_re(&lhl, gram_sum) + cnt::<T>(n_r) * trace_re(gram_sum)
}

/// Υ_k for every receiver.
pub fn upsilon_all<T: Real>(grams: &GramSet<T>, channels: &ChannelSet<T>, cfg: &ScenarioConfig<T>) -> Vec<T> {
    let s = grams.sum();
    channels
        .los_sens
        .iter()
        .zip(&cfg.rician_alpha)
        .map(|(los, &a)| upsilon(&s, los, a, cfg.n_r))
        .collect()
}

/// FIM, CRB and the Υ values they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CrbReport<T: Real> {
    /// `Σ b_k J_k`.
    pub fim: Matrix2<T>,
    /// Trace of the inverse FIM.
    pub crb: T,
    /// `(1+κ1)/((κ1−κ2²)·Σ b_k χ_k Υ_k)`, equal to `crb` when all receivers
    /// share one pulse.
    pub crb_identity: T,
    pub upsilon: Vec<T>,
}

/// CRB of the selected receivers from precomputed Υ values.
pub fn crb_from_upsilon<T: Real>(b: &[bool], upsilon: &[T], consts: &FimConstants<T>) -> Result<CrbReport<T>> {
    if b.len() != consts.receivers() || upsilon.len() != consts.receivers() {
        return Err(IsacError::DimensionMismatch(format!(
            "selection {} / upsilon {} / constants {}",
            b.len(),
            upsilon.len(),
            consts.receivers()
        )));
    }
    if !b.iter().any(|&x| x) {
        return Err(IsacError::EmptyGroup);
    }
    let (mut sx, mut si, mut ss) = (T::zero(), T::zero(), T::zero());
    for k in (0..b.len()).filter(|&k| b[k]) {
        sx += consts.chi[k] * upsilon[k];
        si += consts.iota[k] * upsilon[k];
        ss += consts.varsigma[k] * upsilon[k];
    }
    let det = sx * si - ss * ss;
    if !(det > lit(SINGULAR_FIM_FLOOR)) {
        return Err(IsacError::SingularFim { denominator: to_f64(det) });
    }
    let k1 = consts.kappa1;
    let k2 = consts.kappa2;
    Ok(CrbReport {
        fim: Matrix2::new(si, ss, ss, sx),
        crb: (sx + si) / det,
        crb_identity: (T::one() + k1) / ((k1 - k2 * k2) * sx),
        upsilon: upsilon.to_vec(),
    })
}

/// CRB of the selected receivers for Gram set `grams`.
pub fn crb<T: Real>(
    b: &[bool],
    grams: &GramSet<T>,
    consts: &FimConstants<T>,
    channels: &ChannelSet<T>,
    cfg: &ScenarioConfig<T>,
) -> Result<CrbReport<T>> {
    crb_from_upsilon(b, &upsilon_all(grams, channels, cfg), consts)
}
