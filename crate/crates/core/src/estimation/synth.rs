//! Sampled received blocks: delayed, Doppler-rotated transmit samples through
//! the sensing channel plus clutter and noise.

use rand::Rng;

use crate::channel::ChannelSet;
use crate::error::{IsacError, Result};
use crate::linalg::CMat;
use crate::rng::complex_gaussian_matrix;
use crate::scalar::{cis, cnt, lit, to_f64, Real};
use crate::scenario::ScenarioConfig;
use crate::transmit::BeamformerSet;

/// Integer delay (samples) and normalized Doppler (cycles/sample).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayDoppler<T> {
    pub tau: usize,
    pub f: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledBlock<T: Real> {
    /// Received samples per receiver, `N_r × M`.
    pub y: Vec<CMat<T>>,
    /// Known sensing symbols, `L × M`.
    pub s0: CMat<T>,
}

/// Draws one block. Every stream carries i.i.d. unit-variance circular
/// Gaussian symbols, one per sample; `x[m] = Σ_i W_i s_i[m]` and samples
/// before the start of the block are zero. Draw order: sensing symbols,
/// communication symbols by receiver, then clutter and noise by receiver.
pub fn synthesize_block<T: Real, R: Rng + ?Sized>(
    cfg: &ScenarioConfig<T>,
    channels: &ChannelSet<T>,
    w: &BeamformerSet<T>,
    truth: &[DelayDoppler<T>],
    rng: &mut R,
) -> Result<SampledBlock<T>> {
    let k = channels.h_sens.len();
    if truth.len() != k || w.receivers() != k {
        return Err(IsacError::DimensionMismatch(format!(
            "{} truths / {} beam sets for {k} receivers",
            truth.len(),
            w.receivers()
        )));
    }
    let m = cfg.m;
    for (i, t) in truth.iter().enumerate() {
        if t.tau > m / 4 {
            return Err(IsacError::config("tau", format!("receiver {i}: delay {} exceeds M/4 = {}", t.tau, m / 4)));
        }
        if !(t.f.abs() < lit(0.5)) {
            return Err(IsacError::config("f", format!("receiver {i}: |Doppler| must be below 0.5 cycles/sample")));
        }
    }
    let l = w.w[0].ncols();
    let symbols: Vec<CMat<T>> = w.w.iter().map(|_| complex_gaussian_matrix(rng, l, m, 1.0)).collect();
    let x = w
        .w
        .iter()
        .zip(&symbols)
        .fold(CMat::zeros(cfg.n_t, m), |acc, (wi, si)| acc + wi * si);
    let mut y = Vec::with_capacity(k);
    for (i, t) in truth.iter().enumerate() {
        let hx = &channels.h_sens[i] * &x;
        let mut yk: CMat<T> = complex_gaussian_matrix(rng, cfg.n_r, m, to_f64(cfg.sigma_c2));
        yk += complex_gaussian_matrix::<T, R>(rng, cfg.n_r, m, to_f64(cfg.sigma_z2));
        for col in t.tau..m {
            let rot = cis(T::two_pi() * t.f * cnt(col));
            for r in 0..cfg.n_r {
                yk[(r, col)] += hx[(r, col - t.tau)] * rot;
            }
        }
        y.push(yk);
    }
    Ok(SampledBlock { y, s0: symbols.into_iter().next().expect("sensing stream") })
}
