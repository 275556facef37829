//! Finite-difference Fisher information, used to check the closed form.
//!
//! The mean of one pulse interval is modelled as
//! `μ(u) = H·w·g(u − τ)·exp(j2π f̃ u/Δt)` for local time `u ∈ [0, Δt]`,
//! sampled at `S` midpoints with weight `1/S` each (a Riemann sum of
//! `(1/Δt)∫ du`). Symbol statistics are handled exactly by summing over the
//! stream columns `w` of every beam; the `M` pulses contribute identically.
//! Channels are averaged by Monte Carlo.

use nalgebra::{Complex, Matrix2};
use rand::Rng;

use crate::channel::sample_rician;
use crate::linalg::CMat;
use crate::metrics::pulse::PulseShape;
use crate::error::Result;
use crate::scalar::{cis, cnt, lit, Real};
use crate::scenario::ScenarioConfig;
use crate::transmit::BeamformerSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Channel realizations to average.
    pub draws: usize,
    /// Finite-difference step in normalized units (fraction of Δt for the
    /// delay, cycles per sample for the Doppler).
    pub step: f64,
    /// Midpoint samples per pulse.
    pub subsamples: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { draws: 1000, step: 1e-4, subsamples: 256 }
    }
}

/// Oracle FIM of one receiver with path loss `eta`, Rician factor `alpha`
/// and unit-scale LoS `los`.
pub fn numerical_fim_oracle<T: Real, R: Rng + ?Sized>(
    cfg: &ScenarioConfig<T>,
    eta: T,
    alpha: T,
    los: &CMat<T>,
    w: &BeamformerSet<T>,
    opts: &OracleOptions,
    rng: &mut R,
) -> Result<Matrix2<T>> {
    let g = PulseShape::new(cfg.pulse, cfg.delta_t)?;
    let dt = cfg.delta_t;
    let s = opts.subsamples.max(1);
    let h_tau = dt * lit(opts.step);
    let h_f: T = lit(opts.step);
    let two_pi = T::two_pi();

    // Waveform at the four perturbed parameter points for every sub-sample.
    let wave = |u: T, tau: T, f: T| -> Complex<T> { cis(two_pi * f * u / dt) * g.value(u - tau) };
    let mut d_tau = Vec::with_capacity(s);
    let mut d_f = Vec::with_capacity(s);
    for j in 0..s {
        let u = dt * (cnt::<T>(j) + lit(0.5)) / cnt::<T>(s);
        d_tau.push((wave(u, h_tau, T::zero()), wave(u, -h_tau, T::zero())));
        d_f.push((wave(u, T::zero(), h_f), wave(u, T::zero(), -h_f)));
    }

    let cols = w.columns();
    let draws = opts.draws.max(1);
    let (mut a, mut b, mut c) = (T::zero(), T::zero(), T::zero());
    for _ in 0..draws {
        let h = sample_rician(eta, alpha, los, rng);
        for col in &cols {
            let hw = &h * col;
            for j in 0..s {
                let (tp, tm) = d_tau[j];
                let (fp, fm) = d_f[j];
                let mut tt = T::zero();
                let mut ff = T::zero();
                let mut tf = T::zero();
                for r in 0..hw.len() {
                    let x = hw[r];
                    let dmu_t = (x * tp - x * tm).unscale(h_tau + h_tau);
                    let dmu_f = (x * fp - x * fm).unscale(h_f + h_f);
                    tt += dmu_t.norm_sqr();
                    ff += dmu_f.norm_sqr();
                    tf += (dmu_t.conj() * dmu_f).re;
                }
                a += tt;
                b += tf;
                c += ff;
            }
        }
    }
    let scale = lit::<T>(2.0) * cnt::<T>(cfg.m) / (cfg.sensing_noise() * cnt::<T>(s) * cnt::<T>(draws));
    Ok(Matrix2::new(a * scale, b * scale, b * scale, c * scale))
}
