//! Monte-Carlo error of the matched-filter estimates against the CRB.

use crate::error::{IsacError, Result};
use crate::problem::IsacProblem;
use crate::rng::{substream, Purpose, StreamId};
use crate::scalar::{cnt, to_f64, Real};
use crate::scenario::{true_delay, true_doppler, DopplerMode};
use crate::transmit::BeamformerSet;

use super::matched::{matched_filter, DelayDopplerGrid};
use super::synth::{synthesize_block, DelayDoppler};

pub const MIN_MSE_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseReport<T> {
    /// Mean over trials of `Σ_{k∈G} [(τ̂_k−τ_k)² + (f̂_k−f_k)²]`, delay in
    /// seconds and Doppler in cycles/sample (the CRB's coordinates).
    pub mse: T,
    pub std_err: T,
    pub crb: T,
    pub trials: usize,
}

/// Delays rounded to whole samples and exact Doppler normalized by `Δt`.
pub fn physical_truth<T: Real>(problem: &IsacProblem<T>) -> Result<Vec<DelayDoppler<T>>> {
    let cfg = &problem.cfg;
    let g = &problem.geo;
    (0..problem.receivers())
        .map(|k| {
            let tau = true_delay(g.d_b0, g.d_0k[k])? / cfg.delta_t;
            let f = true_doppler(g.theta, g.phi[k], cfg.v, cfg.f0, DopplerMode::Exact) * cfg.delta_t;
            let tau = to_f64(tau).round();
            if tau > (cfg.m / 4) as f64 {
                return Err(IsacError::config("m", format!("receiver {k}: delay of {tau} samples exceeds M/4")));
            }
            Ok(DelayDoppler { tau: tau as usize, f })
        })
        .collect()
}

/// Runs `trials` blocks with fresh symbols, clutter and noise (substream
/// `(trial, Symbols, 0)` of `seed`) and compares the matched-filter error of
/// the selected receivers with the CRB of `(b, W)`.
pub fn mse_harness<T: Real>(
    problem: &IsacProblem<T>,
    w: &BeamformerSet<T>,
    b: &[bool],
    truth: &[DelayDoppler<T>],
    trials: usize,
    grid: &DelayDopplerGrid,
    seed: u64,
) -> Result<MseReport<T>> {
    if trials < MIN_MSE_TRIALS {
        return Err(IsacError::config("trials", format!("at least {MIN_MSE_TRIALS} trials are needed, got {trials}")));
    }
    let crb = problem.crb(b, &w.grams())?.crb;
    let dt = problem.cfg.delta_t;
    let mut samples = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = substream(seed, StreamId::new(trial as u32, Purpose::Symbols, 0));
        let block = synthesize_block(&problem.cfg, &problem.channels, w, truth, &mut rng)?;
        let mut err = T::zero();
        for k in (0..b.len()).filter(|&k| b[k]) {
            let est = matched_filter(&block.y[k], &block.s0, grid)?;
            let dtau = (cnt::<T>(est.tau_hat) - cnt::<T>(truth[k].tau)) * dt;
            let df = est.f_hat - truth[k].f;
            err += dtau * dtau + df * df;
        }
        samples.push(err);
    }
    let n = cnt::<T>(trials);
    let mse = samples.iter().fold(T::zero(), |a, &x| a + x) / n;
    let var = samples.iter().fold(T::zero(), |a, &x| a + (x - mse) * (x - mse)) / (n - T::one());
    Ok(MseReport { mse, std_err: (var / n).sqrt(), crb, trials })
}
