#![allow(dead_code)]

use isac_core::linalg::CMat;
use isac_core::problem::IsacProblem;
use isac_core::rng::{complex_gaussian_matrix, substream, IsacRng, Purpose, StreamId};
use isac_core::scenario::{Layout, ScenarioConfig};
use isac_core::transmit::GramSet;
use rand::Rng;

pub fn instance_rng(seed: u64, i: u32) -> IsacRng {
    substream(seed, StreamId::new(i, Purpose::Instance, 0))
}

/// Preset scenario with `k` receivers placed in the default annulus.
pub fn problem(k: usize, r_th: f64, seed: u64, trial: u32) -> IsacProblem<f64> {
    let mut cfg = ScenarioConfig::preset().with_receivers(k);
    cfg.r_th = r_th;
    let (p_b, p_0) = Layout::preset_anchors();
    let mut rng = substream(seed, StreamId::new(trial, Purpose::Placement, 0));
    let layout = Layout::random_annulus(p_b, p_0, k, 1.0, 100.0, 1e-3, &mut rng);
    IsacProblem::sample(cfg, layout, seed, trial).unwrap()
}

/// Random instance with varied sizes, Rician factors and power.
pub fn random_problem(rng: &mut IsacRng, seed: u64, trial: u32) -> IsacProblem<f64> {
    let k = rng.random_range(1..=8);
    let mut cfg = ScenarioConfig::preset().with_receivers(k);
    cfg.n_t = rng.random_range(1..=4);
    cfg.n_r = rng.random_range(1..=4);
    cfg.l = 1;
    cfg.rician_alpha = (0..k).map(|_| 10f64.powf(rng.random_range(-2.0..3.0))).collect();
    cfg.p_t = 10f64.powf(rng.random_range(-2.0..1.0));
    let (p_b, p_0) = Layout::preset_anchors();
    let layout = Layout::random_annulus(p_b, p_0, k, 1.0, 100.0, 1e-3, rng);
    IsacProblem::sample(cfg, layout, seed, trial).unwrap()
}

/// Random positive semidefinite Grams scaled to total power `p_t`.
pub fn random_grams(rng: &mut IsacRng, k: usize, n_t: usize, p_t: f64) -> GramSet<f64> {
    let q: Vec<CMat<f64>> = (0..=k)
        .map(|_| {
            let rank = rng.random_range(1..=n_t);
            let a: CMat<f64> = complex_gaussian_matrix(rng, n_t, rank, 1.0);
            &a * a.adjoint()
        })
        .collect();
    let g = GramSet { q };
    let s = p_t / g.total_power();
    g.scaled(s)
}
