//! Rician block-fading sensing and communication channels.
//!
//! The line-of-sight term is `β·a_rx·a_txᵀ` with a plain transpose. The
//! communication channel of receiver `k` uses the same Rician form with its
//! LoS along the transmitter → receiver bearing, path loss `d_bk^(-ε)` and
//! the same Rician factor. No reflection coefficient applies to the direct link.

use std::fmt::Write as _;

use nalgebra::Complex;
use rand::Rng;

use crate::error::Result;
use crate::linalg::{outer_transpose, CMat, CVec};
use crate::rng::{complex_gaussian_matrix, substream, Purpose, StreamId};
use crate::scalar::{creal, lit, Real};
use crate::scenario::{geometry_summary, steering, GeometrySummary, Layout, ScenarioConfig};

/// Rician factors at or above this are treated as pure line of sight.
pub const LOS_LIMIT_ALPHA: f64 = 1e8;

/// Sensing and communication channels for every receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T: Real> {
    /// `H_b0k`, N_r × N_t.
    pub h_sens: Vec<CMat<T>>,
    /// `H_bk`, N_r × N_t.
    pub h_comm: Vec<CMat<T>>,
    /// Unit-scale LoS part of `h_sens` (`β_k·a_k(φ_k)·a_b(θ)ᵀ`).
    pub los_sens: Vec<CMat<T>>,
}

impl<T: Real> ChannelSet<T> {
    pub fn receivers(&self) -> usize {
        self.h_sens.len()
    }

    /// LoS part as it appears inside `h_sens[k]`, i.e. scaled by `√(ηα/(1+α))`.
    pub fn raw_los(&self, k: usize, geo: &GeometrySummary<T>, alpha: T) -> CMat<T> {
        let (w_los, _) = rician_weights(geo.eta[k], alpha);
        self.los_sens[k].map(|z| z * w_los)
    }

    /// Text dump: one header line per matrix followed by its rows, entries
    /// written as `re+imj`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (name, mats) in [("H_sens", &self.h_sens), ("H_comm", &self.h_comm), ("LOS_sens", &self.los_sens)] {
            for (k, m) in mats.iter().enumerate() {
                let _ = writeln!(out, "{name}[{k}] {} {}", m.nrows(), m.ncols());
                for r in 0..m.nrows() {
                    let row: Vec<String> = (0..m.ncols()).map(|c| format_entry(m[(r, c)])).collect();
                    let _ = writeln!(out, "{}", row.join(" "));
                }
            }
        }
        out
    }
}

fn format_entry<T: Real>(z: Complex<T>) -> String {
    let re = crate::scalar::to_f64(z.re);
    let im = crate::scalar::to_f64(z.im);
    format!("{re:.17e}{}{:.17e}j", if im < 0.0 || (im == 0.0 && im.is_sign_negative()) { "-" } else { "+" }, im.abs())
}

/// `β·a_rx·a_txᵀ`.
pub fn los_component<T: Real>(beta: Complex<T>, a_rx: &CVec<T>, a_tx: &CVec<T>) -> CMat<T> {
    outer_transpose(a_rx, a_tx).map(|z| z * beta)
}

fn rician_weights<T: Real>(eta: T, alpha: T) -> (T, T) {
    if alpha >= lit(LOS_LIMIT_ALPHA) {
        (eta.sqrt(), T::zero())
    } else {
        let denom = T::one() + alpha;
        ((eta * alpha / denom).sqrt(), (eta / denom).sqrt())
    }
}

/// One Rician realization `√(ηα/(1+α))·LoS + √(η/(1+α))·NLoS`.
///
/// The NLoS matrix is always drawn, even in the LoS limit, so the generator
/// advances by the same amount regardless of `alpha`.
pub fn sample_rician<T: Real, R: Rng + ?Sized>(eta: T, alpha: T, los: &CMat<T>, rng: &mut R) -> CMat<T> {
    let (w_los, w_nlos) = rician_weights(eta, alpha);
    let nlos: CMat<T> = complex_gaussian_matrix(rng, los.nrows(), los.ncols(), 1.0);
    los.map(|z| z * w_los) + nlos.map(|z| z * w_nlos)
}

/// Draws every channel from a single generator: sensing then communication
/// for receiver 0, then receiver 1, and so on.
pub fn build_channels<T: Real, R: Rng + ?Sized>(
    cfg: &ScenarioConfig<T>,
    layout: &Layout<T>,
    rng: &mut R,
) -> Result<ChannelSet<T>> {
    let geo = geometry_summary(layout, cfg)?;
    let k = geo.phi.len();
    let mut out = ChannelSet {
        h_sens: Vec::with_capacity(k),
        h_comm: Vec::with_capacity(k),
        los_sens: Vec::with_capacity(k),
    };
    for i in 0..k {
        let (los, hs, hc) = draw_pair(cfg, &geo, i, rng);
        out.los_sens.push(los);
        out.h_sens.push(hs);
        out.h_comm.push(hc);
    }
    Ok(out)
}

/// Draws channels from per-receiver substreams of `seed` for trial `trial`,
/// so the channels of one receiver do not depend on how many others exist.
pub fn build_channels_seeded<T: Real>(
    cfg: &ScenarioConfig<T>,
    geo: &GeometrySummary<T>,
    seed: u64,
    trial: u32,
) -> ChannelSet<T> {
    let k = geo.phi.len();
    let mut out = ChannelSet {
        h_sens: Vec::with_capacity(k),
        h_comm: Vec::with_capacity(k),
        los_sens: Vec::with_capacity(k),
    };
    for i in 0..k {
        let mut r_s = substream(seed, StreamId::new(trial, Purpose::SensingChannel, i as u16));
        let mut r_c = substream(seed, StreamId::new(trial, Purpose::CommChannel, i as u16));
        let (los, hs, hc) = draw_one(cfg, geo, i, &mut r_s, &mut r_c);
        out.los_sens.push(los);
        out.h_sens.push(hs);
        out.h_comm.push(hc);
    }
    out
}

fn draw_pair<T: Real, R: Rng + ?Sized>(
    cfg: &ScenarioConfig<T>,
    geo: &GeometrySummary<T>,
    i: usize,
    rng: &mut R,
) -> (CMat<T>, CMat<T>, CMat<T>) {
    let (los, los_c) = los_pair(cfg, geo, i);
    let alpha = cfg.rician_alpha[i];
    let hs = sample_rician(geo.eta[i], alpha, &los, rng);
    let hc = sample_rician(geo.d_bk[i].powf(-cfg.epsilon), alpha, &los_c, rng);
    (los, hs, hc)
}

fn draw_one<T: Real, R: Rng + ?Sized>(
    cfg: &ScenarioConfig<T>,
    geo: &GeometrySummary<T>,
    i: usize,
    r_s: &mut R,
    r_c: &mut R,
) -> (CMat<T>, CMat<T>, CMat<T>) {
    let (los, los_c) = los_pair(cfg, geo, i);
    let alpha = cfg.rician_alpha[i];
    let hs = sample_rician(geo.eta[i], alpha, &los, r_s);
    let hc = sample_rician(geo.d_bk[i].powf(-cfg.epsilon), alpha, &los_c, r_c);
    (los, hs, hc)
}

fn los_pair<T: Real>(cfg: &ScenarioConfig<T>, geo: &GeometrySummary<T>, i: usize) -> (CMat<T>, CMat<T>) {
    let a_b = steering(geo.theta, cfg.n_t, cfg.spacing, cfg.lambda);
    let a_k = steering(geo.phi[i], cfg.n_r, cfg.spacing, cfg.lambda);
    let los = los_component(cfg.beta[i], &a_k, &a_b);
    // Direct link: departure along ϑ_k, arrival from the reverse bearing.
    let a_bc = steering(geo.vartheta[i], cfg.n_t, cfg.spacing, cfg.lambda);
    let a_kc = steering(geo.vartheta[i] + T::pi(), cfg.n_r, cfg.spacing, cfg.lambda);
    let los_c = los_component(creal(T::one()), &a_kc, &a_bc);
    (los, los_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_sq, singular_values};
    use crate::rng::IsacRng;
    use crate::scalar::cplx;
    use crate::scenario::Point2;
    use rand::SeedableRng;

    fn v(xs: &[(f64, f64)]) -> CVec<f64> {
        CVec::from_iterator(xs.len(), xs.iter().map(|&(r, i)| cplx(r, i)))
    }

    #[test]
    fn los_examples() {
        let ones = v(&[(1.0, 0.0), (1.0, 0.0)]);
        let m = los_component(creal(1.0), &ones, &ones);
        assert!(m.iter().all(|z| *z == cplx(1.0, 0.0)));
        let m = los_component(creal(0.0), &ones, &ones);
        assert!(m.iter().all(|z| z.norm_sqr() == 0.0));
        let m = los_component(creal(0.6), &v(&[(1.0, 0.0), (0.0, 1.0)]), &v(&[(1.0, 0.0), (-1.0, 0.0)]));
        let want = [[cplx(0.6, 0.0), cplx(-0.6, 0.0)], [cplx(0.0, 0.6), cplx(0.0, -0.6)]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((m[(r, c)] - want[r][c]).norm_sqr() < 1e-30);
            }
        }
    }

    #[test]
    fn los_limit() {
        let los = los_component(creal(0.6f64), &steering(0.3, 2, 0.05, 0.1), &steering(-0.7, 3, 0.05, 0.1));
        let mut rng = IsacRng::seed_from_u64(4);
        let h = sample_rician(0.25, 1e8, &los, &mut rng);
        let diff = frobenius_sq(&(h - los.map(|z| z * 0.5))).sqrt();
        assert!(diff / (0.5 * frobenius_sq(&los).sqrt()) < 1e-4);
    }

    fn mean_energy(eta: f64, alpha: f64, los: &CMat<f64>, draws: usize) -> f64 {
        let mut rng = IsacRng::seed_from_u64(11);
        (0..draws).map(|_| frobenius_sq(&sample_rician(eta, alpha, los, &mut rng))).sum::<f64>() / draws as f64
    }

    #[test]
    fn rayleigh_energy() {
        let los = CMat::<f64>::zeros(2, 2);
        let e = mean_energy(1.0, 0.0, &los, 100_000);
        assert!((e - 4.0).abs() / 4.0 < 0.03, "{e}");
    }

    #[test]
    fn rician_energy_and_scaling() {
        let los = los_component(creal(1.0f64), &steering(0.4, 2, 0.05, 0.1), &steering(1.2, 2, 0.05, 0.1));
        assert!((frobenius_sq(&los) - 4.0).abs() < 1e-12);
        let e1 = mean_energy(1.0, 1.0, &los, 100_000);
        assert!((e1 - 4.0).abs() / 4.0 < 0.03, "{e1}");
        let e3 = mean_energy(3.0, 1.0, &los, 100_000);
        assert!((e3 / e1 - 3.0).abs() / 3.0 < 0.03);
    }

    fn preset_layout() -> Layout<f64> {
        let (p_b, p_0) = Layout::preset_anchors();
        let mut rng = IsacRng::seed_from_u64(2);
        Layout::random_annulus(p_b, p_0, 10, 1.0, 100.0, 1e-3, &mut rng)
    }

    #[test]
    fn preset_shapes_and_determinism() {
        let cfg = ScenarioConfig::<f64>::preset();
        let lay = preset_layout();
        let a = build_channels(&cfg, &lay, &mut IsacRng::seed_from_u64(9)).unwrap();
        let b = build_channels(&cfg, &lay, &mut IsacRng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.h_sens.len(), 10);
        assert_eq!(a.h_comm.len(), 10);
        assert!(a.h_sens.iter().chain(&a.h_comm).all(|m| m.shape() == (2, 2)));
        assert_eq!(a.dump(), b.dump());
        for los in &a.los_sens {
            let s = singular_values(los);
            assert!(s[1] < 1e-10 * s[0]);
        }
    }

    #[test]
    fn seeded_is_order_independent() {
        let cfg = ScenarioConfig::<f64>::preset();
        let lay = preset_layout();
        let geo = geometry_summary(&lay, &cfg).unwrap();
        let full = build_channels_seeded(&cfg, &geo, 5, 3);
        let mut small = lay.clone();
        small.p.truncate(4);
        let cfg4 = cfg.with_receivers(4);
        let geo4 = geometry_summary(&small, &cfg4).unwrap();
        let part = build_channels_seeded(&cfg4, &geo4, 5, 3);
        assert_eq!(&full.h_sens[..4], &part.h_sens[..]);
    }

    #[test]
    fn single_receiver_los_limit() {
        let mut cfg = ScenarioConfig::<f64>::preset().with_receivers(1);
        cfg.rician_alpha = vec![1e8];
        let lay = Layout { p_b: Point2::new(0.0, 0.0), p_0: Point2::new(20.0, 40.0), p: vec![Point2::new(20.0, 0.0)] };
        let geo = geometry_summary(&lay, &cfg).unwrap();
        let ch = build_channels(&cfg, &lay, &mut IsacRng::seed_from_u64(1)).unwrap();
        let want = ch.los_sens[0].map(|z| z * geo.eta[0].sqrt());
        assert!(frobenius_sq(&(&ch.h_sens[0] - &want)).sqrt() < 1e-4 * frobenius_sq(&want).sqrt());
        assert_eq!(ch.raw_los(0, &geo, 1e8), want);
    }

    #[test]
    fn dump_format() {
        let s = format_entry(cplx(1.5f64, -0.25));
        assert_eq!(s, "1.50000000000000000e0-2.50000000000000000e-1j");
    }
}
