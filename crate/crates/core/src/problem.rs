//! One fully specified scenario instance: configuration, layout, derived
//! geometry, channels and FIM constants.

use crate::channel::{build_channels_seeded, ChannelSet};
use crate::error::Result;
use crate::metrics::{crb_from_upsilon, pulse_integrals, rates, upsilon_all, CrbReport, FimConstants, PulseIntegrals};
use crate::metrics::comm::group_cost;
use crate::scalar::Real;
use crate::scenario::{geometry_summary, GeometrySummary, Layout, ScenarioConfig};
use crate::transmit::GramSet;

#[derive(Debug, Clone)]
pub struct IsacProblem<T: Real> {
    pub cfg: ScenarioConfig<T>,
    pub layout: Layout<T>,
    pub geo: GeometrySummary<T>,
    pub channels: ChannelSet<T>,
    pub pulse: PulseIntegrals<T>,
    pub consts: FimConstants<T>,
}

/// Rates, cost and CRB of a selection under fixed Grams.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T: Real> {
    pub rates: Vec<T>,
    pub cost: T,
    /// `None` when the FIM is singular.
    pub crb: Option<CrbReport<T>>,
}

impl<T: Real> Evaluation<T> {
    pub fn min_rate(&self) -> T {
        self.rates.iter().copied().fold(T::max_value().unwrap_or_else(T::one), |a, r| a.min(r))
    }

    pub fn feasible(&self, r_th: T, omega_th: T) -> bool {
        self.crb.is_some() && self.cost <= omega_th && self.rates.iter().all(|&r| r >= r_th)
    }
}

impl<T: Real> IsacProblem<T> {
    pub fn new(cfg: ScenarioConfig<T>, layout: Layout<T>, channels: ChannelSet<T>) -> Result<Self> {
        cfg.validate()?;
        let geo = geometry_summary(&layout, &cfg)?;
        let pulse = pulse_integrals(cfg.pulse, cfg.delta_t, cfg.bandwidth)?;
        let consts = FimConstants::new(&cfg, &geo, &pulse);
        Ok(Self { cfg, layout, geo, channels, pulse, consts })
    }

    /// Channels drawn from the per-receiver substreams of `seed` for `trial`.
    pub fn sample(cfg: ScenarioConfig<T>, layout: Layout<T>, seed: u64, trial: u32) -> Result<Self> {
        cfg.validate()?;
        let geo = geometry_summary(&layout, &cfg)?;
        let channels = build_channels_seeded(&cfg, &geo, seed, trial);
        Self::new(cfg, layout, channels)
    }

    pub fn receivers(&self) -> usize {
        self.layout.p.len()
    }

    pub fn selection(&self, group: &[usize]) -> Vec<bool> {
        let mut b = vec![false; self.receivers()];
        for &k in group {
            b[k] = true;
        }
        b
    }

    pub fn upsilon(&self, grams: &GramSet<T>) -> Vec<T> {
        upsilon_all(grams, &self.channels, &self.cfg)
    }

    pub fn crb(&self, b: &[bool], grams: &GramSet<T>) -> Result<CrbReport<T>> {
        crb_from_upsilon(b, &self.upsilon(grams), &self.consts)
    }

    pub fn rates(&self, b: &[bool], grams: &GramSet<T>) -> Result<Vec<T>> {
        rates(b, grams, &self.channels.h_comm, self.cfg.sigma2)
    }

    pub fn cost(&self, b: &[bool]) -> Result<T> {
        group_cost(&self.layout, b, self.cfg.rho)
    }

    pub fn evaluate(&self, b: &[bool], grams: &GramSet<T>) -> Result<Evaluation<T>> {
        Ok(Evaluation {
            rates: self.rates(b, grams)?,
            cost: self.cost(b)?,
            crb: self.crb(b, grams).ok(),
        })
    }
}
