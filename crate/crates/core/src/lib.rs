//! Multi-static ISAC toolkit: geometry and channels, closed-form delay/Doppler
//! CRB, cooperating-receiver selection, SCA transmit beamforming and target
//! localization.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64`/`*32`
//! aliases below name the common instantiations.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod metrics;
pub mod problem;
pub mod rng;
pub mod scalar;
pub mod scenario;
pub mod selection;
pub mod transmit;

pub use error::{IsacError, Result};
pub use scalar::{Real, SPEED_OF_LIGHT};

pub type ScenarioConfig64 = scenario::ScenarioConfig<f64>;
pub type ScenarioConfig32 = scenario::ScenarioConfig<f32>;
pub type Layout64 = scenario::Layout<f64>;
pub type Layout32 = scenario::Layout<f32>;
pub type ChannelSet64 = channel::ChannelSet<f64>;
pub type GramSet64 = transmit::GramSet<f64>;
pub type BeamformerSet64 = transmit::BeamformerSet<f64>;
pub type FimConstants64 = metrics::FimConstants<f64>;
pub type IsacProblem64 = problem::IsacProblem<f64>;
