//! Received-block synthesis, matched-filter delay/Doppler estimation and
//! target localization.

pub mod localize;
pub mod matched;
pub mod mse;
pub mod synth;

pub use localize::{
    doa_candidates, doppler_ratio_residual, estimate_position, invert_distance, invert_doa, localize, DoaMethod,
    PairMeasurement, PositionEstimate,
};
pub use matched::{matched_filter, DelayDopplerEstimate, DelayDopplerGrid};
pub use mse::{mse_harness, physical_truth, MseReport, MIN_MSE_TRIALS};
pub use synth::{synthesize_block, DelayDoppler, SampledBlock};
