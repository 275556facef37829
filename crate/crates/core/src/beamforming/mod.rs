//! Transmit beamforming by successive convex approximation in Gram space.

pub mod barrier;
pub mod coords;
pub mod linearize;
pub mod sca;

pub use barrier::{inner_convex_solve, max_min_slack, InnerOptions, InnerSolution};
pub use linearize::{sca_linearize, LinearizedRate};
pub use sca::{
    feasibility_init, feasibility_init_masked, recover_beamformers, repair_rates, sca_optimize, sca_optimize_masked, sensing_weight, ScaIteration, ScaOptions,
    ScaOutcome, ScaTrace, StopReason,
};
