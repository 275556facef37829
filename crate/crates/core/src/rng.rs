//! Deterministic random substreams.
//!
//! Every random draw in the toolkit comes from a ChaCha8 generator seeded with
//! the experiment's root seed and positioned on a stream selected by
//! [`StreamId`]. The 64-bit stream number packs `(trial, purpose, index)` as
//! `trial << 32 | purpose << 16 | index`, so results do not depend on the order
//! in which trials or receivers are processed.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{lit, Real};

pub type IsacRng = ChaCha8Rng;

/// What a substream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum Purpose {
    Placement = 1,
    SensingChannel = 2,
    CommChannel = 3,
    Symbols = 4,
    Clutter = 5,
    Noise = 6,
    Oracle = 7,
    Instance = 8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub trial: u32,
    pub purpose: Purpose,
    pub index: u16,
}

impl StreamId {
    pub fn new(trial: u32, purpose: Purpose, index: u16) -> Self {
        Self {
            trial,
            purpose,
            index,
        }
    }

    pub fn stream(&self) -> u64 {
        (u64::from(self.trial) << 32) | ((self.purpose as u64) << 16) | u64::from(self.index)
    }
}

/// Generator for one substream of `root_seed`.
pub fn substream(root_seed: u64, id: StreamId) -> IsacRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(id.stream());
    rng
}

/// Circularly-symmetric complex Gaussian sample with variance `var`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex<T> {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(lit(s * re), lit(s * im))
}

/// Matrix of i.i.d. `CN(0, var)` entries, filled column-major.
pub fn complex_gaussian_matrix<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    var: f64,
) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, var))
}
