//! Geometry, propagation physics and configuration of a multi-static scene.
//!
//! Angle convention: `theta` is the bearing from the transmitter toward the
//! target and `phi[k]` the bearing from receiver `k` toward the target, both
//! measured counter-clockwise from the +x axis. With that choice the position
//! fix `p_k + d·(cos φ_k, sin φ_k)` lands on the target. The target moves along
//! +x.

use nalgebra::Complex;
use rand::Rng;

use crate::error::{IsacError, Result};
use crate::linalg::CVec;
use crate::scalar::{cis, cnt, light_speed, lit, wrap_angle, Real};

/// 2-D point in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    /// Four-quadrant bearing of `other` seen from `self`, in `(-π, π]`.
    pub fn bearing_to(&self, other: &Self) -> T {
        wrap_angle((other.y - self.y).atan2(other.x - self.x))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Transmit pulse shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pulse {
    /// `√2·cos(πt/(2Δt))` on `[0, Δt]`.
    #[default]
    Cosine,
    /// `√(π/A)·sinc(t/Δt)` on `[0, Δt]` with `A = ∫₀^π sin²t/t² dt`.
    Sinc,
}

impl Pulse {
    pub fn name(&self) -> &'static str {
        match self {
            Pulse::Cosine => "cosine",
            Pulse::Sinc => "sinc",
        }
    }
}

impl std::str::FromStr for Pulse {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" | "cos" => Ok(Pulse::Cosine),
            "sinc" => Ok(Pulse::Sinc),
            other => Err(IsacError::config("pulse", format!("unknown pulse `{other}`"))),
        }
    }
}

/// Physical and algorithmic constants of a scenario. All powers in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T> {
    /// Number of receivers.
    pub k: usize,
    pub n_t: usize,
    pub n_r: usize,
    /// Data streams per beamformer.
    pub l: usize,
    pub p_t: T,
    pub bandwidth: T,
    pub f0: T,
    pub lambda: T,
    /// Adjacent-antenna spacing for both arrays (m).
    pub spacing: T,
    pub delta_t: T,
    /// Samples per block.
    pub m: usize,
    pub epsilon: T,
    pub rho: T,
    pub rician_alpha: Vec<T>,
    pub beta: Vec<Complex<T>>,
    pub sigma2: T,
    pub sigma_c2: T,
    pub sigma_z2: T,
    pub v: T,
    pub r_th: T,
    pub omega_th: T,
    pub pulse: Pulse,
    pub seed: u64,
    /// Smallest admissible pairwise distance (m).
    pub min_distance: T,
}

impl<T: Real> ScenarioConfig<T> {
    /// Simulation preset: K = 10, 30 dBm budget, −60 dBm noise floors,
    /// α = 0.5, β = 0.6, ρ = 0.5, 2×2 arrays at half-wavelength spacing,
    /// B = 100 MHz, Δt = 5 ns, M = 1024, ε = 2.7, cosine pulse.
    pub fn preset() -> Self {
        let k = 10;
        let f0: T = lit(3.5e9);
        let lambda = light_speed::<T>() / f0;
        Self {
            k,
            n_t: 2,
            n_r: 2,
            l: 2,
            p_t: lit(1.0),
            bandwidth: lit(100e6),
            f0,
            lambda,
            spacing: lambda * lit(0.5),
            delta_t: lit(0.5e-8),
            m: 1024,
            epsilon: lit(2.7),
            rho: lit(0.5),
            rician_alpha: vec![lit(0.5); k],
            beta: vec![Complex::new(lit(0.6), T::zero()); k],
            sigma2: lit(1e-9),
            sigma_c2: lit(1e-9),
            sigma_z2: lit(1e-9),
            v: lit(20.0),
            r_th: lit(0.2),
            omega_th: lit(f64::INFINITY),
            pulse: Pulse::Cosine,
            seed: 0,
            min_distance: lit(1e-6),
        }
    }

    /// Copy with a different receiver count; per-receiver vectors are
    /// resized by repeating their first entry.
    pub fn with_receivers(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.k = k;
        let a0 = self.rician_alpha.first().copied().unwrap_or_else(|| lit(0.5));
        let b0 = self
            .beta
            .first()
            .copied()
            .unwrap_or_else(|| Complex::new(lit(0.6), T::zero()));
        out.rician_alpha.resize(k, a0);
        out.beta.resize(k, b0);
        out
    }

    /// Sensing noise-plus-clutter power `σ_c² + σ_z²`.
    pub fn sensing_noise(&self) -> T {
        self.sigma_c2 + self.sigma_z2
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |key: &str, x: T| -> Result<()> {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(IsacError::config(key, "must be positive and finite"))
            }
        };
        if self.k == 0 {
            return Err(IsacError::config("K", "at least one receiver is required"));
        }
        if self.n_t == 0 {
            return Err(IsacError::config("N_t", "must be at least 1"));
        }
        if self.n_r == 0 {
            return Err(IsacError::config("N_r", "must be at least 1"));
        }
        if self.l == 0 || self.l > self.n_t.min(self.n_r) {
            return Err(IsacError::config("L", "must satisfy 1 <= L <= min(N_t, N_r)"));
        }
        if self.m == 0 {
            return Err(IsacError::config("M", "must be at least 1"));
        }
        pos("P_T", self.p_t)?;
        pos("B", self.bandwidth)?;
        pos("f0", self.f0)?;
        pos("lambda", self.lambda)?;
        pos("spacing", self.spacing)?;
        pos("delta_t", self.delta_t)?;
        pos("sigma2", self.sigma2)?;
        pos("sigma_c2", self.sigma_c2)?;
        pos("sigma_z2", self.sigma_z2)?;
        if !(self.epsilon > T::zero()) {
            return Err(IsacError::config("epsilon", "must be positive"));
        }
        if !(self.rho >= T::zero() && self.rho <= T::one()) {
            return Err(IsacError::config("rho", "must lie in [0, 1]"));
        }
        let ratio = self.delta_t * self.bandwidth * lit(2.0);
        if (ratio - T::one()).abs() > lit(1e-9) {
            return Err(IsacError::config(
                "delta_t",
                "the pulse integrals require delta_t = 1/(2B)",
            ));
        }
        if !(self.v >= T::zero()) || self.v >= light_speed::<T>() * lit(1e-3) {
            return Err(IsacError::config("v", "must satisfy 0 <= v < 1e-3 c"));
        }
        if self.rician_alpha.len() != self.k {
            return Err(IsacError::config("rician_alpha", "needs one entry per receiver"));
        }
        if self.rician_alpha.iter().any(|a| !(*a >= T::zero())) {
            return Err(IsacError::config("rician_alpha", "must be non-negative"));
        }
        if self.beta.len() != self.k {
            return Err(IsacError::config("beta", "needs one entry per receiver"));
        }
        if !(self.r_th >= T::zero()) {
            return Err(IsacError::config("R_th", "must be non-negative"));
        }
        if !(self.omega_th >= T::zero()) {
            return Err(IsacError::config("Omega_th", "must be non-negative"));
        }
        Ok(())
    }
}

/// Positions of the transmitter, the target and the receivers.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout<T> {
    pub p_b: Point2<T>,
    pub p_0: Point2<T>,
    pub p: Vec<Point2<T>>,
}

impl<T: Real> Layout<T> {
    /// Transmitter at the origin and target at (20, 40).
    pub fn preset_anchors() -> (Point2<T>, Point2<T>) {
        (
            Point2::new(T::zero(), T::zero()),
            Point2::new(lit(20.0), lit(40.0)),
        )
    }

    /// Receivers uniform (by area) in the annulus `r_min..r_max` around the
    /// transmitter, rejecting draws closer than `min_distance` to the target.
    pub fn random_annulus<R: Rng + ?Sized>(
        p_b: Point2<T>,
        p_0: Point2<T>,
        k: usize,
        r_min: f64,
        r_max: f64,
        min_distance: f64,
        rng: &mut R,
    ) -> Self {
        let mut p = Vec::with_capacity(k);
        while p.len() < k {
            let u: f64 = rng.random();
            let a: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
            let q = Point2::new(
                p_b.x + lit(r * a.cos()),
                p_b.y + lit(r * a.sin()),
            );
            if crate::scalar::to_f64(q.distance(&p_0)) > min_distance {
                p.push(q);
            }
        }
        Self { p_b, p_0, p }
    }

    pub fn receivers(&self) -> usize {
        self.p.len()
    }

    pub fn validate(&self, min_distance: T) -> Result<()> {
        if !self.p_b.is_finite() || !self.p_0.is_finite() || self.p.iter().any(|q| !q.is_finite()) {
            return Err(IsacError::DegenerateGeometry("non-finite coordinate".into()));
        }
        if self.p_b.distance(&self.p_0) <= min_distance {
            return Err(IsacError::DegenerateGeometry(
                "target coincides with transmitter".into(),
            ));
        }
        for (k, q) in self.p.iter().enumerate() {
            if q.distance(&self.p_0) <= min_distance {
                return Err(IsacError::DegenerateGeometry(format!(
                    "receiver {k} coincides with target"
                )));
            }
        }
        Ok(())
    }
}

/// Distances, angles and path losses derived from a [`Layout`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySummary<T> {
    pub d_b0: T,
    pub d_0k: Vec<T>,
    pub d_bk: Vec<T>,
    pub d_b0k: Vec<T>,
    pub theta: T,
    pub phi: Vec<T>,
    pub vartheta: Vec<T>,
    /// Sensing path losses `d_b0k^(-ε)`.
    pub eta: Vec<T>,
}

pub fn geometry_summary<T: Real>(layout: &Layout<T>, cfg: &ScenarioConfig<T>) -> Result<GeometrySummary<T>> {
    layout.validate(cfg.min_distance)?;
    let d_b0 = layout.p_b.distance(&layout.p_0);
    let theta = layout.p_b.bearing_to(&layout.p_0);
    let k = layout.p.len();
    let mut out = GeometrySummary {
        d_b0,
        d_0k: Vec::with_capacity(k),
        d_bk: Vec::with_capacity(k),
        d_b0k: Vec::with_capacity(k),
        theta,
        phi: Vec::with_capacity(k),
        vartheta: Vec::with_capacity(k),
        eta: Vec::with_capacity(k),
    };
    for q in &layout.p {
        let d_0k = q.distance(&layout.p_0);
        let d_b0k = d_b0 + d_0k;
        out.d_0k.push(d_0k);
        out.d_bk.push(layout.p_b.distance(q));
        out.d_b0k.push(d_b0k);
        out.phi.push(q.bearing_to(&layout.p_0));
        out.vartheta.push(layout.p_b.bearing_to(q));
        out.eta.push(d_b0k.powf(-cfg.epsilon));
    }
    Ok(out)
}

/// Uniform-linear-array response; element `i` is `exp(j2π·i·spacing/λ·sin(angle))`.
pub fn steering<T: Real>(angle: T, n: usize, spacing: T, lambda: T) -> CVec<T> {
    let base = T::two_pi() * spacing / lambda * angle.sin();
    CVec::from_fn(n, |i, _| cis(base * cnt(i)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DopplerMode {
    /// Two-step relativistic form.
    Exact,
    /// First order in `v/c`.
    Approx,
}

/// Doppler shift (Hz) on the transmitter → target → receiver path for a target
/// moving along +x at speed `v`.
pub fn true_doppler<T: Real>(theta: T, phi_k: T, v: T, f0: T, mode: DopplerMode) -> T {
    let c = light_speed::<T>();
    match mode {
        DopplerMode::Exact => {
            let zeta = v / c;
            -zeta * f0 * (theta.cos() + phi_k.cos()) / (T::one() + zeta * phi_k.cos())
        }
        DopplerMode::Approx => {
            let half = lit::<T>(0.5);
            -(lit::<T>(2.0) * f0 / c)
                * v
                * ((theta + phi_k) * half).cos()
                * ((theta - phi_k) * half).cos()
        }
    }
}

/// Propagation delay (s) of the transmitter → target → receiver path.
pub fn true_delay<T: Real>(d_b0: T, d_0k: T) -> Result<T> {
    if !(d_b0 > T::zero()) || !(d_0k > T::zero()) {
        return Err(IsacError::DegenerateGeometry(
            "path lengths must be strictly positive".into(),
        ));
    }
    Ok((d_b0 + d_0k) / light_speed::<T>())
}

/// Cooperation price of every member of `group`, in group order:
/// `ρ·d_0k + (1−ρ)·mean distance to the other members` (zero for a singleton).
pub fn cooperation_price<T: Real>(layout: &Layout<T>, group: &[usize], rho: T) -> Result<Vec<T>> {
    if group.is_empty() {
        return Err(IsacError::EmptyGroup);
    }
    let count = layout.p.len();
    if let Some(&bad) = group.iter().find(|&&i| i >= count) {
        return Err(IsacError::IndexOutOfRange { index: bad, count });
    }
    let others = cnt::<T>(group.len().saturating_sub(1));
    Ok(group
        .iter()
        .map(|&k| {
            let pk = &layout.p[k];
            let near = pk.distance(&layout.p_0);
            let spread = if group.len() > 1 {
                group
                    .iter()
                    .filter(|&&j| j != k)
                    .fold(T::zero(), |acc, &j| acc + pk.distance(&layout.p[j]))
                    / others
            } else {
                T::zero()
            };
            rho * near + (T::one() - rho) * spread
        })
        .collect())
}
