//! Pulse shapes and the integrals that enter the Fisher information.

use crate::error::{IsacError, Result};
use crate::metrics::quadrature::integrate;
use crate::scalar::{lit, Real};
use crate::scenario::Pulse;

const RTOL: f64 = 1e-8;

/// `A = ∫₀^π sin²t/t² dt`, the sinc-pulse normalizer.
pub fn sinc_norm<T: Real>() -> Result<T> {
    integrate(
        |t: T| {
            if t.abs() < lit(1e-4) {
                T::one() - t * t / lit(3.0)
            } else {
                let s = t.sin() / t;
                s * s
            }
        },
        T::zero(),
        T::pi(),
        1e-12,
    )
}

/// Normalized sinc `sin(πx)/(πx)` and its derivative in `x`.
fn sinc_and_slope<T: Real>(x: T) -> (T, T) {
    let px = T::pi() * x;
    if px.abs() < lit(1e-3) {
        let p2 = T::pi() * T::pi();
        (
            T::one() - px * px / lit(6.0),
            -p2 * x / lit(3.0) + p2 * p2 * x * x * x / lit(30.0),
        )
    } else {
        let s = px.sin();
        (s / px, (px * px.cos() - s) / (px * x))
    }
}

/// Pulse evaluator on `[0, Δt]` (the formula is also evaluated outside the
/// support, which keeps finite differences smooth at the edges).
#[derive(Debug, Clone, Copy)]
pub struct PulseShape<T> {
    pub pulse: Pulse,
    pub delta_t: T,
    amp: T,
}

impl<T: Real> PulseShape<T> {
    pub fn new(pulse: Pulse, delta_t: T) -> Result<Self> {
        if !(delta_t > T::zero()) {
            return Err(IsacError::config("delta_t", "must be positive"));
        }
        let amp = match pulse {
            Pulse::Cosine => lit::<T>(2.0).sqrt(),
            Pulse::Sinc => (T::pi() / sinc_norm::<T>()?).sqrt(),
        };
        Ok(Self { pulse, delta_t, amp })
    }

    pub fn value(&self, t: T) -> T {
        match self.pulse {
            Pulse::Cosine => self.amp * (T::frac_pi_2() * t / self.delta_t).cos(),
            Pulse::Sinc => self.amp * sinc_and_slope(t / self.delta_t).0,
        }
    }

    /// `dg/dt`.
    pub fn slope(&self, t: T) -> T {
        match self.pulse {
            Pulse::Cosine => {
                let w = T::frac_pi_2() / self.delta_t;
                -self.amp * w * (w * t).sin()
            }
            Pulse::Sinc => self.amp * sinc_and_slope(t / self.delta_t).1 / self.delta_t,
        }
    }
}

/// Pulse integrals and the derived ratios κ1, κ2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseIntegrals<T> {
    /// `∫|ġ|² dt` (1/s).
    pub f_g: T,
    /// `∫t²|g|² dt` (s³).
    pub f_tg: T,
    /// `Re ∫ t·g·ġ* dt` (s).
    pub f_tgdot: T,
    /// `F_g/(16π²B²F_tg)`.
    pub kappa1: T,
    /// `F_tgdot/(4πB·F_tg)`.
    pub kappa2: T,
    /// `(1/Δt)∫|g|² dt`, 1 for a correctly normalized pulse.
    pub energy: T,
}

pub fn pulse_integrals<T: Real>(pulse: Pulse, delta_t: T, bandwidth: T) -> Result<PulseIntegrals<T>> {
    let g = PulseShape::new(pulse, delta_t)?;
    let zero = T::zero();
    let f_g = integrate(|t| g.slope(t) * g.slope(t), zero, delta_t, RTOL)?;
    let f_tg = integrate(|t| t * t * g.value(t) * g.value(t), zero, delta_t, RTOL)?;
    let f_tgdot = integrate(|t| t * g.value(t) * g.slope(t), zero, delta_t, RTOL)?;
    let energy = integrate(|t| g.value(t) * g.value(t), zero, delta_t, RTOL)? / delta_t;
    let pi = T::pi();
    Ok(PulseIntegrals {
        f_g,
        f_tg,
        f_tgdot,
        kappa1: f_g / (lit::<T>(16.0) * pi * pi * bandwidth * bandwidth * f_tg),
        kappa2: f_tgdot / (lit::<T>(4.0) * pi * bandwidth * f_tg),
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_closed_forms() {
        let dt = 5e-9f64;
        let p = pulse_integrals(Pulse::Cosine, dt, 1.0 / (2.0 * dt)).unwrap();
        let f_g = PI * PI / (4.0 * dt);
        let f_tg = (1.0 / 3.0 - 2.0 / (PI * PI)) * dt.powi(3);
        assert!((p.f_g - f_g).abs() / f_g < 1e-8);
        assert!((p.f_tg - f_tg).abs() / f_tg < 1e-8);
        assert!((p.f_tgdot + dt / 2.0).abs() / (dt / 2.0) < 1e-8);
        let cs = p.f_g * p.f_tg - p.f_tgdot * p.f_tgdot;
        assert!((cs / (dt * dt) - 0.072_53).abs() < 1e-4);
        assert!(p.kappa1 - p.kappa2 * p.kappa2 > 0.0);
    }

    #[test]
    fn pulses_are_normalized() {
        for pulse in [Pulse::Cosine, Pulse::Sinc] {
            for dt in [1e-9f64, 5e-9, 1e-6] {
                let p = pulse_integrals(pulse, dt, 0.5 / dt).unwrap();
                assert!((p.energy - 1.0).abs() < 1e-8, "{pulse:?} {dt}");
                assert!(p.f_g > 0.0 && p.f_tg > 0.0);
                assert!(p.f_g * p.f_tg - p.f_tgdot * p.f_tgdot >= 0.0);
            }
        }
    }

    #[test]
    fn sinc_boundary_term() {
        // g(Δt) = 0 for both pulses, so integration by parts gives −Δt/2.
        let dt = 5e-9f64;
        let p = pulse_integrals(Pulse::Sinc, dt, 1e8).unwrap();
        assert!((p.f_tgdot + dt / 2.0).abs() / (dt / 2.0) < 1e-8);
    }

    #[test]
    fn sinc_normalizer() {
        let a: f64 = sinc_norm().unwrap();
        assert!((a - 1.418_151_576_132_628).abs() < 1e-10);
    }

    #[test]
    fn single_precision_cosine() {
        let p = pulse_integrals(Pulse::Cosine, 1.0f32, 0.5).unwrap();
        assert!((p.f_g - std::f32::consts::PI.powi(2) / 4.0).abs() < 1e-4);
    }
}
