//! Target position from Doppler shifts at two receivers and one delay.
//!
//! Doppler along +x is `f_k ∝ cos((θ+φ_k)/2)·cos((θ−φ_k)/2) = (cos θ + cos φ_k)/2`,
//! so the ratio of two shifts fixes `cos θ` and leaves the sign of `θ` open;
//! [`localize`] settles it by requiring the position estimate to lie on the
//! bearing it was computed from.

use crate::error::{IsacError, Result};
use crate::scalar::{light_speed, lit, wrap_angle, Real};
use crate::scenario::{Layout, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoaMethod {
    /// The two-receiver arctangent formula with `Ξ_k = f_k·cos(φ_k/2)`.
    ClosedForm,
    /// Bracketed root of the cross-multiplied Doppler ratio equation.
    NumericRoot,
}

impl DoaMethod {
    pub fn name(self) -> &'static str {
        match self {
            DoaMethod::ClosedForm => "closed_form",
            DoaMethod::NumericRoot => "numeric_root",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate<T> {
    pub theta_hat: T,
    pub d_hat: T,
    pub xy_hat: Point2<T>,
    pub method: DoaMethod,
}

/// One receiver pair's measurements, Doppler in Hz and delay in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMeasurement<T> {
    pub k: usize,
    pub kp: usize,
    pub f_k: T,
    pub f_kp: T,
    pub tau_k: T,
    pub phi_k: T,
    pub phi_kp: T,
}

const ROOT_TOL: f64 = 1e-12;

fn product<T: Real>(theta: T, phi: T) -> T {
    let half = lit::<T>(0.5);
    ((theta + phi) * half).cos() * ((theta - phi) * half).cos()
}

/// `f_k/f_k' − ratio(θ)`, the Doppler ratio equation's residual.
pub fn doppler_ratio_residual<T: Real>(theta: T, f_k: T, f_kp: T, phi_k: T, phi_kp: T) -> T {
    f_k / f_kp - product(theta, phi_k) / product(theta, phi_kp)
}

fn check_angles<T: Real>(phi_k: T, phi_kp: T) -> Result<()> {
    if ((phi_k - phi_kp) * lit(0.5)).sin().abs() < lit(1e-9) {
        return Err(IsacError::DegenerateAngles("arrival angles coincide".into()));
    }
    Ok(())
}

/// DoD root in `[0, π]` of `f_k'·P(θ, φ_k) − f_k·P(θ, φ_k') = 0`; the mirror `−θ`
/// solves it too.
fn upper_root<T: Real>(f_k: T, f_kp: T, phi_k: T, phi_kp: T) -> Result<T> {
    let g = |t: T| f_kp * product(t, phi_k) - f_k * product(t, phi_kp);
    let scale = f_k.abs().max(f_kp.abs());
    // g(θ) = [(f_k' − f_k)·cos θ + f_k'·cos φ_k − f_k·cos φ_k']/2 vanishes
    // identically when both coefficients do.
    let eps = lit::<T>(1e-12) * scale;
    if (f_kp - f_k).abs() <= eps && (f_kp * phi_k.cos() - f_k * phi_kp.cos()).abs() <= eps {
        return Err(IsacError::DegenerateAngles("Doppler ratio holds for every bearing".into()));
    }
    let (mut lo, mut hi) = (T::zero(), T::pi());
    let (mut g_lo, g_hi) = (g(lo), g(hi));
    if g_lo == T::zero() {
        return Ok(lo);
    }
    if g_hi == T::zero() {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(IsacError::NoRoot("ratio equation has no sign change on [0, π]".into()));
    }
    while hi - lo > lit(ROOT_TOL) {
        let mid = (lo + hi) * lit(0.5);
        let g_mid = g(mid);
        if g_mid == T::zero() {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * lit(0.5))
}

/// Both DoD candidates `(θ, −θ)` consistent with the two Doppler shifts.
pub fn doa_candidates<T: Real>(f_k: T, f_kp: T, phi_k: T, phi_kp: T) -> Result<[T; 2]> {
    check_angles(phi_k, phi_kp)?;
    if f_kp == T::zero() {
        return Err(IsacError::DegenerateInput("zero reference Doppler".into()));
    }
    let t = upper_root(f_k, f_kp, phi_k, phi_kp)?;
    Ok([t, wrap_angle(-t)])
}

/// DoD from two Doppler shifts. The numeric root returns the candidate in
/// `[0, π]`.
pub fn invert_doa<T: Real>(f_k: T, f_kp: T, phi_k: T, phi_kp: T, method: DoaMethod) -> Result<T> {
    check_angles(phi_k, phi_kp)?;
    if f_kp == T::zero() {
        return Err(IsacError::DegenerateInput("zero reference Doppler".into()));
    }
    match method {
        DoaMethod::NumericRoot => upper_root(f_k, f_kp, phi_k, phi_kp),
        DoaMethod::ClosedForm => {
            let half = lit::<T>(0.5);
            let xi_k = f_k * (phi_k * half).cos();
            let xi_kp = f_kp * (phi_kp * half).cos();
            let dphi = (phi_k - phi_kp) * half;
            let w = (xi_kp - xi_k * dphi.cos()).atan2(xi_k * dphi.sin());
            Ok(wrap_angle(lit::<T>(2.0) * w - phi_k))
        }
    }
}

/// Target-to-receiver distance from the DoD and the bistatic delay (law of
/// cosines in the transmitter/target/receiver triangle).
pub fn invert_distance<T: Real>(theta: T, tau_k: T, layout: &Layout<T>, k: usize) -> Result<T> {
    let pk = layout
        .p
        .get(k)
        .ok_or(IsacError::IndexOutOfRange { index: k, count: layout.p.len() })?;
    let ct = light_speed::<T>() * tau_k;
    let d_bk = layout.p_b.distance(pk);
    let cos = if d_bk > T::zero() { (theta - layout.p_b.bearing_to(pk)).cos() } else { T::zero() };
    let two = lit::<T>(2.0);
    let den = two * ct - two * d_bk * cos;
    if !(den.abs() > lit::<T>(1e-9) * ct.abs()) {
        return Err(IsacError::DegenerateTriangle("near-zero denominator".into()));
    }
    let d = (ct * ct + d_bk * d_bk - two * ct * d_bk * cos) / den;
    if !(d > T::zero()) || !d.is_finite() {
        return Err(IsacError::DegenerateTriangle("non-positive distance".into()));
    }
    Ok(d)
}

/// `p_k + d·(cos φ_k, sin φ_k)`.
pub fn estimate_position<T: Real>(k: usize, d_hat: T, phi_k: T, layout: &Layout<T>) -> Result<Point2<T>> {
    let pk = layout
        .p
        .get(k)
        .ok_or(IsacError::IndexOutOfRange { index: k, count: layout.p.len() })?;
    Ok(Point2::new(pk.x + d_hat * phi_k.cos(), pk.y + d_hat * phi_k.sin()))
}

/// DoD, distance and position from one receiver pair. With the numeric root
/// the sign of `θ` is chosen so the estimate's bearing from the transmitter
/// agrees with `θ`.
pub fn localize<T: Real>(layout: &Layout<T>, meas: &PairMeasurement<T>, method: DoaMethod) -> Result<PositionEstimate<T>> {
    let build = |theta: T| -> Result<PositionEstimate<T>> {
        let d_hat = invert_distance(theta, meas.tau_k, layout, meas.k)?;
        let xy_hat = estimate_position(meas.k, d_hat, meas.phi_k, layout)?;
        Ok(PositionEstimate { theta_hat: theta, d_hat, xy_hat, method })
    };
    match method {
        DoaMethod::ClosedForm => build(invert_doa(meas.f_k, meas.f_kp, meas.phi_k, meas.phi_kp, method)?),
        DoaMethod::NumericRoot => {
            let cands = doa_candidates(meas.f_k, meas.f_kp, meas.phi_k, meas.phi_kp)?;
            let mut best: Option<(T, PositionEstimate<T>)> = None;
            let mut last_err = None;
            for theta in cands {
                match build(theta) {
                    Ok(est) => {
                        let miss = wrap_angle(layout.p_b.bearing_to(&est.xy_hat) - theta).abs();
                        if best.as_ref().is_none_or(|(m, _)| miss < *m) {
                            best = Some((miss, est));
                        }
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            best.map(|(_, e)| e).ok_or_else(|| last_err.unwrap_or_else(|| IsacError::NoRoot("no candidate bearing".into())))
        }
    }
}
