//! Delay/Doppler grid search of the matched-filter statistic
//! `‖Σ_m y[m]·s₀ᴴ[m−τ]·e^{−j2πfm}‖²_F`.

use nalgebra::Complex;
use rustfft::FftPlanner;

use crate::error::{IsacError, Result};
use crate::linalg::CMat;
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayDopplerGrid {
    /// Integer delays `0..=tau_max` are searched.
    pub tau_max: usize,
    pub f_max: f64,
    /// Doppler hypotheses spread uniformly over `[−f_max, f_max]`.
    pub f_points: usize,
}

impl DelayDopplerGrid {
    /// `M/4` delays and 129 Doppler points over `|f| ≤ 0.05`.
    pub fn for_block(m: usize) -> Self {
        Self { tau_max: m / 4, f_max: 0.05, f_points: 129 }
    }

    pub fn f_step(&self) -> f64 {
        if self.f_points > 1 {
            2.0 * self.f_max / (self.f_points - 1) as f64
        } else {
            0.0
        }
    }

    pub fn f_value(&self, j: usize) -> f64 {
        if self.f_points > 1 {
            -self.f_max + j as f64 * self.f_step()
        } else {
            0.0
        }
    }

    /// FFT length that places every hypothesis on a bin, if one exists.
    fn fft_len(&self, m: usize) -> Option<(usize, usize)> {
        if self.f_points < 2 {
            return None;
        }
        let n = 1.0 / self.f_step();
        let j0 = self.f_max / self.f_step();
        let (nr, jr) = (n.round(), j0.round());
        ((nr - n).abs() < 1e-9 * n && (jr - j0).abs() < 1e-9 * j0.max(1.0) && nr as usize >= m)
            .then_some((nr as usize, jr as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayDopplerEstimate<T> {
    pub tau_hat: usize,
    pub f_hat: T,
    pub score: T,
}

/// Grid argmax of the matched-filter statistic for one receiver. Ties go to
/// the smallest delay, then the smallest Doppler.
pub fn matched_filter<T: Real>(y: &CMat<T>, s0: &CMat<T>, grid: &DelayDopplerGrid) -> Result<DelayDopplerEstimate<T>> {
    let m = y.ncols();
    if s0.ncols() != m {
        return Err(IsacError::DimensionMismatch(format!("{m} received vs {} known samples", s0.ncols())));
    }
    if grid.f_points == 0 || !(grid.f_max >= 0.0) {
        return Err(IsacError::config("grid", "Doppler grid must be nonempty"));
    }
    let yc: Vec<Complex<f64>> = y.iter().map(|z| Complex::new(to_f64(z.re), to_f64(z.im))).collect();
    let sc: Vec<Complex<f64>> = s0.iter().map(|z| Complex::new(to_f64(z.re), to_f64(z.im))).collect();
    if yc.iter().all(|z| z.norm_sqr() == 0.0) || sc.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(IsacError::DegenerateInput("all-zero block".into()));
    }
    let (nr, l) = (y.nrows(), s0.nrows());
    // Column-major: entry (r, c) lives at c·rows + r.
    let y_at = |r: usize, c: usize| yc[c * nr + r];
    let s_at = |r: usize, c: usize| sc[c * l + r];
    let tau_max = grid.tau_max.min(m.saturating_sub(1));
    let mut scores = vec![0.0f64; grid.f_points];
    let mut best: Option<(usize, usize, f64)> = None;

    let fft = grid.fft_len(m);
    let mut planner = FftPlanner::<f64>::new();
    let plan = fft.map(|(n, _)| planner.plan_fft_forward(n));
    let mut buf = vec![Complex::new(0.0, 0.0); fft.map_or(0, |(n, _)| n)];
    let phasors: Vec<Vec<Complex<f64>>> = if fft.is_none() {
        (0..grid.f_points)
            .map(|j| {
                let f = grid.f_value(j);
                (0..m).map(|t| Complex::from_polar(1.0, -std::f64::consts::TAU * f * t as f64)).collect()
            })
            .collect()
    } else {
        Vec::new()
    };

    for tau in 0..=tau_max {
        scores.iter_mut().for_each(|s| *s = 0.0);
        for r in 0..nr {
            for q in 0..l {
                match (&plan, fft) {
                    (Some(plan), Some((n, j0))) => {
                        buf.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
                        for t in tau..m {
                            buf[t] = y_at(r, t) * s_at(q, t - tau).conj();
                        }
                        plan.process(&mut buf);
                        for (j, s) in scores.iter_mut().enumerate() {
                            let bin = (j + n - j0) % n;
                            *s += buf[bin].norm_sqr();
                        }
                    }
                    _ => {
                        for (j, s) in scores.iter_mut().enumerate() {
                            let mut acc = Complex::new(0.0, 0.0);
                            for t in tau..m {
                                acc += y_at(r, t) * s_at(q, t - tau).conj() * phasors[j][t];
                            }
                            *s += acc.norm_sqr();
                        }
                    }
                }
            }
        }
        for (j, &s) in scores.iter().enumerate() {
            if best.is_none_or(|(_, _, b)| s > b) {
                best = Some((tau, j, s));
            }
        }
    }
    let (tau_hat, j, score) = best.expect("nonempty grid");
    Ok(DelayDopplerEstimate { tau_hat, f_hat: lit(grid.f_value(j)), score: lit(score) })
}
