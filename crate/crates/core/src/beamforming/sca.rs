//! Successive convex approximation over the Gram matrices, feasible
//! initialization and beamformer recovery.

use std::fmt::Write as _;

use super::barrier::{inner_convex_solve, max_min_slack, InnerOptions};
use super::linearize::{sca_linearize, LinearizedRate};
use crate::error::{IsacError, Result};
use crate::linalg::{identity, logdet_hpd, CMat};
use crate::metrics::rate;
use crate::problem::IsacProblem;
use crate::scalar::{cnt, lit, to_f64, Real};
use crate::transmit::{BeamformerSet, GramSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaOptions {
    pub max_iters: usize,
    /// Stop once the relative objective gain drops below this.
    pub rel_tol: f64,
    pub phase1_rounds: usize,
    /// Rates may fall this far below the threshold after rank truncation
    /// before interferers are scaled down.
    pub repair_tol: f64,
    pub inner: InnerOptions,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self { max_iters: 50, rel_tol: 1e-6, phase1_rounds: 30, repair_tol: 1e-6, inner: InnerOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    MaxIters,
    InfeasibleStart,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Tolerance => "tolerance",
            StopReason::MaxIters => "max-iters",
            StopReason::InfeasibleStart => "infeasible-start",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaIteration<T> {
    /// Sensing objective `(κ1−κ2²)/(1+κ1)·Σ χ_k Υ_k`, the reciprocal CRB.
    pub objective: T,
    pub crb: T,
    /// Largest rate shortfall or power excess, zero when feasible.
    pub max_violation: T,
}

/// Per-iteration history. Entry 0 is the starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaTrace<T> {
    pub iterations: Vec<ScaIteration<T>>,
    pub converged: bool,
    pub reason: StopReason,
}

impl<T: Real> ScaTrace<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,objective,crb,max_violation\n");
        for (i, it) in self.iterations.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i},{:.17e},{:.17e},{:.17e}",
                to_f64(it.objective),
                to_f64(it.crb),
                to_f64(it.max_violation)
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome<T: Real> {
    pub beamformers: BeamformerSet<T>,
    /// Optimized Grams before rank truncation.
    pub grams: GramSet<T>,
    pub trace: ScaTrace<T>,
    /// Receivers whose interferers were scaled down after truncation.
    pub repaired: Vec<usize>,
}

/// `C` with `⟨C, ΣQ_i⟩ = (κ1−κ2²)/(1+κ1)·Σ_{k∈G} χ_k Υ_k`.
pub fn sensing_weight<T: Real>(problem: &IsacProblem<T>, b: &[bool]) -> CMat<T> {
    let n = problem.cfg.n_t;
    let c = &problem.consts;
    let lead = (c.kappa1 - c.kappa2 * c.kappa2) / (T::one() + c.kappa1);
    let nr = cnt::<T>(problem.cfg.n_r);
    let mut w = CMat::zeros(n, n);
    for k in (0..b.len()).filter(|&k| b[k]) {
        let los = &problem.channels.los_sens[k];
        let lhl = los.adjoint() * los * crate::scalar::creal(problem.cfg.rician_alpha[k]);
        let term = lhl + identity::<T>(n) * crate::scalar::creal(nr);
        w += term * crate::scalar::creal(c.chi[k] * lead);
    }
    crate::linalg::hermitize(&w)
}

fn linearize_all<T: Real>(
    problem: &IsacProblem<T>,
    b: &[bool],
    users: &[bool],
    q_bar: &GramSet<T>,
) -> Result<Vec<LinearizedRate<T>>> {
    let r_th = problem.cfg.r_th;
    if r_th <= T::zero() {
        return Ok(Vec::new());
    }
    (0..b.len())
        .filter(|&k| users[k])
        .map(|k| sca_linearize(k, b[k], q_bar, &problem.channels.h_comm[k], problem.cfg.sigma2, r_th))
        .collect()
}

fn exact_rates<T: Real>(problem: &IsacProblem<T>, b: &[bool], users: &[bool], q: &GramSet<T>) -> Result<Vec<T>> {
    (0..b.len())
        .filter(|&k| users[k])
        .map(|k| rate(k, b, q, &problem.channels.h_comm, problem.cfg.sigma2))
        .collect()
}

fn strictly_feasible<T: Real>(problem: &IsacProblem<T>, b: &[bool], users: &[bool], q: &GramSet<T>) -> bool {
    if q.q.iter().any(|x| logdet_hpd(x).is_none()) || !(q.total_power() < problem.cfg.p_t) {
        return false;
    }
    let r_th = problem.cfg.r_th;
    r_th <= T::zero() || exact_rates(problem, b, users, q).is_ok_and(|r| r.iter().all(|&x| x > r_th))
}

fn violation<T: Real>(problem: &IsacProblem<T>, b: &[bool], users: &[bool], q: &GramSet<T>) -> T {
    let r_th = problem.cfg.r_th;
    let mut worst = (q.total_power() - problem.cfg.p_t).max(T::zero());
    if let Ok(r) = exact_rates(problem, b, users, q) {
        for x in r {
            worst = worst.max(r_th - x);
        }
    }
    worst
}

/// Strictly feasible Gram set for selection `b`: the uniform-power point if it
/// already meets every rate, otherwise the result of maximizing the smallest
/// linearized rate slack.
pub fn feasibility_init<T: Real>(problem: &IsacProblem<T>, b: &[bool], opts: &ScaOptions) -> Result<GramSet<T>> {
    feasibility_init_masked(problem, b, &vec![true; b.len()], opts)
}

/// [`feasibility_init`] with rate constraints only for receivers with
/// `users[k]` set.
pub fn feasibility_init_masked<T: Real>(
    problem: &IsacProblem<T>,
    b: &[bool],
    users: &[bool],
    opts: &ScaOptions,
) -> Result<GramSet<T>> {
    let k = problem.receivers();
    let p_t = problem.cfg.p_t;
    let mut q = GramSet::uniform(k, problem.cfg.n_t, p_t * lit(0.999));
    if strictly_feasible(problem, b, users, &q) {
        return Ok(q);
    }
    if p_t <= T::zero() {
        return Err(IsacError::InfeasibleStart("no transmit power".into()));
    }
    let mut last: Option<T> = None;
    for round in 0..opts.phase1_rounds {
        let cons = linearize_all(problem, b, users, &q)?;
        let sol = max_min_slack(&cons, p_t, &q, &opts.inner, true)?;
        q = sol.grams;
        let s = sol.slack.unwrap_or_else(T::zero);
        log::debug!("phase-1 round {round}: slack {:.6e}", to_f64(s));
        if strictly_feasible(problem, b, users, &q) {
            return Ok(q);
        }
        if let Some(prev) = last {
            if s - prev <= lit::<T>(1e-6) * T::one().max(s.abs()) {
                break;
            }
        }
        last = Some(s);
    }
    Err(IsacError::InfeasibleStart(format!(
        "largest achievable smallest-rate slack stays negative (r_th = {})",
        to_f64(problem.cfg.r_th)
    )))
}

/// Top-`l` eigen-directions of each Gram scaled by root eigenvalues.
pub fn recover_beamformers<T: Real>(q: &GramSet<T>, l: usize) -> BeamformerSet<T> {
    q.factor(l)
}

/// Scales down the interferers of receivers whose exact rate fell below
/// `r_th − tol` after truncation. Returns the receivers that were repaired.
pub fn repair_rates<T: Real>(
    problem: &IsacProblem<T>,
    b: &[bool],
    users: &[bool],
    w: &mut BeamformerSet<T>,
    tol: T,
) -> Vec<usize> {
    let r_th = problem.cfg.r_th;
    let mut repaired = Vec::new();
    if r_th <= T::zero() {
        return repaired;
    }
    for _pass in 0..3 {
        let mut changed = false;
        for k in (0..b.len()).filter(|&k| users[k]) {
            let rate_k = |w: &BeamformerSet<T>| rate(k, b, &w.grams(), &problem.channels.h_comm, problem.cfg.sigma2);
            match rate_k(w) {
                Ok(r) if r >= r_th - tol => continue,
                Ok(_) => {}
                Err(_) => continue,
            }
            let interferers: Vec<usize> = (0..w.w.len()).filter(|&i| i != k + 1 && (i != 0 || !b[k])).collect();
            let scaled = |g: T| {
                let mut out = w.clone();
                for &i in &interferers {
                    out.w[i] = out.w[i].map(|z| z * g);
                }
                out
            };
            let (mut lo, mut hi) = (T::zero(), T::one());
            if rate_k(&scaled(lo)).map_or(true, |r| r < r_th - tol) {
                log::warn!("receiver {k}: rate below threshold even without interference");
                continue;
            }
            for _ in 0..60 {
                let mid = (lo + hi) * lit(0.5);
                if rate_k(&scaled(mid)).is_ok_and(|r| r >= r_th) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            log::info!("receiver {k}: interferer amplitude scaled by {:.6} after rank truncation", to_f64(lo));
            *w = scaled(lo);
            if !repaired.contains(&k) {
                repaired.push(k);
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
    repaired
}

/// Maximizes the sensing objective for selection `b` under the rate and power
/// constraints, starting from `init` when it is strictly feasible.
pub fn sca_optimize<T: Real>(
    problem: &IsacProblem<T>,
    b: &[bool],
    init: Option<&GramSet<T>>,
    opts: &ScaOptions,
) -> Result<ScaOutcome<T>> {
    sca_optimize_masked(problem, b, &vec![true; b.len()], init, opts)
}

/// [`sca_optimize`] with rate constraints only for receivers with `users[k]`
/// set; used for sensing-only virtual receivers.
pub fn sca_optimize_masked<T: Real>(
    problem: &IsacProblem<T>,
    b: &[bool],
    users: &[bool],
    init: Option<&GramSet<T>>,
    opts: &ScaOptions,
) -> Result<ScaOutcome<T>> {
    if b.len() != problem.receivers() || users.len() != b.len() {
        return Err(IsacError::DimensionMismatch(format!("selection {} vs {} receivers", b.len(), problem.receivers())));
    }
    if !b.iter().any(|&x| x) {
        return Err(IsacError::EmptyGroup);
    }
    let k = problem.receivers();
    let n = problem.cfg.n_t;
    let p_t = problem.cfg.p_t;
    let weight = sensing_weight(problem, b);
    let record = |q: &GramSet<T>| -> Result<ScaIteration<T>> {
        let report = problem.crb(b, q)?;
        Ok(ScaIteration {
            objective: crate::linalg::trace_prod_re(&weight, &q.sum()),
            crb: report.crb,
            max_violation: violation(problem, b, users, q),
        })
    };

    if p_t <= T::zero() {
        let q = GramSet::zeros(k, n);
        let it = ScaIteration { objective: T::zero(), crb: lit(f64::INFINITY), max_violation: T::zero() };
        return Ok(ScaOutcome {
            beamformers: BeamformerSet::zeros(k, n, problem.cfg.l),
            grams: q,
            trace: ScaTrace { iterations: vec![it], converged: true, reason: StopReason::Tolerance },
            repaired: Vec::new(),
        });
    }

    let mut q = match init {
        Some(q0) if strictly_feasible(problem, b, users, q0) => q0.clone(),
        Some(_) => {
            log::warn!("initial Grams are not strictly feasible, running the feasibility phase");
            feasibility_init_masked(problem, b, users, opts)?
        }
        None => feasibility_init_masked(problem, b, users, opts)?,
    };
    let mut iterations = vec![record(&q)?];
    let mut reason = StopReason::MaxIters;
    for _ in 0..opts.max_iters {
        let cons = linearize_all(problem, b, users, &q)?;
        let sol = inner_convex_solve(&weight, &cons, p_t, &q, &opts.inner)?;
        let prev = iterations.last().expect("initial entry").objective;
        let it = record(&sol.grams)?;
        if it.objective < prev {
            // Barrier end point short of the anchor: keep the anchor.
            reason = StopReason::Tolerance;
            break;
        }
        q = sol.grams;
        iterations.push(it);
        let gain = (it.objective - prev) / prev.abs().max(lit(f64::MIN_POSITIVE));
        if cons.is_empty() || gain < lit(opts.rel_tol) {
            reason = StopReason::Tolerance;
            break;
        }
    }
    let mut beamformers = recover_beamformers(&q, problem.cfg.l);
    let repaired = repair_rates(problem, b, users, &mut beamformers, lit(opts.repair_tol));
    Ok(ScaOutcome {
        beamformers,
        grams: q,
        trace: ScaTrace { iterations, converged: reason == StopReason::Tolerance, reason },
        repaired,
    })
}
