//! Log-barrier interior-point solver for the convex subproblem in Gram space.
//!
//! Variables are the Hermitian Grams `Q_0..Q_K`. Phase 2 maximizes
//! `⟨C, ΣQ_i⟩` subject to `Q_i ≻ 0`, `ΣTr Q_i < P` and linearized rate
//! constraints `g_k(Q) > 0`. Phase 1 adds a scalar `s`, maximizes it and
//! relaxes every rate constraint to `g_k(Q) > s`.
//!
//! Newton systems use the structure of the barrier Hessian: a block diagonal
//! part `Q_i⁻¹ ⊗ Q_i⁻¹` with the exact inverse `Q_i ⊗ Q_i`, two shared terms
//! acting on sums of Grams (one per sensing-cooperation pattern), and rank-one
//! terms from the power and rate constraints. A Woodbury solve reduces each
//! step to a dense system of size `2n² + K + 1`, followed by one step of
//! iterative refinement.

use nalgebra::{DMatrix, DVector};

use super::coords::{congruence, coords_of, dim, from_coords};
use super::linearize::LinearizedRate;
use crate::error::{IsacError, Result};
use crate::linalg::{hermitize, identity, inv_hpd, lambda_max, logdet_hpd, trace_prod_re, trace_re, CMat};
use crate::scalar::{cnt, lit, to_f64, Real};
use crate::transmit::GramSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    /// Barrier parameter growth per outer stage.
    pub mu: f64,
    /// Stop when the duality-gap bound falls below `gap_rel·P_T`.
    pub gap_rel: f64,
    /// Newton decrement threshold `λ²/2`.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Initial barrier parameter; `None` picks `ν/P_T`. A warm start from an
    /// earlier solve's `t_final` skips the early stages.
    pub t_start: Option<f64>,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self { mu: 15.0, gap_rel: 1e-6, newton_tol: 1e-10, max_newton: 1000, t_start: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution<T: Real> {
    pub grams: GramSet<T>,
    /// `⟨C, ΣQ_i⟩` with the caller's (unnormalized) weight.
    pub objective: T,
    /// Phase-1 slack, when solved with one.
    pub slack: Option<T>,
    pub newton_steps: usize,
    /// Barrier parameter at termination.
    pub t_final: T,
}

struct Barrier<'a, T: Real> {
    /// Normalized weight coordinates (phase 2) or `None` (phase 1).
    c: Option<Vec<T>>,
    cons: &'a [LinearizedRate<T>],
    p_t: T,
    beams: usize,
    n: usize,
}

#[derive(Clone)]
struct State<T: Real> {
    q: Vec<CMat<T>>,
    s: T,
}

const LN2: f64 = std::f64::consts::LN_2;
const REFINE_STEPS: usize = 12;
const MIN_STEP: f64 = 1e-8;
const STALL_DECREMENT: f64 = 1e-6;

impl<T: Real> Barrier<'_, T> {
    fn slack(&self) -> bool {
        self.c.is_none()
    }

    fn nu(&self) -> T {
        cnt::<T>(self.beams * self.n + 1 + self.cons.len())
    }

    fn objective(&self, st: &State<T>) -> T {
        match &self.c {
            Some(c) => {
                let s = st.q.iter().fold(CMat::zeros(self.n, self.n), |a, q| a + q);
                c.iter().zip(coords_of(&s)).fold(T::zero(), |a, (x, y)| a + *x * y)
            }
            None => st.s,
        }
    }

    /// Barrier value at `t`, or `None` outside the domain.
    fn value(&self, st: &State<T>, t: T) -> Option<T> {
        let mut phi = -t * self.objective(st);
        let mut power = self.p_t;
        for q in &st.q {
            phi -= logdet_hpd(q)?;
            power -= trace_re(q);
        }
        if !(power > T::zero()) {
            return None;
        }
        phi -= power.ln();
        for c in self.cons {
            let h = c.value(&st.q)? - if self.slack() { st.s } else { T::zero() };
            if !(h > T::zero()) {
                return None;
            }
            phi -= h.ln();
        }
        phi.is_finite().then_some(phi)
    }

    fn step(&self, st: &State<T>, d: &DVector<T>, alpha: T) -> State<T> {
        let d_n = dim(self.n);
        let q = st
            .q
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let blk: Vec<T> = d.rows(i * d_n, d_n).iter().map(|x| *x * alpha).collect();
                hermitize(&(q + from_coords(&blk, self.n)))
            })
            .collect();
        let s = if self.slack() { st.s + alpha * d[self.beams * d_n] } else { st.s };
        State { q, s }
    }

    /// Newton direction and decrement `λ²` at `st`.
    fn newton(&self, st: &State<T>, t: T) -> Result<(DVector<T>, T)> {
        let n = self.n;
        let d_n = dim(n);
        let beams = self.beams;
        let nx = beams * d_n;
        let ln2 = lit::<T>(LN2);
        let bad = || IsacError::SolverNonConvergence("lost positive definiteness".into());

        // Block-diagonal part and its inverse.
        let mut d_blk = Vec::with_capacity(beams);
        let mut dinv_blk = Vec::with_capacity(beams);
        let mut grad = DVector::zeros(nx + usize::from(self.slack()));
        let mut power = self.p_t;
        for (i, q) in st.q.iter().enumerate() {
            let qi = inv_hpd(q).ok_or_else(bad)?;
            let gq = coords_of(&qi);
            for p in 0..d_n {
                grad[i * d_n + p] -= gq[p];
            }
            d_blk.push(congruence(&qi));
            dinv_blk.push(congruence(q));
            power -= trace_re(q);
        }
        if let Some(c) = &self.c {
            for i in 0..beams {
                for p in 0..d_n {
                    grad[i * d_n + p] -= t * c[p];
                }
            }
        }
        let eye = coords_of(&identity::<T>(n));
        // Low-rank columns: power first, then one per rate constraint.
        let r = 1 + self.cons.len();
        let mut low = DMatrix::zeros(nx, r);
        for i in 0..beams {
            for p in 0..d_n {
                low[(i * d_n + p, 0)] = eye[p] / power;
                grad[i * d_n + p] += eye[p] / power;
            }
        }
        let mut t_all = DMatrix::zeros(d_n, d_n);
        let mut t_comm = DMatrix::zeros(d_n, d_n);
        let (mut has_all, mut has_comm) = (false, false);
        let mut slack_col = DVector::zeros(nx);
        let mut slack_diag = T::zero();
        for (j, c) in self.cons.iter().enumerate() {
            let h = c.value(&st.q).ok_or_else(bad)? - if self.slack() { st.s } else { T::zero() };
            let heard = c.heard_gradient(&st.q).ok_or_else(bad)?;
            let gh = coords_of(&heard);
            let gb = coords_of(&c.g_bar);
            for i in 0..beams {
                for p in 0..d_n {
                    let mut v = T::zero();
                    if c.hears(i) {
                        v += gh[p];
                    }
                    if c.interferes(i) {
                        v -= gb[p];
                    }
                    let u = v / (ln2 * h);
                    low[(i * d_n + p, 1 + j)] = u;
                    grad[i * d_n + p] -= u;
                    if self.slack() {
                        slack_col[i * d_n + p] -= u / h;
                    }
                }
            }
            let w = congruence(&heard) / (ln2 * h);
            if c.b_k {
                t_comm += w;
                has_comm = true;
            } else {
                t_all += w;
                has_all = true;
            }
            if self.slack() {
                grad[nx] += T::one() / h;
                slack_diag += T::one() / (h * h);
            }
        }
        if self.slack() {
            grad[nx] -= t;
        }

        let solver = Woodbury::new(&d_blk, &dinv_blk, &low, has_all.then_some(&t_all), has_comm.then_some(&t_comm))?;
        let rhs_x = -grad.rows(0, nx).into_owned();
        let dir = if self.slack() {
            // Eliminate the scalar slack through its Schur complement.
            let y1 = solver.solve_refined(&rhs_x);
            let y2 = solver.solve_refined(&slack_col);
            let schur = slack_diag - slack_col.dot(&y2);
            if !(schur > T::zero()) {
                return Err(IsacError::SolverNonConvergence("indefinite slack Schur complement".into()));
            }
            let ds = (-grad[nx] - slack_col.dot(&y1)) / schur;
            let mut dir = DVector::zeros(nx + 1);
            dir.rows_mut(0, nx).copy_from(&(y1 - y2 * ds));
            dir[nx] = ds;
            dir
        } else {
            solver.solve_refined(&rhs_x)
        };
        let lambda2 = -grad.dot(&dir);
        Ok((dir, lambda2))
    }
}

/// `(D + Pᵀ·T_all·P + P₁ᵀ·T_comm·P₁ + R·Rᵀ)⁻¹` where `D` is block diagonal,
/// `P` sums all blocks and `P₁` sums blocks `1..`.
struct Woodbury<'a, T: Real> {
    d: &'a [DMatrix<T>],
    dinv: &'a [DMatrix<T>],
    low: &'a DMatrix<T>,
    t_all: Option<&'a DMatrix<T>>,
    t_comm: Option<&'a DMatrix<T>>,
    dinv_low: Vec<DMatrix<T>>,
    lu: nalgebra::LU<T, nalgebra::Dyn, nalgebra::Dyn>,
}

impl<'a, T: Real> Woodbury<'a, T> {
    fn new(
        d: &'a [DMatrix<T>],
        dinv: &'a [DMatrix<T>],
        low: &'a DMatrix<T>,
        t_all: Option<&'a DMatrix<T>>,
        t_comm: Option<&'a DMatrix<T>>,
    ) -> Result<Self> {
        let d_n = d[0].nrows();
        let r = low.ncols();
        let dinv_low: Vec<DMatrix<T>> = dinv
            .iter()
            .enumerate()
            .map(|(i, di)| di * low.rows(i * d_n, d_n))
            .collect();
        let n0 = if t_all.is_some() { d_n } else { 0 };
        let n1 = if t_comm.is_some() { d_n } else { 0 };
        let m = n0 + n1 + r;
        // K = Z·D⁻¹·Zᵀ.
        let mut kmat = DMatrix::zeros(m, m);
        let s_all = dinv.iter().fold(DMatrix::zeros(d_n, d_n), |a, x| a + x);
        let s_comm = dinv.iter().skip(1).fold(DMatrix::zeros(d_n, d_n), |a, x| a + x);
        let l_all = dinv_low.iter().fold(DMatrix::zeros(d_n, r), |a, x| a + x);
        let l_comm = dinv_low.iter().skip(1).fold(DMatrix::zeros(d_n, r), |a, x| a + x);
        let mut ll = DMatrix::zeros(r, r);
        for (i, dl) in dinv_low.iter().enumerate() {
            ll += low.rows(i * d_n, d_n).transpose() * dl;
        }
        if n0 > 0 {
            kmat.view_mut((0, 0), (d_n, d_n)).copy_from(&s_all);
            kmat.view_mut((0, n0 + n1), (d_n, r)).copy_from(&l_all);
            kmat.view_mut((n0 + n1, 0), (r, d_n)).copy_from(&l_all.transpose());
        }
        if n1 > 0 {
            kmat.view_mut((n0, n0), (d_n, d_n)).copy_from(&s_comm);
            kmat.view_mut((n0, n0 + n1), (d_n, r)).copy_from(&l_comm);
            kmat.view_mut((n0 + n1, n0), (r, d_n)).copy_from(&l_comm.transpose());
        }
        if n0 > 0 && n1 > 0 {
            kmat.view_mut((0, n0), (d_n, d_n)).copy_from(&s_comm);
            kmat.view_mut((n0, 0), (d_n, d_n)).copy_from(&s_comm);
        }
        kmat.view_mut((n0 + n1, n0 + n1), (r, r)).copy_from(&ll);
        let mut a = DMatrix::identity(m, m);
        let mk = Self::apply_m_rows(t_all, t_comm, n0, n1, &kmat);
        a += mk;
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(IsacError::SolverNonConvergence("singular reduced Newton system".into()));
        }
        Ok(Self { d, dinv, low, t_all, t_comm, dinv_low, lu })
    }

    fn apply_m_rows(
        t_all: Option<&DMatrix<T>>,
        t_comm: Option<&DMatrix<T>>,
        n0: usize,
        n1: usize,
        x: &DMatrix<T>,
    ) -> DMatrix<T> {
        let mut out = x.clone();
        if let Some(t) = t_all {
            let top = t * x.rows(0, n0);
            out.rows_mut(0, n0).copy_from(&top);
        }
        if let Some(t) = t_comm {
            let mid = t * x.rows(n0, n1);
            out.rows_mut(n0, n1).copy_from(&mid);
        }
        out
    }

    fn blocks(&self) -> (usize, usize, usize, usize) {
        let d_n = self.d[0].nrows();
        let n0 = if self.t_all.is_some() { d_n } else { 0 };
        let n1 = if self.t_comm.is_some() { d_n } else { 0 };
        (d_n, n0, n1, self.low.ncols())
    }

    fn solve(&self, v: &DVector<T>) -> DVector<T> {
        let (d_n, n0, n1, r) = self.blocks();
        let beams = self.d.len();
        let mut y = DVector::zeros(v.len());
        for i in 0..beams {
            let yi = &self.dinv[i] * v.rows(i * d_n, d_n);
            y.rows_mut(i * d_n, d_n).copy_from(&yi);
        }
        let mut w = DVector::zeros(n0 + n1 + r);
        for i in 0..beams {
            let yi = y.rows(i * d_n, d_n);
            if n0 > 0 {
                let mut top = w.rows_mut(0, n0);
                top += yi;
            }
            if n1 > 0 && i > 0 {
                let mut mid = w.rows_mut(n0, n1);
                mid += yi;
            }
        }
        let ry = self.low.transpose() * &y;
        w.rows_mut(n0 + n1, r).copy_from(&ry);
        let mw = Self::apply_m_rows(self.t_all, self.t_comm, n0, n1, &DMatrix::from_column_slice(w.len(), 1, w.as_slice()));
        let z = self.lu.solve(&mw).expect("invertible reduced system");
        let z_r = z.rows(n0 + n1, r).into_owned();
        for i in 0..beams {
            let mut zi = DVector::zeros(d_n);
            if n0 > 0 {
                zi += z.rows(0, n0).column(0);
            }
            if n1 > 0 && i > 0 {
                zi += z.rows(n0, n1).column(0);
            }
            let corr = &self.dinv[i] * zi + &self.dinv_low[i] * z_r.column(0);
            let mut yi = y.rows_mut(i * d_n, d_n);
            yi -= corr;
        }
        y
    }

    fn apply(&self, x: &DVector<T>) -> DVector<T> {
        let (d_n, _, _, _) = self.blocks();
        let beams = self.d.len();
        let mut out = DVector::zeros(x.len());
        let mut sum_all = DVector::zeros(d_n);
        let mut sum_comm = DVector::zeros(d_n);
        for i in 0..beams {
            let xi = x.rows(i * d_n, d_n);
            sum_all += xi;
            if i > 0 {
                sum_comm += xi;
            }
            out.rows_mut(i * d_n, d_n).copy_from(&(&self.d[i] * xi));
        }
        let ta = self.t_all.map(|t| t * &sum_all);
        let tc = self.t_comm.map(|t| t * &sum_comm);
        for i in 0..beams {
            let mut oi = out.rows_mut(i * d_n, d_n);
            if let Some(v) = &ta {
                oi += v;
            }
            if let (Some(v), true) = (&tc, i > 0) {
                oi += v;
            }
        }
        out += self.low * (self.low.transpose() * x);
        out
    }

    /// Woodbury solve followed by iterative refinement against the exact
    /// Hessian product; the reduced system loses accuracy as `t` grows.
    fn solve_refined(&self, v: &DVector<T>) -> DVector<T> {
        let target = v.norm() * lit::<T>(1e-14);
        let mut x = self.solve(v);
        let mut resid = v - self.apply(&x);
        for _ in 0..REFINE_STEPS {
            if resid.norm() <= target {
                break;
            }
            let next = &x + self.solve(&resid);
            let next_resid = v - self.apply(&next);
            if !(next_resid.norm() < resid.norm()) {
                break;
            }
            x = next;
            resid = next_resid;
        }
        x
    }
}

/// Damped Newton centering followed by barrier-parameter updates.
fn run<T: Real>(
    bar: &Barrier<'_, T>,
    start: State<T>,
    opts: &InnerOptions,
    gap_target: T,
    stop_on_positive_slack: bool,
) -> Result<(State<T>, usize, T)> {
    let nu = bar.nu();
    let scale = if bar.slack() { T::one() } else { bar.p_t };
    let mut t = opts.t_start.map_or(nu / scale, lit);
    let mut st = start;
    let mut steps = 0usize;
    if bar.value(&st, t).is_none() {
        return Err(IsacError::InfeasibleSubproblem("start point is not strictly feasible".into()));
    }
    loop {
        let mut centred = false;
        for _ in 0..opts.max_newton {
            let (dir, lambda2) = bar.newton(&st, t)?;
            if !(lambda2.is_finite()) {
                return Err(IsacError::SolverNonConvergence("non-finite Newton decrement".into()));
            }
            let f0 = bar.value(&st, t).expect("current iterate feasible");
            // Decrease below the rounding level of the barrier value cannot be
            // resolved by the line search.
            let floor = lit::<T>(opts.newton_tol).max(lit::<T>(1e-12) * f0.abs());
            if lambda2 * lit(0.5) <= floor {
                centred = true;
                break;
            }
            let mut alpha = T::one();
            let slope = -lambda2;
            let mut accepted = None;
            for _ in 0..80 {
                let cand = bar.step(&st, &dir, alpha);
                if let Some(f) = bar.value(&cand, t) {
                    if f <= f0 + lit::<T>(0.1) * alpha * slope {
                        accepted = Some(cand);
                        break;
                    }
                }
                alpha *= lit(0.5);
            }
            steps += 1;
            match accepted {
                Some(c) if alpha > lit(MIN_STEP) => st = c,
                Some(c) if lambda2 * lit(0.5) > lit(STALL_DECREMENT) => st = c,
                accepted => {
                    // Descent is below rounding: accept what there is and stop.
                    if let Some(c) = accepted {
                        st = c;
                    }
                    centred = true;
                    break;
                }
            }
            if stop_on_positive_slack && st.s > T::zero() {
                return Ok((st, steps, t));
            }
        }
        if !centred {
            return Err(IsacError::SolverNonConvergence(format!(
                "Newton centering did not converge at t = {:.3e}",
                to_f64(t)
            )));
        }
        if stop_on_positive_slack && st.s > T::zero() {
            return Ok((st, steps, t));
        }
        if nu / t <= gap_target {
            return Ok((st, steps, t));
        }
        t *= lit(opts.mu);
    }
}

fn feasible_start<T: Real>(start: &GramSet<T>, p_t: T) -> Result<()> {
    if start.q.iter().any(|q| logdet_hpd(q).is_none()) {
        return Err(IsacError::InfeasibleSubproblem("start Grams must be positive definite".into()));
    }
    if !(start.total_power() < p_t) {
        return Err(IsacError::InfeasibleSubproblem("start point must leave power slack".into()));
    }
    Ok(())
}

/// Maximizes `⟨weight, ΣQ_i⟩` over the linearized feasible set from a strictly
/// feasible `start`.
pub fn inner_convex_solve<T: Real>(
    weight: &CMat<T>,
    constraints: &[LinearizedRate<T>],
    p_t: T,
    start: &GramSet<T>,
    opts: &InnerOptions,
) -> Result<InnerSolution<T>> {
    let n = start.n_t();
    if p_t <= T::zero() {
        return Ok(InnerSolution { grams: GramSet::zeros(start.receivers(), n), objective: T::zero(), slack: None, newton_steps: 0, t_final: T::zero() });
    }
    feasible_start(start, p_t)?;
    let lmax = lambda_max(weight);
    let norm = if lmax > T::zero() { lmax } else { T::one() };
    let c = coords_of(&weight.map(|z| z.unscale(norm)));
    let bar = Barrier { c: Some(c), cons: constraints, p_t, beams: start.q.len(), n };
    let gap = lit::<T>(opts.gap_rel) * p_t;
    let (st, newton_steps, t_final) = run(&bar, State { q: start.q.clone(), s: T::zero() }, opts, gap, false)?;
    let grams = GramSet { q: st.q };
    let objective = trace_prod_re(weight, &grams.sum());
    Ok(InnerSolution { grams, objective, slack: None, newton_steps, t_final })
}

/// Maximizes the smallest linearized constraint value. With
/// `stop_on_positive` the solve returns as soon as every constraint is
/// strictly positive.
pub fn max_min_slack<T: Real>(
    constraints: &[LinearizedRate<T>],
    p_t: T,
    start: &GramSet<T>,
    opts: &InnerOptions,
    stop_on_positive: bool,
) -> Result<InnerSolution<T>> {
    let n = start.n_t();
    feasible_start(start, p_t)?;
    let mut min_g: Option<T> = None;
    for c in constraints {
        let v = c.value(&start.q).ok_or_else(|| IsacError::InfeasibleSubproblem("singular covariance".into()))?;
        min_g = Some(min_g.map_or(v, |m: T| m.min(v)));
    }
    let s0 = min_g.unwrap_or_else(T::zero) - T::one();
    let bar = Barrier { c: None, cons: constraints, p_t, beams: start.q.len(), n };
    let (st, newton_steps, t_final) = run(&bar, State { q: start.q.clone(), s: s0 }, opts, lit(opts.gap_rel), stop_on_positive)?;
    Ok(InnerSolution { grams: GramSet { q: st.q }, objective: T::zero(), slack: Some(st.s), newton_steps, t_final })
}
