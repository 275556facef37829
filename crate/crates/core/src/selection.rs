//! Receiver selection: minimax-linkage agglomerative clustering, candidate
//! evaluation under rate and cost limits, and brute-force baselines.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{IsacError, Result};
use crate::problem::{Evaluation, IsacProblem};
use crate::scalar::{cnt, Real};
use crate::scenario::Point2;
use crate::transmit::GramSet;

/// Largest receiver count accepted by [`exhaustive_select`].
pub const EXHAUSTIVE_MAX_K: usize = 12;

/// Minimax radius augmented with target proximity:
/// `(1−ρ)·min_p max_q d(p, q) + ρ·min_p d(p, target)`.
pub fn minimax_radius<T: Real>(points: &[Point2<T>], target: &Point2<T>, rho: T) -> Result<T> {
    if points.is_empty() {
        return Err(IsacError::EmptyGroup);
    }
    Ok(radius_of(points.iter(), target, rho))
}

/// `(r_min, min distance to target)` of a point set.
fn radius_parts<'a, T: Real + 'a, I>(points: I, target: &Point2<T>) -> (T, T)
where
    I: Iterator<Item = &'a Point2<T>> + Clone,
{
    let mut r_min: Option<T> = None;
    let mut near: Option<T> = None;
    for p in points.clone() {
        let d_max = points.clone().fold(T::zero(), |m, q| m.max(p.distance(q)));
        r_min = Some(r_min.map_or(d_max, |r| r.min(d_max)));
        let d = p.distance(target);
        near = Some(near.map_or(d, |n| n.min(d)));
    }
    (r_min.unwrap_or_else(T::zero), near.unwrap_or_else(T::zero))
}

fn radius_of<'a, T: Real + 'a, I>(points: I, target: &Point2<T>, rho: T) -> T
where
    I: Iterator<Item = &'a Point2<T>> + Clone,
{
    let (r_min, near) = radius_parts(points, target);
    (T::one() - rho) * r_min + rho * near
}

fn group_radius<T: Real>(points: &[Point2<T>], group: &[usize], target: &Point2<T>, rho: T) -> T {
    radius_of(group.iter().map(|&i| &points[i]), target, rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeRecord<T> {
    /// Candidate ids of the merged groups.
    pub left: usize,
    pub right: usize,
    /// Candidate id of the result.
    pub parent: usize,
    pub linkage: T,
}

/// Agglomeration history: `groups[0..K]` are singletons, each merge appends
/// one group, and the last group holds every receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkageTree<T> {
    pub groups: Vec<Vec<usize>>,
    pub merges: Vec<MergeRecord<T>>,
    /// Pairwise linkage evaluations performed while building.
    pub evaluations: usize,
}

impl<T: Real> LinkageTree<T> {
    /// One `left right parent linkage` line per merge.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for m in &self.merges {
            let _ = writeln!(out, "{} {} {} {:.17e}", m.left, m.right, m.parent, crate::scalar::to_f64(m.linkage));
        }
        out
    }
}

/// Merges the pair of active groups with the smallest minimax linkage until a
/// single group remains. Equal linkages go to the more compact union (smaller
/// unweighted minimax radius), then to the pair whose smallest member indices
/// are lexicographically first.
pub fn build_linkage_tree<T: Real>(points: &[Point2<T>], target: &Point2<T>, rho: T) -> LinkageTree<T> {
    let k = points.len();
    let mut groups: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
    let mut active: Vec<usize> = (0..k).collect();
    let mut merges = Vec::with_capacity(k.saturating_sub(1));
    let mut evaluations = 0usize;
    // link[a][b] for candidate ids a < b, filled lazily as groups appear.
    let total = 2 * k.max(1) - 1;
    let mut link: Vec<Vec<Option<(T, T)>>> = vec![vec![None; total]; total];
    let union = |groups: &Vec<Vec<usize>>, a: usize, b: usize, evals: &mut usize| -> (T, T) {
        *evals += 1;
        let (r_min, near) = radius_parts(groups[a].iter().chain(&groups[b]).map(|&i| &points[i]), target);
        ((T::one() - rho) * r_min + rho * near, r_min)
    };
    for i in 0..k {
        for j in (i + 1)..k {
            link[i][j] = Some(union(&groups, i, j, &mut evaluations));
        }
    }
    while active.len() > 1 {
        let mut best: Option<(T, T, (usize, usize), usize, usize)> = None;
        for (x, &a) in active.iter().enumerate() {
            for &b in &active[(x + 1)..] {
                let (lo, hi) = (a.min(b), a.max(b));
                let (value, compact) = link[lo][hi].expect("linkage filled for active pairs");
                let ka = groups[a][0];
                let kb = groups[b][0];
                let key = (ka.min(kb), ka.max(kb));
                let better = match &best {
                    None => true,
                    Some((bv, bc, bk, _, _)) => match value.partial_cmp(bv) {
                        Some(Ordering::Less) => true,
                        Some(Ordering::Equal) => match compact.partial_cmp(bc) {
                            Some(Ordering::Less) => true,
                            Some(Ordering::Equal) => key < *bk,
                            _ => false,
                        },
                        _ => false,
                    },
                };
                if better {
                    best = Some((value, compact, key, lo, hi));
                }
            }
        }
        let (value, _, _, a, b) = best.expect("at least one active pair");
        let mut merged = groups[a].clone();
        merged.extend_from_slice(&groups[b]);
        merged.sort_unstable();
        let parent = groups.len();
        groups.push(merged);
        active.retain(|&g| g != a && g != b);
        for &other in &active {
            link[other][parent] = Some(union(&groups, other, parent, &mut evaluations));
        }
        active.push(parent);
        merges.push(MergeRecord { left: a, right: b, parent, linkage: value });
    }
    LinkageTree { groups, merges, evaluations }
}

/// Best feasible candidate found by a selection routine.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T: Real> {
    pub b: Vec<bool>,
    pub group: Vec<usize>,
    pub crb: T,
    pub evaluation: Evaluation<T>,
    /// Candidates evaluated.
    pub candidates: usize,
}

/// Evaluates candidate groups under fixed Grams and returns the feasible
/// one with the smallest CRB (first wins on ties).
pub fn best_candidate<T: Real>(
    problem: &IsacProblem<T>,
    grams: &GramSet<T>,
    candidates: &[Vec<usize>],
) -> Result<Selection<T>> {
    let mut best: Option<Selection<T>> = None;
    for group in candidates {
        if group.is_empty() {
            continue;
        }
        let b = problem.selection(group);
        let ev = problem.evaluate(&b, grams)?;
        if !ev.feasible(problem.cfg.r_th, problem.cfg.omega_th) {
            continue;
        }
        let crb = ev.crb.as_ref().map(|r| r.crb).expect("feasible implies finite CRB");
        if best.as_ref().is_none_or(|s| crb < s.crb) {
            let mut group = group.clone();
            group.sort_unstable();
            best = Some(Selection { b, group, crb, evaluation: ev, candidates: 0 });
        }
    }
    let mut out = best.ok_or(IsacError::NoFeasibleGroup)?;
    out.candidates = candidates.len();
    Ok(out)
}

/// Tree-based selection over all `2K−1` groups of the linkage tree.
pub fn select_group<T: Real>(tree: &LinkageTree<T>, grams: &GramSet<T>, problem: &IsacProblem<T>) -> Result<Selection<T>> {
    best_candidate(problem, grams, &tree.groups)
}

/// Tree-based selection restricted to groups of at most `max_size` members.
pub fn select_group_capped<T: Real>(
    tree: &LinkageTree<T>,
    grams: &GramSet<T>,
    problem: &IsacProblem<T>,
    max_size: usize,
) -> Result<Selection<T>> {
    let cands: Vec<Vec<usize>> = tree.groups.iter().filter(|g| g.len() <= max_size).cloned().collect();
    best_candidate(problem, grams, &cands)
}

/// Every non-empty subset of receivers; at most [`EXHAUSTIVE_MAX_K`].
pub fn exhaustive_select<T: Real>(problem: &IsacProblem<T>, grams: &GramSet<T>) -> Result<Selection<T>> {
    let k = problem.receivers();
    if k > EXHAUSTIVE_MAX_K {
        return Err(IsacError::config("K", format!("exhaustive search supports K <= {EXHAUSTIVE_MAX_K}")));
    }
    let cands: Vec<Vec<usize>> = (1u32..(1u32 << k))
        .map(|mask| (0..k).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    best_candidate(problem, grams, &cands)
}

/// Group of exactly `size` receivers grown greedily: start from the receiver
/// with the smallest singleton radius and repeatedly add the one that keeps
/// the minimax radius smallest (lowest index on ties).
pub fn grow_group<T: Real>(points: &[Point2<T>], target: &Point2<T>, rho: T, size: usize) -> Result<Vec<usize>> {
    if size == 0 {
        return Err(IsacError::EmptyGroup);
    }
    if size > points.len() {
        return Err(IsacError::IndexOutOfRange { index: size, count: points.len() });
    }
    let mut group: Vec<usize> = Vec::with_capacity(size);
    while group.len() < size {
        let mut best: Option<(T, usize)> = None;
        for p in (0..points.len()).filter(|p| !group.contains(p)) {
            let mut g = group.clone();
            g.push(p);
            let r = group_radius(points, &g, target, rho);
            if best.is_none_or(|(br, _)| r < br) {
                best = Some((r, p));
            }
        }
        group.push(best.expect("a receiver remains").1);
    }
    group.sort_unstable();
    Ok(group)
}

/// Lloyd's k-means on receiver positions with farthest-point seeding that
/// starts from the receiver nearest the target. Returns non-empty clusters.
pub fn kmeans_clusters<T: Real>(points: &[Point2<T>], target: &Point2<T>, c: usize, iterations: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    if n == 0 || c == 0 {
        return Vec::new();
    }
    let c = c.min(n);
    let first = (0..n)
        .min_by(|&a, &b| points[a].distance(target).partial_cmp(&points[b].distance(target)).unwrap_or(Ordering::Equal))
        .unwrap_or(0);
    let mut centers = vec![points[first]];
    while centers.len() < c {
        let far = (0..n)
            .map(|i| (i, centers.iter().fold(T::max_value().unwrap_or_else(T::one), |m, q| m.min(points[i].distance(q)))))
            .fold((0usize, -T::one()), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
        centers.push(points[far.0]);
    }
    let mut assign = vec![usize::MAX; n];
    for _ in 0..iterations.max(1) {
        let mut changed = false;
        for i in 0..n {
            let mut best = (0usize, T::max_value().unwrap_or_else(T::one));
            for (j, q) in centers.iter().enumerate() {
                let d = points[i].distance(q);
                if d < best.1 {
                    best = (j, d);
                }
            }
            if assign[i] != best.0 {
                assign[i] = best.0;
                changed = true;
            }
        }
        for (j, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Point2<T>> = (0..n).filter(|&i| assign[i] == j).map(|i| &points[i]).collect();
            if !members.is_empty() {
                let m = cnt::<T>(members.len());
                let sx = members.iter().fold(T::zero(), |a, p| a + p.x);
                let sy = members.iter().fold(T::zero(), |a, p| a + p.y);
                *center = Point2::new(sx / m, sy / m);
            }
        }
        if !changed {
            break;
        }
    }
    (0..c)
        .map(|j| (0..n).filter(|&i| assign[i] == j).collect::<Vec<_>>())
        .filter(|g| !g.is_empty())
        .collect()
}

/// Clusters from k-means runs with 1..=K centers, deduplicated, as candidate groups.
pub fn kmeans_candidates<T: Real>(points: &[Point2<T>], target: &Point2<T>, iterations: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for c in 1..=points.len() {
        for g in kmeans_clusters(points, target, c, iterations) {
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    out
}
