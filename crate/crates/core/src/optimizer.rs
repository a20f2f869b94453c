//! Cardinality-constrained revenue maximization under MNL.
//!
//! The optimal revenue `λ*` is the largest `λ` for which some feasible set
//! satisfies `Σ_{i∈S} v_i (r_i - λ) ≥ λ`. For a fixed `λ` the left side is
//! maximized by taking up to `K` items with the largest positive
//! `v_i (r_i - λ)`, so `g(λ) = max_S Σ v_i (r_i - λ) - λ` is cheap to
//! evaluate and strictly decreasing; bisection on `[0, 1]` finds `λ*`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimator::prb_estimate;
use crate::mnl::{check_attractions, expected_revenue, Assortment, OfflineDataset};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_BISECTION_ITERATIONS: usize = 200;
/// Largest universe `brute_force_optimize` will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub assortment: Assortment,
    pub revenue: f64,
    /// Lower end of the final bisection bracket (exact optimum for brute force).
    pub lambda_star: f64,
    pub iterations: usize,
}

fn check_problem(attractions: &[f64], rewards: &[f64], capacity: usize) -> Result<()> {
    let n = attractions.len();
    if rewards.len() != n {
        return Err(domain(format!(
            "{n} attractions but {} rewards",
            rewards.len()
        )));
    }
    if capacity == 0 || capacity > n {
        return Err(domain(format!("capacity must lie in 1..={n}, got {capacity}")));
    }
    check_attractions(attractions)?;
    if let Some(r) = rewards.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(domain(format!("reward {r} is outside [0,1]")));
    }
    Ok(())
}

/// Items with strictly positive `v_i (r_i - λ)`, best first, ties to the lower id;
/// at most `capacity` of them. Returns the selection and its score sum.
fn select_top(
    attractions: &[f64],
    rewards: &[f64],
    capacity: usize,
    lambda: f64,
    scored: &mut Vec<(f64, usize)>,
) -> (Vec<usize>, f64) {
    scored.clear();
    scored.extend(
        attractions
            .iter()
            .zip(rewards)
            .enumerate()
            .map(|(i, (v, r))| (v * (r - lambda), i + 1))
            .filter(|(score, _)| *score > 0.0),
    );
    scored.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    scored.truncate(capacity);
    let total = scored.iter().map(|(s, _)| s).sum();
    let mut items: Vec<usize> = scored.iter().map(|(_, i)| *i).collect();
    items.sort_unstable();
    (items, total)
}

/// Bracket state at termination, exposed for invariant checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
}

fn bisect(attractions: &[f64], rewards: &[f64], capacity: usize, tol: f64) -> (Bracket, usize) {
    let mut scored = Vec::with_capacity(attractions.len());
    let mut g = |lambda: f64| select_top(attractions, rewards, capacity, lambda, &mut scored).1 - lambda;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let (mut g_lo, mut g_hi) = (g(lo), g(hi));
    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid >= 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
        iterations += 1;
    }
    (Bracket { lo, hi, g_lo, g_hi }, iterations)
}

/// Final bisection bracket for the given problem; see [`optimize`].
pub fn bisection_bracket(
    attractions: &[f64],
    rewards: &[f64],
    capacity: usize,
    tol: f64,
) -> Result<Bracket> {
    check_problem(attractions, rewards, capacity)?;
    check_tol(tol)?;
    Ok(bisect(attractions, rewards, capacity, tol).0)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// Maximizes `R(S; v)` over `|S| ≤ capacity` to within `tol` by bisection on
/// the revenue level. The returned set is the selection at the lower end of
/// the final bracket.
pub fn optimize(
    attractions: &[f64],
    rewards: &[f64],
    capacity: usize,
    tol: f64,
) -> Result<OptimizeResult> {
    check_problem(attractions, rewards, capacity)?;
    check_tol(tol)?;
    let (bracket, iterations) = bisect(attractions, rewards, capacity, tol);
    let mut scored = Vec::with_capacity(attractions.len());
    let (items, _) = select_top(attractions, rewards, capacity, bracket.lo, &mut scored);
    let assortment = Assortment::new(items)?;
    let revenue = expected_revenue(attractions, rewards, &assortment)?;
    Ok(OptimizeResult {
        assortment,
        revenue,
        lambda_star: bracket.lo,
        iterations,
    })
}

/// Exhaustive search over every subset of size at most `capacity`.
///
/// Ties go to the smaller set, then to the lexicographically smallest one.
pub fn brute_force_optimize(
    attractions: &[f64],
    rewards: &[f64],
    capacity: usize,
) -> Result<OptimizeResult> {
    let n = attractions.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n_items: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    check_problem(attractions, rewards, capacity)?;
    let mut best_items = Vec::new();
    let mut best = 0.0;
    let mut visited = 1;
    for size in 1..=capacity {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let (mut num, mut denom) = (0.0, 1.0);
            for &i in &combo {
                num += rewards[i] * attractions[i];
                denom += attractions[i];
            }
            let revenue = num / denom;
            if revenue > best {
                best = revenue;
                best_items = combo.iter().map(|i| i + 1).collect();
            }
            visited += 1;
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    let assortment = Assortment::new(best_items)?;
    let revenue = expected_revenue(attractions, rewards, &assortment)?;
    Ok(OptimizeResult {
        assortment,
        revenue,
        lambda_star: revenue,
        iterations: visited,
    })
}

/// Advances `combo` to the next k-subset of `0..n` in lexicographic order.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Pessimistic rank-breaking end to end: count, lower-bound, then optimize
/// the lower bounds against the supplied rewards.
pub fn prb(
    dataset: &OfflineDataset,
    rewards: &[f64],
    capacity: usize,
    delta: f64,
) -> Result<OptimizeResult> {
    let estimates = prb_estimate(dataset, rewards.len(), delta)?;
    optimize(&estimates.v_lcb, rewards, capacity, DEFAULT_TOL)
}
