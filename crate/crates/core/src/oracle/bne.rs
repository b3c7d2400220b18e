//! Symmetric Bayesian-Nash bid function of the discriminatory-price auction,
//! solved by damped fixed-point iteration on the first-order condition
//! `B = v - ψ(B, k) / ψ'(B, k)`.
//!
//! Each sweep freezes the current population bid function, solves the
//! condition for every `(value, size)` grid point on shared opponent draws,
//! moves each bid a fraction `damping` towards that solution, and then projects
//! each size's bids onto non-decreasing functions of the value (pool
//! adjacent violators), capped at the value itself.

use serde::{Deserialize, Serialize};

use super::psi::{binomial_se, BneEnvironment, OpponentDraws, PsiEvaluator};
use crate::error::{config, Result};

/// How each sweep computes a grid point's target bid.
///
/// Errors in the population bid function are carried along the value axis
/// by this iteration, so the slope in `Linearized` is a backward (upwind)
/// difference whose step covers the distance one sweep moves them; a
/// central difference amplifies grid-scale wiggles and never settles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BneUpdate {
    /// `v - ψ(B) / ψ'(B)` at the current bid.
    #[default]
    Linearized,
    /// Solve `b = v - ψ(b) / ψ'(b)` against the frozen opponents by
    /// maximising `(v - b) ψ(b)` on a fine bid grid. Targets are quantised
    /// to that grid, so light damping may stall just above `tol`.
    FocRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BneConfig {
    pub update: BneUpdate,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub samples: usize,
    /// Finite-difference step for `ψ'`; defaults to the value-grid spacing.
    pub fd_step: Option<f64>,
    /// Spacing of candidate bids when solving each point's first-order
    /// condition; defaults to a fifth of `fd_step`.
    pub search_step: Option<f64>,
    /// Floor on `ψ'` in the linearised update.
    pub derivative_floor: f64,
    pub seed: u64,
}

impl Default for BneConfig {
    fn default() -> Self {
        BneConfig {
            update: BneUpdate::Linearized,
            damping: 0.1,
            tol: 1e-3,
            max_iter: 500,
            samples: 20_000,
            fd_step: None,
            search_step: None,
            derivative_floor: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BneSolution {
    pub value_grid: Vec<f64>,
    pub size_grid: Vec<f64>,
    /// `bids[size_index][value_index]`.
    pub bids: Vec<Vec<f64>>,
    pub residual: f64,
    /// `max |T(B) - B|` over grid points after each sweep, where `T` is the
    /// undamped update (the per-sweep change divided by the damping).
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `(size_index, value_index)` points skipped in the final sweep because
    /// the estimated derivative was negative.
    pub flagged: Vec<(usize, usize)>,
    pub fd_step: f64,
}

fn interpolate(grid: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= grid[0] {
        return ys[0];
    }
    let last = grid.len() - 1;
    if x >= grid[last] {
        return ys[last];
    }
    let hi = grid.partition_point(|&g| g <= x);
    let lo = hi - 1;
    let t = (x - grid[lo]) / (grid[hi] - grid[lo]);
    ys[lo] + t * (ys[hi] - ys[lo])
}

impl BneSolution {
    /// Bid of a bidder with `value` and the `size_index`-th size, linearly
    /// interpolated between grid values.
    pub fn bid(&self, value: f64, size_index: usize) -> f64 {
        interpolate(&self.value_grid, &self.bids[size_index], value)
    }
}

/// Pool-adjacent-violators projection onto non-decreasing sequences.
fn isotonic(ys: &mut [f64]) {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys.iter() {
        blocks.push((y, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().expect("two blocks") = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    let mut i = 0;
    for (m, n) in blocks {
        for y in &mut ys[i..i + n] {
            *y = m;
        }
        i += n;
    }
}

/// Central-difference slope of `ψ` at `bid`, used to flag points where the
/// estimate decreases.
/// Backward difference of the bid function at grid point `g` (forward at 0).
fn local_slope(grid: &[f64], bids: &[f64], g: usize) -> f64 {
    if grid.len() < 2 {
        return 0.0;
    }
    let (a, b) = if g == 0 { (0, 1) } else { (g - 1, g) };
    ((bids[b] - bids[a]) / (grid[b] - grid[a])).max(0.0)
}

fn psi_slope(eval: &PsiEvaluator, bid: f64, size: f64, h: f64) -> f64 {
    (eval.psi(bid + h, size) - eval.psi(bid - h, size)) / (2.0 * h)
}

/// Bid in `[0, value]` solving the first-order condition against the frozen
/// opponents: the maximiser of `(v - b) ψ(b)` over bids spaced `step` apart
/// (lowest on ties). Where `ψ` is differentiable this is the `b` with
/// `b = v - ψ(b) / ψ'(b)`.
fn foc_root(eval: &PsiEvaluator, value: f64, size: f64, step: f64) -> f64 {
    let steps = (value.max(0.0) / step).floor() as usize;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=steps {
        let b = i as f64 * step;
        let pay = (value - b) * eval.psi(b, size);
        if pay > best.1 {
            best = (b, pay);
        }
    }
    best.0
}

pub fn solve_dp_bne(value_grid: &[f64], env: &BneEnvironment, cfg: &BneConfig) -> Result<BneSolution> {
    env.validate()?;
    if value_grid.is_empty() || value_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config("value grid must be non-empty and strictly increasing"));
    }
    if !(cfg.tol > 0.0) || !(cfg.damping > 0.0 && cfg.damping <= 1.0) || cfg.samples == 0 {
        return Err(config("need tol > 0, damping in (0, 1] and at least one sample"));
    }
    let h = cfg.fd_step.unwrap_or_else(|| {
        if value_grid.len() > 1 {
            value_grid[1] - value_grid[0]
        } else {
            ((env.value_hi - env.value_lo) / 20.0).max(1e-3)
        }
    });
    if !(h > 0.0) {
        return Err(config("finite-difference step must be positive"));
    }
    let search_step = cfg.search_step.unwrap_or(h / 5.0);
    if !(search_step > 0.0) {
        return Err(config("bid search step must be positive"));
    }
    let draws = OpponentDraws::generate(env, cfg.samples, cfg.seed);
    let mut bids: Vec<Vec<f64>> = env.sizes.iter().map(|_| value_grid.to_vec()).collect();
    let mut residuals = Vec::new();
    let mut flagged = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_iter {
        let eval = PsiEvaluator::new(env, &draws, |v, s| interpolate(value_grid, &bids[s], v));
        flagged.clear();
        let mut next = bids.clone();
        for (s, &size) in env.sizes.iter().enumerate() {
            for (g, &value) in value_grid.iter().enumerate() {
                let bid = bids[s][g];
                let slope = psi_slope(&eval, bid, size, h);
                if slope < 0.0 {
                    flagged.push((s, g));
                    continue;
                }
                let target = match cfg.update {
                    BneUpdate::FocRoot => foc_root(&eval, value, size, search_step),
                    BneUpdate::Linearized => {
                        // A sweep carries bid errors across roughly
                        // `damping * v` in value; the difference must span at
                        // least that much or the top of the grid oscillates.
                        let step = h.max(cfg.damping * value * local_slope(value_grid, &bids[s], g));
                        let psi = eval.psi(bid, size);
                        let slope = if bid >= step {
                            (psi - eval.psi(bid - step, size)) / step
                        } else {
                            (eval.psi(bid + step, size) - psi) / step
                        };
                        (value - psi / slope.max(cfg.derivative_floor)).clamp(0.0, value.max(0.0))
                    }
                };
                next[s][g] = (1.0 - cfg.damping) * bid + cfg.damping * target;
            }
            isotonic(&mut next[s]);
            for (b, &v) in next[s].iter_mut().zip(value_grid) {
                *b = b.clamp(0.0, v.max(0.0));
            }
        }
        let residual = bids.iter().flatten().zip(next.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            / cfg.damping;
        residuals.push(residual);
        bids = next;
        if residual < cfg.tol {
            converged = true;
            break;
        }
    }

    Ok(BneSolution {
        value_grid: value_grid.to_vec(),
        size_grid: env.sizes.clone(),
        bids,
        residual: residuals.last().copied().unwrap_or(f64::INFINITY),
        iterations: residuals.len(),
        residuals,
        converged,
        flagged,
        fd_step: h,
    })
}

/// Best-response check at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrCheck {
    pub size_index: usize,
    pub value: f64,
    pub solved_bid: f64,
    pub solved_payoff: f64,
    pub best_bid: f64,
    pub best_payoff: f64,
    /// Standard error of `best_payoff - solved_payoff`.
    pub std_error: f64,
    pub gain: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrCheckReport {
    pub checks: Vec<BrCheck>,
    pub passed: bool,
    pub worst_excess: f64,
}

/// Against the solved population, compares each grid point's expected
/// payoff `(v - B) ψ(B)` at its solved bid with the best bid on a grid of
/// spacing `bid_step`, using fresh draws. A point passes when the gain is at
/// most `bid_step + se_multiple` standard errors.
pub fn check_bne_best_response(
    solution: &BneSolution,
    env: &BneEnvironment,
    bid_step: f64,
    se_multiple: f64,
    samples: usize,
    seed: u64,
) -> Result<BrCheckReport> {
    if !(bid_step > 0.0) {
        return Err(config("bid step must be positive"));
    }
    let draws = OpponentDraws::generate(env, samples, seed);
    let eval = PsiEvaluator::new(env, &draws, |v, s| solution.bid(v, s));
    let payoff = |v: f64, b: f64, k: f64| -> (f64, f64) {
        let p = eval.psi(b, k);
        ((v - b) * p, (v - b).abs() * binomial_se(p, samples))
    };
    let mut checks = Vec::new();
    for (s, &size) in env.sizes.iter().enumerate() {
        for (g, &value) in solution.value_grid.iter().enumerate() {
            let solved_bid = solution.bids[s][g];
            let (solved_payoff, se_solved) = payoff(value, solved_bid, size);
            let mut best = (solved_bid, solved_payoff, 0.0);
            let steps = (value.max(0.0) / bid_step).floor() as usize;
            for i in 0..=steps {
                let b = i as f64 * bid_step;
                let (p, se) = payoff(value, b, size);
                if p > best.1 {
                    best = (b, p, se);
                }
            }
            let std_error = (se_solved.powi(2) + best.2.powi(2)).sqrt();
            let gain = best.1 - solved_payoff;
            checks.push(BrCheck {
                size_index: s,
                value,
                solved_bid,
                solved_payoff,
                best_bid: best.0,
                best_payoff: best.1,
                std_error,
                gain,
                tolerance: bid_step + se_multiple * std_error,
            });
        }
    }
    let worst_excess = checks.iter().map(|c| c.gain - c.tolerance).fold(f64::NEG_INFINITY, f64::max);
    Ok(BrCheckReport { passed: worst_excess <= 0.0, checks, worst_excess })
}
