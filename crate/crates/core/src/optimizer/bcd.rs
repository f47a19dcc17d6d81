use serde::{Deserialize, Serialize};

use super::p2::best_lambda;
use super::p3::{solve_p3, solve_p3_bandwidth, solve_p3_compute};
use super::{assemble, units, Allocation, DeviceProfile, SystemBudget};
use crate::error::{Error, Result};

/// A variable group that is either optimized or held at given values.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Free,
    Fixed(Vec<f64>),
}

impl Block {
    fn is_free(&self) -> bool {
        matches!(self, Block::Free)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct P1Options {
    pub max_iter: usize,
    /// Stop once every variable moves by less than this, relatively.
    pub rel_tol: f64,
}

impl Default for P1Options {
    fn default() -> Self {
        Self {
            max_iter: 200,
            rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Result {
    pub allocation: Allocation,
    /// Objective after initialization and after every outer iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// False when the iteration cap was hit first.
    pub converged: bool,
}

fn rates_for(us: &[super::Unit], beta: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    us.iter().zip(beta.iter().zip(y)).map(|(u, (b, s))| (b * u.g, s * u.k)).collect()
}

fn rel_change(old: &[f64], new: &[f64]) -> f64 {
    old.iter()
        .zip(new)
        .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
        .fold(0.0, f64::max)
}

/// Alternating exact minimization over the rate block and the resource
/// block. A block update is kept only if it does not raise the objective.
///
/// `f` blocks are given in cycles/s. Default starting point for free
/// resources is an even split.
pub fn block_descent(
    lambda: Block,
    beta: Block,
    f: Block,
    profiles: &[DeviceProfile],
    budget: &SystemBudget,
    opts: P1Options,
) -> Result<P1Result> {
    let us = units(profiles, budget)?;
    let n = us.len();
    for (name, b) in [("lambda", &lambda), ("beta", &beta), ("f", &f)] {
        if let Block::Fixed(v) = b {
            if v.len() != n {
                return Err(Error::InvalidConfig(format!("fixed {name} has {} entries for {n} devices", v.len())));
            }
        }
    }
    let even = vec![1.0 / n as f64; n];
    let mut b = match &beta {
        Block::Fixed(v) => v.clone(),
        Block::Free => even.clone(),
    };
    let mut y = match &f {
        Block::Fixed(v) => v.iter().map(|x| x / budget.f_max).collect(),
        Block::Free => even.clone(),
    };
    let step_lambda = |b: &[f64], y: &[f64]| -> Vec<f64> {
        rates_for(&us, b, y).into_iter().map(|(mt, mc)| best_lambda(mt, mc)).collect()
    };
    let mut l = match &lambda {
        Block::Fixed(v) => v.clone(),
        Block::Free => step_lambda(&b, &y),
    };
    let mut alloc = assemble(&us, budget, &l, &b, &y)?;
    let mut history = vec![alloc.tau];
    let resources_free = beta.is_free() || f.is_free();
    if !resources_free && !lambda.is_free() {
        return Ok(P1Result {
            allocation: alloc,
            history,
            iterations: 0,
            converged: true,
        });
    }

    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let (l0, b0, y0) = (l.clone(), b.clone(), y.clone());
        if resources_free {
            let f_now: Vec<f64> = y.iter().map(|s| s * budget.f_max).collect();
            let cand = match (beta.is_free(), f.is_free()) {
                (true, true) => solve_p3(&l, profiles, budget),
                (true, false) => solve_p3_bandwidth(&l, &f_now, profiles, budget),
                _ => solve_p3_compute(&l, &b, profiles, budget),
            };
            match cand {
                Ok(c) if c.tau <= alloc.tau => {
                    b = c.beta.clone();
                    y = c.f.iter().map(|v| v / budget.f_max).collect();
                    alloc = c;
                }
                Ok(_) => {}
                Err(e) if iterations == 1 => return Err(e),
                Err(_) => {}
            }
        }
        if lambda.is_free() {
            let cand_l = step_lambda(&b, &y);
            let c = assemble(&us, budget, &cand_l, &b, &y)?;
            if c.tau <= alloc.tau {
                l = cand_l;
                alloc = c;
            }
        }
        history.push(alloc.tau);
        let change = rel_change(&l0, &l).max(rel_change(&b0, &b)).max(rel_change(&y0, &y));
        if change < opts.rel_tol || !(lambda.is_free() && resources_free) {
            converged = true;
            break;
        }
    }
    Ok(P1Result {
        allocation: alloc,
        history,
        iterations,
        converged,
    })
}

/// Joint optimization of rates, bandwidth shares and CPU from an even
/// split.
pub fn solve_p1(profiles: &[DeviceProfile], budget: &SystemBudget, opts: P1Options) -> Result<P1Result> {
    block_descent(Block::Free, Block::Free, Block::Free, profiles, budget, opts)
}
