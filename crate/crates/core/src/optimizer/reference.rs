//! Slow, independent solvers used to verify the production optimizer.

use super::p2::best_lambda;
use super::{units, DeviceProfile, SystemBudget, Unit, MARGIN};
use crate::analytic::toi_edge_unchecked as delta;
use crate::error::{Error, Result};
use crate::numeric::brent_root;

fn delta_one(l: f64, x: f64) -> f64 {
    l * l / (x * x * (x - l)) + 1.0 / x + 1.0 / l
}

/// Smallest `x` with `Delta(l, x, v) <= tau`, by bisection-bracketed Brent.
fn min_x(l: f64, v: f64, tau: f64) -> Option<f64> {
    if delta_one(l, v) >= tau {
        return None;
    }
    let f = |x: f64| delta(l, x, v) - tau;
    let lo = l * (1.0 + 1e-15);
    let mut hi = 2.0 * l;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return None;
        }
    }
    brent_root(f, lo, hi, 1e-15 * hi)
}

/// Euclidean projection onto `{y >= lo, sum y = 1}`.
fn project(y: &[f64], lo: &[f64]) -> Vec<f64> {
    let budget = 1.0 - lo.iter().sum::<f64>();
    let z: Vec<f64> = y.iter().zip(lo).map(|(a, b)| a - b).collect();
    let mut s = z.clone();
    s.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, v) in s.iter().enumerate() {
        acc += v;
        let t = (acc - budget) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    z.iter().zip(lo).map(|(a, b)| (a - theta).max(0.0) + b).collect()
}

/// Minimum total bandwidth needed to reach level `tau`, over CPU splits,
/// by projected gradient with backtracking.
fn min_bandwidth(lambda: &[f64], us: &[Unit], tau: f64) -> Option<f64> {
    let n = us.len();
    // CPU share below which the level is unreachable at any bandwidth
    let lo: Vec<f64> = lambda
        .iter()
        .zip(us)
        .map(|(&l, u)| {
            let v = brent_root(|v| delta_one(l, v) - tau, l * (1.0 + 1e-15), 1e12 * l, 1e-16 * l)?;
            Some(v.max(l / (1.0 - MARGIN)) / u.k * (1.0 + 1e-9))
        })
        .collect::<Option<_>>()?;
    if lo.iter().sum::<f64>() >= 1.0 {
        return None;
    }
    let total = |y: &[f64]| -> Option<f64> {
        let mut s = 0.0;
        for m in 0..n {
            s += min_x(lambda[m], y[m] * us[m].k, tau)? / us[m].g;
        }
        Some(s)
    };
    let grad = |y: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|m| {
                let (l, u) = (lambda[m], us[m]);
                let v = y[m] * u.k;
                let x = min_x(l, v, tau).unwrap_or(f64::INFINITY);
                let h = 1e-7 * (v - l);
                let dx = (delta(l, x * (1.0 + 1e-7), v) - delta(l, x * (1.0 - 1e-7), v)) / (2e-7 * x);
                let dv = (delta(l, x, v + h) - delta(l, x, v - h)) / (2.0 * h);
                -(dv / dx) * u.k / u.g
            })
            .collect()
    };
    let mut y = project(&vec![1.0 / n as f64; n], &lo);
    let mut f = total(&y)?;
    let mut step = 1e-3;
    for _ in 0..20_000 {
        let g = grad(&y);
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = project(&y.iter().zip(&g).map(|(a, b)| a - step * b).collect::<Vec<_>>(), &lo);
            let d2: f64 = cand.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 == 0.0 {
                break;
            }
            if let Some(fc) = total(&cand) {
                if fc <= f - 1e-4 * d2 / step {
                    moved = (f - fc) > 1e-15 * f;
                    y = cand;
                    f = fc;
                    step *= 2.0;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Some(f)
}

/// Reference resource block: bisection on the level, each level's
/// feasibility decided by [`min_bandwidth`]. Returns the optimal level.
pub fn reference_p3_tau(lambda: &[f64], profiles: &[DeviceProfile], budget: &SystemBudget) -> Result<f64> {
    let us = units(profiles, budget)?;
    let feasible = |tau: f64| min_bandwidth(lambda, &us, tau).is_some_and(|b| b <= 1.0);
    let mut lo = lambda.iter().map(|l| 1.0 / l).fold(0.0, f64::max);
    let mut hi = 2.0 * lo;
    let mut n = 0;
    while !feasible(hi) {
        lo = hi;
        hi *= 2.0;
        n += 1;
        if n > 60 {
            return Err(Error::Infeasible {
                devices: (0..us.len()).collect(),
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Compositions of 1 into `n` shares whose first `n - 1` entries come
/// from `axes`; the last share takes the rest.
fn compositions(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for axis in axes {
        let mut next = vec![];
        for p in &out {
            let used: f64 = p.iter().sum();
            for &v in axis {
                if v > 0.0 && used + v < 1.0 {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    for p in &mut out {
        let used: f64 = p.iter().sum();
        p.push(1.0 - used);
    }
    out
}

/// ToI with the rate chosen optimally for the given service rates.
fn best_delta(mt: f64, mc: f64) -> f64 {
    delta(best_lambda(mt, mc), mt, mc)
}

/// Smallest bandwidth share bringing the rate-optimized ToI down to `tau`.
fn share_for(u: &Unit, mc: f64, tau: f64) -> Option<f64> {
    // with unlimited bandwidth the rate-optimized ToI tends to its value
    // for a single M/M/1 stage at mc
    if best_delta(1e12 * mc, mc) >= tau {
        return None;
    }
    let f = |b: f64| best_delta(b * u.g, mc) - tau;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while f(lo) <= 0.0 {
        lo /= 2.0;
    }
    brent_root(f, lo, hi, 1e-13 * hi)
}

/// Optimal level for fixed CPU shares `y`, bandwidth and rates optimized:
/// the `tau` at which the minimal bandwidth shares sum to one.
fn tau_for_cpu(us: &[Unit], y: &[f64]) -> f64 {
    let need = |tau: f64| -> f64 {
        let mut s = 0.0;
        for (u, &share) in us.iter().zip(y) {
            match share_for(u, share * u.k, tau) {
                Some(b) if s + b <= 2.0 => s += b,
                _ => return 1.0,
            }
        }
        s - 1.0
    };
    let mut lo: f64 = us.iter().zip(y).map(|(u, &share)| best_delta(1e12 * share * u.k, share * u.k)).fold(0.0, f64::max);
    let mut hi = 2.0 * lo;
    while need(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    brent_root(need, lo, hi, 1e-12 * hi).unwrap_or(hi)
}

/// Grid search for the joint problem (small device counts): CPU splits on
/// a grid of `res` steps per share, refined by `zooms` rounds around the
/// best point; bandwidth and rates are optimized exactly at every point.
/// Returns `(tau, cpu_share)`.
pub fn grid_search_p1(profiles: &[DeviceProfile], budget: &SystemBudget, res: usize, zooms: usize) -> Result<(f64, Vec<f64>)> {
    let us = units(profiles, budget)?;
    let n = us.len();
    let mut axes: Vec<Vec<f64>> = vec![(1..res).map(|i| i as f64 / res as f64).collect(); n - 1];
    let mut best = (f64::INFINITY, vec![1.0; n]);
    let mut spacing = 1.0 / res as f64;
    for stage in 0..=zooms {
        for y in compositions(&axes) {
            let t = tau_for_cpu(&us, &y);
            if t < best.0 {
                best = (t, y);
            }
        }
        if stage == zooms {
            break;
        }
        let window = 2.0 * spacing;
        spacing = window / 10.0;
        axes = best.1[..n - 1]
            .iter()
            .map(|&c| (0..=20).map(|i| c - window + i as f64 * spacing).filter(|v| *v > 0.0).collect())
            .collect();
    }
    Ok(best)
}
