//! Resource block: bandwidth shares and CPU for fixed generation rates.
//!
//! The two-resource problem is solved through its support function. For a
//! target level `tau`, each device's feasible set `{Delta_m <= tau}` is
//! convex in `(mu_t, mu_c)`. Pricing bandwidth against CPU at ratio `rho`,
//! each device picks the cheapest point of its set, where the gradient of
//! `Delta_m` is parallel to the prices. `rho` is tuned until both budgets
//! are used equally, and `tau` until both are used exactly once.

use super::{assemble, units, Allocation, DeviceProfile, SystemBudget, Unit, MARGIN};
use crate::error::{Error, Result};
use crate::numeric::brent_root_from;

const BIG: f64 = 1e300;

/// Partial derivatives of `Delta` in `(mu_t, mu_c)`; both negative.
fn grad(l: f64, x: f64, v: f64) -> (f64, f64) {
    let l2 = l * l;
    let s = x + v - l;
    let dx = -l2 * (3.0 * x - 2.0 * l) / (x.powi(3) * (x - l).powi(2)) - 1.0 / (x * x) - l2 * (s + x) / (x * x * s * s * v);
    let dv = -l2 * (3.0 * v - 2.0 * l) / (v.powi(3) * (v - l).powi(2)) - 1.0 / (v * v) - l2 * (s + v) / (v * v * s * s * x);
    (dx, dv)
}

/// `Delta - 1/l`, kept separate so that levels just above `1/l` stay
/// resolvable.
fn excess(l: f64, x: f64, v: f64) -> f64 {
    let l2 = l * l;
    l2 / (x * x * (x - l)) + 1.0 / x + l2 / (v * v * (v - l)) + 1.0 / v + l2 / (x * v * (x + v - l))
}

/// [`excess`] with the other stage infinitely fast.
fn excess_one(l: f64, x: f64) -> f64 {
    l * l / (x * x * (x - l)) + 1.0 / x
}

fn clamp(v: f64) -> f64 {
    if v.is_nan() {
        BIG
    } else {
        v.clamp(-BIG, BIG)
    }
}

/// Root of a decreasing `h` on the real line, searched outward from `guess`.
fn root_decreasing(mut h: impl FnMut(f64) -> f64, guess: f64, xtol: f64) -> Option<f64> {
    let mut step = 0.25;
    let (mut lo, mut hi) = (guess - step, guess + step);
    let (mut h_lo, mut h_hi) = (clamp(h(lo)), f64::NAN);
    let mut n = 0;
    while h_lo < 0.0 {
        (hi, h_hi) = (lo, h_lo);
        lo -= step;
        h_lo = clamp(h(lo));
        step *= 2.0;
        n += 1;
        if n > 80 {
            return None;
        }
    }
    if h_hi.is_nan() {
        h_hi = clamp(h(hi));
    }
    step = 0.25;
    while h_hi > 0.0 {
        (lo, h_lo) = (hi, h_hi);
        hi += step;
        h_hi = clamp(h(hi));
        step *= 2.0;
        n += 1;
        if n > 160 {
            return None;
        }
    }
    brent_root_from(|t| clamp(h(t)), (lo, h_lo), (hi, h_hi), xtol)
}

/// `x > l` solving `f(x) = tau` for `f` decreasing from +inf at `l`.
fn level(l: f64, tau: f64, f: impl Fn(f64) -> f64, guess: &mut f64) -> Option<f64> {
    let w = root_decreasing(|w| f(l + w.exp()) - tau, *guess, 1e-14)?;
    *guess = w;
    Some(l + w.exp())
}

struct Device {
    l: f64,
    u: Unit,
    w: f64,
    z: f64,
    xa: f64,
}

impl Device {
    fn new(l: f64, u: Unit) -> Self {
        Self {
            l,
            u,
            w: l.ln(),
            z: l.ln(),
            xa: l.ln(),
        }
    }

    /// Cheapest point of `{excess <= te}` at price ratio `r = dDelta/dx / dDelta/dv`.
    fn support(&mut self, te: f64, ln_r: f64) -> Option<(f64, f64)> {
        let l = self.l;
        let x_asym = level(l, te, |x| excess_one(l, x), &mut self.xa)?;
        let mut w = self.w;
        let mut v_of = |x: f64| -> Option<f64> {
            if excess_one(l, x) >= te {
                return None;
            }
            level(l, te, |v| excess(l, x, v), &mut w)
        };
        let z = root_decreasing(
            |z| {
                let x = x_asym + z.exp();
                match v_of(x) {
                    Some(v) => {
                        let (dx, dv) = grad(l, x, v);
                        (dx / dv).ln() - ln_r
                    }
                    None => BIG,
                }
            },
            self.z,
            1e-12,
        )?;
        self.z = z;
        let x = x_asym + z.exp();
        let v = v_of(x)?;
        self.w = w;
        Some((x, v))
    }
}

fn check_stabilizable(lambda: &[f64], us: &[Unit], need: impl Fn(f64, &Unit) -> f64) -> Result<()> {
    let shares: Vec<f64> = lambda.iter().zip(us).map(|(&l, u)| need(l, u)).collect();
    let total: f64 = shares.iter().sum();
    if total < 1.0 {
        return Ok(());
    }
    let fair = 1.0 / us.len() as f64;
    let devices = (0..us.len()).filter(|&m| shares[m] >= fair).collect();
    Err(Error::Infeasible { devices })
}

fn check_lambda(lambda: &[f64], n: usize) -> Result<()> {
    if lambda.len() != n {
        return Err(Error::InvalidConfig("lambda and profiles differ in length".into()));
    }
    if let Some(m) = lambda.iter().position(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidProfile {
            device: m,
            reason: format!("fixed lambda = {} must be strictly positive", lambda[m]),
        });
    }
    Ok(())
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Jointly optimal bandwidth shares and CPU for fixed rates `lambda`.
pub fn solve_p3(lambda: &[f64], profiles: &[DeviceProfile], budget: &SystemBudget) -> Result<Allocation> {
    let us = units(profiles, budget)?;
    check_lambda(lambda, us.len())?;
    let inv = 1.0 / (1.0 - MARGIN);
    check_stabilizable(lambda, &us, |l, u| l * inv / u.g)?;
    check_stabilizable(lambda, &us, |l, u| l * inv / u.k)?;

    let mut devs: Vec<Device> = lambda.iter().zip(&us).map(|(&l, &u)| Device::new(l, u)).collect();
    // level tau = floor + e^s; device m's excess target is offset[m] + e^s
    let floor = lambda.iter().map(|l| 1.0 / l).fold(0.0, f64::max);
    let offset: Vec<f64> = lambda.iter().map(|l| floor - 1.0 / l).collect();
    let mut ln_rho = 0.0;

    // shares at level floor + e^s, balanced across the two budgets
    let mut at_level = |s: f64, ln_rho: &mut f64| -> Option<(Vec<f64>, Vec<f64>)> {
        let te: Vec<f64> = offset.iter().map(|o| o + s.exp()).collect();
        let mut pts = vec![(0.0, 0.0); devs.len()];
        let r = root_decreasing(
            |lr| {
                let mut d = 0.0;
                for (m, dev) in devs.iter_mut().enumerate() {
                    let ln_r = lr + (dev.u.k / dev.u.g).ln();
                    match dev.support(te[m], ln_r) {
                        Some((x, v)) => {
                            pts[m] = (x, v);
                            d += x / dev.u.g - v / dev.u.k;
                        }
                        None => return f64::NAN,
                    }
                }
                d
            },
            *ln_rho,
            1e-11,
        )?;
        *ln_rho = r;
        let mut beta = vec![0.0; devs.len()];
        let mut y = vec![0.0; devs.len()];
        for (m, dev) in devs.iter_mut().enumerate() {
            let (x, v) = dev.support(te[m], r + (dev.u.k / dev.u.g).ln())?;
            beta[m] = x / dev.u.g;
            y[m] = v / dev.u.k;
        }
        Some((beta, y))
    };

    let n = us.len() as f64;
    let uniform = lambda
        .iter()
        .zip(&us)
        .map(|(&l, u)| {
            let (x, v) = (u.g / n, u.k / n);
            if l < x.min(v) {
                excess(l, x, v) - (floor - 1.0 / l)
            } else {
                BIG
            }
        })
        .fold(f64::MIN_POSITIVE, f64::max);
    let guess = if uniform < BIG { uniform.ln() } else { floor.ln() + 3.0 };
    let s = root_decreasing(
        |s| match at_level(s, &mut ln_rho) {
            Some((b, _)) => b.iter().sum::<f64>() - 1.0,
            None => BIG,
        },
        guess,
        1e-12,
    )
    .ok_or(Error::Infeasible {
        devices: (0..us.len()).collect(),
    })?;
    let (mut beta, mut y) = at_level(s, &mut ln_rho).ok_or(Error::Infeasible {
        devices: (0..us.len()).collect(),
    })?;
    normalize(&mut beta);
    normalize(&mut y);
    assemble(&us, budget, lambda, &beta, &y)
}

/// Which resource the single-resource solver allocates.
#[derive(Clone, Copy)]
enum Free {
    Bandwidth,
    Compute,
}

fn solve_single(
    lambda: &[f64],
    fixed_share: &[f64],
    which: Free,
    profiles: &[DeviceProfile],
    budget: &SystemBudget,
) -> Result<Allocation> {
    let us = units(profiles, budget)?;
    check_lambda(lambda, us.len())?;
    if fixed_share.len() != us.len() {
        return Err(Error::InvalidConfig("fixed allocation and profiles differ in length".into()));
    }
    let inv = 1.0 / (1.0 - MARGIN);
    // (rate per unit of the free resource, fixed rate of the other stage)
    let rates: Vec<(f64, f64)> = us
        .iter()
        .zip(fixed_share)
        .map(|(u, &s)| match which {
            Free::Bandwidth => (u.g, s * u.k),
            Free::Compute => (u.k, s * u.g),
        })
        .collect();
    let bad: Vec<usize> = (0..us.len()).filter(|&m| rates[m].1 < lambda[m] * inv).collect();
    if !bad.is_empty() {
        return Err(Error::Infeasible { devices: bad });
    }
    check_stabilizable(lambda, &us, |l, u| {
        l * inv
            / match which {
                Free::Bandwidth => u.g,
                Free::Compute => u.k,
            }
    })?;
    // level tau = floor + e^s, floor the largest one-stage ToI; device m's
    // excess target is offset[m] + e^s
    let one: Vec<f64> = lambda.iter().zip(&rates).map(|(&l, &(_, other))| 1.0 / l + excess_one(l, other)).collect();
    let j = (0..one.len()).fold(0, |j, m| if one[m] > one[j] { m } else { j });
    let lj = lambda[j];
    let offset: Vec<f64> = lambda
        .iter()
        .map(|&l| (1.0 / lj - 1.0 / l) + excess_one(lj, rates[j].1))
        .collect();
    let mut guesses: Vec<f64> = lambda.iter().map(|l| l.ln()).collect();
    let mut shares = |s: f64| -> Option<Vec<f64>> {
        lambda
            .iter()
            .zip(&rates)
            .zip(guesses.iter_mut().zip(&offset))
            .map(|((&l, &(unit, other)), (g, o))| level(l, o + s.exp(), |x| excess(l, x, other), g).map(|x| x / unit))
            .collect()
    };
    let s = root_decreasing(
        |s| match shares(s) {
            Some(v) => v.iter().sum::<f64>() - 1.0,
            None => BIG,
        },
        offset[j].ln(),
        1e-12,
    )
    .ok_or(Error::Infeasible {
        devices: (0..us.len()).collect(),
    })?;
    let mut free = shares(s).ok_or(Error::Infeasible {
        devices: (0..us.len()).collect(),
    })?;
    normalize(&mut free);
    match which {
        Free::Bandwidth => assemble(&us, budget, lambda, &free, fixed_share),
        Free::Compute => assemble(&us, budget, lambda, fixed_share, &free),
    }
}

/// Optimal bandwidth shares for fixed rates and fixed CPU allocation `f`.
pub fn solve_p3_bandwidth(lambda: &[f64], f: &[f64], profiles: &[DeviceProfile], budget: &SystemBudget) -> Result<Allocation> {
    let y: Vec<f64> = f.iter().map(|v| v / budget.f_max).collect();
    solve_single(lambda, &y, Free::Bandwidth, profiles, budget)
}

/// Optimal CPU allocation for fixed rates and fixed bandwidth shares `beta`.
pub fn solve_p3_compute(lambda: &[f64], beta: &[f64], profiles: &[DeviceProfile], budget: &SystemBudget) -> Result<Allocation> {
    solve_single(lambda, beta, Free::Compute, profiles, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::toi_edge_unchecked as delta;

    fn budget() -> SystemBudget {
        SystemBudget {
            bandwidth: 1e4,
            noise: 3.98e-17,
            f_max: 5e9,
        }
    }

    fn dev(h: f64, d: f64) -> DeviceProfile {
        DeviceProfile::new(0.25, h, 30.0, d)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (l, x, v) = (2.0, 5.0, 8.0);
        let (dx, dv) = grad(l, x, v);
        let h = 1e-6;
        let fx = (delta(l, x + h, v) - delta(l, x - h, v)) / (2.0 * h);
        let fv = (delta(l, x, v + h) - delta(l, x, v - h)) / (2.0 * h);
        assert!((dx - fx).abs() < 1e-8 && (dv - fv).abs() < 1e-8);
    }

    #[test]
    fn one_device_takes_everything() {
        let a = solve_p3(&[5.0], &[dev(1e-5, 100.0)], &budget()).unwrap();
        assert!((a.beta[0] - 1.0).abs() < 1e-12);
        assert!((a.f[0] - 5e9).abs() < 1e-12 * 5e9);
    }

    #[test]
    fn identical_devices_split_evenly() {
        let p = dev(1e-5, 120.0);
        let a = solve_p3(&[20.0, 20.0], &[p, p], &budget()).unwrap();
        assert!((a.beta[0] - 0.5).abs() < 1e-9, "{:?}", a.beta);
        assert!((a.f[0] - 2.5e9).abs() < 1e-9 * 5e9, "{:?}", a.f);
    }

    #[test]
    fn worse_channel_gets_more_bandwidth() {
        let a = solve_p3(&[20.0, 20.0], &[dev(2e-5, 120.0), dev(1e-5, 120.0)], &budget()).unwrap();
        assert!(a.beta[1] > a.beta[0]);
        assert!((a.delta[0] - a.delta[1]).abs() <= 1e-4 * a.tau);
    }

    #[test]
    fn single_resource_equalizes() {
        let ps = [dev(2e-5, 80.0), dev(1e-5, 200.0), dev(5e-6, 150.0)];
        let a = solve_p3_bandwidth(&[10.0, 5.0, 3.0], &[5e9 / 3.0; 3], &ps, &budget()).unwrap();
        assert!((a.beta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let spread = a.delta.iter().cloned().fold(f64::MIN, f64::max) - a.delta.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 1e-6 * a.tau);
        let c = solve_p3_compute(&[10.0, 5.0, 3.0], &a.beta, &ps, &budget()).unwrap();
        assert!(c.tau <= a.tau + 1e-12);
    }

    #[test]
    fn unstabilizable_rates_are_infeasible() {
        let p = dev(1e-5, 120.0);
        let r = solve_p3(&[1e6, 1.0], &[p, p], &budget());
        assert!(matches!(r, Err(Error::Infeasible { ref devices }) if devices == &vec![0]));
    }
}
