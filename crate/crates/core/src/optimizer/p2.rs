use super::{lambda_cap, units, DeviceProfile, SystemBudget};
use crate::analytic::toi_edge_unchecked;
use crate::error::{Error, Result};
use crate::numeric::golden_section;

const REL_TOL: f64 = 1e-9;

/// The rate minimizing one device's ToI at fixed service rates.
pub(crate) fn best_lambda(mu_t: f64, mu_c: f64) -> f64 {
    let hi = lambda_cap(mu_t, mu_c);
    golden_section(|l| toi_edge_unchecked(l, mu_t, mu_c), hi * 1e-9, hi, REL_TOL).0
}

/// Per-device generation rates for fixed bandwidth shares `beta` and CPU
/// allocations `f`. Each device's ToI depends only on its own rate, so the
/// min-max problem splits into independent one-dimensional problems.
pub fn solve_p2(beta: &[f64], f: &[f64], profiles: &[DeviceProfile], budget: &SystemBudget) -> Result<Vec<f64>> {
    let us = units(profiles, budget)?;
    if beta.len() != us.len() || f.len() != us.len() {
        return Err(Error::InvalidConfig("beta, f and profiles differ in length".into()));
    }
    us.iter()
        .enumerate()
        .map(|(m, u)| {
            let (mt, mc) = (beta[m] * u.g, f[m] / budget.f_max * u.k);
            if !(mt > 0.0 && mc > 0.0) {
                return Err(Error::DegenerateAllocation { device: m });
            }
            Ok(best_lambda(mt, mc))
        })
        .collect()
}
