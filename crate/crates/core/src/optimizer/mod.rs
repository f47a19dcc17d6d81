//! Min-max ToI allocation of task generation rate, bandwidth share and CPU
//! across edge devices, by block coordinate descent over a rate block and
//! a resource block.

mod baselines;
mod bcd;
mod convexity;
mod instance;
mod p2;
mod p3;
pub mod reference;

use serde::{Deserialize, Serialize};

use crate::analytic::{toi_edge, TandemRates};
use crate::error::{Error, Result};

pub use baselines::{run_baseline, Strategy};
pub use bcd::{block_descent, solve_p1, Block, P1Options, P1Result};
pub use convexity::{verify_multiconvexity, ConvexityReport};
pub use instance::{random_instance, InstanceSpec};
pub use p2::solve_p2;
pub use p3::{solve_p3, solve_p3_bandwidth, solve_p3_compute};

/// Hard stability margin for the optimizer: `lambda <= (1 - MARGIN) min(mu_t, mu_c)`.
pub const MARGIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    /// Transmit power (W).
    pub p: f64,
    /// Channel propagation coefficient.
    pub h: f64,
    /// CPU cycles per bit.
    pub c: f64,
    /// Mean task size (bits).
    pub d_bar: f64,
    /// Priority weight, used only by the task-aware rule.
    #[serde(default = "unit")]
    pub alpha: f64,
}

fn unit() -> f64 {
    1.0
}

impl DeviceProfile {
    pub fn new(p: f64, h: f64, c: f64, d_bar: f64) -> Self {
        Self {
            p,
            h,
            c,
            d_bar,
            alpha: 1.0,
        }
    }

    pub fn validate(&self, device: usize) -> Result<()> {
        for (name, v) in [
            ("p", self.p),
            ("h", self.h),
            ("c", self.c),
            ("d_bar", self.d_bar),
            ("alpha", self.alpha),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidProfile {
                    device,
                    reason: format!("{name} = {v} must be finite and strictly positive"),
                });
            }
        }
        Ok(())
    }

    /// Received SNR over the full band, `p h^2 / N0`.
    pub fn snr(&self, budget: &SystemBudget) -> f64 {
        self.p * self.h * self.h / budget.noise
    }

    /// Spectral efficiency `log2(1 + snr)` (bit/s/Hz).
    pub fn spectral_efficiency(&self, budget: &SystemBudget) -> f64 {
        self.snr(budget).ln_1p() / std::f64::consts::LN_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemBudget {
    /// Total bandwidth B (Hz).
    pub bandwidth: f64,
    /// Noise power N0 (W).
    pub noise: f64,
    /// Edge-server CPU capacity (cycles/s).
    pub f_max: f64,
}

impl SystemBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bandwidth", self.bandwidth),
            ("noise", self.noise),
            ("f_max", self.f_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "budget {name} = {v} must be finite and strictly positive"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub lambda: Vec<f64>,
    pub beta: Vec<f64>,
    /// CPU cycles/s per device.
    pub f: Vec<f64>,
    /// Per-device ToI.
    pub delta: Vec<f64>,
    /// `max(delta)`.
    pub tau: f64,
}

/// `(mu_t, mu_c)` for one device: `mu_t = B beta log2(1 + snr) / d_bar`,
/// `mu_c = f / (c d_bar)`.
pub fn service_rates(profile: &DeviceProfile, beta: f64, f: f64, budget: &SystemBudget) -> Result<(f64, f64)> {
    profile.validate(0)?;
    if !(beta >= 0.0 && f >= 0.0) {
        return Err(Error::InvalidProfile {
            device: 0,
            reason: format!("beta = {beta} and f = {f} must be non-negative"),
        });
    }
    let r = budget.bandwidth * beta * profile.spectral_efficiency(budget);
    Ok((r / profile.d_bar, f / (profile.c * profile.d_bar)))
}

/// Per-device ToI; same closed form and domain as [`toi_edge`].
pub fn device_toi(lambda: f64, mu_t: f64, mu_c: f64) -> Result<f64> {
    toi_edge(TandemRates::new(lambda, mu_t, mu_c))
}

/// Rates per unit of resource share: `mu_t = beta g`, `mu_c = y k` with
/// `y = f / f_max`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Unit {
    pub g: f64,
    pub k: f64,
}

pub(crate) fn units(profiles: &[DeviceProfile], budget: &SystemBudget) -> Result<Vec<Unit>> {
    budget.validate()?;
    if profiles.is_empty() {
        return Err(Error::InvalidConfig("no devices".into()));
    }
    profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.validate(i)?;
            Ok(Unit {
                g: budget.bandwidth * p.spectral_efficiency(budget) / p.d_bar,
                k: budget.f_max / (p.c * p.d_bar),
            })
        })
        .collect()
}

/// Largest admissible rate for given service rates.
pub(crate) fn lambda_cap(mu_t: f64, mu_c: f64) -> f64 {
    (1.0 - MARGIN) * mu_t.min(mu_c)
}

/// Assembles an [`Allocation`] from shares, evaluating every device.
pub(crate) fn assemble(
    units: &[Unit],
    budget: &SystemBudget,
    lambda: &[f64],
    beta: &[f64],
    y: &[f64],
) -> Result<Allocation> {
    let mut delta = Vec::with_capacity(units.len());
    let mut bad = vec![];
    for (m, u) in units.iter().enumerate() {
        let (mt, mc) = (beta[m] * u.g, y[m] * u.k);
        if !(lambda[m] > 0.0 && lambda[m] <= lambda_cap(mt, mc) * (1.0 + 1e-12)) {
            bad.push(m);
            continue;
        }
        delta.push(crate::analytic::toi_edge_unchecked(lambda[m], mt, mc));
    }
    if !bad.is_empty() {
        return Err(Error::Infeasible { devices: bad });
    }
    let tau = delta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Allocation {
        lambda: lambda.to_vec(),
        beta: beta.to_vec(),
        f: y.iter().map(|s| s * budget.f_max).collect(),
        delta,
        tau,
    })
}
