use serde::{Deserialize, Serialize};

use super::bcd::{block_descent, Block, P1Options};
use super::{Allocation, DeviceProfile, SystemBudget};
use crate::error::Result;

/// Fixed generation rate of the fixed-generation baseline (tasks/s).
pub const FIXED_LAMBDA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Even CPU split; rates and bandwidth optimized.
    UniformComputation,
    /// Bandwidth inversely proportional to spectral efficiency; rates and
    /// CPU optimized.
    ProportionalCommunication,
    /// Proportional bandwidth and even CPU; rates optimized.
    ProportionalUniform,
    /// CPU proportional to `sqrt(alpha d_bar)`; rates and bandwidth optimized.
    TaskAwareComputation,
    /// CPU as task-aware, bandwidth proportional to `sqrt(d_bar / R)`
    /// with `R` the full-band rate; rates optimized.
    TaskChannelAware,
    /// Every rate fixed at 0.1; bandwidth and CPU optimized.
    FixedGeneration,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::UniformComputation,
        Strategy::ProportionalCommunication,
        Strategy::ProportionalUniform,
        Strategy::TaskAwareComputation,
        Strategy::TaskChannelAware,
        Strategy::FixedGeneration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::UniformComputation => "uniform_computation",
            Strategy::ProportionalCommunication => "proportional_communication",
            Strategy::ProportionalUniform => "proportional_uniform",
            Strategy::TaskAwareComputation => "task_aware_computation",
            Strategy::TaskChannelAware => "task_channel_aware",
            Strategy::FixedGeneration => "fixed_generation",
        }
    }
}

fn shares(w: impl Iterator<Item = f64>) -> Vec<f64> {
    let w: Vec<f64> = w.collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn even_f(n: usize, budget: &SystemBudget) -> Vec<f64> {
    vec![budget.f_max / n as f64; n]
}

fn proportional_beta(profiles: &[DeviceProfile], budget: &SystemBudget) -> Vec<f64> {
    shares(profiles.iter().map(|p| 1.0 / p.spectral_efficiency(budget)))
}

fn task_aware_f(profiles: &[DeviceProfile], budget: &SystemBudget) -> Vec<f64> {
    shares(profiles.iter().map(|p| (p.alpha * p.d_bar).sqrt()))
        .into_iter()
        .map(|s| s * budget.f_max)
        .collect()
}

fn task_channel_beta(profiles: &[DeviceProfile], budget: &SystemBudget) -> Vec<f64> {
    shares(profiles.iter().map(|p| (p.d_bar / (budget.bandwidth * p.spectral_efficiency(budget))).sqrt()))
}

/// Runs one baseline: fixes the variables the rule prescribes and
/// optimizes the rest by the same block descent as the proposed scheme.
pub fn run_baseline(strategy: Strategy, profiles: &[DeviceProfile], budget: &SystemBudget) -> Result<Allocation> {
    let n = profiles.len();
    let (l, b, f) = match strategy {
        Strategy::UniformComputation => (Block::Free, Block::Free, Block::Fixed(even_f(n, budget))),
        Strategy::ProportionalCommunication => (Block::Free, Block::Fixed(proportional_beta(profiles, budget)), Block::Free),
        Strategy::ProportionalUniform => (
            Block::Free,
            Block::Fixed(proportional_beta(profiles, budget)),
            Block::Fixed(even_f(n, budget)),
        ),
        Strategy::TaskAwareComputation => (Block::Free, Block::Free, Block::Fixed(task_aware_f(profiles, budget))),
        Strategy::TaskChannelAware => (
            Block::Free,
            Block::Fixed(task_channel_beta(profiles, budget)),
            Block::Fixed(task_aware_f(profiles, budget)),
        ),
        Strategy::FixedGeneration => (Block::Fixed(vec![FIXED_LAMBDA; n]), Block::Free, Block::Free),
    };
    Ok(block_descent(l, b, f, profiles, budget, P1Options::default())?.allocation)
}
