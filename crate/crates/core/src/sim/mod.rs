//! Discrete-event Monte Carlo simulation of the transmission/computation
//! tandem, with time-average ToI and MSE estimators.

mod checks;
mod engine;
mod estimate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checks::{
    check_fifo, check_work_conservation, departure_gap_moments, littles_law, write_trace_csv, Stage,
};
pub use engine::{simulate_multisource, simulate_tandem, tagged};
pub use estimate::{
    combine, estimate_toi, estimate_vtoi, simulate_toi, simulate_vtoi, Model, MIN_TASKS,
};

/// Source id of the tagged (observed) device.
pub const TAGGED: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Poisson task generation at rate lambda.
    #[default]
    Stochastic,
    /// A new task is generated the instant the previous one leaves the
    /// transmission queue.
    ZeroWait,
}

impl std::str::FromStr for Policy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "stochastic" => Ok(Self::Stochastic),
            "zero-wait" | "zero_wait" => Ok(Self::ZeroWait),
            other => Err(format!("unknown policy `{other}` (expected stochastic|zero-wait)")),
        }
    }
}

/// How the other sources reach the shared computation queue.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interferers {
    /// One Poisson stream of the aggregate rate, straight into the queue.
    #[default]
    Poisson,
    /// `sources` independent Poisson generators, each behind its own
    /// M/M/1 transmission queue of rate `mu_t`.
    FullTandem { sources: u32, mu_t: f64 },
}

/// Largest `sources` value accepted for [`Interferers::FullTandem`].
pub const MAX_TANDEM_INTERFERERS: u32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub num_tasks: usize,
    pub warmup: usize,
    pub seed: u64,
    #[serde(default)]
    pub policy: Policy,
    #[serde(default = "one")]
    pub replications: usize,
    /// Simulate even outside the stability region.
    #[serde(default)]
    pub allow_unstable: bool,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default)]
    pub interferers: Interferers,
    /// Replica index; selects a disjoint set of RNG streams.
    #[serde(default)]
    pub replica: u32,
}

fn one() -> usize {
    1
}

fn default_batches() -> usize {
    32
}

impl SimConfig {
    pub fn new(num_tasks: usize, seed: u64) -> Self {
        Self {
            num_tasks,
            warmup: Self::default_warmup(num_tasks),
            seed,
            policy: Policy::Stochastic,
            replications: 1,
            allow_unstable: false,
            batches: 32,
            interferers: Interferers::Poisson,
            replica: 0,
        }
    }

    pub fn zero_wait(mut self) -> Self {
        self.policy = Policy::ZeroWait;
        self
    }

    /// `max(10^4, num_tasks / 100)`, capped at half the run.
    pub fn default_warmup(num_tasks: usize) -> usize {
        (num_tasks / 100).max(10_000).min(num_tasks / 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_tasks == 0 || self.warmup >= self.num_tasks {
            return Err(Error::InvalidConfig(format!(
                "need num_tasks > warmup (num_tasks = {}, warmup = {})",
                self.num_tasks, self.warmup
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.batches < 2 {
            return Err(Error::InvalidConfig("batches must be at least 2".into()));
        }
        if let Interferers::FullTandem { sources, mu_t } = self.interferers {
            if sources == 0 || sources > MAX_TANDEM_INTERFERERS || !(mu_t > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "full-tandem interferers need 1..={MAX_TANDEM_INTERFERERS} sources and mu_t > 0"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    /// Post-warm-up tasks per replication.
    pub n_effective: usize,
    /// The per-task (renewal-reward) form of the same quantity.
    pub cross_check: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub source_id: u32,
    pub gen_time: f64,
    pub tx_start: f64,
    pub tx_end: f64,
    pub comp_start: f64,
    pub comp_end: f64,
}

impl TaskRecord {
    /// System time `T_n`.
    pub fn sojourn(&self) -> f64 {
        self.comp_end - self.gen_time
    }
}
