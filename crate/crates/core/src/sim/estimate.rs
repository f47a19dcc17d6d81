use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{engine, SimConfig, SimEstimate, TaskRecord};
use crate::analytic::{GmParams, MultiSourceRates, TandemRates};
use crate::error::{Error, Result};

/// Fewest post-warm-up tasks an estimate is computed from.
pub const MIN_TASKS: usize = 1_000;

/// What to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Edge(TandemRates),
    Fog(MultiSourceRates),
}

impl Model {
    fn tagged_records(&self, cfg: &SimConfig) -> Result<Vec<TaskRecord>> {
        match *self {
            Model::Edge(r) => engine::simulate_tandem(r, cfg),
            Model::Fog(r) => {
                let all = engine::simulate_multisource(r, cfg)?;
                Ok(engine::tagged(&all))
            }
        }
    }
}

fn t_quantile(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("df >= 1")
        .inverse_cdf(0.975)
}

/// Drops the warm-up prefix and checks ordering.
fn post_warmup<'a>(records: &'a [TaskRecord], cfg: &SimConfig) -> Result<&'a [TaskRecord]> {
    let got = records.len().saturating_sub(cfg.warmup);
    if got < MIN_TASKS {
        return Err(Error::TooFewTasks { got, need: MIN_TASKS });
    }
    let tail = &records[cfg.warmup..];
    if let Some(i) = tail.windows(2).position(|w| !(w[1].gen_time >= w[0].gen_time && w[1].comp_end >= w[0].comp_end)) {
        return Err(Error::InvalidConfig(format!(
            "records are not in FIFO delivery order at post-warm-up index {}",
            i + 1
        )));
    }
    if tail.iter().any(|r| r.source_id != tail[0].source_id) {
        return Err(Error::InvalidConfig("records mix several sources".into()));
    }
    Ok(tail)
}

/// Time average of `seg(k)` over the sawtooth, with batch-means CI.
fn time_average(
    recs: &[TaskRecord],
    batches: usize,
    seg: impl Fn(&TaskRecord, &TaskRecord) -> f64,
) -> (f64, f64) {
    let n = recs.len() - 1;
    let b = batches.min(n);
    let mut total = 0.0;
    let mut ratios = Vec::with_capacity(b);
    for j in 0..b {
        let (lo, hi) = (j * n / b, (j + 1) * n / b);
        let mut area = 0.0;
        for k in lo..hi {
            area += seg(&recs[k], &recs[k + 1]);
        }
        total += area;
        ratios.push(area / (recs[hi].comp_end - recs[lo].comp_end));
    }
    let mean = total / (recs[n].comp_end - recs[0].comp_end);
    let bm = ratios.iter().sum::<f64>() / b as f64;
    let var = ratios.iter().map(|r| (r - bm).powi(2)).sum::<f64>() / (b - 1) as f64;
    (mean, t_quantile(b - 1) * (var / b as f64).sqrt())
}

/// Time-average age of one source's deliveries.
///
/// `records` must be in generation order (FIFO) and come from a single
/// source; the first `cfg.warmup` are discarded.
pub fn estimate_toi(records: &[TaskRecord], cfg: &SimConfig) -> Result<SimEstimate> {
    let recs = post_warmup(records, cfg)?;
    // area under t - u_k between deliveries d_k and d_{k+1}
    let (mean, hw) = time_average(recs, cfg.batches, |a, b| {
        (b.comp_end - a.comp_end) * (0.5 * (b.comp_end + a.comp_end) - a.gen_time)
    });
    let mut q = 0.0;
    let mut x_sum = 0.0;
    for w in recs.windows(2) {
        let x = w[1].gen_time - w[0].gen_time;
        q += x * w[1].sojourn() + 0.5 * x * x;
        x_sum += x;
    }
    Ok(SimEstimate {
        mean,
        half_width_95: hw,
        n_effective: recs.len(),
        cross_check: q / x_sum,
    })
}

/// Time-average of `sigma^2 (1 - exp(-kappa age))` over one source's deliveries.
pub fn estimate_vtoi(records: &[TaskRecord], gm: GmParams, cfg: &SimConfig) -> Result<SimEstimate> {
    gm.validate()?;
    let recs = post_warmup(records, cfg)?;
    let k = gm.kappa;
    let s2 = gm.variance();
    // integral of 1 - exp(-k a) for a from A0 = d_k - u_k over length L
    let (mean, hw) = time_average(recs, cfg.batches, |a, b| {
        let len = b.comp_end - a.comp_end;
        let a0 = a.sojourn();
        len + (-k * a0).exp() * (-k * len).exp_m1() / k
    });
    let mut drop = 0.0;
    let mut x_sum = 0.0;
    for w in recs.windows(2) {
        let x = w[1].gen_time - w[0].gen_time;
        drop += (-k * w[0].sojourn()).exp() - (-k * (x + w[1].sojourn())).exp();
        x_sum += x;
    }
    Ok(SimEstimate {
        mean: s2 * mean,
        half_width_95: s2 * hw,
        n_effective: recs.len(),
        cross_check: s2 * (1.0 - drop / (k * x_sum)),
    })
}

/// Merges independent replications: averaged point estimates, half-widths
/// added in quadrature and divided by the count.
pub fn combine(parts: &[SimEstimate]) -> SimEstimate {
    let k = parts.len() as f64;
    SimEstimate {
        mean: parts.iter().map(|p| p.mean).sum::<f64>() / k,
        half_width_95: parts.iter().map(|p| p.half_width_95.powi(2)).sum::<f64>().sqrt() / k,
        n_effective: parts.first().map_or(0, |p| p.n_effective),
        cross_check: parts.iter().map(|p| p.cross_check).sum::<f64>() / k,
    }
}

fn replicate(cfg: &SimConfig, one: impl Fn(&SimConfig) -> Result<SimEstimate>) -> Result<SimEstimate> {
    cfg.validate()?;
    let parts = (0..cfg.replications as u32)
        .map(|r| {
            let mut c = cfg.clone();
            c.replica = cfg.replica + r;
            one(&c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&parts))
}

/// Simulates `cfg.replications` runs and estimates the tagged source's ToI.
pub fn simulate_toi(model: Model, cfg: &SimConfig) -> Result<SimEstimate> {
    replicate(cfg, |c| estimate_toi(&model.tagged_records(c)?, c))
}

/// Simulates `cfg.replications` runs and estimates the tagged source's
/// process-related ToI.
pub fn simulate_vtoi(model: Model, gm: GmParams, cfg: &SimConfig) -> Result<SimEstimate> {
    replicate(cfg, |c| estimate_vtoi(&model.tagged_records(c)?, gm, c))
}
