use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use toi_core::analytic::{self, ZeroWaitVariant};
use toi_core::sim::{self, Model};
use toi_core::{GmParams, Policy, SimConfig, SimEstimate};

use crate::config::{Kind, Rates, Scenario};
use crate::{metrics, output, CliError, Outcome, RunArgs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub analytic: f64,
    pub simulated: f64,
    pub half_width_95: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub rel_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub kind: Kind,
    pub rates: Rates,
    pub gm: Option<GmParams>,
    pub variant: ZeroWaitVariant,
    pub tasks: usize,
    pub warmup: usize,
    pub seed: u64,
    pub replications: usize,
    pub tolerance: f64,
    pub metrics: Vec<MetricComparison>,
    pub pass: bool,
}

/// Scenario kind after applying a `--policy` override.
pub fn effective_kind(kind: Kind, policy: Option<Policy>) -> Result<Kind, CliError> {
    match (kind, policy) {
        (k, None) => Ok(k),
        (Kind::Edge | Kind::EdgeZeroWait, Some(Policy::ZeroWait)) => Ok(Kind::EdgeZeroWait),
        (Kind::Fog | Kind::FogZeroWait, Some(Policy::ZeroWait)) => Ok(Kind::FogZeroWait),
        (k, Some(Policy::Stochastic)) if !k.zero_wait() => Ok(k),
        (k, Some(_)) => Err(CliError::Config(format!("--policy stochastic contradicts kind {}", k.name()))),
    }
}

/// Simulator settings for a scenario kind from the command-line flags.
pub fn sim_config(kind: Kind, args: &RunArgs) -> SimConfig {
    let mut cfg = SimConfig::new(args.tasks, args.seed);
    if let Some(w) = args.warmup {
        cfg.warmup = w;
    }
    if kind.zero_wait() {
        cfg = cfg.zero_wait();
    }
    cfg
}

pub fn model(rates: Rates) -> Model {
    match rates {
        Rates::Edge(e) => Model::Edge(e),
        Rates::Fog(f) => Model::Fog(f),
    }
}

/// Runs the replications concurrently and merges them in replica order.
pub fn replicated(
    cfg: &SimConfig,
    replications: usize,
    one: impl Fn(&SimConfig) -> toi_core::Result<SimEstimate> + Sync,
) -> Result<SimEstimate, CliError> {
    cfg.validate()?;
    if replications == 0 {
        return Err(CliError::Config("--replications must be at least 1".into()));
    }
    let parts = (0..replications as u32)
        .into_par_iter()
        .map(|r| {
            let mut c = cfg.clone();
            c.replica = r;
            one(&c)
        })
        .collect::<toi_core::Result<Vec<_>>>()?;
    Ok(sim::combine(&parts))
}

/// Reference ToI: zero-wait kinds use the published form for `printed`
/// and the exact form for `corrected`.
fn analytic_toi(kind: Kind, rates: Rates, variant: ZeroWaitVariant) -> toi_core::Result<f64> {
    let name = match (kind.zero_wait(), variant) {
        (true, ZeroWaitVariant::Corrected) => "toi_exact",
        _ => "toi",
    };
    metrics::evaluate(kind, rates, None, variant, name)
}

fn compare_one(metric: &str, analytic: f64, e: SimEstimate, tol: f64) -> MetricComparison {
    let rel_error = (e.mean - analytic).abs() / analytic.abs();
    MetricComparison {
        metric: metric.into(),
        analytic,
        simulated: e.mean,
        half_width_95: e.half_width_95,
        ci_low: e.mean - e.half_width_95,
        ci_high: e.mean + e.half_width_95,
        rel_error,
        pass: rel_error <= tol,
    }
}

pub fn compare(s: &Scenario, args: &RunArgs) -> Result<CompareReport, CliError> {
    let (kind, rates) = s.model()?;
    let kind = effective_kind(kind, args.policy)?;
    if !(args.tolerance > 0.0 && args.tolerance.is_finite()) {
        return Err(CliError::Config("--tolerance must be positive".into()));
    }
    metrics::check_domain(kind, rates, s.gm)?;
    let cfg = sim_config(kind, args);
    let m = model(rates);

    let mut out = vec![];
    let toi = analytic_toi(kind, rates, args.variant)?;
    let e = replicated(&cfg, args.replications, |c| sim::simulate_toi(m, c))?;
    out.push(compare_one("toi", toi, e, args.tolerance));
    if let Some(gm) = s.gm {
        let want = match (kind, rates) {
            (Kind::Edge, Rates::Edge(r)) => analytic::vtoi_edge(r, gm)?,
            (Kind::EdgeZeroWait, Rates::Edge(r)) => analytic::vtoi_edge_zero_wait(r.mu_t, r.mu_c, gm, args.variant)?,
            _ => return Err(CliError::Config("`gm` needs an edge kind".into())),
        };
        let e = replicated(&cfg, args.replications, |c| sim::simulate_vtoi(m, gm, c))?;
        out.push(compare_one("vtoi", want, e, args.tolerance));
    }
    Ok(CompareReport {
        kind,
        rates,
        gm: s.gm,
        variant: args.variant,
        tasks: cfg.num_tasks,
        warmup: cfg.warmup,
        seed: cfg.seed,
        replications: args.replications,
        tolerance: args.tolerance,
        pass: out.iter().all(|c| c.pass),
        metrics: out,
    })
}

pub fn cmd_compare(args: &RunArgs) -> Result<Outcome, CliError> {
    let s = crate::config::load(&args.config)?;
    let r = compare(&s, args)?;
    output::write_json(&args.out, &r)?;
    for c in &r.metrics {
        println!(
            "{:<5} analytic {} simulated {} +/- {} rel.error {} {}",
            c.metric,
            output::num(c.analytic),
            output::num(c.simulated),
            output::num(c.half_width_95),
            output::num(c.rel_error),
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(if r.pass { Outcome::Success } else { Outcome::Fail })
}
