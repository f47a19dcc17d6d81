use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use toi_core::optimizer::{random_instance, run_baseline, solve_p1, P1Result, Strategy};
use toi_core::{Allocation, DeviceProfile, Error, SystemBudget};

use crate::config::{ChannelSweep, OptimizerSpec, Scenario};
use crate::output::{cell, num, Csv};
use crate::{output, CliError, Outcome, RunArgs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub strategy: String,
    /// Absent when the strategy admits no stable allocation.
    pub tau: Option<f64>,
    /// `tau` over the proportional-uniform baseline's `tau`.
    pub ratio: Option<f64>,
    pub allocation: Option<Allocation>,
    pub infeasible_devices: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub devices: Vec<DeviceProfile>,
    pub budget: SystemBudget,
    pub proposed: P1Result,
    pub strategies: Vec<StrategyResult>,
}

pub fn instance(o: &OptimizerSpec) -> Result<(Vec<DeviceProfile>, SystemBudget), CliError> {
    match (&o.devices, &o.random) {
        (Some(d), _) => Ok((d.clone(), o.budget.expect("checked by the loader"))),
        (None, Some(r)) => {
            let (d, b) = random_instance(&r.instance, r.devices, r.seed);
            Ok((d, o.budget.unwrap_or(b)))
        }
        (None, None) => Err(CliError::Config("optimizer block needs `devices` or `random`".into())),
    }
}

pub fn optimize(o: &OptimizerSpec) -> Result<OptimizeReport, CliError> {
    let (devices, budget) = instance(o)?;
    let proposed = solve_p1(&devices, &budget, o.options)?;
    if !proposed.converged {
        eprintln!(
            "warning: block descent stopped at the iteration cap ({}) before converging; reporting the last iterate",
            o.options.max_iter
        );
    }
    let baselines: Vec<(Strategy, Result<Allocation, Error>)> = Strategy::ALL
        .par_iter()
        .map(|&s| (s, run_baseline(s, &devices, &budget)))
        .collect();
    let reference = baselines
        .iter()
        .find(|(s, _)| *s == Strategy::ProportionalUniform)
        .and_then(|(_, r)| r.as_ref().ok())
        .map(|a| a.tau);
    let ratio = |t: f64| reference.map(|r| t / r);
    let mut strategies = vec![StrategyResult {
        strategy: "proposed".into(),
        tau: Some(proposed.allocation.tau),
        ratio: ratio(proposed.allocation.tau),
        allocation: None,
        infeasible_devices: None,
    }];
    for (s, r) in baselines {
        strategies.push(match r {
            Ok(a) => StrategyResult {
                strategy: s.name().into(),
                tau: Some(a.tau),
                ratio: ratio(a.tau),
                allocation: Some(a),
                infeasible_devices: None,
            },
            Err(Error::Infeasible { devices }) => StrategyResult {
                strategy: s.name().into(),
                tau: None,
                ratio: None,
                allocation: None,
                infeasible_devices: Some(devices),
            },
            Err(e) => return Err(e.into()),
        });
    }
    Ok(OptimizeReport {
        devices,
        budget,
        proposed,
        strategies,
    })
}

pub fn strategies_csv(r: &OptimizeReport) -> Csv {
    let mut csv = Csv::new(
        format!(
            "min-max ToI of each strategy over {} devices; ratio = tau / tau(proportional_uniform); status lists devices without a stable allocation",
            r.devices.len()
        ),
        &["strategy", "tau", "ratio", "status"],
    );
    for s in &r.strategies {
        let status = match &s.infeasible_devices {
            Some(d) => cell(&format!("infeasible: devices {}", d.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "))),
            None => "ok".into(),
        };
        csv.rows.push(vec![
            s.strategy.clone(),
            s.tau.map_or(String::new(), num),
            s.ratio.map_or(String::new(), num),
            status,
        ]);
    }
    csv
}

/// Second device of the two-device sweep: same as `d` but with spectral
/// efficiency divided by `ratio`.
pub fn weaker(d: &DeviceProfile, budget: &SystemBudget, ratio: f64) -> DeviceProfile {
    let snr = (d.spectral_efficiency(budget) / ratio).exp2() - 1.0;
    DeviceProfile {
        h: (snr * budget.noise / d.p).sqrt(),
        ..*d
    }
}

pub fn channel_sweep(cs: &ChannelSweep, budget: &SystemBudget, o: &OptimizerSpec) -> Result<Csv, CliError> {
    let mut csv = Csv::new(
        "two-device allocation vs channel quality; ratio = spectral efficiency of device 1 / device 2; se_m in bit/s/Hz; f_m in cycles/s",
        &["ratio", "se_1", "se_2", "lambda_1", "lambda_2", "beta_1", "beta_2", "f_1", "f_2", "tau"],
    );
    let rows: Vec<Result<Vec<String>, CliError>> = cs
        .ratios
        .par_iter()
        .map(|&ratio| {
            let pair = [cs.device, weaker(&cs.device, budget, ratio)];
            let a = solve_p1(&pair, budget, o.options)?.allocation;
            Ok(vec![
                num(ratio),
                num(pair[0].spectral_efficiency(budget)),
                num(pair[1].spectral_efficiency(budget)),
                num(a.lambda[0]),
                num(a.lambda[1]),
                num(a.beta[0]),
                num(a.beta[1]),
                num(a.f[0]),
                num(a.f[1]),
                num(a.tau),
            ])
        })
        .collect();
    for r in rows {
        csv.rows.push(r?);
    }
    Ok(csv)
}

/// Where the JSON report and the strategy CSV go for `--out path`.
pub fn output_paths(out: &Path) -> (PathBuf, PathBuf) {
    if out.extension().is_some_and(|e| e == "csv") {
        (out.with_extension("json"), out.to_path_buf())
    } else {
        (out.to_path_buf(), out.with_extension("csv"))
    }
}

pub fn cmd_optimize(args: &RunArgs) -> Result<Outcome, CliError> {
    let s: Scenario = crate::config::load(&args.config)?;
    let o = s.optimizer.as_ref().ok_or_else(|| CliError::Config("missing field `optimizer`".into()))?;
    if let Some(cs) = &o.channel_sweep {
        let csv = channel_sweep(cs, &o.budget.expect("checked by the loader"), o)?;
        output::write(&args.out, &csv.render())?;
        return Ok(Outcome::Success);
    }
    let r = optimize(o)?;
    let (json, csv) = output_paths(&args.out);
    output::write_json(&json, &r)?;
    output::write(&csv, &strategies_csv(&r).render())?;
    for s in &r.strategies {
        println!(
            "{:<28} tau {:<24} ratio {}",
            s.strategy,
            s.tau.map_or("infeasible".into(), num),
            s.ratio.map_or(String::new(), num)
        );
    }
    Ok(Outcome::Success)
}
