use rayon::prelude::*;
use toi_core::analytic::ZeroWaitVariant;
use toi_core::sim;
use toi_core::GmParams;

use crate::compare::{model, replicated, sim_config};
use crate::config::{Rates, Scenario, SweepSpec};
use crate::output::{cell, num, Csv};
use crate::{metrics, CliError, Outcome, RunArgs};

fn describe(m: &str) -> &'static str {
    match m {
        "toi" => "average ToI (published form for zero-wait kinds)",
        "toi_exact" => "exact zero-wait average ToI",
        "toi_min" => "ToI at the optimal generation rate",
        "lambda_opt" => "optimal generation rate",
        "delay_t" => "mean transmission sojourn",
        "delay_c" => "mean computation sojourn",
        "vtoi" => "process-related ToI",
        "vtoi_printed" => "zero-wait process-related ToI (published form)",
        "vtoi_corrected" => "zero-wait process-related ToI (corrected form)",
        _ => "",
    }
}

/// Text for the reason column.
fn reason(e: &toi_core::Error) -> String {
    match e {
        toi_core::Error::StabilityViolation { constraint } => {
            format!("unstable: {}", constraint.split(" (").next().unwrap_or(constraint))
        }
        e => cell(&e.to_string()),
    }
}

struct Point {
    values: Vec<f64>,
    rates: Rates,
    gm: Option<GmParams>,
}

fn points(sw: &SweepSpec, rates: Rates, gm: Option<GmParams>) -> Result<Vec<Point>, CliError> {
    let mut pts = vec![Point { values: vec![], rates, gm }];
    for axis in &sw.axes {
        let grid = axis.grid().map_err(CliError::Config)?;
        let mut next = Vec::with_capacity(pts.len() * grid.len());
        for p in &pts {
            for &v in &grid {
                let (r, g) = metrics::with_param(p.rates, p.gm, &axis.param, v);
                let mut values = p.values.clone();
                values.push(v);
                next.push(Point { values, rates: r, gm: g });
            }
        }
        pts = next;
    }
    Ok(pts)
}

pub fn sweep(s: &Scenario, args: &RunArgs) -> Result<Csv, CliError> {
    let (kind, rates) = s.model()?;
    let kind = crate::compare::effective_kind(kind, args.policy)?;
    let sw = s.sweep.as_ref().ok_or_else(|| CliError::Config("missing field `sweep`".into()))?;
    let sim_vtoi = sw.simulate && sw.metrics.iter().any(|m| m == "vtoi");

    let mut columns: Vec<&str> = sw.axes.iter().map(|a| a.param.as_str()).collect();
    columns.extend(sw.metrics.iter().map(String::as_str));
    if sw.simulate {
        columns.extend(["sim_toi", "sim_toi_hw"]);
        if sim_vtoi {
            columns.extend(["sim_vtoi", "sim_vtoi_hw"]);
        }
    }
    columns.push("reason");
    let described: Vec<String> = sw.metrics.iter().map(|m| format!("{m} = {}", describe(m))).collect();
    let mut comment = format!("sweep of {} over {}; {}", kind.name(), sw.axes.iter().map(|a| a.param.as_str()).collect::<Vec<_>>().join(" x "), described.join("; "));
    if kind.zero_wait() && s.gm.is_some() {
        comment.push_str(&format!("; vtoi uses the {} form", if args.variant == ZeroWaitVariant::Printed { "published" } else { "corrected" }));
    }
    if sw.simulate {
        comment.push_str(&format!(
            "; sim_* = simulated estimate ({} tasks, seed {}), *_hw = 95% half-width",
            args.tasks, args.seed
        ));
    }
    comment.push_str("; reason = why cells are empty");
    let mut csv = Csv::new(comment, &columns);

    let cfg = sim_config(kind, args);
    if sw.simulate {
        cfg.validate()?;
    }
    let pts = points(sw, rates, s.gm)?;
    let rows: Vec<Result<Vec<String>, CliError>> = pts
        .par_iter()
        .map(|p| {
            let mut row: Vec<String> = p.values.iter().map(|v| num(*v)).collect();
            let mut why = None;
            for m in &sw.metrics {
                match metrics::evaluate(kind, p.rates, p.gm, args.variant, m) {
                    Ok(v) => row.push(num(v)),
                    Err(e) => {
                        why.get_or_insert_with(|| reason(&e));
                        row.push(String::new());
                    }
                }
            }
            if sw.simulate {
                let n = if sim_vtoi { 4 } else { 2 };
                match metrics::check_domain(kind, p.rates, p.gm) {
                    Ok(()) => {
                        let md = model(p.rates);
                        let e = replicated(&cfg, args.replications, |c| sim::simulate_toi(md, c))?;
                        row.extend([num(e.mean), num(e.half_width_95)]);
                        if let (true, Some(gm)) = (sim_vtoi, p.gm) {
                            let e = replicated(&cfg, args.replications, |c| sim::simulate_vtoi(md, gm, c))?;
                            row.extend([num(e.mean), num(e.half_width_95)]);
                        }
                    }
                    Err(e) => {
                        why.get_or_insert_with(|| reason(&e));
                        row.extend(std::iter::repeat_n(String::new(), n));
                    }
                }
            }
            row.push(why.unwrap_or_default());
            Ok(row)
        })
        .collect();
    for r in rows {
        csv.rows.push(r?);
    }
    Ok(csv)
}

pub fn cmd_sweep(args: &RunArgs) -> Result<Outcome, CliError> {
    let s = crate::config::load(&args.config)?;
    let csv = sweep(&s, args)?;
    crate::output::write(&args.out, &csv.render())?;
    Ok(Outcome::Success)
}
