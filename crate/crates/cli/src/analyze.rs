use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use toi_core::{GmParams, ZeroWaitVariant};

use crate::config::{Kind, Rates, Scenario};
use crate::{metrics, output, CliError, Outcome, RunArgs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub kind: Kind,
    pub rates: Rates,
    pub gm: Option<GmParams>,
    /// Formula behind `vtoi` for zero-wait scenarios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<ZeroWaitVariant>,
    pub metrics: BTreeMap<String, f64>,
}

pub fn analyze(s: &Scenario, variant: ZeroWaitVariant) -> Result<AnalyzeReport, CliError> {
    let (kind, rates) = s.model()?;
    metrics::check_domain(kind, rates, s.gm)?;
    let mut out = BTreeMap::new();
    for m in metrics::available(kind, s.gm.is_some()) {
        out.insert(m.to_string(), metrics::evaluate(kind, rates, s.gm, variant, m)?);
    }
    Ok(AnalyzeReport {
        kind,
        rates,
        gm: s.gm,
        variant: (kind.zero_wait() && s.gm.is_some()).then_some(variant),
        metrics: out,
    })
}

/// Aligned two-column text rendering.
pub fn table(r: &AnalyzeReport) -> String {
    let w = r.metrics.keys().map(|k| k.len()).max().unwrap_or(0).max("metric".len());
    let mut s = format!("{:<w$}  value\n", "metric");
    for (k, v) in &r.metrics {
        s.push_str(&format!("{k:<w$}  {}\n", output::num(*v)));
    }
    s
}

pub fn cmd_analyze(args: &RunArgs) -> Result<Outcome, CliError> {
    let s = crate::config::load(&args.config)?;
    let r = analyze(&s, args.variant)?;
    output::write_json(&args.out, &r)?;
    print!("{}", table(&r));
    Ok(Outcome::Success)
}
