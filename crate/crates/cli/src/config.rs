//! Scenario documents: one JSON object per run.
//!
//! ```json
//! { "kind": "edge", "rates": { "lambda": 2, "mu_t": 5, "mu_c": 8 },
//!   "gm": { "sigma": 1, "kappa": 1 } }
//! ```
//!
//! Zero-wait kinds may omit the tagged rate (`lambda`, `lambda_i`). Sweeps
//! add a `sweep` block; optimizer runs use an `optimizer` block instead of
//! `kind` and `rates`.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toi_core::optimizer::{InstanceSpec, P1Options};
use toi_core::{DeviceProfile, GmParams, MultiSourceRates, SystemBudget, TandemRates};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Edge,
    EdgeZeroWait,
    Fog,
    FogZeroWait,
}

impl Kind {
    pub fn zero_wait(self) -> bool {
        matches!(self, Kind::EdgeZeroWait | Kind::FogZeroWait)
    }

    pub fn is_edge(self) -> bool {
        matches!(self, Kind::Edge | Kind::EdgeZeroWait)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Edge => "edge",
            Kind::EdgeZeroWait => "edge_zero_wait",
            Kind::Fog => "fog",
            Kind::FogZeroWait => "fog_zero_wait",
        }
    }

    /// Parameters a sweep may vary.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            Kind::Edge => &["lambda", "mu_t", "mu_c", "sigma", "kappa"],
            Kind::EdgeZeroWait => &["mu_t", "mu_c", "sigma", "kappa"],
            Kind::Fog => &["lambda_i", "lambda_other", "mu_it", "mu_c"],
            Kind::FogZeroWait => &["lambda_other", "mu_it", "mu_c"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rates {
    Edge(TandemRates),
    Fog(MultiSourceRates),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
}

impl Axis {
    /// Explicit values, or `start, start + step, ..` up to `stop` inclusive.
    pub fn grid(&self) -> Result<Vec<f64>, String> {
        match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(a), Some(b), Some(h)) if h > 0.0 && b >= a && ((b - a) / h) < 1e6 => {
                let n = ((b - a) / h + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| a + i as f64 * h).collect())
            }
            _ => Err(format!(
                "axis `{}` needs either a non-empty `values` list or `start`, `stop`, `step` with step > 0 and stop >= start",
                self.param
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub metrics: Vec<String>,
    /// Also run the simulator at every stable point.
    #[serde(default)]
    pub simulate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDevices {
    pub devices: usize,
    pub seed: u64,
    #[serde(default)]
    pub instance: InstanceSpec,
}

/// Two-device sweep: `device` keeps its channel, the second device copies
/// it with spectral efficiency divided by each ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSweep {
    pub ratios: Vec<f64>,
    pub device: DeviceProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    #[serde(default)]
    pub budget: Option<SystemBudget>,
    #[serde(default)]
    pub devices: Option<Vec<DeviceProfile>>,
    #[serde(default)]
    pub random: Option<RandomDevices>,
    #[serde(default)]
    pub options: P1Options,
    #[serde(default)]
    pub channel_sweep: Option<ChannelSweep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: Option<Kind>,
    pub rates: Option<Rates>,
    pub gm: Option<GmParams>,
    pub sweep: Option<SweepSpec>,
    pub optimizer: Option<OptimizerSpec>,
}

impl Scenario {
    /// Kind and rates, which every non-optimizer command needs.
    pub fn model(&self) -> Result<(Kind, Rates), CliError> {
        match (self.kind, self.rates) {
            (Some(k), Some(r)) => Ok((k, r)),
            (None, _) => Err(CliError::Config("missing field `kind`".into())),
            (_, None) => Err(CliError::Config("missing field `rates`".into())),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc<R> {
    #[serde(default)]
    kind: Option<Kind>,
    #[serde(default = "Option::default")]
    rates: Option<R>,
    #[serde(default)]
    gm: Option<GmParams>,
    #[serde(default)]
    sweep: Option<SweepSpec>,
    #[serde(default)]
    optimizer: Option<OptimizerSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRates {
    lambda: f64,
    mu_t: f64,
    mu_c: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeZeroWaitRates {
    #[serde(default)]
    lambda: f64,
    mu_t: f64,
    mu_c: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FogRates {
    lambda_i: f64,
    lambda_other: f64,
    mu_it: f64,
    mu_c: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FogZeroWaitRates {
    #[serde(default)]
    lambda_i: f64,
    lambda_other: f64,
    mu_it: f64,
    mu_c: f64,
}

#[derive(Deserialize)]
struct KindOnly {
    #[serde(default)]
    kind: Option<serde_json::Value>,
}

fn typed<R: DeserializeOwned>(text: &str, origin: &str) -> Result<Doc<R>, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config(format!("{origin}:{}:{}: field `{path}`: {inner}", inner.line(), inner.column()))
    })
}

fn scenario<R>(doc: Doc<R>, conv: impl Fn(R) -> Rates) -> Scenario {
    Scenario {
        kind: doc.kind,
        rates: doc.rates.map(conv),
        gm: doc.gm,
        sweep: doc.sweep,
        optimizer: doc.optimizer,
    }
}

/// Parses and checks a scenario document. `origin` names it in messages.
pub fn parse(text: &str, origin: &str) -> Result<Scenario, CliError> {
    let head: KindOnly = serde_json::from_str(text).map_err(|e| CliError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
    let kind = match head.kind {
        None => None,
        Some(v) => Some(Kind::deserialize(v).map_err(|e| CliError::Config(format!("{origin}: field `kind`: {e}")))?),
    };
    let s = match kind {
        Some(Kind::Edge) => scenario(typed(text, origin)?, |r: EdgeRates| Rates::Edge(TandemRates::new(r.lambda, r.mu_t, r.mu_c))),
        Some(Kind::EdgeZeroWait) => scenario(typed(text, origin)?, |r: EdgeZeroWaitRates| {
            Rates::Edge(TandemRates::new(r.lambda, r.mu_t, r.mu_c))
        }),
        Some(Kind::Fog) => scenario(typed(text, origin)?, |r: FogRates| {
            Rates::Fog(MultiSourceRates::new(r.lambda_i, r.lambda_other, r.mu_it, r.mu_c))
        }),
        Some(Kind::FogZeroWait) => scenario(typed(text, origin)?, |r: FogZeroWaitRates| {
            Rates::Fog(MultiSourceRates::new(r.lambda_i, r.lambda_other, r.mu_it, r.mu_c))
        }),
        None => {
            let doc: Doc<serde_json::Value> = typed(text, origin)?;
            if doc.rates.is_some() {
                return Err(CliError::Config(format!("{origin}: field `rates`: given without `kind`")));
            }
            scenario(doc, |_| unreachable!())
        }
    };
    check(&s, origin)?;
    Ok(s)
}

fn check(s: &Scenario, origin: &str) -> Result<(), CliError> {
    let err = |field: &str, msg: String| CliError::Config(format!("{origin}: field `{field}`: {msg}"));
    if s.kind.is_none() && s.optimizer.is_none() {
        return Err(err("kind", "missing (required unless an `optimizer` block is given)".into()));
    }
    if let Some(gm) = s.gm {
        if s.kind.is_some_and(|k| !k.is_edge()) {
            return Err(err("gm", "process-related metrics exist only for edge kinds".into()));
        }
        gm.validate().map_err(|e| err("gm", e.to_string()))?;
    }
    if let (Some(kind), Some(sw)) = (s.kind, &s.sweep) {
        if sw.axes.is_empty() || sw.axes.len() > 2 {
            return Err(err("sweep.axes", format!("expected 1 or 2 axes, got {}", sw.axes.len())));
        }
        for (i, a) in sw.axes.iter().enumerate() {
            if !kind.params().contains(&a.param.as_str()) {
                return Err(err(
                    &format!("sweep.axes[{i}].param"),
                    format!("`{}` is not a parameter of kind {} (expected one of {:?})", a.param, kind.name(), kind.params()),
                ));
            }
            if matches!(a.param.as_str(), "sigma" | "kappa") && s.gm.is_none() {
                return Err(err(&format!("sweep.axes[{i}].param"), format!("sweeping `{}` needs a `gm` block", a.param)));
            }
            a.grid().map_err(|m| err(&format!("sweep.axes[{i}]"), m))?;
        }
        if sw.metrics.is_empty() {
            return Err(err("sweep.metrics", "empty".into()));
        }
        for (i, m) in sw.metrics.iter().enumerate() {
            let ok = crate::metrics::available(kind, s.gm.is_some());
            if !ok.contains(&m.as_str()) {
                return Err(err(&format!("sweep.metrics[{i}]"), format!("unknown metric `{m}` for this scenario (expected one of {ok:?})")));
            }
        }
    }
    if let Some(o) = &s.optimizer {
        if let Some(b) = o.budget {
            b.validate().map_err(|e| err("optimizer.budget", e.to_string()))?;
        }
        if let Some(ds) = &o.devices {
            for (i, d) in ds.iter().enumerate() {
                d.validate(i).map_err(|e| err(&format!("optimizer.devices[{i}]"), e.to_string()))?;
            }
        }
        let sources = o.devices.is_some() as u8 + o.random.is_some() as u8 + o.channel_sweep.is_some() as u8;
        if sources != 1 {
            return Err(err("optimizer", "give exactly one of `devices`, `random`, `channel_sweep`".into()));
        }
        if (o.devices.is_some() || o.channel_sweep.is_some()) && o.budget.is_none() {
            return Err(err("optimizer.budget", "required with `devices` and `channel_sweep`".into()));
        }
        if o.devices.as_ref().is_some_and(|d| d.is_empty()) || o.random.is_some_and(|r| r.devices == 0) {
            return Err(err("optimizer", "at least one device is required".into()));
        }
        if let Some(cs) = &o.channel_sweep {
            if cs.ratios.is_empty() || cs.ratios.iter().any(|r| !(r.is_finite() && *r >= 1.0)) {
                return Err(err("optimizer.channel_sweep.ratios", "need a non-empty list of ratios >= 1".into()));
            }
            cs.device.validate(0).map_err(|e| err("optimizer.channel_sweep.device", e.to_string()))?;
        }
        if !(o.options.max_iter > 0 && o.options.rel_tol > 0.0) {
            return Err(err("optimizer.options", "max_iter and rel_tol must be positive".into()));
        }
    }
    Ok(())
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}
