//! Closed-form metrics by name, shared by `analyze` and `sweep`.

use toi_core::analytic::{self, ZeroWaitVariant};
use toi_core::{Error, GmParams, MultiSourceRates, TandemRates};

use crate::config::{Kind, Rates};

/// Metric names for a scenario, in output order.
pub fn available(kind: Kind, has_gm: bool) -> Vec<&'static str> {
    let (base, gm): (&[&str], &[&str]) = match kind {
        Kind::Edge => (&["toi", "delay_t", "delay_c", "toi_min", "lambda_opt"], &["vtoi"]),
        Kind::EdgeZeroWait => (&["toi", "toi_exact", "toi_min"], &["vtoi", "vtoi_printed", "vtoi_corrected"]),
        Kind::Fog => (&["toi"], &[]),
        Kind::FogZeroWait => (&["toi", "toi_exact"], &[]),
    };
    let mut v = base.to_vec();
    if has_gm {
        v.extend_from_slice(gm);
    }
    v
}

fn edge(r: Rates) -> TandemRates {
    match r {
        Rates::Edge(e) => e,
        Rates::Fog(f) => TandemRates::new(f.lambda_i, f.mu_it, f.mu_c),
    }
}

fn fog(r: Rates) -> MultiSourceRates {
    match r {
        Rates::Fog(f) => f,
        Rates::Edge(e) => MultiSourceRates::new(e.lambda, 0.0, e.mu_t, e.mu_c),
    }
}

fn need_gm(gm: Option<GmParams>) -> Result<GmParams, Error> {
    gm.ok_or_else(|| Error::InvalidConfig("process-related metric without `gm`".into()))
}

/// Evaluates one metric. For zero-wait kinds `toi` is the published form
/// and `vtoi` follows `variant`.
pub fn evaluate(kind: Kind, rates: Rates, gm: Option<GmParams>, variant: ZeroWaitVariant, name: &str) -> Result<f64, Error> {
    let e = edge(rates);
    let f = fog(rates);
    match (kind, name) {
        (Kind::Edge, "toi") => analytic::toi_edge(e),
        (Kind::Edge, "delay_t") => analytic::stage_delays(e).map(|d| d.0),
        (Kind::Edge, "delay_c") => analytic::stage_delays(e).map(|d| d.1),
        (Kind::Edge | Kind::EdgeZeroWait, "toi_min") => analytic::optimal_rate(e.mu_t, e.mu_c).map(|o| o.1),
        (Kind::Edge, "lambda_opt") => analytic::optimal_rate(e.mu_t, e.mu_c).map(|o| o.0),
        (Kind::Edge, "vtoi") => analytic::vtoi_edge(e, need_gm(gm)?),
        (Kind::EdgeZeroWait, "toi") => analytic::toi_edge_zero_wait(e.mu_t, e.mu_c),
        (Kind::EdgeZeroWait, "toi_exact") => analytic::toi_edge_zero_wait_exact(e.mu_t, e.mu_c),
        (Kind::EdgeZeroWait, "vtoi") => analytic::vtoi_edge_zero_wait(e.mu_t, e.mu_c, need_gm(gm)?, variant),
        (Kind::EdgeZeroWait, "vtoi_printed") => {
            analytic::vtoi_edge_zero_wait(e.mu_t, e.mu_c, need_gm(gm)?, ZeroWaitVariant::Printed)
        }
        (Kind::EdgeZeroWait, "vtoi_corrected") => {
            analytic::vtoi_edge_zero_wait(e.mu_t, e.mu_c, need_gm(gm)?, ZeroWaitVariant::Corrected)
        }
        (Kind::Fog, "toi") => analytic::toi_fog(f),
        (Kind::FogZeroWait, "toi") => analytic::toi_fog_zero_wait(f.mu_it, f.mu_c, f.lambda_other),
        (Kind::FogZeroWait, "toi_exact") => analytic::toi_fog_zero_wait_exact(f.mu_it, f.mu_c, f.lambda_other),
        _ => Err(Error::InvalidConfig(format!("metric `{name}` is not defined for kind {}", kind.name()))),
    }
}

/// Copy of the scenario parameters with `param` set to `value`.
pub fn with_param(rates: Rates, gm: Option<GmParams>, param: &str, value: f64) -> (Rates, Option<GmParams>) {
    let mut r = rates;
    let mut g = gm;
    match (&mut r, param) {
        (Rates::Edge(e), "lambda") => e.lambda = value,
        (Rates::Edge(e), "mu_t") => e.mu_t = value,
        (Rates::Edge(e), "mu_c") => e.mu_c = value,
        (Rates::Fog(f), "lambda_i") => f.lambda_i = value,
        (Rates::Fog(f), "lambda_other") => f.lambda_other = value,
        (Rates::Fog(f), "mu_it") => f.mu_it = value,
        (Rates::Fog(f), "mu_c") => f.mu_c = value,
        (_, "sigma") => {
            if let Some(gm) = g.as_mut() {
                gm.sigma = value
            }
        }
        (_, "kappa") => {
            if let Some(gm) = g.as_mut() {
                gm.kappa = value
            }
        }
        _ => {}
    }
    (r, g)
}

/// Domain check for the whole scenario, independent of metric.
pub fn check_domain(kind: Kind, rates: Rates, gm: Option<GmParams>) -> Result<(), Error> {
    if let Some(g) = gm {
        g.validate()?;
    }
    let e = edge(rates);
    let f = fog(rates);
    match kind {
        Kind::Edge => e.check_stable(),
        Kind::EdgeZeroWait => analytic::toi_edge_zero_wait(e.mu_t, e.mu_c).map(|_| ()),
        Kind::Fog => f.check_stable(),
        Kind::FogZeroWait => analytic::toi_fog_zero_wait(f.mu_it, f.mu_c, f.lambda_other).map(|_| ()),
    }
}
