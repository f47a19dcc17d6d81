//! Closed-form average ToI and process-related ToI for the edge-tier
//! (single-source M/M/1 to M/M/1) and fog-tier (M/M/1 into a multi-source
//! M/M/1) tandems.
//!
//! Every operation checks the stability region first. Inputs within a
//! relative [`STABILITY_EPS`] of the boundary are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};

/// Relative guard band around every stability boundary.
pub const STABILITY_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TandemRates {
    pub lambda: f64,
    pub mu_t: f64,
    pub mu_c: f64,
}

impl TandemRates {
    pub fn new(lambda: f64, mu_t: f64, mu_c: f64) -> Self {
        Self { lambda, mu_t, mu_c }
    }

    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("mu_t", self.mu_t)?;
        positive("mu_c", self.mu_c)?;
        Ok(())
    }

    /// Validates positivity and the two stability constraints.
    pub fn check_stable(&self) -> Result<()> {
        self.validate()?;
        below("lambda", self.lambda, "mu_t", self.mu_t)?;
        below("lambda", self.lambda, "mu_c", self.mu_c)
    }

    /// Transmission utilization `lambda / mu_t`.
    pub fn rho_t(&self) -> f64 {
        self.lambda / self.mu_t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiSourceRates {
    pub lambda_i: f64,
    pub lambda_other: f64,
    pub mu_it: f64,
    pub mu_c: f64,
}

impl MultiSourceRates {
    pub fn new(lambda_i: f64, lambda_other: f64, mu_it: f64, mu_c: f64) -> Self {
        Self {
            lambda_i,
            lambda_other,
            mu_it,
            mu_c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("lambda_i", self.lambda_i)?;
        non_negative("lambda_other", self.lambda_other)?;
        positive("mu_it", self.mu_it)?;
        positive("mu_c", self.mu_c)?;
        Ok(())
    }

    pub fn check_stable(&self) -> Result<()> {
        self.validate()?;
        below("lambda_i", self.lambda_i, "mu_it", self.mu_it)?;
        below(
            "lambda_i + lambda_other",
            self.total_lambda(),
            "mu_c",
            self.mu_c,
        )
    }

    pub fn total_lambda(&self) -> f64 {
        self.lambda_i + self.lambda_other
    }
}

/// Stationary Gauss-Markov process with covariance `sigma^2 exp(-kappa |t|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmParams {
    pub sigma: f64,
    pub kappa: f64,
}

impl GmParams {
    pub fn new(sigma: f64, kappa: f64) -> Self {
        Self { sigma, kappa }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidParam {
                field: "sigma",
                value: self.sigma,
                reason: "must be finite and non-negative",
            });
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParam {
                field: "kappa",
                value: self.kappa,
                reason: "must be finite and strictly positive",
            });
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Intermediate expectations behind the edge-tier closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToiTerms {
    /// `E[X_n W_{n,t}]`
    pub e_x_wt: f64,
    /// `E[X_n W_{n,c}]`
    pub e_x_wc: f64,
    /// `E[exp(-kappa T_n)]`
    pub e_exp_t: f64,
    /// `E[exp(-kappa (X_n + T_n))]`
    pub e_exp_xt: f64,
}

/// Which zero-wait process-related formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroWaitVariant {
    /// The closed form exactly as published. Can leave `[0, sigma^2]`.
    Printed,
    /// Exact stationary value, accounting for the dependence between the
    /// inter-generation gap and the next task's computation wait.
    #[default]
    Corrected,
}

impl std::str::FromStr for ZeroWaitVariant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "printed" => Ok(Self::Printed),
            "corrected" => Ok(Self::Corrected),
            other => Err(format!("unknown variant `{other}` (expected printed|corrected)")),
        }
    }
}

fn below(lhs: &str, a: f64, rhs: &str, b: f64) -> Result<()> {
    if a < (1.0 - STABILITY_EPS) * b {
        Ok(())
    } else {
        Err(Error::unstable(format!("{lhs} < {rhs} ({lhs} = {a}, {rhs} = {b})")))
    }
}

/// Average ToI of the single-source edge tandem.
pub fn toi_edge(rates: TandemRates) -> Result<f64> {
    rates.check_stable()?;
    Ok(toi_edge_unchecked(rates.lambda, rates.mu_t, rates.mu_c))
}

#[inline]
pub(crate) fn toi_edge_unchecked(l: f64, mt: f64, mc: f64) -> f64 {
    let l2 = l * l;
    l2 / (mt * mt * (mt - l))
        + 1.0 / mt
        + l2 / (mc * mc * (mc - l))
        + 1.0 / mc
        + l2 / (mt * mc * (mt + mc - l))
        + 1.0 / l
}

fn zero_wait_domain(mu_t: f64, mu_c: f64) -> Result<()> {
    positive("mu_t", mu_t)?;
    positive("mu_c", mu_c)?;
    below("mu_t", mu_t, "mu_c", mu_c)
}

/// Zero-wait average ToI, published closed form.
pub fn toi_edge_zero_wait(mu_t: f64, mu_c: f64) -> Result<f64> {
    zero_wait_domain(mu_t, mu_c)?;
    Ok(2.0 / mu_t + 1.0 / mu_c + mu_t / (mu_c * (mu_c - mu_t)))
}

/// Zero-wait average ToI, exact stationary value.
///
/// Under zero-wait the gap `X_{n+1}` equals the service time `S_{n,t}`,
/// which also sets how much computation backlog the next task meets; the
/// published form drops that correlation.
pub fn toi_edge_zero_wait_exact(mu_t: f64, mu_c: f64) -> Result<f64> {
    zero_wait_domain(mu_t, mu_c)?;
    let (a, b) = (mu_t, mu_c);
    Ok(2.0 / a + 1.0 / b + a / (b * (a + b)) + 2.0 * a.powi(3) / (b * b * (b * b - a * a)))
}

/// Process-related ToI (time-average MSE) of the edge tandem.
pub fn vtoi_edge(rates: TandemRates, gm: GmParams) -> Result<f64> {
    rates.check_stable()?;
    gm.validate()?;
    Ok(gm.variance() * vtoi_edge_unit(rates.lambda, rates.mu_t, rates.mu_c, gm.kappa))
}

/// `vtoi_edge` for `sigma = 1`.
fn vtoi_edge_unit(l: f64, mt: f64, mc: f64, k: f64) -> f64 {
    let a = mt - l;
    let b = mc - l;
    let s = mt + mc - l;
    let bracket = 1.0 / (k * (k + l)) - 1.0 / ((k + a) * (k + b)) + l / ((k + b) * (k + a) * (k + s))
        - b / ((k + a) * (k + mt) * (k + s))
        - a / ((k + b) * (k + mc) * (k + s));
    1.0 - l * a * b / (k * (k + a) * (k + b)) + l * l * mt * mc / ((k + mt) * (k + mc)) * bracket
}

/// Zero-wait process-related ToI.
pub fn vtoi_edge_zero_wait(mu_t: f64, mu_c: f64, gm: GmParams, variant: ZeroWaitVariant) -> Result<f64> {
    zero_wait_domain(mu_t, mu_c)?;
    gm.validate()?;
    let (a, b, k) = (mu_t, mu_c, gm.kappa);
    let unit = match variant {
        ZeroWaitVariant::Printed => {
            1.0 - a * a * (b - a) / (k * (k + a) * (k + b - a))
                + a.powi(3) * b * (b - a) / (k * (k + a) * (k + b).powi(2) * (k + b - a))
        }
        ZeroWaitVariant::Corrected => {
            let r = b - a;
            let h = a / (a + k) - k * a / ((k + r) * (k + b));
            let e_t = b / (k + b) * h;
            let lt = |th: f64| b / (b + th) * (a / (a + k) - th * a / ((r + th) * (b + k)));
            let e_xt = b / (k + b) * (lt(k) - k / (a + k) * lt(a + k));
            1.0 - a / k * (e_t - e_xt)
        }
    };
    Ok(gm.variance() * unit)
}

/// Average ToI of the tagged source in the fog-tier tandem.
pub fn toi_fog(rates: MultiSourceRates) -> Result<f64> {
    rates.check_stable()?;
    let MultiSourceRates {
        lambda_i: li,
        lambda_other: lo,
        mu_it: mt,
        mu_c: mc,
    } = rates;
    let l = li + lo;
    let co = mc - lo;
    let s = mt + mc - l;
    let t1 = li * li / (mt * mt * (mt - li)) + 1.0 / mt + 1.0 / mc;
    let t2 = li * li / ((mc - l) * co) * (1.0 / co - li / (mt * (mt - li)) + co / ((mt - li) * s));
    let t3 = li * li * lo / (mc * co)
        * (2.0 / (co * co) - li / (mt * (mt - li) * co) + co / ((mt - li) * s * s));
    let t4 = li * lo * (mc - l) / (mc * co * co) * (1.0 / li - li / (mt * s) + 1.0 / co);
    Ok(t1 + t2 + t3 + t4 + 1.0 / li)
}

fn fog_zero_wait_domain(mu_it: f64, mu_c: f64, lambda_other: f64) -> Result<()> {
    positive("mu_it", mu_it)?;
    positive("mu_c", mu_c)?;
    non_negative("lambda_other", lambda_other)?;
    below("mu_it + lambda_other", mu_it + lambda_other, "mu_c", mu_c)
}

/// Zero-wait fog-tier average ToI, published closed form.
pub fn toi_fog_zero_wait(mu_it: f64, mu_c: f64, lambda_other: f64) -> Result<f64> {
    fog_zero_wait_domain(mu_it, mu_c, lambda_other)?;
    let (a, b, l) = (mu_it, mu_c, lambda_other);
    Ok(2.0 / a + 1.0 / b + 1.0 / (b - l) * (a / (b - a - l) + l / b))
}

/// Zero-wait fog-tier average ToI, exact stationary value.
///
/// Tracks the computation backlog across one tagged service period with
/// Poisson interferers: `eta` is the busy-period transform of the shared
/// server and `p` the transform of its idle probability, both evaluated at
/// the tagged service rate.
pub fn toi_fog_zero_wait_exact(mu_it: f64, mu_c: f64, lambda_other: f64) -> Result<f64> {
    fog_zero_wait_domain(mu_it, mu_c, lambda_other)?;
    let (a, b, l) = (mu_it, mu_c, lambda_other);
    let rho = (a + l) / b;

    let eta = |s: f64| {
        let c = l + b + s;
        2.0 * b / (c + (c * c - 4.0 * l * b).sqrt())
    };
    // eta and its first two derivatives at s
    let eta3 = |s: f64| {
        let e = eta(s);
        let d = 2.0 * l * e - (l + b + s);
        let e1 = e / d;
        let e2 = (e1 * d - e * (2.0 * l * e1 - 1.0)) / (d * d);
        (e, e1, e2)
    };
    let p3 = |s: f64| {
        let (e, e1, e2) = eta3(s);
        let p = 1.0 / (s + l - l * e);
        let g1 = 1.0 - l * e1;
        let p1 = -g1 * p * p;
        let p2 = l * e2 * p * p + 2.0 * g1 * g1 * p * p * p;
        (p, p1, p2)
    };
    let em = |e: f64| e * (1.0 - rho) / (1.0 - rho * e);
    let em1 = |e: f64| (1.0 - rho) / (1.0 - rho * e).powi(2);
    let em2 = |e: f64| 2.0 * rho * (1.0 - rho) / (1.0 - rho * e).powi(3);

    let (e, e1, e2) = eta3(a);
    let (p, p1, p2) = p3(a);
    let q0 = em(e) * p;
    let q1 = em1(e) * e1 * p + em(e) * p1;
    let q2 = em2(e) * e1 * e1 * p + em1(e) * e2 * p + 2.0 * em1(e) * e1 * p1 + em(e) * p2;

    let m0 = 1.0 / (1.0 - rho);
    let d = (q1 * a - q0) / (a * a);
    let g_n1 = m0 / a + 2.0 * (l - b) / (a * a) - a * b * d;
    let z = e;
    let dg = -b * (1.0 - z) * q2 / (2.0 * z);
    let g_z = -a * dg;
    let g_n2 = g_n1 + 1.0 / a + (l - b) / (a * a) + b * p * z * g_z;
    Ok(2.0 / a + 1.0 / b + a / b * g_n2)
}

/// Intermediate expectations for the edge tandem at decay rate `kappa`.
pub fn toi_terms(rates: TandemRates, kappa: f64) -> Result<ToiTerms> {
    rates.check_stable()?;
    GmParams::new(1.0, kappa).validate()?;
    let TandemRates {
        lambda: l,
        mu_t: mt,
        mu_c: mc,
    } = rates;
    let e_x_wt = l / (mt * mt * (mt - l));
    let e_x_wc = l / (mc * mc * (mc - l)) + l / (mt * mc * (mt + mc - l));
    let e_exp_t = (mt - l) * (mc - l) / ((kappa + mt - l) * (kappa + mc - l));
    let v = vtoi_edge_unit(l, mt, mc, kappa);
    let e_exp_xt = e_exp_t - kappa * (1.0 - v) / l;
    Ok(ToiTerms {
        e_x_wt,
        e_x_wc,
        e_exp_t,
        e_exp_xt,
    })
}

/// Mean sojourn time in the transmission and computation stages.
pub fn stage_delays(rates: TandemRates) -> Result<(f64, f64)> {
    rates.check_stable()?;
    Ok((1.0 / (rates.mu_t - rates.lambda), 1.0 / (rates.mu_c - rates.lambda)))
}

/// Generation rate minimizing the edge ToI at fixed service rates, and
/// the minimum, `(lambda*, Delta*)`.
pub fn optimal_rate(mu_t: f64, mu_c: f64) -> Result<(f64, f64)> {
    positive("mu_t", mu_t)?;
    positive("mu_c", mu_c)?;
    let hi = mu_t.min(mu_c) * (1.0 - STABILITY_EPS);
    Ok(crate::numeric::golden_section(|l| toi_edge_unchecked(l, mu_t, mu_c), hi * 1e-9, hi, 1e-10))
}
