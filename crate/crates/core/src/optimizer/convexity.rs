use serde::{Deserialize, Serialize};

use crate::analytic::{toi_edge_unchecked as delta, TandemRates};
use crate::error::Result;

/// Relative tolerance for finite-difference vs closed-form agreement.
pub const FD_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub step: f64,
    /// Central second difference of `Delta` in `lambda`.
    pub d2_lambda_fd: f64,
    /// `2/(mu_t-l)^3 + 2/(mu_c-l)^3 + 2/l^3 + 2(mu_t+mu_c)^2 / (mu_t mu_c (mu_t+mu_c-l)^3)`.
    pub d2_lambda_exact: f64,
    /// The published form, with squares where the derivative has cubes.
    pub d2_lambda_printed: f64,
    pub lambda_ok: bool,
    /// Finite-difference Hessian of `l^2 / (mu_t mu_c (mu_t+mu_c-l))` in `(mu_t, mu_c)`.
    pub cross_hessian: [[f64; 2]; 2],
    pub cross_ok: bool,
    /// Second derivative of `l^2 / (mu_t^2 (mu_t-l))` in `mu_t`.
    pub f_mu_t_fd: f64,
    pub f_mu_t_exact: f64,
    pub f_ok: bool,
}

impl ConvexityReport {
    pub fn all_ok(&self) -> bool {
        self.lambda_ok && self.cross_ok && self.f_ok
    }

    pub fn cross_det(&self) -> f64 {
        let h = self.cross_hessian;
        h[0][0] * h[1][1] - h[0][1] * h[1][0]
    }

    pub fn cross_trace(&self) -> f64 {
        self.cross_hessian[0][0] + self.cross_hessian[1][1]
    }
}

fn close(fd: f64, exact: f64) -> bool {
    fd > 0.0 && ((fd - exact) / exact).abs() <= FD_REL_TOL
}

/// Numerical check that `Delta` is convex in the rate and, through its
/// components, in the two service rates.
pub fn verify_multiconvexity(lambda: f64, mu_t: f64, mu_c: f64) -> Result<ConvexityReport> {
    TandemRates::new(lambda, mu_t, mu_c).check_stable()?;
    let (l, t, c) = (lambda, mu_t, mu_c);
    let h = 1e-4 * l.min(t - l).min(c - l);

    let d2_lambda_fd = (delta(l + h, t, c) - 2.0 * delta(l, t, c) + delta(l - h, t, c)) / (h * h);
    let s = t + c - l;
    let d2_lambda_exact = 2.0 / (t - l).powi(3) + 2.0 / (c - l).powi(3) + 2.0 / l.powi(3) + 2.0 * (t + c).powi(2) / (t * c * s.powi(3));
    let d2_lambda_printed = 2.0 / (t - l).powi(2) + 2.0 / (c - l).powi(2) + 2.0 / l.powi(3) + 2.0 * (t + c).powi(2) / (t * c * s.powi(2));

    let cross = |x: f64, v: f64| l * l / (x * v * (x + v - l));
    let hxx = (cross(t + h, c) - 2.0 * cross(t, c) + cross(t - h, c)) / (h * h);
    let hvv = (cross(t, c + h) - 2.0 * cross(t, c) + cross(t, c - h)) / (h * h);
    let hxv = (cross(t + h, c + h) - cross(t + h, c - h) - cross(t - h, c + h) + cross(t - h, c - h)) / (4.0 * h * h);
    let cross_hessian = [[hxx, hxv], [hxv, hvv]];
    let det = hxx * hvv - hxv * hxv;

    let f = |x: f64| l * l / (x * x * (x - l));
    let f_mu_t_fd = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
    let a = t - l;
    let f_mu_t_exact = l * l * (6.0 / (t.powi(4) * a) + 4.0 / (t.powi(3) * a * a) + 2.0 / (t * t * a.powi(3)));

    Ok(ConvexityReport {
        step: h,
        d2_lambda_fd,
        d2_lambda_exact,
        d2_lambda_printed,
        lambda_ok: close(d2_lambda_fd, d2_lambda_exact),
        cross_hessian,
        cross_ok: det > 0.0 && hxx + hvv > 0.0,
        f_mu_t_fd,
        f_mu_t_exact,
        f_ok: close(f_mu_t_fd, f_mu_t_exact),
    })
}
