//! The monitored zero-mean Gauss-Markov (Ornstein-Uhlenbeck) process.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analytic::GmParams;
use crate::error::{Error, Result};

/// Instantaneous estimation error at a given age: `sigma^2 (1 - exp(-kappa age))`.
///
/// This is the error function the process-related ToI integrates. It is
/// not the LMMSE residual `sigma^2 (1 - exp(-2 kappa age))`.
pub fn instantaneous_error(age: f64, gm: GmParams) -> Result<f64> {
    check_age(age)?;
    gm.validate()?;
    Ok(gm.variance() * -(-gm.kappa * age).exp_m1())
}

/// Conditional-mean prediction of the current value from a sample `age` old.
pub fn lmmse_predict(sample_value: f64, age: f64, gm: GmParams) -> Result<f64> {
    check_age(age)?;
    gm.validate()?;
    Ok((-gm.kappa * age).exp() * sample_value)
}

fn check_age(age: f64) -> Result<()> {
    if age >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeAge(age))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub params: GmParams,
}

/// Exact-discretization sample path at caller-supplied instants.
pub fn sample_path(gm: GmParams, times: &[f64], seed: u64) -> Result<GmPath> {
    gm.validate()?;
    if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneTimes { index: i + 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(times.len());
    let mut x = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let z: f64 = StandardNormal.sample(&mut rng);
        x = if i == 0 {
            gm.sigma * z
        } else {
            let rho = (-gm.kappa * (t - times[i - 1])).exp();
            // 1 - rho^2 via expm1 keeps small steps accurate
            let var = -(-2.0 * gm.kappa * (t - times[i - 1])).exp_m1();
            rho * x + gm.sigma * var.sqrt() * z
        };
        values.push(x);
    }
    Ok(GmPath {
        times: times.to_vec(),
        values,
        params: gm,
    })
}
