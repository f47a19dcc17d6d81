use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{DeviceProfile, SystemBudget};

/// Parameters of the random multi-device instance generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InstanceSpec {
    pub bandwidth: f64,
    pub power: f64,
    pub f_max: f64,
    pub cycles_per_bit: f64,
    pub d_bar_min: f64,
    pub d_bar_max: f64,
    /// Cell radius (m).
    pub radius: f64,
    /// Closest allowed device distance (m).
    pub min_distance: f64,
    /// Noise power spectral density (dBm/Hz).
    pub noise_dbm_hz: f64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            bandwidth: 1e4,
            power: 0.25,
            f_max: 5e9,
            cycles_per_bit: 30.0,
            d_bar_min: 50.0,
            d_bar_max: 300.0,
            radius: 200.0,
            min_distance: 10.0,
            noise_dbm_hz: -174.0,
        }
    }
}

impl InstanceSpec {
    pub fn budget(&self) -> SystemBudget {
        SystemBudget {
            bandwidth: self.bandwidth,
            noise: 10f64.powf(self.noise_dbm_hz / 10.0) * 1e-3 * self.bandwidth,
            f_max: self.f_max,
        }
    }
}

/// Devices dropped uniformly in a disc around the base station, with
/// path loss `128.1 + 37.6 log10(d / km)` dB and a Rayleigh power gain.
pub fn random_instance(spec: &InstanceSpec, m: usize, seed: u64) -> (Vec<DeviceProfile>, SystemBudget) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r0 = spec.min_distance / spec.radius;
    let devices = (0..m)
        .map(|_| {
            // uniform over the annulus area
            let u: f64 = rng.random_range(r0 * r0..1.0);
            let d_km = spec.radius * u.sqrt() / 1000.0;
            let pl_db = 128.1 + 37.6 * d_km.log10();
            let fading: f64 = Exp1.sample(&mut rng);
            let gain = 10f64.powf(-pl_db / 10.0) * fading;
            let d_bar = rng.random_range(spec.d_bar_min..=spec.d_bar_max);
            DeviceProfile::new(spec.power, gain.sqrt(), spec.cycles_per_bit, d_bar)
        })
        .collect();
    (devices, spec.budget())
}
