//! Timeliness-of-information (ToI) metrics for two-stage transmission and
//! computation tandem queues.
//!
//! * [`analytic`]: closed-form average ToI and process-related ToI.
//! * [`gmproc`]: the monitored Gauss-Markov process.
//! * [`sim`]: discrete-event Monte Carlo simulator and estimators.
//! * [`optimizer`]: min-max ToI allocation of generation rate, bandwidth
//!   and CPU across edge devices.

pub mod analytic;
pub mod error;
pub mod gmproc;
pub mod numeric;
pub mod optimizer;
pub mod sim;

pub use analytic::{GmParams, MultiSourceRates, TandemRates, ToiTerms, ZeroWaitVariant};
pub use error::{Error, Result};
pub use gmproc::GmPath;
pub use sim::{Policy, SimConfig, SimEstimate, TaskRecord};

pub use optimizer::{Allocation, DeviceProfile, SystemBudget};
