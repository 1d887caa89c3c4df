//! Equitable online allocation of capacity-limited supply to Poisson demand:
//! LP benchmarks, online policies and a Monte Carlo simulator.

pub mod error;
pub mod experiments;
pub mod instance;
pub mod lp;
pub mod poisson_math;
pub mod policies;
pub mod simulator;

pub use error::{Error, Result};
pub use instance::Instance;
