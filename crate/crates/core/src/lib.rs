//! Numerical laboratory for the homogeneous pinning polymer model.
//!
//! The crate is organised bottom-up:
//!
//! * [`walk`]: simple random walk paths, path functionals, exact laws and the
//!   enumeration oracle.
//! * [`renewal`]: first-return law, free energy, the tilted renewal law and
//!   closed-form constants.
//! * [`partition`]: finite-volume partition functions by transfer recursion,
//!   renewal convolution and enumeration, plus convergence diagnostics.
//! * [`penalization`]: the penalization martingales, finite and infinite
//!   volume Gibbs measures on path prefixes and the semigroup-ratio probe.
//! * [`tilted`]: the polymer process under the limiting measure (tilted
//!   kernel, return times, excursions, delocalized decomposition).
//! * [`mc`]: stream-partitioned Monte Carlo estimation.
//! * [`cli`]: the `pinlab` command-line front end.
//!
//! Data-parallel sweeps go through [`exec::Execution`]; with the `parallel`
//! feature disabled every sweep runs sequentially and produces identical
//! results.

pub mod cli;
pub mod error;
pub mod exec;
pub mod mc;
pub mod partition;
pub mod penalization;
pub mod renewal;
pub mod rng;
pub mod stats;
pub mod tilted;
pub mod walk;

pub use error::{Error, Result};
pub use exec::Execution;
pub use rng::RandomSource;
pub use walk::{LatticePath, LocalTimeConvention};
