//! Simple symmetric random walk primitives.

mod distributions;
mod enumerate;
mod path;
mod sampling;

pub use distributions::{
    kappa_scaling, laplace_t, laplace_tau, return_transform, ln_binomial, ln_factorial, local_time_pmf,
    pmf_hitting_time, pmf_local_time, pmf_position, pmf_running_max, KappaScaling, KAPPA,
};
pub use enumerate::{enumerate_paths, positions_from_mask, PathEnumeration, MAX_ENUMERATION_LENGTH};
pub use path::{
    hitting_time, local_time, modified_local_time, return_time, running_max, LatticePath,
    LocalTimeConvention,
};
pub use sampling::{bessel_kernel, sample_bessel_walk, sample_srw};
