//! Stream-partitioned Monte Carlo estimation.
//!
//! Samples are split into contiguous per-stream batches; each stream owns a
//! [`RandomSource`] keyed by `(seed, stream)` and the per-stream moments are
//! merged in stream order, so results do not depend on the thread count.

use crate::error::{require_positive, Error, Result};
use crate::exec::Execution;
use crate::penalization::{Martingale, MartingaleForm, Phase};
use crate::rng::RandomSource;
use crate::tilted::{self, localized_kernel};
use crate::walk::{modified_local_time, sample_srw, LatticePath};

/// Running mean and centred second moment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Pairwise combination of two disjoint batches.
    pub fn merge(&self, other: &Accumulator) -> Accumulator {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Accumulator {
            n,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.n as f64 * w,
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// A Monte Carlo mean with its standard error and provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateWithError {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub streams: u32,
}

impl EstimateWithError {
    pub fn from_accumulator(acc: &Accumulator, seed: u64, streams: u32) -> Self {
        Self {
            mean: acc.mean(),
            stderr: acc.stderr(),
            n_samples: acc.count(),
            seed,
            streams,
        }
    }

    fn accumulator(&self) -> Accumulator {
        let n = self.n_samples;
        let var = self.stderr * self.stderr * n as f64;
        Accumulator {
            n,
            mean: self.mean,
            m2: if n < 2 { 0.0 } else { var * (n - 1) as f64 },
        }
    }

    /// Pools two independent estimates; stream counts add.
    pub fn merge(&self, other: &EstimateWithError) -> EstimateWithError {
        let acc = self.accumulator().merge(&other.accumulator());
        EstimateWithError::from_accumulator(&acc, self.seed, self.streams + other.streams)
    }

    /// `|mean - target| <= k · stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }

    /// Whether two estimates agree within `k` combined standard errors.
    pub fn agrees_with(&self, other: &EstimateWithError, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * self.stderr.hypot(other.stderr)
    }
}

/// Path law used by [`mc_estimate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplerSpec {
    /// Plain walk from 0.
    Srw { length: usize },
    /// Localized kernel chain.
    Localized { beta: f64, length: usize },
    /// Delocalized decomposition sampler.
    Delocalized { alpha: f64, length: usize },
    /// Plain walk from 0, each sample weighted by `M_length`.
    Weighted { phase: Phase, length: usize },
}

/// Seed, stream count and execution mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    pub streams: u32,
    pub execution: Execution,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            streams: 32,
            execution: Execution::default(),
        }
    }
}

impl McConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Mean of `draw(rng)` over `n_samples` draws.
pub fn mc_estimate_with<F>(n_samples: u64, config: McConfig, draw: F) -> Result<EstimateWithError>
where
    F: Fn(&mut RandomSource) -> f64 + Sync + Send,
{
    if n_samples < 2 {
        return Err(Error::domain("n_samples", n_samples, "must be >= 2"));
    }
    if config.streams == 0 {
        return Err(Error::domain("streams", 0, "must be >= 1"));
    }
    let streams = config.streams as u64;
    let (base, extra) = (n_samples / streams, n_samples % streams);
    let parts = config.execution.map(config.streams as usize, |s| {
        let count = base + u64::from((s as u64) < extra);
        let mut rng = RandomSource::new(config.seed, s as u32);
        let mut acc = Accumulator::default();
        for _ in 0..count {
            acc.push(draw(&mut rng));
        }
        acc
    });
    let acc = parts.iter().fold(Accumulator::default(), |a, b| a.merge(b));
    Ok(EstimateWithError::from_accumulator(&acc, config.seed, config.streams))
}

/// Mean of `functional(path)` with paths drawn according to `spec`.
pub fn mc_estimate<F>(functional: F, spec: SamplerSpec, n_samples: u64, config: McConfig) -> Result<EstimateWithError>
where
    F: Fn(&LatticePath) -> f64 + Sync + Send,
{
    match spec {
        SamplerSpec::Srw { length } => mc_estimate_with(n_samples, config, |rng| functional(&sample_srw(length, 0, rng))),
        SamplerSpec::Localized { beta, length } => {
            let kernel = localized_kernel(beta)?;
            mc_estimate_with(n_samples, config, |rng| {
                functional(&tilted::sample_with_kernel(&kernel, length, rng))
            })
        }
        SamplerSpec::Delocalized { alpha, length } => {
            require_positive("alpha", alpha)?;
            mc_estimate_with(n_samples, config, |rng| {
                let d = tilted::delocalized_sampler(alpha, length, rng).expect("alpha validated");
                functional(&d.path)
            })
        }
        SamplerSpec::Weighted { phase, length } => {
            let m = Martingale::new(phase, MartingaleForm::Corrected)?;
            mc_estimate_with(n_samples, config, |rng| {
                let path = sample_srw(length, 0, rng);
                functional(&path) * m.at(length, path.end(), modified_local_time(&path))
            })
        }
    }
}
