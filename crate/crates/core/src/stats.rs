//! Chi-square goodness-of-fit and homogeneity tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    fn new(statistic: f64, dof: usize) -> Result<Self> {
        if dof == 0 {
            return Err(Error::domain("bins", 1, "need at least two nonempty bins"));
        }
        let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Invariant(e.to_string()))?;
        Ok(Self {
            statistic,
            dof,
            p_value: dist.sf(statistic),
        })
    }

    pub fn passes(&self, level: f64) -> bool {
        self.p_value >= level
    }
}

/// Observed counts against bin probabilities (which must sum to 1; put any
/// remaining tail mass in the last bin).
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareTest> {
    if observed.len() != probs.len() {
        return Err(Error::domain("probs", probs.len(), "must match the number of bins"));
    }
    let n: u64 = observed.iter().sum();
    let mut statistic = 0.0;
    let mut bins = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * n as f64;
        if e > 0.0 {
            statistic += (o as f64 - e).powi(2) / e;
            bins += 1;
        } else if o > 0 {
            return Ok(ChiSquareTest {
                statistic: f64::INFINITY,
                dof: bins.max(1),
                p_value: 0.0,
            });
        }
    }
    ChiSquareTest::new(statistic, bins.saturating_sub(1))
}

/// Two-sample homogeneity test on a common binning.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquareTest> {
    if a.len() != b.len() {
        return Err(Error::domain("bins", b.len(), "samples must share a binning"));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let mut statistic = 0.0;
    let mut bins = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        bins += 1;
        for (obs, n) in [(x as f64, na), (y as f64, nb)] {
            let e = n * col / total;
            statistic += (obs - e).powi(2) / e;
        }
    }
    ChiSquareTest::new(statistic, bins.saturating_sub(1))
}
