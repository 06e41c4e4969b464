//! Finite-volume partition functions `Z^f_n = E_x[e^{β ℓ_n}]` and
//! `Z^c_n = E_x[e^{β ℓ_n} 1{b_n = 0}]` by three independent routes.
//!
//! All values are returned as natural logarithms; `-inf` encodes an exact
//! zero (e.g. a constrained length of the wrong parity).

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::renewal::{self, FirstReturnLaw};
use crate::walk::{positions_from_mask, LocalTimeConvention, MAX_ENUMERATION_LENGTH};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Forward weighted transfer recursion over positions.
    Dp,
    /// Convolution over return-time compositions (start 0 only).
    Renewal,
    /// Exhaustive path enumeration (`n <= 24`).
    Enumeration,
}

/// Log partition function for every length `0..=n_max`.
#[derive(Clone, Debug)]
pub struct PartitionTable {
    pub beta: f64,
    pub convention: LocalTimeConvention,
    pub method: Method,
    pub constrained: bool,
    pub start: i64,
    log_values: Vec<f64>,
}

impl PartitionTable {
    pub fn build(
        method: Method,
        beta: f64,
        n_max: usize,
        start: i64,
        constrained: bool,
        conv: LocalTimeConvention,
    ) -> Result<Self> {
        check_beta(beta)?;
        let log_values = match method {
            Method::Dp => {
                let run = TransferRun::new(n_max, beta, start, conv);
                if constrained {
                    run.log_constrained
                } else {
                    run.log_free
                }
            }
            Method::Renewal => {
                if start != 0 {
                    return Err(Error::domain("start", start, "renewal route requires start 0"));
                }
                let table = RenewalTable::new(beta, n_max / 2);
                (0..=n_max)
                    .map(|n| {
                        let v = if constrained {
                            table.ln_constrained_len(n)
                        } else {
                            table.ln_free_len(n)
                        };
                        v + origin_shift(beta, conv, start)
                    })
                    .collect()
            }
            Method::Enumeration => {
                if n_max > MAX_ENUMERATION_LENGTH {
                    return Err(Error::guard("path length", n_max, MAX_ENUMERATION_LENGTH as u64));
                }
                (0..=n_max)
                    .map(|n| enumeration_z(n, beta, start, constrained, conv))
                    .collect::<Result<_>>()?
            }
        };
        Ok(Self {
            beta,
            convention: conv,
            method,
            constrained,
            start,
            log_values,
        })
    }

    pub fn n_max(&self) -> usize {
        self.log_values.len() - 1
    }

    pub fn ln_value(&self, n: usize) -> f64 {
        self.log_values[n]
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("beta", beta, "must be finite"))
    }
}

fn origin_shift(beta: f64, conv: LocalTimeConvention, start: i64) -> f64 {
    beta * conv.origin_count(start) as f64
}

/// Forward transfer recursion from `start`, recording log `Z^f_t` and
/// `Z^c_t` for every `t <= n`. Rows are rescaled by their maximum each step.
#[derive(Clone, Debug)]
pub struct TransferRun {
    pub log_free: Vec<f64>,
    pub log_constrained: Vec<f64>,
}

impl TransferRun {
    pub fn new(n: usize, beta: f64, start: i64, conv: LocalTimeConvention) -> Self {
        let lo = start - n as i64;
        let width = 2 * n + 3;
        // index i <-> site lo - 1 + i, one guard cell on each side
        let idx = |site: i64| (site - lo + 1) as usize;
        let zero = (start.unsigned_abs() as usize <= n).then(|| idx(0));
        let pin = beta.exp();
        let mut cur = vec![0.0f64; width];
        let mut next = vec![0.0f64; width];
        cur[idx(start)] = 1.0;
        let mut offset = origin_shift(beta, conv, start);
        let mut log_free = Vec::with_capacity(n + 1);
        let mut log_constrained = Vec::with_capacity(n + 1);
        let record = |cur: &[f64], offset: f64, lf: &mut Vec<f64>, lc: &mut Vec<f64>| {
            let total: f64 = cur.iter().sum();
            lf.push(offset + total.ln());
            lc.push(zero.map_or(f64::NEG_INFINITY, |z| offset + cur[z].ln()));
        };
        record(&cur, offset, &mut log_free, &mut log_constrained);
        let s = idx(start);
        for t in 0..n {
            let (a, b) = (s - t, s + t);
            next[a - 1..=b + 1].iter_mut().for_each(|v| *v = 0.0);
            for i in (a..=b).step_by(2) {
                let half = 0.5 * cur[i];
                next[i - 1] += half;
                next[i + 1] += half;
            }
            if let Some(z) = zero {
                next[z] *= pin;
            }
            let max = next[a - 1..=b + 1].iter().fold(0.0f64, |m, &v| m.max(v));
            next[a - 1..=b + 1].iter_mut().for_each(|v| *v /= max);
            offset += max.ln();
            cur[a..=b].iter_mut().for_each(|v| *v = 0.0);
            std::mem::swap(&mut cur, &mut next);
            record(&cur, offset, &mut log_free, &mut log_constrained);
        }
        Self {
            log_free,
            log_constrained,
        }
    }
}

/// Log `Z` of length `n` by the transfer recursion.
pub fn transfer_z(
    n: usize,
    beta: f64,
    start: i64,
    constrained: bool,
    conv: LocalTimeConvention,
) -> Result<f64> {
    check_beta(beta)?;
    let run = TransferRun::new(n, beta, start, conv);
    Ok(if constrained {
        run.log_constrained[n]
    } else {
        run.log_free[n]
    })
}

/// Renewal route from the origin (returns convention).
///
/// Stores `e^{-mλ} Z^c_{2m}` and `e^{-mλ} Z^f_{2m}` with `λ = F(β)` for
/// `β > 0` (both then lie in `[0, 1]` and `[0, e^β]`) and `λ = 0` otherwise.
#[derive(Clone, Debug)]
pub struct RenewalTable {
    pub beta: f64,
    pub scale: f64,
    constrained: Vec<f64>,
    free: Vec<f64>,
}

impl RenewalTable {
    pub fn new(beta: f64, m_max: usize) -> Self {
        let scale = if beta > 0.0 {
            renewal::free_energy(beta).expect("beta > 0")
        } else {
            0.0
        };
        let law = FirstReturnLaw::new(m_max);
        let tilted: Vec<f64> = (0..=m_max)
            .map(|j| (beta - j as f64 * scale).exp() * law.pmf(j))
            .collect();
        let tail: Vec<f64> = (0..=m_max)
            .map(|j| (-(j as f64) * scale).exp() * law.tail(j))
            .collect();
        let mut constrained = vec![0.0f64; m_max + 1];
        constrained[0] = 1.0;
        for m in 1..=m_max {
            constrained[m] = (1..=m).map(|j| tilted[j] * constrained[m - j]).sum();
        }
        let free = (0..=m_max)
            .map(|m| (0..=m).map(|j| constrained[m - j] * tail[j]).sum())
            .collect();
        Self {
            beta,
            scale,
            constrained,
            free,
        }
    }

    pub fn m_max(&self) -> usize {
        self.constrained.len() - 1
    }

    /// `e^{-mλ} Z^c_{2m}`
    pub fn scaled_constrained(&self, m: usize) -> f64 {
        self.constrained[m]
    }

    /// `e^{-mλ} Z^f_{2m}`
    pub fn scaled_free(&self, m: usize) -> f64 {
        self.free[m]
    }

    pub fn ln_constrained(&self, m: usize) -> f64 {
        self.constrained[m].ln() + m as f64 * self.scale
    }

    pub fn ln_free(&self, m: usize) -> f64 {
        self.free[m].ln() + m as f64 * self.scale
    }

    /// Constrained log `Z` at length `n`; `-inf` for odd `n`.
    pub fn ln_constrained_len(&self, n: usize) -> f64 {
        if n % 2 == 1 {
            f64::NEG_INFINITY
        } else {
            self.ln_constrained(n / 2)
        }
    }

    /// Free log `Z` at length `n`; odd lengths reuse `n - 1`.
    pub fn ln_free_len(&self, n: usize) -> f64 {
        self.ln_free(n / 2)
    }
}

/// Log `Z^c_{2m}` from `Z^c_{2m} = Σ_{j=1}^m e^β K(j) Z^c_{2(m-j)}`.
pub fn renewal_z_constrained(m: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(RenewalTable::new(beta, m).ln_constrained(m))
}

/// Log `Z^f_{2m}` from `Z^f_{2m} = Σ_{j=0}^m Z^c_{2(m-j)} K̄(j)`.
pub fn renewal_z_free(m: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(RenewalTable::new(beta, m).ln_free(m))
}

/// Exact local-time histograms over all `2^n` paths from `start`:
/// `(free[k], constrained[k])` count paths with `ℓ_n = k`.
pub fn local_time_histogram(
    n: usize,
    start: i64,
    conv: LocalTimeConvention,
    exec: Execution,
) -> Result<(Vec<u64>, Vec<u64>)> {
    if n > MAX_ENUMERATION_LENGTH {
        return Err(Error::guard("path length", n, MAX_ENUMERATION_LENGTH as u64));
    }
    let bins = n + 2;
    let origin = conv.origin_count(start) as usize;
    let total = 1usize << n;
    let blocks = exec.map_blocks(total, 1 << 12, |range| {
        let mut free = vec![0u64; bins];
        let mut constrained = vec![0u64; bins];
        let mut buf = vec![0i64; n + 1];
        for mask in range {
            positions_from_mask(n, start, mask as u64, &mut buf);
            let k = origin + buf[1..].iter().filter(|&&b| b == 0).count();
            free[k] += 1;
            if buf[n] == 0 {
                constrained[k] += 1;
            }
        }
        (free, constrained)
    });
    let mut free = vec![0u64; bins];
    let mut constrained = vec![0u64; bins];
    for (f, c) in blocks {
        free.iter_mut().zip(f).for_each(|(a, b)| *a += b);
        constrained.iter_mut().zip(c).for_each(|(a, b)| *a += b);
    }
    Ok((free, constrained))
}

/// Log `Z` by exhaustive enumeration.
pub fn enumeration_z(
    n: usize,
    beta: f64,
    start: i64,
    constrained: bool,
    conv: LocalTimeConvention,
) -> Result<f64> {
    check_beta(beta)?;
    let (free, cons) = local_time_histogram(n, start, conv, Execution::default())?;
    let counts = if constrained { cons } else { free };
    let z: f64 = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * (beta * k as f64).exp())
        .sum();
    Ok(z.ln() - n as f64 * std::f64::consts::LN_2)
}

/// `U_{n,p}(x) = E_x[e^{β ℓ_{n-p}}] / E_0[e^{β ℓ_n}]`, both counting the
/// time-0 zero so that `ℓ_n = ℓ̂_p + ℓ_{n-p} ∘ θ_p`.
pub fn u_ratio(n: usize, p: usize, x: i64, beta: f64) -> Result<f64> {
    if p > n {
        return Err(Error::domain("p", p, "must satisfy p <= n"));
    }
    let conv = LocalTimeConvention::WithOrigin;
    let num = transfer_z(n - p, beta, x, false, conv)?;
    let den = transfer_z(n, beta, 0, false, conv)?;
    Ok((num - den).exp())
}

/// `lim_n U_{n,p}(x) = exp{(F/2)(|x| - p) - β|x|}` on reachable `(p, x)`.
pub fn u_ratio_limit(p: usize, x: i64, beta: f64) -> Result<f64> {
    let f = renewal::free_energy(beta)?;
    let ax = x.unsigned_abs() as f64;
    Ok((0.5 * f * (ax - p as f64) - beta * ax).exp())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledPartitionRow {
    pub m: usize,
    /// `e^{-mF} Z^c_{2m}`
    pub constrained: f64,
    /// `e^{-mF} Z^f_{2m}`
    pub free: f64,
}

/// Scaled constrained and free partition functions (returns convention).
pub fn scaled_partition_diagnostic(beta: f64, m_list: &[usize]) -> Result<Vec<ScaledPartitionRow>> {
    crate::error::require_positive("beta", beta)?;
    let m_max = m_list.iter().copied().max().unwrap_or(0);
    let table = RenewalTable::new(beta, m_max);
    Ok(m_list
        .iter()
        .map(|&m| ScaledPartitionRow {
            m,
            constrained: table.scaled_constrained(m),
            free: table.scaled_free(m),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceEquivalentRow {
    pub n: usize,
    pub ln_exact: f64,
    pub ln_asymptotic: f64,
    /// exact / asymptotic
    pub ratio: f64,
    /// exact / printed equivalent (`c_f` prefactor for every `x`)
    pub printed_ratio: f64,
}

/// Exact `E_x[e^{β ℓ_n}]` (returns convention) against its large-`n`
/// equivalent for each `n` in `n_list`.
pub fn laplace_equivalent_diagnostic(x: i64, beta: f64, n_list: &[usize]) -> Result<Vec<LaplaceEquivalentRow>> {
    crate::error::require_positive("beta", beta)?;
    let conv = LocalTimeConvention::Returns;
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let run = TransferRun::new(n_max, beta, x, conv);
    n_list
        .iter()
        .map(|&n| {
            let ln_exact = run.log_free[n];
            let ln_asymptotic = renewal::ln_asymptotic_laplace(x, n as u64, beta, conv)?;
            let ln_printed = renewal::ln_asymptotic_laplace_printed(x, n as u64, beta)?;
            Ok(LaplaceEquivalentRow {
                n,
                ln_exact,
                ln_asymptotic,
                ratio: (ln_exact - ln_asymptotic).exp(),
                printed_ratio: (ln_exact - ln_printed).exp(),
            })
        })
        .collect()
}
