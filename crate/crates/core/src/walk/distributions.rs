use std::f64::consts::PI;
use std::sync::OnceLock;

use super::LocalTimeConvention;
use crate::error::{require_positive, Error, Result};

/// `(2/π)^{1/2}`, the local-limit constant of the walk.
pub const KAPPA: f64 = 0.797_884_560_802_865_4;

const LN_FACTORIAL_TABLE_LEN: usize = 1 << 20;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Neumaier-compensated running sum of ln k.
        let mut table = Vec::with_capacity(LN_FACTORIAL_TABLE_LEN);
        table.push(0.0);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in 1..LN_FACTORIAL_TABLE_LEN {
            let x = (k as f64).ln();
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            table.push(sum + comp);
        }
        table
    })
}

/// `ln k!`, tabulated up to `2^20` and by Stirling's series beyond.
pub fn ln_factorial(k: u64) -> f64 {
    let table = ln_factorial_table();
    if (k as usize) < table.len() {
        return table[k as usize];
    }
    let n = k as f64;
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    n * n.ln() - n + 0.5 * (2.0 * PI * n).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0)))
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln n! - ((n + 1/2) ln n - n + ln sqrt(2π))`, the Stirling remainder.
fn stirlerr(n: u64) -> f64 {
    const SMALL: [f64; 16] = [
        0.0,
        0.081_061_466_795_327_258_219_670_2,
        0.041_340_695_955_409_294_093_822_1,
        0.027_677_925_684_998_339_148_789_29,
        0.020_790_672_103_765_093_111_522_77,
        0.016_644_691_189_821_192_163_194_87,
        0.013_876_128_823_070_747_998_745_73,
        0.011_896_709_945_891_770_095_055_72,
        0.010_411_265_261_972_096_497_478_567,
        0.009_255_462_182_712_732_917_728_637,
        0.008_330_563_433_362_871_256_469_318,
        0.007_573_675_487_951_840_794_972_024,
        0.006_942_840_107_209_529_865_664_152,
        0.006_408_994_188_004_207_068_439_631,
        0.005_951_370_112_758_847_735_624_416,
        0.005_554_733_551_962_801_371_038_690,
    ];
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n < 16 {
        return SMALL[n as usize];
    }
    let x = n as f64;
    let nn = x * x;
    if n > 500 {
        (S0 - S1 / nn) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / x
    }
}

/// Deviance term `x ln(x/m) + m - x`, summed as a series near `x = m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `C(n, k) 2^-n` to full relative precision (saddle-point form).
fn half_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if k == 0 || k == n {
        return if n < 1075 { 0.5f64.powi(n as i32) } else { 0.0 };
    }
    let (x, nf) = (k as f64, n as f64);
    let half = 0.5 * nf;
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(x, half) - bd0(nf - x, half);
    let lf = (2.0 * PI).ln() + x.ln() + (-x / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `P_0(b_n = r) = C(n, (n+r)/2) 2^-n` on the parity-admissible set.
pub fn pmf_position(n: u64, r: i64) -> f64 {
    let n_i = n as i64;
    if r.abs() > n_i || (n_i + r).rem_euclid(2) != 0 {
        return 0.0;
    }
    half_binomial(n, ((n_i + r) / 2) as u64)
}

/// `P_0(S_n = r) = max(p_{n,r}, p_{n,r+1})`.
pub fn pmf_running_max(n: u64, r: i64) -> f64 {
    if r < 0 {
        return 0.0;
    }
    pmf_position(n, r).max(pmf_position(n, r + 1))
}

/// `P_0(T_r = n) = (r/n) C(n, (n+r)/2) 2^-n`; level `r` is taken in absolute
/// value and `T_0 = 0`.
pub fn pmf_hitting_time(r: i64, n: u64) -> f64 {
    let r = r.abs();
    if r == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n == 0 {
        return 0.0;
    }
    r as f64 / n as f64 * pmf_position(n, r)
}

/// Exact law of the local time at 0 of a walk of length `n` from 0:
/// entry `k` is `P_0(ℓ_n = k)` for `k = 0..=k_max`.
///
/// Dynamic programme over (|b_t|, zero count), counts above `k_max` pooled.
/// Mass at `|b_t|` larger than the remaining horizon can no longer reach 0 and
/// is frozen, so the active band is `min(t, n - t)` wide.
pub fn local_time_pmf(n: usize, conv: LocalTimeConvention, k_max: usize) -> Vec<f64> {
    let cap = k_max + 1;
    let width = n + 2;
    let mut out = vec![0.0; k_max + 1];
    let c0 = conv.origin_count(0) as usize;
    if c0 > k_max {
        return out;
    }
    let mut cur = vec![0.0f64; (cap + 1) * width];
    let mut next = vec![0.0f64; (cap + 1) * width];
    let mut frozen = vec![0.0f64; cap + 1];
    cur[c0 * width] = 1.0;
    for t in 0..n {
        let active = t.min(n - t);
        let remaining = n - t - 1;
        next.iter_mut().for_each(|v| *v = 0.0);
        for c in 0..=cap {
            let row = &cur[c * width..c * width + active + 1];
            let hit = (c + 1).min(cap);
            for (j, &v) in row.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                if j == 0 {
                    next[c * width + 1] += v;
                } else {
                    let half = 0.5 * v;
                    next[c * width + j + 1] += half;
                    if j == 1 {
                        next[hit * width] += half;
                    } else {
                        next[c * width + j - 1] += half;
                    }
                }
            }
        }
        for c in 0..=cap {
            for j in (remaining + 1)..=(active + 1).min(n) {
                let idx = c * width + j;
                frozen[c] += next[idx];
                next[idx] = 0.0;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    for (c, slot) in out.iter_mut().enumerate() {
        *slot = frozen[c] + cur[c * width];
    }
    out
}

/// `P_0(ℓ_n = k)` under `conv`.
pub fn pmf_local_time(n: usize, k: usize, conv: LocalTimeConvention) -> f64 {
    local_time_pmf(n, conv, k)[k]
}

fn arccosh_exp(delta: f64) -> f64 {
    // acosh(e^δ) = ln(e^δ + (e^{2δ} - 1)^{1/2}), written to keep small δ exact
    (delta.exp_m1() + (2.0 * delta).exp_m1().sqrt()).ln_1p()
}

/// `E_0[e^{-δ T_r}] = exp{-r arccosh(e^δ)}`.
pub fn laplace_t(r: u32, delta: f64) -> Result<f64> {
    require_positive("delta", delta)?;
    Ok((-(r as f64) * arccosh_exp(delta)).exp())
}

/// `E_0[e^{-δ τ_r}]`; for `r = 0` this is `exp{-δ - arccosh(e^δ)}`.
pub fn laplace_tau(r: u32, delta: f64) -> Result<f64> {
    require_positive("delta", delta)?;
    if r >= 1 {
        laplace_t(r, delta)
    } else {
        Ok(return_transform(delta))
    }
}

/// `E_0[e^{-δ τ_0}] = 1 - (1 - e^{-2δ})^{1/2}` for `δ >= 0`.
pub fn return_transform(delta: f64) -> f64 {
    let u = (-2.0 * delta).exp();
    u / (1.0 + (-(-2.0 * delta).exp_m1()).sqrt())
}

/// Exact laws rescaled by their polynomial decay rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaScaling {
    /// `n^{1/2} P(S_n = p)`
    pub running_max: f64,
    /// `n^{1/2} P(ℓ_n = p)`, returns convention
    pub local_time: f64,
    /// `n'^{3/2} P(T_p = n')` with `n' ∈ {n, n+1}` parity matched; `None` for `p = 0`.
    pub hitting_time: Option<f64>,
}

pub fn kappa_scaling(n: u64, p: u64) -> Result<KappaScaling> {
    if n < 2 {
        return Err(Error::domain("n", n, "must be >= 2"));
    }
    let sqrt_n = (n as f64).sqrt();
    let running_max = sqrt_n * pmf_running_max(n, p as i64);
    let local_time =
        sqrt_n * pmf_local_time(n as usize, p as usize, LocalTimeConvention::Returns);
    let hitting_time = (p > 0).then(|| {
        let m = if (n + p) % 2 == 0 { n } else { n + 1 };
        (m as f64).powf(1.5) * pmf_hitting_time(p as i64, m)
    });
    Ok(KappaScaling {
        running_max,
        local_time,
        hitting_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use LocalTimeConvention::*;

    #[test]
    fn position_pmf_examples() {
        assert!((pmf_position(2, 0) - 0.5).abs() < 1e-15);
        assert!((pmf_position(4, 4) - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(pmf_position(3, 0), 0.0);
        assert_eq!(pmf_position(3, 5), 0.0);
    }

    #[test]
    fn max_and_hitting_examples() {
        assert!((pmf_hitting_time(1, 1) - 0.5).abs() < 1e-15);
        assert!((pmf_hitting_time(1, 3) - 0.125).abs() < 1e-15);
        assert!((pmf_running_max(2, 0) - 0.5).abs() < 1e-15);
        assert_eq!(pmf_hitting_time(2, 3), 0.0);
        assert_eq!(pmf_running_max(3, -1), 0.0);
    }

    #[test]
    fn local_time_examples() {
        assert!((pmf_local_time(2, 1, Returns) - 0.5).abs() < 1e-15);
        assert!((pmf_local_time(3, 1, Returns) - 0.5).abs() < 1e-15);
        assert!((pmf_local_time(0, 0, Returns) - 1.0).abs() < 1e-15);
        assert_eq!(pmf_local_time(0, 0, WithOrigin), 0.0);
        assert!((pmf_local_time(0, 1, WithOrigin) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn local_time_pmf_sums_to_one() {
        for n in [1usize, 7, 30, 101] {
            for conv in [Returns, WithOrigin] {
                let s: f64 = local_time_pmf(n, conv, n + 1).iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "n={n} sum={s}");
            }
        }
    }

    #[test]
    fn conventions_shift_the_local_time_law() {
        let r = local_time_pmf(40, Returns, 41);
        let o = local_time_pmf(40, WithOrigin, 42);
        assert_eq!(o[0], 0.0);
        for k in 0..=41 {
            assert!((r[k] - o[k + 1]).abs() < 1e-15);
        }
    }

    #[test]
    fn stirling_remainder_table() {
        for n in 1..40u64 {
            let direct = ln_factorial(n) - ((n as f64 + 0.5) * (n as f64).ln() - n as f64 + 0.5 * (2.0 * PI).ln());
            assert!((stirlerr(n) - direct).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn half_binomial_is_exact_for_small_n() {
        let mut row = vec![1.0f64];
        for n in 1..=60u64 {
            row = (0..=n as usize)
                .map(|k| 0.5 * (if k > 0 { row[k - 1] } else { 0.0 } + row.get(k).copied().unwrap_or(0.0)))
                .collect();
            for (k, &v) in row.iter().enumerate() {
                let tol = 16.0 * f64::EPSILON * (1.0 - v.ln());
                assert!((half_binomial(n, k as u64) / v - 1.0).abs() < tol, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn ln_factorial_matches_small_products() {
        let mut acc = 1.0f64;
        for k in 1..=20u64 {
            acc *= k as f64;
            assert!((ln_factorial(k) - acc.ln()).abs() < 1e-13);
        }
        // table / Stirling continuity
        let k = (LN_FACTORIAL_TABLE_LEN - 1) as u64;
        let step = ln_factorial(k + 1) - ln_factorial(k);
        assert!((step - ((k + 1) as f64).ln()).abs() < 1e-8);
    }

    #[test]
    fn laplace_examples() {
        // e^{-2δ} = 7/16
        let delta = -0.5 * (7.0f64 / 16.0).ln();
        assert!((laplace_tau(0, delta).unwrap() - 0.25).abs() < 1e-15);
        for d in [0.1, 0.5, 1.0] {
            let t1 = laplace_t(1, d).unwrap();
            assert!((laplace_t(2, d).unwrap() - t1 * t1).abs() < 1e-15);
            let closed = (-d - arccosh_exp(d)).exp();
            assert!((laplace_tau(0, d).unwrap() - closed).abs() < 1e-15);
        }
        assert!(laplace_tau(0, 1e-12).unwrap() > 1.0 - 2e-6);
        assert!(laplace_t(1, 0.0).is_err());
        assert!(laplace_tau(0, -1.0).is_err());
    }

    #[test]
    fn kappa_examples() {
        let k = kappa_scaling(10_000, 0).unwrap();
        assert!((k.running_max / KAPPA - 1.0).abs() < 0.02);
        assert!(k.hitting_time.is_none());
        assert!((KAPPA - (2.0 / PI).sqrt()).abs() < 1e-16);
        assert!(kappa_scaling(1, 0).is_err());
    }
}
