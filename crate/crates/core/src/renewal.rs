//! First-return law of the walk, the free energy and the tilted renewal law.

use crate::error::{require_positive, Error, Result};
use crate::walk::{pmf_position, LocalTimeConvention};

/// Tail bound below which renewal series are cut.
pub const SERIES_TOLERANCE: f64 = 1e-12;

const MAX_TRUNCATION: usize = 50_000_000;

/// `K(m) = P_0(τ_0 = 2m) = C(2m, m) 2^{-2m} / (2m - 1)`; zero for `m = 0`.
pub fn first_return_pmf(m: u64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    pmf_position(2 * m, 0) / (2 * m - 1) as f64
}

/// `K̄(n) = Σ_{j>n} K(j) = P_0(τ_0 > 2n) = P_0(b_{2n} = 0)`.
pub fn first_return_tail(n: u64) -> f64 {
    pmf_position(2 * n, 0)
}

/// Tabulated `K(m)` for `m = 1..=m_max` and `K̄(n)` for `n = 0..=m_max`.
#[derive(Clone, Debug)]
pub struct FirstReturnLaw {
    pmf: Vec<f64>,
    tail: Vec<f64>,
}

impl FirstReturnLaw {
    pub fn new(m_max: usize) -> Self {
        let mut pmf = Vec::with_capacity(m_max + 1);
        let mut tail = Vec::with_capacity(m_max + 1);
        pmf.push(0.0);
        tail.push(1.0);
        let (mut k, mut u) = (0.5f64, 1.0f64);
        for m in 1..=m_max {
            pmf.push(k);
            // K(m+1) = K(m)(2m-1)/(2m+2);  u_m = u_{m-1}(2m-1)/(2m)
            u *= (2 * m - 1) as f64 / (2 * m) as f64;
            tail.push(u);
            k *= (2 * m - 1) as f64 / (2 * m + 2) as f64;
        }
        Self { pmf, tail }
    }

    pub fn m_max(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `K(m)`; zero outside `1..=m_max`.
    pub fn pmf(&self, m: usize) -> f64 {
        self.pmf.get(m).copied().unwrap_or(0.0)
    }

    pub fn tail(&self, n: usize) -> f64 {
        self.tail[n]
    }

    pub fn pmf_slice(&self) -> &[f64] {
        &self.pmf
    }

    pub fn tail_slice(&self) -> &[f64] {
        &self.tail
    }
}

/// `F(β) = β - ln(2 - e^{-β}) = -ln(1 - (1 - e^{-β})^2)`.
pub fn free_energy(beta: f64) -> Result<f64> {
    require_positive("beta", beta)?;
    let a = (-beta).exp_m1();
    if beta < 1.0 {
        Ok(-(-(a * a)).ln_1p())
    } else {
        Ok(beta - (-a).ln_1p())
    }
}

/// Root of `e^β E_0[e^{-F τ_0 / 2}] = 1` on `[0, β]` by bisection.
pub fn free_energy_bisection(beta: f64) -> Result<f64> {
    require_positive("beta", beta)?;
    let residual = |f: f64| beta.exp() * crate::walk::return_transform(0.5 * f) - 1.0;
    let (mut lo, mut hi) = (0.0f64, beta);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form constants of the localized phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    pub beta: f64,
    pub free_energy: f64,
    /// limit of `e^{-mF} Z^c_{2m}`
    pub c_constrained: f64,
    /// limit of `e^{-mF} Z^f_{2m}`
    pub c_free: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

pub fn constants(beta: f64) -> Result<Constants> {
    let f = free_energy(beta)?;
    let one_minus = -(-beta).exp_m1();
    let two_minus = 1.0 + one_minus;
    let ln_two_minus = one_minus.ln_1p();
    Ok(Constants {
        beta,
        free_energy: f,
        c_constrained: 2.0 * one_minus / two_minus,
        c_free: 2.0 / two_minus,
        c_plus: 0.5 * (beta + ln_two_minus),
        c_minus: 0.5 * f,
    })
}

/// Smallest `M` with `e^{β - M F} K̄(M - 1) < 1e-12`.
pub fn truncation_point(beta: f64) -> Result<usize> {
    let f = free_energy(beta)?;
    let mut tail = 1.0f64; // K̄(M - 1)
    for m in 1..MAX_TRUNCATION {
        if (beta - m as f64 * f).exp() * tail < SERIES_TOLERANCE {
            return Ok(m);
        }
        tail *= (2 * m - 1) as f64 / (2 * m) as f64;
    }
    Err(Error::guard("renewal truncation", MAX_TRUNCATION, MAX_TRUNCATION as u64))
}

/// `K̃_β(m) = e^{β - m F(β)} K(m)` truncated at `m_max`.
#[derive(Clone, Debug)]
pub struct TiltedRenewalLaw {
    pub beta: f64,
    pub free_energy: f64,
    pmf: Vec<f64>,
    /// `Σ_{m <= m_max} m K̃_β(m)`
    pub mean: f64,
    /// `Σ_{m <= m_max} K̃_β(m)`
    pub mass: f64,
}

impl TiltedRenewalLaw {
    pub fn pmf(&self, m: usize) -> f64 {
        self.pmf.get(m).copied().unwrap_or(0.0)
    }

    pub fn pmf_slice(&self) -> &[f64] {
        &self.pmf
    }

    pub fn m_max(&self) -> usize {
        self.pmf.len() - 1
    }
}

/// `(2 - e^{-β}) / (2 (1 - e^{-β}))`
pub fn tilted_mean(beta: f64) -> Result<f64> {
    require_positive("beta", beta)?;
    let one_minus = -(-beta).exp_m1();
    Ok((1.0 + one_minus) / (2.0 * one_minus))
}

pub fn tilted_law(beta: f64, m_max: usize) -> Result<TiltedRenewalLaw> {
    let f = free_energy(beta)?;
    let law = FirstReturnLaw::new(m_max);
    let pmf: Vec<f64> = (0..=m_max)
        .map(|m| {
            if m == 0 {
                0.0
            } else {
                (beta - m as f64 * f).exp() * law.pmf(m)
            }
        })
        .collect();
    // smallest terms first
    let mass: f64 = pmf.iter().rev().sum();
    let mean: f64 = pmf.iter().enumerate().rev().map(|(m, p)| m as f64 * p).sum();
    if mass < 1.0 - 1e-10 {
        return Err(Error::Truncation {
            m_max,
            achieved_mass: mass,
        });
    }
    // Σ_{m>M} m K̃(m) <= e^β K(M+1) Σ_{m>M} m e^{-mF}
    let q = (-f).exp();
    let m1 = (m_max + 1) as f64;
    let mean_tail = beta.exp() * first_return_pmf(m_max as u64 + 1) * q.powf(m1)
        * (m1 - m_max as f64 * q)
        / ((1.0 - q) * (1.0 - q));
    let target = tilted_mean(beta)?;
    if mean > target + 1e-10 || mean < target - mean_tail - 1e-10 {
        return Err(Error::Invariant(format!(
            "tilted mean {mean} inconsistent with closed form {target}"
        )));
    }
    Ok(TiltedRenewalLaw {
        beta,
        free_energy: f,
        pmf,
        mean,
        mass,
    })
}

fn prefactor_exponent(x: i64, n: u64, beta: f64, f: f64) -> f64 {
    let ax = x.unsigned_abs();
    let odd = (n + ax) % 2;
    0.5 * f * (n + ax - odd) as f64 - beta * ax as f64
}

/// Log of the large-`n` equivalent of `E_x[e^{β ℓ_n}]`.
///
/// `ln c_f + (F/2)(n + |x| - 1_odd(n + x)) - β|x|`, plus `β` whenever the
/// convention counts a visit at the first hit of 0 (any `x != 0`, or `x = 0`
/// with the origin counted).
pub fn ln_asymptotic_laplace(x: i64, n: u64, beta: f64, conv: LocalTimeConvention) -> Result<f64> {
    let c = constants(beta)?;
    let first_visit = x != 0 || conv == LocalTimeConvention::WithOrigin;
    Ok(c.c_free.ln() + prefactor_exponent(x, n, beta, c.free_energy) + if first_visit { beta } else { 0.0 })
}

/// Same equivalent with the `c_f` prefactor for every `x`; agrees with
/// [`ln_asymptotic_laplace`] only at `x = 0` under the returns convention.
pub fn ln_asymptotic_laplace_printed(x: i64, n: u64, beta: f64) -> Result<f64> {
    let c = constants(beta)?;
    Ok(c.c_free.ln() + prefactor_exponent(x, n, beta, c.free_energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;
    use crate::walk::{enumerate_paths, return_time};

    #[test]
    fn first_return_examples() {
        assert!((first_return_pmf(1) - 0.5).abs() < 1e-15);
        assert!((first_return_pmf(2) - 0.125).abs() < 1e-15);
        assert!((first_return_pmf(3) - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(first_return_tail(0), 1.0);
        assert_eq!(first_return_pmf(0), 0.0);
    }

    #[test]
    fn first_return_matches_enumeration() {
        for m in 1..=6u64 {
            let n = 2 * m as usize;
            let hits = enumerate_paths(n, 0)
                .unwrap()
                .filter(|p| return_time(p, 0) == Some(n))
                .count();
            let exact = hits as f64 / (1u64 << n) as f64;
            assert!((first_return_pmf(m) - exact).abs() < 1e-15, "m={m}");
        }
    }

    #[test]
    fn table_agrees_with_closed_forms() {
        let law = FirstReturnLaw::new(2000);
        for m in [1usize, 2, 17, 500, 2000] {
            assert!((law.pmf(m) / first_return_pmf(m as u64) - 1.0).abs() < 1e-12);
            assert!((law.tail(m) / first_return_tail(m as u64) - 1.0).abs() < 1e-12);
        }
        // tail is the complement of the partial sum, summed largest first
        for n in [0usize, 1, 10, 300, 2000] {
            let partial: f64 = (1..=n).map(|m| law.pmf(m)).sum();
            assert!((partial + law.tail(n) - 1.0).abs() < 1e-12);
        }
        assert!(law.tail_slice().windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn free_energy_examples() {
        let ln2 = LN_2;
        assert!((free_energy(ln2).unwrap() - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!(free_energy(1e-6).unwrap() < 2e-12);
        let big = 40.0;
        assert!((free_energy(big).unwrap() - (big - ln2)).abs() < 1e-12);
        assert!(free_energy(0.0).is_err());
        assert!(free_energy(-1.0).is_err());
    }

    #[test]
    fn bisection_reproduces_closed_form() {
        for beta in [0.05, 0.2, LN_2, 1.5, 4.0] {
            let a = free_energy(beta).unwrap();
            let b = free_energy_bisection(beta).unwrap();
            assert!((a - b).abs() < 1e-13, "beta={beta}: {a} vs {b}");
            let resid = beta.exp() * crate::walk::return_transform(0.5 * a) - 1.0;
            assert!(resid.abs() < 1e-12);
        }
    }

    #[test]
    fn constants_at_ln2() {
        let c = constants(LN_2).unwrap();
        assert!((c.c_constrained - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.c_free - 4.0 / 3.0).abs() < 1e-15);
        assert!((c.c_plus - 0.5 * 3.0f64.ln()).abs() < 1e-15);
        assert!((c.c_minus - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((c.c_plus.cosh() * (-c.c_minus).exp() - 1.0).abs() < 1e-14);
        for beta in [0.2, 1.0, 3.0] {
            let c = constants(beta).unwrap();
            assert!((c.c_plus + c.c_minus - beta).abs() < 1e-14);
            assert!((2.0 * c.c_minus - c.free_energy).abs() < 1e-14);
        }
    }

    #[test]
    fn tilted_law_at_ln2() {
        let law = tilted_law(LN_2, truncation_point(LN_2).unwrap()).unwrap();
        assert!((law.pmf(1) - 0.75).abs() < 1e-15);
        assert!((law.mean - 1.5).abs() < 1e-10);
        assert!((law.mass - 1.0).abs() < 1e-10);
        let ratios: Vec<f64> = (1..50).map(|m| law.pmf(m) / first_return_pmf(m as u64)).collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn short_truncation_is_refused() {
        match tilted_law(0.2, 10) {
            Err(Error::Truncation { achieved_mass, .. }) => assert!(achieved_mass < 1.0),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn truncation_policy() {
        for beta in [0.2, LN_2, 1.5] {
            let m = truncation_point(beta).unwrap();
            let f = free_energy(beta).unwrap();
            assert!((beta - m as f64 * f).exp() * first_return_tail(m as u64 - 1) < 1e-12);
            assert!((beta - (m - 1) as f64 * f).exp() * first_return_tail(m as u64 - 2) >= 1e-12);
        }
    }

    #[test]
    fn asymptotic_laplace_cases() {
        use LocalTimeConvention::*;
        let b = LN_2;
        let c = constants(b).unwrap();
        let even = ln_asymptotic_laplace(0, 10, b, Returns).unwrap();
        assert!((even - (c.c_free.ln() + 5.0 * c.free_energy)).abs() < 1e-14);
        let odd = ln_asymptotic_laplace(0, 11, b, Returns).unwrap();
        assert!((odd - even).abs() < 1e-14);
        for x in 1..5 {
            for n in 20..24 {
                let a = ln_asymptotic_laplace(x, n, b, Returns).unwrap();
                assert_eq!(a, ln_asymptotic_laplace(-x, n, b, Returns).unwrap());
                let printed = ln_asymptotic_laplace_printed(x, n, b).unwrap();
                assert!((a - printed - b).abs() < 1e-13);
            }
        }
        assert_eq!(
            ln_asymptotic_laplace(0, 12, b, Returns).unwrap(),
            ln_asymptotic_laplace_printed(0, 12, b).unwrap()
        );
    }
}
