//! The polymer process under the limiting Gibbs measure.
//!
//! In the localized phase the limit is a Markov chain with an explicit
//! kernel; its return time to 0 follows the tilted renewal law. In the
//! delocalized phase the path splits at its last zero into a stopped walk
//! and a Bessel-type tail.

use crate::error::{require_positive, Error, Result};
use crate::exec::Execution;
use crate::penalization::{self, Martingale, MartingaleForm, Phase, PrefixTable};
use crate::renewal::{self, first_return_pmf};
use crate::rng::RandomSource;
use crate::walk::{bessel_kernel, positions_from_mask, sample_bessel_walk, LatticePath};

/// Sites on which the kernel is compared with the martingale ratio.
const KERNEL_CHECK_RADIUS: i64 = 20;
const KERNEL_CHECK_TOLERANCE: f64 = 1e-14;
/// Largest excursion length for [`excursion_check`].
pub const MAX_EXCURSION_LENGTH: usize = 16;

/// Localized-phase transition kernel on ℤ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltedKernel {
    beta: f64,
    away: f64,
}

/// Builds the kernel and checks it against `P(j, j±1) M(j±1) / M(j)`.
pub fn localized_kernel(beta: f64) -> Result<TiltedKernel> {
    require_positive("beta", beta)?;
    let kernel = TiltedKernel {
        beta,
        away: 0.5 * (-beta).exp(),
    };
    let defect = kernel_ratio_defect(&kernel, KERNEL_CHECK_RADIUS)?;
    if defect > KERNEL_CHECK_TOLERANCE {
        return Err(Error::Invariant(format!(
            "tilted kernel differs from martingale ratio by {defect:e}"
        )));
    }
    Ok(kernel)
}

/// `max_{|j| <= radius} |K(j, j±1) - (1/2) M(j±1) / M(j)|`.
pub fn kernel_ratio_defect(kernel: &TiltedKernel, radius: i64) -> Result<f64> {
    let m = Martingale::new(Phase::Localized { beta: kernel.beta }, MartingaleForm::Corrected)?;
    let mut worst = 0.0f64;
    for j in -radius..=radius {
        for to in [j - 1, j + 1] {
            let ratio = 0.5 * m.step_ratio(j, to);
            worst = worst.max((ratio - kernel.transition(j, to)).abs());
        }
    }
    Ok(worst)
}

impl TiltedKernel {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Probability of moving from `site` to `site + 1`.
    pub fn up_probability(&self, site: i64) -> f64 {
        match site.signum() {
            0 => 0.5,
            1 => self.away,
            _ => 1.0 - self.away,
        }
    }

    pub fn transition(&self, from: i64, to: i64) -> f64 {
        match to - from {
            1 => self.up_probability(from),
            -1 => 1.0 - self.up_probability(from),
            _ => 0.0,
        }
    }

    pub fn step(&self, site: i64, rng: &mut RandomSource) -> i64 {
        if site == 0 {
            return rng.fair_step();
        }
        let away = rng.bernoulli(self.away);
        if away == (site > 0) {
            1
        } else {
            -1
        }
    }

    /// Probability of the prefix `(b_0, ..., b_p)`.
    pub fn path_probability(&self, positions: &[i64]) -> f64 {
        positions.windows(2).map(|w| self.transition(w[0], w[1])).product()
    }
}

/// Path of length `n` from 0 driven by the localized kernel.
pub fn sample_localized(n: usize, beta: f64, rng: &mut RandomSource) -> Result<LatticePath> {
    let kernel = localized_kernel(beta)?;
    Ok(sample_with_kernel(&kernel, n, rng))
}

pub fn sample_with_kernel(kernel: &TiltedKernel, n: usize, rng: &mut RandomSource) -> LatticePath {
    let mut path = LatticePath::with_capacity(0, n);
    for _ in 0..n {
        let step = kernel.step(path.end(), rng);
        path.push_unchecked(step);
    }
    path
}

/// Steps until the chain started at 0 is back at 0, or `cap` if later.
pub fn sample_return_time(kernel: &TiltedKernel, cap: usize, rng: &mut RandomSource) -> usize {
    let mut site = 0i64;
    for t in 1..=cap {
        site += kernel.step(site, rng);
        if site == 0 {
            return t;
        }
    }
    cap
}

/// Depth-`p` prefix law of the kernel chain.
pub fn kernel_prefix_table(kernel: &TiltedKernel, p: usize, exec: Execution) -> Result<PrefixTable> {
    PrefixTable::from_weights(p, exec, |b| kernel.path_probability(b))
}

/// Maximum prefix discrepancy between the kernel chain and the
/// martingale-weighted walk at depth `p`.
pub fn kernel_check(beta: f64, p: usize, exec: Execution) -> Result<f64> {
    let kernel = localized_kernel(beta)?;
    let chain = kernel_prefix_table(&kernel, p, exec)?;
    let weighted = penalization::infinite_gibbs_table(Phase::Localized { beta }, MartingaleForm::Corrected, p, exec)?;
    chain.max_abs_diff(&weighted)
}

/// `Q(τ_0 = 2k) = e^{β - kF} K(k)`.
pub fn tau0_pmf_q(k: u64, beta: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("k", k, "must be >= 1"));
    }
    let f = renewal::free_energy(beta)?;
    Ok((beta - k as f64 * f).exp() * first_return_pmf(k))
}

/// `E^Q[e^{-δ τ_0}] = e^β (1 - sqrt(1 - e^{-(2δ + F)}))`.
pub fn tau0_laplace_q(delta: f64, beta: f64) -> Result<f64> {
    require_nonnegative("delta", delta)?;
    let f = renewal::free_energy(beta)?;
    if delta == 0.0 {
        return Ok(1.0);
    }
    // e^β · y / (1 + sqrt(1 - y)) with e^β e^{-F} = 2 - e^{-β}
    let root = (-(-(2.0 * delta + f)).exp_m1()).sqrt();
    Ok((2.0 - (-beta).exp()) * (-2.0 * delta).exp() / (1.0 + root))
}

/// The printed transform `e^β (e^{δ+F} - sqrt(e^{2(δ+F)} - 1))`; not
/// normalized.
pub fn tau0_laplace_q_printed(delta: f64, beta: f64) -> Result<f64> {
    require_nonnegative("delta", delta)?;
    let f = renewal::free_energy(beta)?;
    let s = delta + f;
    Ok(beta.exp() * (s.exp() - (2.0 * s).exp_m1().sqrt()))
}

/// `E^Q[τ_0] = (2 - e^{-β}) / (1 - e^{-β})`, in steps.
pub fn tau0_mean_q(beta: f64) -> Result<f64> {
    Ok(2.0 * renewal::tilted_mean(beta)?)
}

/// `E^Q[τ_0] / 2`, in units of half the return time.
pub fn tau0_mean_q_half_steps(beta: f64) -> Result<f64> {
    renewal::tilted_mean(beta)
}

/// Mean obtained by differentiating the printed transform.
pub fn tau0_mean_q_printed(beta: f64) -> Result<f64> {
    let f = renewal::free_energy(beta)?;
    Ok((beta + f).exp() * (1.0 / (-(-2.0 * f).exp_m1()).sqrt() - 1.0))
}

/// `Σ_{k <= k_max} 2k Q(τ_0 = 2k)`.
pub fn tau0_mean_series(beta: f64, k_max: u64) -> Result<f64> {
    let f = renewal::free_energy(beta)?;
    Ok((1..=k_max)
        .rev()
        .map(|k| 2.0 * k as f64 * (beta - k as f64 * f).exp() * first_return_pmf(k))
        .sum())
}

fn require_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, value, "must be finite and >= 0"))
    }
}

/// Max over first-excursion shapes of length `n_exc` of
/// `|Q(shape | τ_0 = n_exc) - P(shape | τ_0 = n_exc)|`.
pub fn excursion_check(n_exc: usize, beta: f64) -> Result<f64> {
    if n_exc == 0 || n_exc % 2 == 1 {
        return Err(Error::domain("n_exc", n_exc, "must be even and positive"));
    }
    if n_exc > MAX_EXCURSION_LENGTH {
        return Err(Error::guard("excursion length", n_exc, MAX_EXCURSION_LENGTH as u64));
    }
    let kernel = localized_kernel(beta)?;
    let mut buf = vec![0i64; n_exc + 1];
    let mut q = Vec::new();
    for mask in 0..1u64 << n_exc {
        positions_from_mask(n_exc, 0, mask, &mut buf);
        if buf[n_exc] == 0 && buf[1..n_exc].iter().all(|&b| b != 0) {
            q.push(kernel.path_probability(&buf));
        }
    }
    let total: f64 = q.iter().sum();
    let uniform = 1.0 / q.len() as f64;
    Ok(q.iter().fold(0.0f64, |m, &v| m.max((v / total - uniform).abs())))
}

/// Path split at its last zero `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct DelocalizedDecomposition {
    /// `ℓ_∞`, counting the origin.
    pub total_zeros: u32,
    /// Walk from 0 up to its `total_zeros`-th zero, cut at the horizon.
    pub pre_g: LatticePath,
    /// Whether `pre_g` was cut before reaching its last zero.
    pub truncated: bool,
    pub sign: i64,
    /// Nonnegative Bessel-type path; empty when `truncated`.
    pub tail: LatticePath,
    /// `pre_g` followed by `sign · tail`, of length `horizon`.
    pub path: LatticePath,
}

/// `Q(ℓ_∞ = l) = (1 - e^{-α}) e^{-α(l-1)}` for `l >= 1`.
pub fn geometric_pmf(l: u32, alpha: f64) -> Result<f64> {
    require_positive("alpha", alpha)?;
    if l == 0 {
        return Ok(0.0);
    }
    Ok(-(-alpha).exp_m1() * (-alpha * (l - 1) as f64).exp())
}

/// Draws `ℓ_∞` by inversion.
pub fn sample_total_zeros(alpha: f64, rng: &mut RandomSource) -> u32 {
    let u = 1.0 - rng.uniform();
    let extra = (-u.ln() / alpha).floor();
    1 + extra.min(u32::MAX as f64 - 1.0) as u32
}

/// Assembles a delocalized-phase path of length `horizon`.
pub fn delocalized_sampler(alpha: f64, horizon: usize, rng: &mut RandomSource) -> Result<DelocalizedDecomposition> {
    require_positive("alpha", alpha)?;
    let total_zeros = sample_total_zeros(alpha, rng);
    let mut pre_g = LatticePath::at(0);
    let mut zeros = 1u32;
    while zeros < total_zeros && pre_g.len() < horizon {
        pre_g.push_unchecked(rng.fair_step());
        if pre_g.end() == 0 {
            zeros += 1;
        }
    }
    let truncated = zeros < total_zeros;
    let sign = rng.fair_step();
    let tail = if truncated {
        LatticePath::at(0)
    } else {
        sample_bessel_walk(horizon - pre_g.len(), rng)
    };
    let mut path = pre_g.clone();
    for step in tail.steps() {
        path.push_unchecked(sign * step);
    }
    Ok(DelocalizedDecomposition {
        total_zeros,
        pre_g,
        truncated,
        sign,
        tail,
        path,
    })
}

/// One row of [`delocalized_escape_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EscapeRow {
    pub j: u64,
    pub conditioned_up: f64,
    pub conditioned_down: f64,
    pub bessel_up: f64,
    pub bessel_down: f64,
    pub difference: f64,
}

/// Compares the tilted walk conditioned never to return to 0 with the
/// Bessel kernel for `1 <= j <= j_max`.
pub fn delocalized_escape_check(alpha: f64, j_max: u64) -> Result<Vec<EscapeRow>> {
    require_positive("alpha", alpha)?;
    if j_max < 2 {
        return Err(Error::domain("j_max", j_max, "must be >= 2"));
    }
    let c = alpha.exp_m1();
    let g = |j: u64| c * j as f64 + 1.0;
    let esc = |j: u64| c * j as f64 / g(j);
    (1..=j_max)
        .map(|j| {
            let tilt = |to: u64| g(to) / (2.0 * g(j)) * esc(to) / esc(j);
            let conditioned_up = tilt(j + 1);
            let conditioned_down = tilt(j - 1);
            let (bessel_up, bessel_down) = bessel_kernel(j)?;
            Ok(EscapeRow {
                j,
                conditioned_up,
                conditioned_down,
                bessel_up,
                bessel_down,
                difference: (conditioned_up - bessel_up).abs().max((conditioned_down - bessel_down).abs()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn kernel_examples() {
        let k = localized_kernel(LN_2).unwrap();
        assert_eq!(k.transition(0, 1), 0.5);
        assert_eq!(k.transition(0, -1), 0.5);
        assert_eq!(k.transition(1, 0), 0.75);
        assert_eq!(k.transition(1, 2), 0.25);
        assert_eq!(k.transition(-1, 0), 0.75);
        assert_eq!(k.transition(3, 5), 0.0);
        assert!(localized_kernel(-1.0).is_err());
        for beta in [0.2, LN_2, 1.5, 5.0] {
            let k = localized_kernel(beta).unwrap();
            assert!(kernel_ratio_defect(&k, 20).unwrap() <= 1e-14);
        }
    }

    #[test]
    fn kernel_matches_weighting() {
        for beta in [0.2, LN_2, 1.5] {
            assert!(kernel_check(beta, 8, Execution::Sequential).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn tau0_examples() {
        assert!((tau0_pmf_q(1, LN_2).unwrap() - 0.75).abs() < 1e-15);
        assert!((tau0_pmf_q(2, LN_2).unwrap() - 9.0 / 64.0).abs() < 1e-15);
        let total: f64 = (1..=200).map(|k| tau0_pmf_q(k, LN_2).unwrap()).sum();
        assert!(total >= 1.0 - 1e-10);
        assert_eq!(tau0_laplace_q(0.0, LN_2).unwrap(), 1.0);
        let f = renewal::free_energy(LN_2).unwrap();
        let v = tau0_laplace_q(f / 2.0, LN_2).unwrap();
        assert!((v - 2.0 * (1.0 - (7.0f64 / 16.0).sqrt())).abs() < 1e-14);
        assert!((tau0_laplace_q_printed(0.0, LN_2).unwrap() - 0.9028).abs() < 1e-4);
        assert!((tau0_mean_q(LN_2).unwrap() - 3.0).abs() < 1e-14);
        assert!((tau0_mean_series(LN_2, 200).unwrap() - 3.0).abs() < 1e-6);
        assert!((tau0_mean_q(40.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(tau0_pmf_q(0, LN_2).is_err());
        assert!(tau0_laplace_q(-0.1, LN_2).is_err());
    }

    #[test]
    fn laplace_matches_series() {
        for beta in [0.4, LN_2, 2.0] {
            for delta in [0.01, 0.3, 1.0] {
                let series: f64 = (1..=4000u64)
                    .rev()
                    .map(|k| (-2.0 * delta * k as f64).exp() * tau0_pmf_q(k, beta).unwrap())
                    .sum();
                assert!((series - tau0_laplace_q(delta, beta).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn excursion_examples() {
        assert!(excursion_check(2, LN_2).unwrap() < 1e-15);
        assert!(excursion_check(4, LN_2).unwrap() <= 1e-14);
        assert!(excursion_check(6, 1.5).unwrap() <= 1e-14);
        assert!(excursion_check(5, 1.5).is_err());
        assert!(excursion_check(18, 1.5).unwrap_err().is_guard());
    }

    #[test]
    fn escape_examples() {
        let rows = delocalized_escape_check(LN_2, 50).unwrap();
        assert_eq!(rows[0].conditioned_up, 1.0);
        assert!((rows[1].conditioned_up - 0.75).abs() < 1e-15);
        assert!(rows.iter().all(|r| r.difference <= 1e-14));
        let a = delocalized_escape_check(0.3, 10).unwrap();
        let b = delocalized_escape_check(2.0, 10).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.conditioned_up - y.conditioned_up).abs() < 1e-14);
        }
        assert!(delocalized_escape_check(LN_2, 1).is_err());
    }

    #[test]
    fn geometric_pmf_sums_to_one() {
        assert!((geometric_pmf(1, LN_2).unwrap() - 0.5).abs() < 1e-15);
        let s: f64 = (1..200).map(|l| geometric_pmf(l, 0.7).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decomposition_shape() {
        let mut rng = RandomSource::new(7, 0);
        for _ in 0..500 {
            let d = delocalized_sampler(0.5, 40, &mut rng).unwrap();
            assert_eq!(d.path.len(), 40);
            assert_eq!(&d.path.positions()[..=d.pre_g.len()], d.pre_g.positions());
            if !d.truncated {
                assert_eq!(d.pre_g.end(), 0);
                let zeros = d.pre_g.positions().iter().filter(|&&b| b == 0).count();
                assert_eq!(zeros as u32, d.total_zeros);
                assert!(d.tail.positions()[1..].iter().all(|&r| r >= 1));
                assert!(d.path.positions()[d.pre_g.len() + 1..].iter().all(|&b| b != 0));
            }
        }
    }

    #[test]
    fn sampler_reproducible() {
        let a = sample_localized(50, LN_2, &mut RandomSource::new(3, 1)).unwrap();
        let b = sample_localized(50, LN_2, &mut RandomSource::new(3, 1)).unwrap();
        assert_eq!(a, b);
    }
}
