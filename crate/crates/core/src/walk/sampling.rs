use super::LatticePath;
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// One-step law `(P(j -> j+1), P(j -> j-1)) = ((j+1)/(2j), (j-1)/(2j))` of the
/// Bessel-type walk; undefined at 0 where the first step is forced.
pub fn bessel_kernel(j: u64) -> Result<(f64, f64)> {
    if j == 0 {
        return Err(Error::domain("j", j, "Bessel kernel is defined for j >= 1"));
    }
    let two_j = 2.0 * j as f64;
    Ok(((j + 1) as f64 / two_j, (j - 1) as f64 / two_j))
}

/// Bessel-type walk on ℕ: `R_0 = 0`, `R_1 = 1`, then [`bessel_kernel`].
pub fn sample_bessel_walk(n: usize, rng: &mut RandomSource) -> LatticePath {
    let mut path = LatticePath::with_capacity(0, n);
    if n == 0 {
        return path;
    }
    path.push_unchecked(1);
    for _ in 1..n {
        let j = path.end() as f64;
        let up = (j + 1.0) / (2.0 * j);
        path.push_unchecked(if rng.bernoulli(up) { 1 } else { -1 });
    }
    path
}

/// Simple symmetric random walk of length `n` from `start`.
pub fn sample_srw(n: usize, start: i64, rng: &mut RandomSource) -> LatticePath {
    let mut path = LatticePath::with_capacity(start, n);
    for _ in 0..n {
        path.push_unchecked(rng.fair_step());
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        assert_eq!(bessel_kernel(1).unwrap(), (1.0, 0.0));
        let (u, d) = bessel_kernel(3).unwrap();
        assert!((u - 4.0 / 6.0).abs() < 1e-15 && (d - 2.0 / 6.0).abs() < 1e-15);
        assert!(bessel_kernel(0).is_err());
        for j in 1..100 {
            let (u, d) = bessel_kernel(j).unwrap();
            assert!((u + d - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bessel_walk_never_returns() {
        let mut rng = RandomSource::new(11, 0);
        for _ in 0..50 {
            let path = sample_bessel_walk(1000, &mut rng);
            assert_eq!(path.start(), 0);
            assert!(path.positions()[1..].iter().all(|&r| r >= 1));
        }
    }

    #[test]
    fn srw_reproducible() {
        let a = sample_srw(64, 3, &mut RandomSource::new(5, 9));
        let b = sample_srw(64, 3, &mut RandomSource::new(5, 9));
        assert_eq!(a, b);
        assert_eq!(a.start(), 3);
        assert_eq!(a.len(), 64);
    }
}
