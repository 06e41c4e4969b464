use super::LatticePath;
use crate::error::{Error, Result};

/// Largest length accepted by [`enumerate_paths`].
pub const MAX_ENUMERATION_LENGTH: usize = 24;

/// Writes `b_0..=b_n` for the step sequence encoded by `mask`: step `k`
/// (1-based) is `+1` when bit `n - k` is set, so masks in increasing order
/// visit step sequences in lexicographic order with `-1 < +1`.
pub fn positions_from_mask(n: usize, start: i64, mask: u64, out: &mut [i64]) {
    debug_assert!(out.len() > n);
    out[0] = start;
    for k in 1..=n {
        let up = (mask >> (n - k)) & 1 == 1;
        out[k] = out[k - 1] + if up { 1 } else { -1 };
    }
}

/// Iterator over all `2^n` paths of length `n` from `start`.
#[derive(Clone, Debug)]
pub struct PathEnumeration {
    n: usize,
    start: i64,
    next: u64,
    end: u64,
}

impl Iterator for PathEnumeration {
    type Item = LatticePath;

    fn next(&mut self) -> Option<LatticePath> {
        if self.next >= self.end {
            return None;
        }
        let mut buf = vec![0; self.n + 1];
        positions_from_mask(self.n, self.start, self.next, &mut buf);
        self.next += 1;
        Some(LatticePath::from_positions(buf).expect("mask paths are nearest-neighbour"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = (self.end - self.next) as usize;
        (rem, Some(rem))
    }
}

impl ExactSizeIterator for PathEnumeration {}

/// All step sequences of length `n` from `start`, each once, in lexicographic
/// step order. Each has probability `2^-n` under `P_start`.
pub fn enumerate_paths(n: usize, start: i64) -> Result<PathEnumeration> {
    if n > MAX_ENUMERATION_LENGTH {
        return Err(Error::guard("path length", n, MAX_ENUMERATION_LENGTH as u64));
    }
    Ok(PathEnumeration {
        n,
        start,
        next: 0,
        end: 1u64 << n,
    })
}
