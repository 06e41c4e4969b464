use crate::error::{Error, Result};

/// Nearest-neighbour integer path `(b_0, ..., b_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticePath {
    positions: Vec<i64>,
}

impl LatticePath {
    /// The length-0 path sitting at `start`.
    pub fn at(start: i64) -> Self {
        Self {
            positions: vec![start],
        }
    }

    pub fn from_steps<I>(start: i64, steps: I) -> Result<Self>
    where
        I: IntoIterator<Item = i64>,
    {
        let mut path = Self::at(start);
        for s in steps {
            path.push(s)?;
        }
        Ok(path)
    }

    pub fn from_positions(positions: Vec<i64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidPath("empty position list".into()));
        }
        if let Some(k) = positions.windows(2).position(|w| (w[1] - w[0]).abs() != 1) {
            return Err(Error::InvalidPath(format!(
                "positions {} and {} at index {k} are not neighbours",
                positions[k],
                positions[k + 1]
            )));
        }
        Ok(Self { positions })
    }

    /// Appends one ±1 step.
    pub fn push(&mut self, step: i64) -> Result<()> {
        if step != 1 && step != -1 {
            return Err(Error::InvalidPath(format!("step {step} is not ±1")));
        }
        let last = self.end();
        self.positions.push(last + step);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, step: i64) {
        debug_assert!(step == 1 || step == -1);
        let last = self.end();
        self.positions.push(last + step);
    }

    pub(crate) fn with_capacity(start: i64, n: usize) -> Self {
        let mut positions = Vec::with_capacity(n + 1);
        positions.push(start);
        Self { positions }
    }

    pub fn start(&self) -> i64 {
        self.positions[0]
    }

    pub fn end(&self) -> i64 {
        *self.positions.last().expect("path is never empty")
    }

    /// Number of steps `n`.
    pub fn len(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn position(&self, k: usize) -> i64 {
        self.positions[k]
    }

    pub fn steps(&self) -> impl Iterator<Item = i64> + '_ {
        self.positions.windows(2).map(|w| w[1] - w[0])
    }

    /// `(b_0, ..., b_p)`.
    pub fn prefix(&self, p: usize) -> LatticePath {
        Self {
            positions: self.positions[..=p.min(self.len())].to_vec(),
        }
    }

    /// The shifted path `θ_p b = (b_p, ..., b_n)`.
    pub fn shift(&self, p: usize) -> LatticePath {
        Self {
            positions: self.positions[p.min(self.len())..].to_vec(),
        }
    }
}

/// Which zeros the local time counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalTimeConvention {
    /// Zeros at times `1..=n` (returns to the origin).
    Returns,
    /// Zeros at times `0..=n`.
    WithOrigin,
}

impl LocalTimeConvention {
    /// Number of zeros the convention adds at time 0 for a walk started at `start`.
    pub fn origin_count(self, start: i64) -> u32 {
        match self {
            LocalTimeConvention::WithOrigin if start == 0 => 1,
            _ => 0,
        }
    }
}

pub fn local_time(path: &LatticePath, conv: LocalTimeConvention) -> u32 {
    let returns = path.positions()[1..].iter().filter(|&&b| b == 0).count() as u32;
    returns + conv.origin_count(path.start())
}

/// `ℓ̂_n = ℓ_n - 1{b_n = 0}` with `ℓ` counting the time-0 zero.
pub fn modified_local_time(path: &LatticePath) -> u32 {
    local_time(path, LocalTimeConvention::WithOrigin) - u32::from(path.end() == 0)
}

pub fn running_max(path: &LatticePath) -> i64 {
    *path.positions().iter().max().expect("path is never empty")
}

/// First index `k >= 0` with `b_k = z`.
pub fn hitting_time(path: &LatticePath, z: i64) -> Option<usize> {
    path.positions().iter().position(|&b| b == z)
}

/// First index `k >= 1` with `b_k = z`.
pub fn return_time(path: &LatticePath, z: i64) -> Option<usize> {
    path.positions()[1..]
        .iter()
        .position(|&b| b == z)
        .map(|k| k + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use LocalTimeConvention::*;

    fn p(v: &[i64]) -> LatticePath {
        LatticePath::from_positions(v.to_vec()).unwrap()
    }

    #[test]
    fn local_time_examples() {
        assert_eq!(local_time(&p(&[0, 1, 0]), WithOrigin), 2);
        assert_eq!(local_time(&p(&[0, 1, 0]), Returns), 1);
        assert_eq!(local_time(&p(&[0, 1, 2]), WithOrigin), 1);
    }

    #[test]
    fn modified_local_time_examples() {
        assert_eq!(modified_local_time(&p(&[0])), 0);
        assert_eq!(modified_local_time(&p(&[0, 1, 0])), 1);
        assert_eq!(modified_local_time(&p(&[0, 1])), 1);
    }

    #[test]
    fn max_and_hitting_examples() {
        let a = p(&[0, 1, 2]);
        assert_eq!(running_max(&a), 2);
        assert_eq!(hitting_time(&a, 1), Some(1));
        assert_eq!(return_time(&a, 0), None);
        assert_eq!(return_time(&p(&[0, 1, 0]), 0), Some(2));
        let b = p(&[0, -1, 0, 1]);
        assert_eq!(hitting_time(&b, 1), Some(3));
        assert_eq!(running_max(&b), 1);
        assert_eq!(hitting_time(&b, 0), Some(0));
    }

    #[test]
    fn rejects_non_neighbour_positions() {
        assert!(LatticePath::from_positions(vec![0, 2]).is_err());
        assert!(LatticePath::from_positions(vec![]).is_err());
        assert!(LatticePath::from_steps(0, [1, 0]).is_err());
    }

    #[test]
    fn prefix_and_shift() {
        let a = p(&[0, 1, 0, -1]);
        assert_eq!(a.prefix(2).positions(), &[0, 1, 0]);
        assert_eq!(a.shift(2).positions(), &[0, -1]);
        assert_eq!(a.steps().collect::<Vec<_>>(), vec![1, -1, -1]);
    }

    #[test]
    fn conventions_differ_by_origin_indicator() {
        for path in [p(&[0, 1, 0]), p(&[2, 1, 0, 1]), p(&[0])] {
            assert_eq!(
                local_time(&path, WithOrigin),
                local_time(&path, Returns) + u32::from(path.start() == 0)
            );
        }
    }
}
