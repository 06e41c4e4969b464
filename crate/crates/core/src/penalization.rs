//! Penalization martingales and the Gibbs measures they generate on path
//! prefixes.
//!
//! Prefix tables are indexed by the step mask of [`positions_from_mask`]:
//! one `2^p` sweep serves every depth-`p` cylinder event and gives total
//! variation distances directly.

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{require_positive, Error, Result};
use crate::exec::Execution;
use crate::renewal::{self, Constants};
use crate::walk::{local_time, modified_local_time, positions_from_mask, LatticePath, LocalTimeConvention};

/// Largest prefix depth for enumerative sweeps.
pub const MAX_PREFIX_DEPTH: usize = 20;
/// Largest prefix depth for total-variation comparisons.
pub const MAX_TV_DEPTH: usize = 16;

const BLOCK: usize = 1 << 12;

/// Phase and pinning strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Phase {
    /// `β > 0`
    Localized { beta: f64 },
    /// `β = -α < 0`
    Delocalized { alpha: f64 },
}

impl Phase {
    pub fn validate(self) -> Result<Self> {
        match self {
            Phase::Localized { beta } => require_positive("beta", beta)?,
            Phase::Delocalized { alpha } => require_positive("alpha", alpha)?,
        }
        Ok(self)
    }

    /// Signed pinning strength `β`.
    pub fn beta(self) -> f64 {
        match self {
            Phase::Localized { beta } => beta,
            Phase::Delocalized { alpha } => -alpha,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Localized { .. } => "localized",
            Phase::Delocalized { .. } => "delocalized",
        }
    }
}

/// Which delocalized martingale expression to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MartingaleForm {
    /// `e^{-α ℓ̂_p}[(e^α - 1)|b_p| + 1]` (and the localized martingale).
    Corrected,
    /// `e^{-α ℓ_p}[(1 - e^{-α})|b_p| + 1]` with `ℓ` under the given convention.
    Printed(LocalTimeConvention),
}

/// Evaluates a phase martingale from the walk state `(p, b_p, ℓ̂_p)`.
#[derive(Clone, Copy, Debug)]
pub struct Martingale {
    phase: Phase,
    form: MartingaleForm,
    constants: Option<Constants>,
}

impl Martingale {
    pub fn new(phase: Phase, form: MartingaleForm) -> Result<Self> {
        let phase = phase.validate()?;
        let constants = match phase {
            Phase::Localized { beta } => Some(renewal::constants(beta)?),
            Phase::Delocalized { .. } => None,
        };
        if matches!(phase, Phase::Localized { .. }) && form != MartingaleForm::Corrected {
            return Err(Error::domain("form", "printed", "only the delocalized phase has a printed variant"));
        }
        Ok(Self {
            phase,
            form,
            constants,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// `M_p` given the time, the endpoint and the modified local time.
    pub fn at(&self, p: usize, b: i64, lhat: u32) -> f64 {
        let ab = b.unsigned_abs() as f64;
        match (self.phase, self.form) {
            (Phase::Localized { beta }, _) => {
                let c = self.constants.as_ref().expect("localized constants");
                (beta * lhat as f64 - c.c_plus * ab - c.c_minus * p as f64).exp()
            }
            (Phase::Delocalized { alpha }, MartingaleForm::Corrected) => {
                (-alpha * lhat as f64).exp() * (alpha.exp_m1() * ab + 1.0)
            }
            (Phase::Delocalized { alpha }, MartingaleForm::Printed(conv)) => {
                // ℓ_p from ℓ̂_p: WITH_ORIGIN adds the endpoint zero back
                let with_origin = lhat + u32::from(b == 0);
                let l = match conv {
                    LocalTimeConvention::WithOrigin => with_origin,
                    LocalTimeConvention::Returns => with_origin - 1,
                };
                (-alpha * l as f64).exp() * (-(-alpha).exp_m1() * ab + 1.0)
            }
        }
    }

    /// `M_{p+1} / M_p` across the step `from -> to`, from the log increment.
    pub fn step_ratio(&self, from: i64, to: i64) -> f64 {
        let d_abs = to.unsigned_abs() as f64 - from.unsigned_abs() as f64;
        match (self.phase, self.form) {
            // e^{β - c_+ - c_-} = 1
            (Phase::Localized { .. }, _) if from == 0 => 1.0,
            (Phase::Localized { .. }, _) => {
                let c = self.constants.as_ref().expect("localized constants");
                (-c.c_plus * d_abs - c.c_minus).exp()
            }
            (Phase::Delocalized { alpha }, MartingaleForm::Corrected) => {
                let g = |b: i64| alpha.exp_m1() * b.unsigned_abs() as f64 + 1.0;
                let kill = if from == 0 { (-alpha).exp() } else { 1.0 };
                kill * g(to) / g(from)
            }
            (Phase::Delocalized { alpha }, MartingaleForm::Printed(_)) => {
                let h = |b: i64| -(-alpha).exp_m1() * b.unsigned_abs() as f64 + 1.0;
                let kill = if to == 0 { (-alpha).exp() } else { 1.0 };
                kill * h(to) / h(from)
            }
        }
    }

    pub fn eval(&self, path: &LatticePath) -> Result<f64> {
        if path.start() != 0 {
            return Err(Error::NotAnchored(path.start()));
        }
        Ok(self.at(path.len(), path.end(), modified_local_time(path)))
    }
}

/// `M_p = exp{β ℓ̂_p - c_+ |b_p| - c_- p}`.
pub fn martingale_localized(path: &LatticePath, beta: f64) -> Result<f64> {
    Martingale::new(Phase::Localized { beta }, MartingaleForm::Corrected)?.eval(path)
}

/// `M_p = e^{-α ℓ̂_p}[(e^α - 1)|b_p| + 1]`.
pub fn martingale_delocalized(path: &LatticePath, alpha: f64) -> Result<f64> {
    Martingale::new(Phase::Delocalized { alpha }, MartingaleForm::Corrected)?.eval(path)
}

/// The printed delocalized expression `e^{-α ℓ_p}[(1 - e^{-α})|b_p| + 1]`,
/// for comparison runs only; it is not a unit-mean martingale.
pub fn martingale_delocalized_printed(
    path: &LatticePath,
    alpha: f64,
    conv: LocalTimeConvention,
) -> Result<f64> {
    require_positive("alpha", alpha)?;
    if path.start() != 0 {
        return Err(Error::NotAnchored(path.start()));
    }
    let l = local_time(path, conv) as f64;
    Ok((-alpha * l).exp() * (-(-alpha).exp_m1() * path.end().unsigned_abs() as f64 + 1.0))
}

/// A cylinder event `Γ_p ∈ F_p`: a predicate on `(b_0, ..., b_p)`.
#[derive(Clone)]
pub struct CylinderEvent {
    depth: usize,
    predicate: Arc<dyn Fn(&[i64]) -> bool + Send + Sync>,
}

impl fmt::Debug for CylinderEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CylinderEvent").field("depth", &self.depth).finish_non_exhaustive()
    }
}

impl CylinderEvent {
    pub fn new<F>(depth: usize, predicate: F) -> Self
    where
        F: Fn(&[i64]) -> bool + Send + Sync + 'static,
    {
        Self {
            depth,
            predicate: Arc::new(predicate),
        }
    }

    /// The whole space, seen at depth `p`.
    pub fn whole(depth: usize) -> Self {
        Self::new(depth, |_| true)
    }

    /// `{b_k = site}`.
    pub fn position_equals(k: usize, site: i64) -> Self {
        Self::new(k, move |b| b[k] == site)
    }

    /// `{(b_0, ..., b_p) = positions}`.
    pub fn prefix_equals(positions: Vec<i64>) -> Self {
        let depth = positions.len().saturating_sub(1);
        Self::new(depth, move |b| b[..positions.len()] == positions[..])
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Evaluates on the first `depth + 1` positions only.
    pub fn contains(&self, positions: &[i64]) -> bool {
        (self.predicate)(&positions[..=self.depth])
    }
}

fn check_depth(p: usize, limit: usize) -> Result<()> {
    if p > limit {
        Err(Error::guard("prefix depth", p, limit as u64))
    } else {
        Ok(())
    }
}

/// Probabilities of all `2^p` depth-`p` prefixes from 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixTable {
    depth: usize,
    probs: Vec<f64>,
}

impl PrefixTable {
    /// Builds the table from a per-prefix weight evaluated on `(b_0..=b_p)`.
    pub fn from_weights<F>(depth: usize, exec: Execution, weight: F) -> Result<Self>
    where
        F: Fn(&[i64]) -> f64 + Sync + Send,
    {
        check_depth(depth, MAX_PREFIX_DEPTH)?;
        let total = 1usize << depth;
        let probs = exec
            .map_blocks(total, BLOCK, |range| {
                let mut buf = vec![0i64; depth + 1];
                range
                    .map(|mask| {
                        positions_from_mask(depth, 0, mask as u64, &mut buf);
                        weight(&buf)
                    })
                    .collect::<Vec<_>>()
            })
            .concat();
        Ok(Self { depth, probs })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Entry for step mask `mask` (see [`positions_from_mask`]).
    pub fn prob(&self, mask: usize) -> f64 {
        self.probs[mask]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn probability(&self, event: &CylinderEvent) -> Result<f64> {
        if event.depth() > self.depth {
            return Err(Error::domain("event depth", event.depth(), "must not exceed the table depth"));
        }
        let mut buf = vec![0i64; self.depth + 1];
        let mut sum = 0.0;
        for (mask, &q) in self.probs.iter().enumerate() {
            positions_from_mask(self.depth, 0, mask as u64, &mut buf);
            if event.contains(&buf) {
                sum += q;
            }
        }
        Ok(sum)
    }

    /// `(1/2) Σ |q - q'|` over prefixes.
    pub fn total_variation(&self, other: &PrefixTable) -> Result<f64> {
        if self.depth != other.depth {
            return Err(Error::domain("depth", other.depth, "tables must have equal depth"));
        }
        Ok(0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    pub fn max_abs_diff(&self, other: &PrefixTable) -> Result<f64> {
        if self.depth != other.depth {
            return Err(Error::domain("depth", other.depth, "tables must have equal depth"));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Markov additive functionals usable by the transfer recursion.
#[derive(Clone)]
pub enum AdditiveFunctional {
    /// `ℓ_n`: zeros at times `0..=n`.
    LocalTime,
    /// `ℓ̂_n`: zeros at times `0..n`.
    ModifiedLocalTime,
    /// `Σ_{k=0}^{n} φ(b_k)`.
    SiteSum(Arc<dyn Fn(i64) -> f64 + Send + Sync>),
    /// Arbitrary path functional; not admissible for the probe.
    PathDependent(Arc<dyn Fn(&LatticePath) -> f64 + Send + Sync>),
}

impl fmt::Debug for AdditiveFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AdditiveFunctional::LocalTime => "LocalTime",
            AdditiveFunctional::ModifiedLocalTime => "ModifiedLocalTime",
            AdditiveFunctional::SiteSum(_) => "SiteSum",
            AdditiveFunctional::PathDependent(_) => "PathDependent",
        };
        f.write_str(name)
    }
}

type SiteWeight = Arc<dyn Fn(i64) -> f64 + Send + Sync>;

impl AdditiveFunctional {
    /// Site weight `φ` and whether the endpoint is included.
    fn markov_form(&self) -> Result<(SiteWeight, bool)> {
        let zero: SiteWeight = Arc::new(|b| if b == 0 { 1.0 } else { 0.0 });
        match self {
            AdditiveFunctional::LocalTime => Ok((zero, true)),
            AdditiveFunctional::ModifiedLocalTime => Ok((zero, false)),
            AdditiveFunctional::SiteSum(phi) => Ok((phi.clone(), true)),
            AdditiveFunctional::PathDependent(_) => Err(Error::NonMarkovian),
        }
    }

    pub fn evaluate(&self, path: &LatticePath) -> f64 {
        match self {
            AdditiveFunctional::LocalTime => local_time(path, LocalTimeConvention::WithOrigin) as f64,
            AdditiveFunctional::ModifiedLocalTime => modified_local_time(path) as f64,
            AdditiveFunctional::SiteSum(phi) => path.positions().iter().map(|&b| phi(b)).sum(),
            AdditiveFunctional::PathDependent(h) => h(path),
        }
    }
}

/// Backward recursion `V_t(w) = E_w[e^{β H_t}]` on sites `[-D, D]`, kept in
/// log-rescaled form. Values are exact for `|w| + t <= D`.
struct Continuation {
    domain: i64,
    recorded: Vec<(usize, f64, Vec<f64>)>,
}

impl Continuation {
    fn new(functional: &AdditiveFunctional, beta: f64, domain: usize, record: &[usize]) -> Result<Self> {
        let (phi, include_endpoint) = functional.markov_form()?;
        let d = domain as i64;
        let width = 2 * domain + 1;
        let weight: Vec<f64> = (-d..=d).map(|w| (beta * phi(w)).exp()).collect();
        let mut cur: Vec<f64> = if include_endpoint {
            weight.clone()
        } else {
            vec![1.0; width]
        };
        let mut next = vec![0.0f64; width];
        let mut offset = 0.0f64;
        let mut recorded = Vec::new();
        let t_max = record.iter().copied().max().unwrap_or(0);
        let mut push = |t: usize, offset: f64, cur: &[f64]| {
            if record.contains(&t) {
                recorded.push((t, offset, cur.to_vec()));
            }
        };
        push(0, offset, &cur);
        for t in 1..=t_max {
            for i in 0..width {
                let left = cur[i.saturating_sub(1)];
                let right = cur[(i + 1).min(width - 1)];
                next[i] = weight[i] * 0.5 * (left + right);
            }
            let max = next.iter().fold(0.0f64, |m, &v| m.max(v));
            next.iter_mut().for_each(|v| *v /= max);
            offset += max.ln();
            std::mem::swap(&mut cur, &mut next);
            push(t, offset, &cur);
        }
        Ok(Self {
            domain: d,
            recorded,
        })
    }

    fn ln_value(&self, t: usize, w: i64) -> f64 {
        let (_, offset, values) = self
            .recorded
            .iter()
            .find(|(tt, _, _)| *tt == t)
            .expect("time was recorded");
        offset + values[(w + self.domain) as usize].ln()
    }
}

/// The finite-volume Gibbs measure `Q_0^{(n,β)}` on depth-`p` prefixes.
#[derive(Clone, Debug)]
pub struct FiniteGibbsTable {
    pub beta: f64,
    pub horizon: usize,
    pub table: PrefixTable,
    /// `ln Z^f_n` (with-origin convention)
    pub ln_partition: f64,
}

impl FiniteGibbsTable {
    /// `2^{-p} e^{β ℓ̂_p} E_{b_p}[e^{β ℓ_{n-p}}] / Z^f_n` for every prefix.
    pub fn new(n: usize, beta: f64, p: usize, exec: Execution) -> Result<Self> {
        Self::with_functional(&AdditiveFunctional::LocalTime, n, beta, p, exec)
    }

    /// Generic `ρ_n` for a Markov additive functional `H` with
    /// `H_n = Ĥ_p + H_{n-p} ∘ θ_p` (`Ĥ` drops the endpoint term).
    pub fn with_functional(
        functional: &AdditiveFunctional,
        n: usize,
        beta: f64,
        p: usize,
        exec: Execution,
    ) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::domain("beta", beta, "must be finite"));
        }
        if p > n {
            return Err(Error::domain("p", p, "must satisfy p <= n"));
        }
        check_depth(p, MAX_PREFIX_DEPTH)?;
        let (phi, _) = functional.markov_form()?;
        let cont = Continuation::new(functional, beta, n, &[n - p, n])?;
        let ln_z = cont.ln_value(n, 0);
        let table = PrefixTable::from_weights(p, exec, |b| {
            let head: f64 = b[..p].iter().map(|&x| phi(x)).sum();
            (beta * head - p as f64 * LN_2 + cont.ln_value(n - p, b[p]) - ln_z).exp()
        })?;
        Ok(Self {
            beta,
            horizon: n,
            table,
            ln_partition: ln_z,
        })
    }
}

/// `Q_0^{(β)}` on depth-`p` prefixes: `2^{-p} M_p(prefix)`.
pub fn infinite_gibbs_table(phase: Phase, form: MartingaleForm, p: usize, exec: Execution) -> Result<PrefixTable> {
    let m = Martingale::new(phase, form)?;
    PrefixTable::from_weights(p, exec, |b| {
        let lhat = b[..p].iter().filter(|&&x| x == 0).count() as u32;
        (-(p as f64) * LN_2).exp() * m.at(p, b[p], lhat)
    })
}

/// `Q_0^{(n,β)}(Γ_p)`.
pub fn gibbs_finite(n: usize, beta: f64, event: &CylinderEvent) -> Result<f64> {
    FiniteGibbsTable::new(n, beta, event.depth(), Execution::default())?
        .table
        .probability(event)
}

/// `Q_0^{(β)}(Γ_p) = E_0[1_Γ M_p]`.
pub fn gibbs_infinite(phase: Phase, event: &CylinderEvent) -> Result<f64> {
    infinite_gibbs_table(phase, MartingaleForm::Corrected, event.depth(), Execution::default())?
        .probability(event)
}

/// Total variation between `Q^{(n,β)}` and `Q^{(β)}` on `F_p`.
pub fn convergence_gap(n: usize, p: usize, beta: f64) -> Result<f64> {
    check_depth(p, MAX_TV_DEPTH)?;
    let exec = Execution::default();
    let finite = FiniteGibbsTable::new(n, beta, p, exec)?;
    let limit = infinite_gibbs_table(Phase::Localized { beta }, MartingaleForm::Corrected, p, exec)?;
    finite.table.total_variation(&limit)
}

/// `Λ_{n-p} f(w, z) / Λ_n f(0)` with `f(w, z) = e^{β z}` for each `n` in
/// `n_list` (entries with `n < p` are rejected).
pub fn penalization_limit_probe(
    functional: &AdditiveFunctional,
    p: usize,
    w: i64,
    z: f64,
    n_list: &[usize],
    beta: f64,
) -> Result<Vec<f64>> {
    functional.markov_form()?;
    if let Some(&n) = n_list.iter().find(|&&n| n < p) {
        return Err(Error::domain("n", n, "must satisfy n >= p"));
    }
    let n_max = n_list.iter().copied().max().unwrap_or(p);
    let mut record: Vec<usize> = n_list.iter().flat_map(|&n| [n, n - p]).collect();
    record.sort_unstable();
    record.dedup();
    let cont = Continuation::new(functional, beta, n_max + w.unsigned_abs() as usize, &record)?;
    Ok(n_list
        .iter()
        .map(|&n| (beta * z + cont.ln_value(n - p, w) - cont.ln_value(n, 0)).exp())
        .collect())
}

/// Result of a sweep over all depth-`p` prefixes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MartingaleSweep {
    pub depth: usize,
    /// `E_0[M_p]`
    pub mean: f64,
    /// `max |E[M_{p+1} | prefix] - M_p|`
    pub max_defect: f64,
}

/// Exhaustive `E_0[M_p]` and one-step defect at depth `p`.
pub fn martingale_sweep(phase: Phase, form: MartingaleForm, p: usize, exec: Execution) -> Result<MartingaleSweep> {
    check_depth(p, MAX_PREFIX_DEPTH)?;
    let m = Martingale::new(phase, form)?;
    let total = 1usize << p;
    let blocks = exec.map_blocks(total, BLOCK, |range| {
        let mut buf = vec![0i64; p + 1];
        let (mut sum, mut defect) = (0.0f64, 0.0f64);
        for mask in range {
            positions_from_mask(p, 0, mask as u64, &mut buf);
            let b = buf[p];
            let lhat = buf[..p].iter().filter(|&&x| x == 0).count() as u32;
            let now = m.at(p, b, lhat);
            let mean_ratio = 0.5 * (m.step_ratio(b, b + 1) + m.step_ratio(b, b - 1));
            sum += now;
            defect = defect.max((now * (mean_ratio - 1.0)).abs());
        }
        (sum, defect)
    });
    let (sum, max_defect) = blocks
        .into_iter()
        .fold((0.0, 0.0f64), |(s, d), (bs, bd)| (s + bs, d.max(bd)));
    Ok(MartingaleSweep {
        depth: p,
        mean: sum * (-(p as f64) * LN_2).exp(),
        max_defect,
    })
}

/// Maximum one-step defect `|E[M_{p+1} | F_p] - M_p|` over depth-`p` prefixes.
pub fn one_step_martingale_check(phase: Phase, form: MartingaleForm, p: usize) -> Result<f64> {
    Ok(martingale_sweep(phase, form, p, Execution::default())?.max_defect)
}
