use clap::{Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use super::output::{Cell, Table};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mc::{mc_estimate_with, McConfig};
use crate::partition::{self, Method, PartitionTable};
use crate::penalization::{self, MartingaleForm, Phase};
use crate::renewal;
use crate::rng::RandomSource;
use crate::stats::chi_square_gof;
use crate::tilted;
use crate::walk::LocalTimeConvention;

/// Largest path length accepted by the quadratic-cost recursions.
pub const MAX_LENGTH: usize = 20_000;
/// Largest number of `(sample, t)` rows emitted by `sample`.
pub const MAX_SAMPLE_ROWS: u64 = 10_000_000;
pub const MAX_TAU0_K: u64 = 1_000_000;
pub const MAX_MC_SAMPLES: u64 = 1_000_000_000;
pub const MAX_J: u64 = 1_000_000;
/// Return times are cut here in `tau0 --mc-samples`.
pub const TAU0_MC_CAP: usize = 1_000_000;
/// `ℓ_∞` histogram bins `1..=10`, with the last row `11` holding `l >= 11`.
const TOTAL_ZEROS_BINS: u32 = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Dp,
    Renewal,
    Enum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionArg {
    /// visits at times 1..=n
    Returns,
    /// visits at times 0..=n
    Origin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseArg {
    Localized,
    Delocalized,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Free energy and limiting constants.
    #[command(after_help = "CSV table free_energy: beta,free_energy,free_energy_bisection,c_constrained,c_free,c_plus,c_minus")]
    FreeEnergy {
        #[arg(long)]
        beta: Option<f64>,
        /// Additional comma-separated β values.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
    },
    /// Exact partition functions for lengths 0..=N.
    #[command(after_help = "CSV table partition: n,ln_z,z")]
    Partition {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Require b_n = 0.
        #[arg(long)]
        constrained: bool,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        start: i64,
        #[arg(long, value_enum, default_value = "returns")]
        convention: ConventionArg,
    },
    /// Scaled partition functions and the large-n equivalent of E_x[e^{βℓ_n}].
    #[command(after_help = "CSV tables:\n  scaled_partition: m,scaled_constrained,scaled_free,c_constrained,c_free\n  laplace_equivalent: n,x,ln_exact,ln_asymptotic,ratio,printed_ratio")]
    Asymptotics {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        max_m: usize,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        start: i64,
    },
    /// Exhaustive E_0[M_p] and one-step defects for p = 0..=depth.
    #[command(after_help = "CSV table martingale: p,mean,mean_error,max_defect")]
    MartingaleCheck {
        #[arg(long, value_enum)]
        phase: PhaseArg,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        depth: usize,
        /// Evaluate the printed delocalized expression (returns convention).
        #[arg(long)]
        paper_form: bool,
    },
    /// Total-variation gap between finite and infinite volume Gibbs measures.
    #[command(after_help = "CSV table gibbs_gap: n,p,tv_gap")]
    GibbsConvergence {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        p: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
    },
    /// Tilted kernel against martingale weighting.
    #[command(after_help = "CSV tables:\n  kernel: site,up,down\n  kernel_check: depth,max_abs_diff")]
    KernelCheck {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        depth: usize,
    },
    /// Law, transform and mean of the return time under the tilted measure.
    #[command(after_help = "CSV tables:\n  tau0_pmf: k,pmf   (pmf of tau_0 = 2k)\n  tau0_summary: quantity,value\n  tau0_mc: mean,stderr,n_samples,seed,streams,cap   (with --mc-samples)")]
    Tau0 {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        max_k: u64,
        #[arg(long)]
        mc_samples: Option<u64>,
    },
    /// Sample paths of the limiting process.
    #[command(after_help = "CSV tables:\n  samples: sample,t,position\n  decomposition: sample,total_zeros,g,truncated,sign   (delocalized only)\nSample i uses random stream i of the seed.")]
    Sample {
        #[arg(long, value_enum)]
        phase: PhaseArg,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        samples: u64,
    },
    /// Escape-kernel identity and the law of the total number of zeros.
    #[command(after_help = "CSV tables:\n  escape: j,conditioned_up,conditioned_down,bessel_up,bessel_down,difference\n  total_zeros: l,pmf   (row l = 11 holds l >= 11)\n  total_zeros_mc: l,observed,expected   (with --samples)\n  chi_square: statistic,dof,p_value   (with --samples)")]
    DelocCheck {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 50)]
        j_max: u64,
        #[arg(long, default_value_t = 0)]
        samples: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FreeEnergy { .. } => "free-energy",
            Command::Partition { .. } => "partition",
            Command::Asymptotics { .. } => "asymptotics",
            Command::MartingaleCheck { .. } => "martingale-check",
            Command::GibbsConvergence { .. } => "gibbs-convergence",
            Command::KernelCheck { .. } => "kernel-check",
            Command::Tau0 { .. } => "tau0",
            Command::Sample { .. } => "sample",
            Command::DelocCheck { .. } => "deloc-check",
        }
    }

    pub fn params(&self) -> Value {
        serde_json::to_value(self).expect("parameters serialize")
    }
}

fn guard(what: &'static str, value: u64, limit: u64) -> Result<()> {
    if value > limit {
        Err(Error::guard(what, value, limit))
    } else {
        Ok(())
    }
}

fn phase_of(phase: PhaseArg, beta: Option<f64>, alpha: Option<f64>) -> Result<Phase> {
    match (phase, beta, alpha) {
        (PhaseArg::Localized, Some(beta), None) => Phase::Localized { beta }.validate(),
        (PhaseArg::Delocalized, None, Some(alpha)) => Phase::Delocalized { alpha }.validate(),
        (PhaseArg::Localized, _, _) => Err(Error::domain("phase", "localized", "requires --beta and no --alpha")),
        (PhaseArg::Delocalized, _, _) => Err(Error::domain("phase", "delocalized", "requires --alpha and no --beta")),
    }
}

pub fn execute(command: &Command, seed: u64) -> Result<Vec<Table>> {
    let exec = Execution::default();
    match *command {
        Command::FreeEnergy { beta, ref grid } => {
            let betas: Vec<f64> = beta.into_iter().chain(grid.iter().copied()).collect();
            if betas.is_empty() {
                return Err(Error::domain("beta", "none", "give --beta or --grid"));
            }
            let mut t = Table::new(
                "free_energy",
                &["beta", "free_energy", "free_energy_bisection", "c_constrained", "c_free", "c_plus", "c_minus"],
            );
            for b in betas {
                let c = renewal::constants(b)?;
                t.push(vec![
                    b.into(),
                    c.free_energy.into(),
                    renewal::free_energy_bisection(b)?.into(),
                    c.c_constrained.into(),
                    c.c_free.into(),
                    c.c_plus.into(),
                    c.c_minus.into(),
                ]);
            }
            Ok(vec![t])
        }
        Command::Partition {
            beta,
            n,
            method,
            constrained,
            start,
            convention,
        } => {
            guard("path length", n as u64, MAX_LENGTH as u64)?;
            let method = match method {
                MethodArg::Dp => Method::Dp,
                MethodArg::Renewal => Method::Renewal,
                MethodArg::Enum => Method::Enumeration,
            };
            let conv = match convention {
                ConventionArg::Returns => LocalTimeConvention::Returns,
                ConventionArg::Origin => LocalTimeConvention::WithOrigin,
            };
            let table = PartitionTable::build(method, beta, n, start, constrained, conv)?;
            let mut t = Table::new("partition", &["n", "ln_z", "z"]);
            for (k, &ln) in table.log_values().iter().enumerate() {
                t.push(vec![k.into(), ln.into(), ln.exp().into()]);
            }
            Ok(vec![t])
        }
        Command::Asymptotics { beta, max_m, start } => {
            guard("max m", max_m as u64, (MAX_LENGTH / 2) as u64)?;
            let c = renewal::constants(beta)?;
            let ms: Vec<usize> = (1..=max_m).collect();
            let mut scaled = Table::new(
                "scaled_partition",
                &["m", "scaled_constrained", "scaled_free", "c_constrained", "c_free"],
            );
            for r in partition::scaled_partition_diagnostic(beta, &ms)? {
                scaled.push(vec![
                    r.m.into(),
                    r.constrained.into(),
                    r.free.into(),
                    c.c_constrained.into(),
                    c.c_free.into(),
                ]);
            }
            let ns: Vec<usize> = (1..=2 * max_m).collect();
            let mut equiv = Table::new(
                "laplace_equivalent",
                &["n", "x", "ln_exact", "ln_asymptotic", "ratio", "printed_ratio"],
            );
            for r in partition::laplace_equivalent_diagnostic(start, beta, &ns)? {
                equiv.push(vec![
                    r.n.into(),
                    start.into(),
                    r.ln_exact.into(),
                    r.ln_asymptotic.into(),
                    r.ratio.into(),
                    r.printed_ratio.into(),
                ]);
            }
            Ok(vec![scaled, equiv])
        }
        Command::MartingaleCheck {
            phase,
            beta,
            alpha,
            depth,
            paper_form,
        } => {
            let phase = phase_of(phase, beta, alpha)?;
            let form = if paper_form {
                MartingaleForm::Printed(LocalTimeConvention::Returns)
            } else {
                MartingaleForm::Corrected
            };
            guard("prefix depth", depth as u64, penalization::MAX_PREFIX_DEPTH as u64)?;
            let mut t = Table::new("martingale", &["p", "mean", "mean_error", "max_defect"]);
            for p in 0..=depth {
                let s = penalization::martingale_sweep(phase, form, p, exec)?;
                t.push(vec![p.into(), s.mean.into(), (s.mean - 1.0).abs().into(), s.max_defect.into()]);
            }
            Ok(vec![t])
        }
        Command::GibbsConvergence { beta, p, ref n_list } => {
            renewal::constants(beta)?;
            let mut t = Table::new("gibbs_gap", &["n", "p", "tv_gap"]);
            for &n in n_list {
                guard("path length", n as u64, MAX_LENGTH as u64)?;
                t.push(vec![n.into(), p.into(), penalization::convergence_gap(n, p, beta)?.into()]);
            }
            Ok(vec![t])
        }
        Command::KernelCheck { beta, depth } => {
            let kernel = tilted::localized_kernel(beta)?;
            guard("prefix depth", depth as u64, penalization::MAX_PREFIX_DEPTH as u64)?;
            let mut sites = Table::new("kernel", &["site", "up", "down"]);
            for j in -5i64..=5 {
                let up = kernel.up_probability(j);
                sites.push(vec![j.into(), up.into(), (1.0 - up).into()]);
            }
            let mut check = Table::new("kernel_check", &["depth", "max_abs_diff"]);
            for p in 0..=depth {
                check.push(vec![p.into(), tilted::kernel_check(beta, p, exec)?.into()]);
            }
            Ok(vec![sites, check])
        }
        Command::Tau0 {
            beta,
            max_k,
            mc_samples,
        } => {
            let kernel = tilted::localized_kernel(beta)?;
            guard("max k", max_k, MAX_TAU0_K)?;
            let mut pmf = Table::new("tau0_pmf", &["k", "pmf"]);
            for k in 1..=max_k {
                pmf.push(vec![k.into(), tilted::tau0_pmf_q(k, beta)?.into()]);
            }
            let mut summary = Table::new("tau0_summary", &["quantity", "value"]);
            let mass: f64 = (1..=max_k).rev().map(|k| tilted::tau0_pmf_q(k, beta)).sum::<Result<f64>>()?;
            let rows: [(&str, f64); 7] = [
                ("pmf_mass", mass),
                ("mean", tilted::tau0_mean_q(beta)?),
                ("mean_half_steps", tilted::tau0_mean_q_half_steps(beta)?),
                ("mean_series", tilted::tau0_mean_series(beta, max_k)?),
                ("mean_printed", tilted::tau0_mean_q_printed(beta)?),
                ("laplace_at_zero", tilted::tau0_laplace_q(0.0, beta)?),
                ("laplace_printed_at_zero", tilted::tau0_laplace_q_printed(0.0, beta)?),
            ];
            for (q, v) in rows {
                summary.push(vec![q.into(), v.into()]);
            }
            let mut tables = vec![pmf, summary];
            if let Some(n) = mc_samples {
                guard("mc samples", n, MAX_MC_SAMPLES)?;
                let config = McConfig {
                    seed,
                    ..McConfig::default()
                };
                let e = mc_estimate_with(n, config, |rng| tilted::sample_return_time(&kernel, TAU0_MC_CAP, rng) as f64)?;
                let mut t = Table::new("tau0_mc", &["mean", "stderr", "n_samples", "seed", "streams", "cap"]);
                t.push(vec![
                    e.mean.into(),
                    e.stderr.into(),
                    e.n_samples.into(),
                    Cell::Text(e.seed.to_string()),
                    e.streams.into(),
                    TAU0_MC_CAP.into(),
                ]);
                tables.push(t);
            }
            Ok(tables)
        }
        Command::Sample {
            phase,
            beta,
            alpha,
            length,
            samples,
        } => {
            let phase = phase_of(phase, beta, alpha)?;
            guard("sample rows", samples.saturating_mul(length as u64 + 1), MAX_SAMPLE_ROWS)?;
            let draws = exec.map(samples as usize, |i| {
                let mut rng = RandomSource::new(seed, i as u32);
                match phase {
                    Phase::Localized { beta } => (tilted::sample_localized(length, beta, &mut rng).expect("beta validated"), None),
                    Phase::Delocalized { alpha } => {
                        let d = tilted::delocalized_sampler(alpha, length, &mut rng).expect("alpha validated");
                        (d.path.clone(), Some(d))
                    }
                }
            });
            let mut paths = Table::new("samples", &["sample", "t", "position"]);
            let mut parts = Table::new("decomposition", &["sample", "total_zeros", "g", "truncated", "sign"]);
            for (i, (path, d)) in draws.iter().enumerate() {
                for (t, &b) in path.positions().iter().enumerate() {
                    paths.push(vec![i.into(), t.into(), b.into()]);
                }
                if let Some(d) = d {
                    parts.push(vec![
                        i.into(),
                        d.total_zeros.into(),
                        d.pre_g.len().into(),
                        d.truncated.into(),
                        d.sign.into(),
                    ]);
                }
            }
            Ok(match phase {
                Phase::Localized { .. } => vec![paths],
                Phase::Delocalized { .. } => vec![paths, parts],
            })
        }
        Command::DelocCheck { alpha, j_max, samples } => {
            guard("j max", j_max, MAX_J)?;
            let mut escape = Table::new(
                "escape",
                &["j", "conditioned_up", "conditioned_down", "bessel_up", "bessel_down", "difference"],
            );
            for r in tilted::delocalized_escape_check(alpha, j_max)? {
                escape.push(vec![
                    r.j.into(),
                    r.conditioned_up.into(),
                    r.conditioned_down.into(),
                    r.bessel_up.into(),
                    r.bessel_down.into(),
                    r.difference.into(),
                ]);
            }
            let probs = total_zeros_bins(alpha)?;
            let mut law = Table::new("total_zeros", &["l", "pmf"]);
            for (l, &p) in (1u32..).zip(&probs) {
                law.push(vec![l.into(), p.into()]);
            }
            let mut tables = vec![escape, law];
            if samples > 0 {
                guard("samples", samples, MAX_MC_SAMPLES)?;
                let observed = total_zeros_histogram(alpha, samples, seed, exec);
                let mut mc = Table::new("total_zeros_mc", &["l", "observed", "expected"]);
                for (l, (&o, &p)) in (1u32..).zip(observed.iter().zip(&probs)) {
                    mc.push(vec![l.into(), o.into(), (p * samples as f64).into()]);
                }
                let test = chi_square_gof(&observed, &probs)?;
                let mut chi = Table::new("chi_square", &["statistic", "dof", "p_value"]);
                chi.push(vec![test.statistic.into(), test.dof.into(), test.p_value.into()]);
                tables.push(mc);
                tables.push(chi);
            }
            Ok(tables)
        }
    }
}

/// Bin probabilities of `ℓ_∞` for `l = 1..=10` and `l >= 11`.
pub fn total_zeros_bins(alpha: f64) -> Result<Vec<f64>> {
    let mut probs: Vec<f64> = (1..TOTAL_ZEROS_BINS)
        .map(|l| tilted::geometric_pmf(l, alpha))
        .collect::<Result<_>>()?;
    probs.push((-alpha * f64::from(TOTAL_ZEROS_BINS - 1)).exp());
    Ok(probs)
}

/// Histogram of `samples` draws of `ℓ_∞` on the bins of [`total_zeros_bins`].
pub fn total_zeros_histogram(alpha: f64, samples: u64, seed: u64, exec: Execution) -> Vec<u64> {
    let streams = McConfig::default().streams as u64;
    let parts = exec.map(streams as usize, |s| {
        let count = samples / streams + u64::from((s as u64) < samples % streams);
        let mut rng = RandomSource::new(seed, s as u32);
        let mut hist = vec![0u64; TOTAL_ZEROS_BINS as usize];
        for _ in 0..count {
            let l = tilted::sample_total_zeros(alpha, &mut rng).min(TOTAL_ZEROS_BINS);
            hist[l as usize - 1] += 1;
        }
        hist
    });
    parts.iter().fold(vec![0u64; TOTAL_ZEROS_BINS as usize], |mut acc, h| {
        acc.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        acc
    })
}
