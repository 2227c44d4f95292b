//! Experiment orchestration on top of the `addon-pricing` library: benchmark
//! revenue computation, regret reports, the nine-cell gap/regret table, and
//! deterministic CSV emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use addon_pricing::demand::{bundled_scenario, EffectLevel};
use addon_pricing::fptas::{fptas_solve, resolution_for_epsilon};
use addon_pricing::learner::{run_learning, LearningRun};
use addon_pricing::oracle::{brute_force_solve, exact_policy_revenue};
use addon_pricing::sim::DrawStream;
use addon_pricing::{Error, Instance, PeriodRecord, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Regret checkpoints: one week, one month, three months, one year of hourly
/// periods.
pub const CHECKPOINTS: [u64; 4] = [168, 672, 2016, 8760];

/// Window for the trailing mean used to decide when the learner first beats
/// the no-discount benchmark.
pub const BEAT_WINDOW: u64 = 168;

/// Core price vectors above this count are solved approximately instead of
/// by enumeration.
pub const ORACLE_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RStarMethod {
    Oracle,
    FptasWithBound,
}

/// Benchmark per-period revenue for an instance, exact when enumeration is
/// affordable, otherwise a high-resolution approximation with its bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Benchmark {
    pub r_star: f64,
    pub method: RStarMethod,
    /// Worst-case shortfall of `r_star` from the true optimum. Zero for the
    /// oracle.
    pub bound: f64,
}

pub fn benchmark_revenue(instance: &Instance) -> Result<Benchmark> {
    match brute_force_solve(instance, ORACLE_ENUMERATION_CAP) {
        Ok((_, r_star)) => Ok(Benchmark {
            r_star,
            method: RStarMethod::Oracle,
            bound: 0.0,
        }),
        Err(Error::InstanceTooLarge { .. }) => {
            // Seed the resolution choice with a coarse solve's exact value.
            let (coarse_policy, _) = fptas_solve(instance, 1)?;
            let v_star = exact_policy_revenue(instance, &coarse_policy)?.max(1e-9);
            let k = resolution_for_epsilon(instance, 1e-3, v_star)?;
            let (policy, _) = fptas_solve(instance, k)?;
            let r_star = exact_policy_revenue(instance, &policy)?;
            Ok(Benchmark {
                r_star,
                method: RStarMethod::FptasWithBound,
                bound: instance.fptas_error_bound(k),
            })
        }
        Err(e) => Err(e),
    }
}

/// `(r_star, r_star_no_addon, gap_percent)` where the no-add-on benchmark
/// solves the same instance with the flag budget removed.
pub fn optimality_gap(instance: &Instance) -> Result<(f64, f64, f64)> {
    let with = benchmark_revenue(instance)?.r_star;
    let without = benchmark_revenue(&instance.without_addons())?.r_star;
    Ok((with, without, (with / without - 1.0) * 100.0))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Checkpoint {
    pub period: u64,
    pub mean_regret_pct: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegretReport {
    pub checkpoints: Vec<Checkpoint>,
    /// Final cumulative regret (currency units) per seed, sorted by seed.
    pub per_seed_final: Vec<f64>,
    pub r_star: f64,
    pub r_star_method: RStarMethod,
}

/// Regret percentage `1 - sum_t R(pi_t) / (r_star * t)` at each checkpoint,
/// averaged over trajectories.
pub fn compute_regret_percentage(
    trajectories: &[Vec<PeriodRecord>],
    benchmark: Benchmark,
    checkpoints: &[u64],
) -> Result<RegretReport> {
    if trajectories.is_empty() || trajectories.iter().any(|t| t.is_empty()) {
        return Err(Error::InvalidParameter(
            "regret report needs at least one nonempty trajectory".into(),
        ));
    }
    if !(benchmark.r_star > 0.0) {
        return Err(Error::InvalidParameter(
            "benchmark revenue must be positive".into(),
        ));
    }

    let mut points = Vec::with_capacity(checkpoints.len());
    for &cp in checkpoints {
        let horizon = cp as usize;
        let mut pcts = Vec::with_capacity(trajectories.len());
        for traj in trajectories {
            if traj.len() < horizon {
                return Err(Error::InvalidParameter(format!(
                    "trajectory of length {} has no checkpoint {cp}",
                    traj.len()
                )));
            }
            let sum: f64 = traj[..horizon].iter().map(|r| r.expected_revenue).sum();
            pcts.push((1.0 - sum / (benchmark.r_star * cp as f64)) * 100.0);
        }
        let mean = pcts.iter().sum::<f64>() / pcts.len() as f64;
        let var = pcts.iter().map(|p| (p - mean).powi(2)).sum::<f64>()
            / (pcts.len().max(2) - 1) as f64;
        points.push(Checkpoint {
            period: cp,
            mean_regret_pct: mean,
            std_error: (var / pcts.len() as f64).sqrt(),
        });
    }

    let per_seed_final = trajectories
        .iter()
        .map(|traj| {
            traj.iter()
                .map(|r| benchmark.r_star - r.expected_revenue)
                .sum()
        })
        .collect();

    Ok(RegretReport {
        checkpoints: points,
        per_seed_final,
        r_star: benchmark.r_star,
        r_star_method: benchmark.method,
    })
}

/// One learning run per replication, seeds derived from `base_seed` through
/// the splittable stream. Output is sorted by replication index.
pub fn run_learning_batch(
    instance: &Instance,
    horizon: u64,
    replications: u64,
    base_seed: u64,
    epsilon: f64,
    ucb_scale: f64,
) -> Result<Vec<(u64, LearningRun)>> {
    if replications < 1 {
        return Err(Error::InvalidParameter("need at least one replication".into()));
    }
    let root = DrawStream::new(base_seed);
    let mut runs: Vec<(u64, LearningRun)> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let run = run_learning(instance, horizon, epsilon, ucb_scale, root.split(rep).seed())?;
            Ok((rep, run))
        })
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by_key(|(rep, _)| *rep);
    Ok(runs)
}

/// First period whose trailing `BEAT_WINDOW`-period mean of seed-averaged
/// expected revenue exceeds the no-discount benchmark.
pub fn beat_period(trajectories: &[Vec<PeriodRecord>], r_star_no_addon: f64) -> Option<u64> {
    let horizon = trajectories.iter().map(|t| t.len()).min()?;
    let n = trajectories.len() as f64;
    let mean_rev: Vec<f64> = (0..horizon)
        .map(|t| trajectories.iter().map(|traj| traj[t].expected_revenue).sum::<f64>() / n)
        .collect();

    let window = BEAT_WINDOW as usize;
    let mut rolling = 0.0;
    for t in 0..horizon {
        rolling += mean_rev[t];
        if t >= window {
            rolling -= mean_rev[t - window];
        }
        let len = (t + 1).min(window) as f64;
        if t + 1 >= window && rolling / len > r_star_no_addon {
            return Some(t as u64 + 1);
        }
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub effect: EffectLevel,
    pub space_limit: usize,
    /// Mean regret percentage at each of `CHECKPOINTS`.
    pub regret_pct: [f64; 4],
    pub gap_pct: f64,
    pub beat_period: Option<u64>,
}

/// The full experiment table: optimality gap and learner regret for every
/// requested (effect level, space limit) cell.
pub fn run_table1_suite(
    effects: &[EffectLevel],
    space_limits: &[usize],
    replications: u64,
    base_seed: u64,
    epsilon: f64,
    ucb_scale: f64,
) -> Result<Vec<Table1Row>> {
    let horizon = *CHECKPOINTS.last().unwrap();
    let mut rows = Vec::new();
    for &effect in effects {
        for &s in space_limits {
            let instance = bundled_scenario(effect, s);
            let benchmark = benchmark_revenue(&instance)?;
            let (_, r0, gap_pct) = optimality_gap(&instance)?;
            let runs =
                run_learning_batch(&instance, horizon, replications, base_seed, epsilon, ucb_scale)?;
            let trajectories: Vec<Vec<PeriodRecord>> =
                runs.into_iter().map(|(_, run)| run.records).collect();
            let report = compute_regret_percentage(&trajectories, benchmark, &CHECKPOINTS)?;
            let mut regret_pct = [0.0; 4];
            for (slot, cp) in regret_pct.iter_mut().zip(&report.checkpoints) {
                *slot = cp.mean_regret_pct;
            }
            rows.push(Table1Row {
                effect,
                space_limit: s,
                regret_pct,
                gap_pct,
                beat_period: beat_period(&trajectories, r0),
            });
        }
    }
    Ok(rows)
}

/// Serializes learning trajectories with per-seed cumulative regret.
pub fn learning_csv(runs: &[(u64, LearningRun)], r_star: f64) -> String {
    let mut out = String::from("period,seed,episode,expected_revenue,realized_revenue,cumulative_regret\n");
    for (seed, run) in runs {
        let mut cum = 0.0;
        for rec in &run.records {
            cum += r_star - rec.expected_revenue;
            writeln!(
                out,
                "{},{},{},{},{},{}",
                rec.period, seed, rec.episode, rec.expected_revenue, rec.realized_revenue, cum
            )
            .expect("string writes are infallible");
        }
    }
    out
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from("effect,S,regret_1w,regret_1m,regret_3m,regret_1y,gap_pct,beat_period\n");
    for row in rows {
        let beat = row
            .beat_period
            .map_or_else(|| "never".to_string(), |p| p.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.effect,
            row.space_limit,
            row.regret_pct[0],
            row.regret_pct[1],
            row.regret_pct[2],
            row.regret_pct[3],
            row.gap_pct,
            beat
        )
        .expect("string writes are infallible");
    }
    out
}

/// Writes `contents` to `path` plus a `.meta` sidecar describing the run.
pub fn write_with_metadata<M: Serialize>(path: &Path, contents: &str, meta: &M) -> Result<()> {
    fs::write(path, contents)?;
    let meta_path = path.with_extension("meta");
    let json = serde_json::to_string_pretty(meta)?;
    fs::write(meta_path, json + "\n")?;
    Ok(())
}
