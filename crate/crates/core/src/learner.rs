//! Episodic UCB learning of the demand tables.
//!
//! The learner keeps empirical means and counters for every (product, price,
//! demand-type) cell. At the start of each episode it builds an optimistic
//! demand table (mean plus a scaled `sqrt(2 ln t / counter)` bonus, truncated
//! at 1), plans with the approximation scheme at resolution
//! `K = ceil(sqrt(t) / eps)`, and then replays that policy until one of the
//! counters it touches doubles.

use crate::demand::{DemandTable, PriceGrid};
use crate::fptas::{fptas_solve, Policy};
use crate::oracle::exact_policy_revenue;
use crate::sim::{simulate_period, DrawStream, PeriodObservation};
use crate::{Error, Instance, Result};

/// Hard ceiling on the planning resolution: keeps the gamma grid spacing at
/// or above 1e-4 so memory stays bounded at very large horizons.
pub const MAX_RESOLUTION: usize = 10_000;

/// Empirical 0/1 observation cells: exact rational means via sum and count.
#[derive(Debug, Clone, Default)]
struct Cells {
    sum: Vec<Vec<u64>>,
    count: Vec<Vec<u64>>,
}

impl Cells {
    fn new(rows: usize, cols: usize) -> Self {
        Cells {
            sum: vec![vec![0; cols]; rows],
            count: vec![vec![0; cols]; rows],
        }
    }

    fn mean(&self, i: usize, j: usize) -> f64 {
        if self.count[i][j] == 0 {
            0.0
        } else {
            self.sum[i][j] as f64 / self.count[i][j] as f64
        }
    }

    fn record(&mut self, i: usize, j: usize, successes: u64, trials: u64) {
        self.sum[i][j] += successes;
        self.count[i][j] += trials;
    }

    /// Truncated upper confidence bound; unsampled cells are maximally
    /// optimistic.
    fn ucb(&self, i: usize, j: usize, period: u64, scale: f64) -> f64 {
        let c = self.count[i][j];
        if c == 0 {
            return 1.0;
        }
        let bonus = scale * (2.0 * (period as f64).ln() / c as f64).sqrt();
        (self.mean(i, j) + bonus).min(1.0)
    }
}

/// Identifies one counter cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterCell {
    Core { product: usize, price_idx: usize },
    Supportive { product: usize, price_idx: usize },
    AddonDiscount { product: usize, price_idx: usize },
    AddonOriginal { product: usize, price_idx: usize },
}

/// The fixed policy of one episode plus the counter values it started from.
#[derive(Debug, Clone)]
pub struct EpisodeSnapshot {
    pub start_period: u64,
    pub policy: Policy,
    pub resolution: usize,
    pub watched_counters: Vec<(CounterCell, u64)>,
}

/// Empirical means and counters for every demand cell.
#[derive(Debug, Clone)]
pub struct LearnerState {
    n_core: usize,
    n_supportive: usize,
    space_limit: usize,
    grid: PriceGrid,
    alpha_core: Cells,
    alpha_supportive: Cells,
    beta_discount: Cells,
    beta_original: Cells,
    /// Current period index `t`, 1-based.
    period: u64,
    /// Current episode index.
    episode: u64,
}

impl LearnerState {
    pub fn new(n_core: usize, n_supportive: usize, space_limit: usize, grid: PriceGrid) -> Self {
        let zc = grid.core_prices.len();
        let zs = grid.supportive_prices.len();
        let za = grid.addon_prices.len();
        LearnerState {
            n_core,
            n_supportive,
            space_limit,
            grid,
            alpha_core: Cells::new(n_core, zc),
            alpha_supportive: Cells::new(n_supportive, zs),
            beta_discount: Cells::new(n_supportive, za),
            beta_original: Cells::new(n_supportive, zs),
            period: 1,
            episode: 0,
        }
    }

    /// Matches the structure (counts, budget, grids) of `instance`.
    pub fn for_instance(instance: &Instance) -> Self {
        LearnerState::new(
            instance.n_core,
            instance.n_supportive,
            instance.space_limit,
            instance.grid.clone(),
        )
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    fn counter(&self, cell: CounterCell) -> u64 {
        match cell {
            CounterCell::Core { product, price_idx } => self.alpha_core.count[product][price_idx],
            CounterCell::Supportive { product, price_idx } => {
                self.alpha_supportive.count[product][price_idx]
            }
            CounterCell::AddonDiscount { product, price_idx } => {
                self.beta_discount.count[product][price_idx]
            }
            CounterCell::AddonOriginal { product, price_idx } => {
                self.beta_original.count[product][price_idx]
            }
        }
    }

    /// The optimistic demand table at the current period.
    pub fn ucb_demand_table(&self, ucb_scale: f64) -> DemandTable {
        let t = self.period;
        let table = |cells: &Cells, rows: usize, cols: usize| -> Vec<Vec<f64>> {
            (0..rows)
                .map(|i| (0..cols).map(|j| cells.ucb(i, j, t, ucb_scale)).collect())
                .collect()
        };
        DemandTable {
            alpha_core: table(&self.alpha_core, self.n_core, self.grid.core_prices.len()),
            alpha_supportive: table(
                &self.alpha_supportive,
                self.n_supportive,
                self.grid.supportive_prices.len(),
            ),
            beta_addon_discount: table(
                &self.beta_discount,
                self.n_supportive,
                self.grid.addon_prices.len(),
            ),
            beta_addon_original: table(
                &self.beta_original,
                self.n_supportive,
                self.grid.supportive_prices.len(),
            ),
        }
    }

    /// The planning resolution for an episode starting at the current period.
    pub fn episode_resolution(&self, epsilon: f64) -> Result<usize> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        let raw = ((self.period as f64).sqrt() / epsilon).ceil() as usize;
        Ok(raw.clamp(1, MAX_RESOLUTION))
    }

    /// Plans a new policy on the optimistic instance and records the counter
    /// values the episode termination rule watches.
    pub fn begin_episode(&mut self, epsilon: f64, ucb_scale: f64) -> Result<EpisodeSnapshot> {
        let resolution = self.episode_resolution(epsilon)?;
        let optimistic = Instance {
            n_core: self.n_core,
            n_supportive: self.n_supportive,
            space_limit: self.space_limit,
            grid: self.grid.clone(),
            demand: self.ucb_demand_table(ucb_scale),
        };
        let (policy, _) = fptas_solve(&optimistic, resolution)?;

        let mut watched = Vec::with_capacity(self.n_core + 2 * self.n_supportive);
        for (n, &j) in policy.core_price_idx.iter().enumerate() {
            watched.push(CounterCell::Core {
                product: n,
                price_idx: j,
            });
        }
        for (m, &j) in policy.supportive_price_idx.iter().enumerate() {
            watched.push(CounterCell::Supportive {
                product: m,
                price_idx: j,
            });
            watched.push(match policy.addon_price_idx[m] {
                Some(dj) => CounterCell::AddonDiscount {
                    product: m,
                    price_idx: dj,
                },
                None => CounterCell::AddonOriginal {
                    product: m,
                    price_idx: j,
                },
            });
        }
        let watched_counters = watched
            .into_iter()
            .map(|cell| (cell, self.counter(cell)))
            .collect();

        self.episode += 1;
        Ok(EpisodeSnapshot {
            start_period: self.period,
            policy,
            resolution,
            watched_counters,
        })
    }

    /// Folds one period's purchases into the means and counters, advances the
    /// period, and reports whether the episode is over (some watched counter
    /// reached twice its start value; a zero start counts as doubled at 1).
    pub fn record_observation(
        &mut self,
        snapshot: &EpisodeSnapshot,
        obs: &PeriodObservation,
    ) -> Result<bool> {
        if obs.core_purchases.len() != self.n_core
            || obs.supportive_primary_purchases.len() != self.n_supportive
            || obs.addon_trials.len() != self.n_supportive
        {
            return Err(Error::InvalidParameter(
                "observation dimensions do not match the policy".into(),
            ));
        }
        let core_purchased = obs.core_purchase_count() as u64;
        if obs
            .addon_trials
            .iter()
            .any(|t| t.len() as u64 != core_purchased)
        {
            return Err(Error::InvalidParameter(
                "add-on trial count does not match core purchases".into(),
            ));
        }

        let policy = &snapshot.policy;
        for (n, &bought) in obs.core_purchases.iter().enumerate() {
            self.alpha_core
                .record(n, policy.core_price_idx[n], bought as u64, 1);
        }
        for (m, &bought) in obs.supportive_primary_purchases.iter().enumerate() {
            self.alpha_supportive
                .record(m, policy.supportive_price_idx[m], bought as u64, 1);
        }
        for (m, trials) in obs.addon_trials.iter().enumerate() {
            let successes = trials.iter().filter(|&&b| b).count() as u64;
            match policy.addon_price_idx[m] {
                Some(dj) => self.beta_discount.record(m, dj, successes, core_purchased),
                None => self.beta_original.record(
                    m,
                    policy.supportive_price_idx[m],
                    successes,
                    core_purchased,
                ),
            }
        }
        self.period += 1;

        let over = snapshot.watched_counters.iter().any(|&(cell, start)| {
            let now = self.counter(cell);
            if start == 0 {
                now >= 1
            } else {
                now >= 2 * start
            }
        });
        Ok(over)
    }
}

/// One trajectory row of a learning run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodRecord {
    pub period: u64,
    pub episode: u64,
    /// Analytic expected revenue of the episode policy under ground truth.
    pub expected_revenue: f64,
    pub realized_revenue: f64,
}

/// Full output of one learning run.
#[derive(Debug, Clone)]
pub struct LearningRun {
    pub records: Vec<PeriodRecord>,
    pub episodes: u64,
    /// Whether the resolution cap was ever applied.
    pub resolution_capped: bool,
}

/// Simulates `horizon` periods of episodic UCB learning against the ground
/// truth. Per-period expected revenue is evaluated analytically so regret can
/// be computed without Monte Carlo noise.
pub fn run_learning(
    ground_truth: &Instance,
    horizon: u64,
    epsilon: f64,
    ucb_scale: f64,
    seed: u64,
) -> Result<LearningRun> {
    if horizon < 1 {
        return Err(Error::InvalidParameter("horizon must be >= 1".into()));
    }
    ground_truth.validate()?;

    let stream = DrawStream::new(seed);
    let mut state = LearnerState::for_instance(ground_truth);
    let mut records = Vec::with_capacity(horizon as usize);
    let mut resolution_capped = false;

    let mut snapshot = state.begin_episode(epsilon, ucb_scale)?;
    let mut expected = exact_policy_revenue(ground_truth, &snapshot.policy)?;
    for t in 1..=horizon {
        let obs = simulate_period(ground_truth, &snapshot.policy, &stream, t);
        records.push(PeriodRecord {
            period: t,
            episode: state.episode(),
            expected_revenue: expected,
            realized_revenue: obs.revenue,
        });
        let episode_over = state.record_observation(&snapshot, &obs)?;
        if episode_over && t < horizon {
            resolution_capped |= snapshot.resolution == MAX_RESOLUTION;
            snapshot = state.begin_episode(epsilon, ucb_scale)?;
            expected = exact_policy_revenue(ground_truth, &snapshot.policy)?;
        }
    }
    resolution_capped |= snapshot.resolution == MAX_RESOLUTION;

    Ok(LearningRun {
        records,
        episodes: state.episode(),
        resolution_capped,
    })
}
