//! Approximation scheme for the offline pricing problem.
//!
//! The problem decomposes around the expected per-period core demand
//! `gamma = sum_n alpha_n(p_n)`: given `gamma`, the supportive side is
//! separable across products and solved by per-product maxima plus a greedy
//! top-`S` selection of positive discount gains. The scheme evaluates the
//! supportive revenue `R_s(gamma)` on the grid `{0, 1/K, ..., N}` and then
//! runs a backward-induction dynamic program over core products, rounding
//! each product's demand contribution to the nearest multiple of `1/K`.
//! The revenue of the returned policy is within `p̂ * M * N / K` of optimal.

use crate::{Error, Instance, Result};

/// One full pricing decision.
///
/// Prices are stored as indices into the instance's grids. A supportive
/// product carries an add-on discount iff its entry in `addon_price_idx` is
/// present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub core_price_idx: Vec<usize>,
    pub supportive_price_idx: Vec<usize>,
    pub addon_price_idx: Vec<Option<usize>>,
}

impl Policy {
    pub fn addon_count(&self) -> usize {
        self.addon_price_idx.iter().flatten().count()
    }

    pub fn core_price(&self, instance: &Instance, n: usize) -> f64 {
        instance.grid.core_prices[self.core_price_idx[n]]
    }

    pub fn supportive_price(&self, instance: &Instance, m: usize) -> f64 {
        instance.grid.supportive_prices[self.supportive_price_idx[m]]
    }

    pub fn addon_price(&self, instance: &Instance, m: usize) -> Option<f64> {
        self.addon_price_idx[m].map(|j| instance.grid.addon_prices[j])
    }

    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.core_price_idx.len() != instance.n_core
            || self.supportive_price_idx.len() != instance.n_supportive
            || self.addon_price_idx.len() != instance.n_supportive
        {
            return Err(Error::InvalidPolicy(
                "policy dimensions do not match the instance".into(),
            ));
        }
        if self.core_price_idx.iter().any(|&j| j >= instance.grid.core_prices.len())
            || self
                .supportive_price_idx
                .iter()
                .any(|&j| j >= instance.grid.supportive_prices.len())
            || self
                .addon_price_idx
                .iter()
                .flatten()
                .any(|&j| j >= instance.grid.addon_prices.len())
        {
            return Err(Error::InvalidPolicy("price index out of grid range".into()));
        }
        if self.addon_count() > instance.space_limit {
            return Err(Error::InvalidPolicy(format!(
                "{} add-on discounts exceed the space limit {}",
                self.addon_count(),
                instance.space_limit
            )));
        }
        for m in 0..instance.n_supportive {
            if let Some(discount) = self.addon_price(instance, m) {
                if discount >= self.supportive_price(instance, m) {
                    return Err(Error::InvalidPolicy(format!(
                        "discount price of supportive product {m} is not below its original price"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Price choice for one supportive product at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportiveChoice {
    pub price_idx: usize,
    pub addon_price_idx: Option<usize>,
}

/// Supportive-side revenue `R_s` evaluated on the gamma grid `{0, 1/K, ..., N}`.
#[derive(Debug, Clone)]
pub struct SubproblemGrid {
    /// Grid resolution `K`.
    pub resolution: usize,
    /// `R_s(g / K)` for `g = 0 ..= N*K`.
    pub values: Vec<f64>,
    /// Per grid point, the supportive-side policy fragment attaining the value.
    pub decisions: Vec<Vec<SupportiveChoice>>,
}

impl SubproblemGrid {
    pub fn gamma(&self, index: usize) -> f64 {
        index as f64 / self.resolution as f64
    }
}

/// Evaluates the supportive subproblem at every gamma grid point.
///
/// At each point, for every product `m`:
/// * `r_m` is the best original-price objective
///   `alpha * p + gamma * beta(p) * p` over the supportive grid;
/// * `r'_m` is the best discounted objective
///   `alpha * p + gamma * beta'(p') * p'` over pairs with `p' < p`.
///
/// The at-most-`S` products with the largest strictly positive gains
/// `r'_m - r_m` are flagged (stable descending order, ties to the lower
/// product index). A product with no feasible `(p, p')` pair gets
/// `r'_m = -inf` and is never flagged.
pub fn solve_subproblem_grid(instance: &Instance, resolution: usize) -> Result<SubproblemGrid> {
    if resolution < 1 {
        return Err(Error::InvalidParameter("resolution K must be >= 1".into()));
    }
    instance.validate()?;

    let k = resolution;
    let n_points = instance.n_core * k + 1;
    let m_count = instance.n_supportive;
    let supp_prices = &instance.grid.supportive_prices;
    let addon_prices = &instance.grid.addon_prices;

    // Per product and supportive price index: the gamma-free and
    // gamma-linear objective terms, and the best feasible discount term
    // max_{p' < p} beta'(p') * p' with its argmax.
    struct ProductTerms {
        alpha_rev: Vec<f64>,
        beta_rev: Vec<f64>,
        best_discount: Vec<Option<(f64, usize)>>,
    }
    let terms: Vec<ProductTerms> = (0..m_count)
        .map(|m| {
            let alpha_rev: Vec<f64> = supp_prices
                .iter()
                .enumerate()
                .map(|(j, &p)| instance.demand.alpha_supportive[m][j] * p)
                .collect();
            let beta_rev: Vec<f64> = supp_prices
                .iter()
                .enumerate()
                .map(|(j, &p)| instance.demand.beta_addon_original[m][j] * p)
                .collect();
            let best_discount: Vec<Option<(f64, usize)>> = supp_prices
                .iter()
                .map(|&p| {
                    let mut best: Option<(f64, usize)> = None;
                    for (j, &dp) in addon_prices.iter().enumerate() {
                        if dp < p {
                            let v = instance.demand.beta_addon_discount[m][j] * dp;
                            if best.map_or(true, |(bv, _)| v > bv) {
                                best = Some((v, j));
                            }
                        }
                    }
                    best
                })
                .collect();
            ProductTerms {
                alpha_rev,
                beta_rev,
                best_discount,
            }
        })
        .collect();

    let mut values = Vec::with_capacity(n_points);
    let mut decisions = Vec::with_capacity(n_points);
    let mut gains: Vec<(usize, f64)> = Vec::with_capacity(m_count);
    // Per product: (r, argmax j), (r', argmax j, discount j).
    let mut originals: Vec<(f64, usize)> = vec![(0.0, 0); m_count];
    let mut discounted: Vec<(f64, usize, usize)> = vec![(f64::NEG_INFINITY, 0, 0); m_count];

    for g in 0..n_points {
        let gamma = g as f64 / k as f64;
        gains.clear();
        for (m, t) in terms.iter().enumerate() {
            let mut best_r = f64::NEG_INFINITY;
            let mut best_r_j = 0;
            let mut best_rp = f64::NEG_INFINITY;
            let mut best_rp_j = 0;
            let mut best_rp_dj = 0;
            for j in 0..supp_prices.len() {
                let r = t.alpha_rev[j] + gamma * t.beta_rev[j];
                if r > best_r {
                    best_r = r;
                    best_r_j = j;
                }
                if let Some((dv, dj)) = t.best_discount[j] {
                    let rp = t.alpha_rev[j] + gamma * dv;
                    if rp > best_rp {
                        best_rp = rp;
                        best_rp_j = j;
                        best_rp_dj = dj;
                    }
                }
            }
            originals[m] = (best_r, best_r_j);
            discounted[m] = (best_rp, best_rp_j, best_rp_dj);
            gains.push((m, best_rp - best_r));
        }

        // Stable descending sort on gain; ties keep the lower product index.
        gains.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("gains are never NaN"));
        let mut flagged = vec![false; m_count];
        for &(m, gain) in gains.iter().take(instance.space_limit) {
            if gain > 0.0 {
                flagged[m] = true;
            }
        }

        let mut value = 0.0;
        let fragment: Vec<SupportiveChoice> = (0..m_count)
            .map(|m| {
                if flagged[m] {
                    let (rp, j, dj) = discounted[m];
                    value += rp;
                    SupportiveChoice {
                        price_idx: j,
                        addon_price_idx: Some(dj),
                    }
                } else {
                    let (r, j) = originals[m];
                    value += r;
                    SupportiveChoice {
                        price_idx: j,
                        addon_price_idx: None,
                    }
                }
            })
            .collect();
        values.push(value);
        decisions.push(fragment);
    }

    Ok(SubproblemGrid {
        resolution: k,
        values,
        decisions,
    })
}

/// `alpha * K` rounded half away from zero, as a grid index increment.
fn rounded_demand_index(alpha: f64, k: usize) -> usize {
    (alpha * k as f64 + 0.5).floor() as usize
}

/// Backward-induction dynamic program over the core products.
///
/// State is the accumulated rounded core demand as a grid index; the reward
/// uses the exact `alpha_n(p) * p` while the transition advances the state by
/// the rounded demand, exactly as the scheme prescribes. Returns the policy
/// retrieved along the optimality equations and `V_1(0)`.
pub fn solve_master_dp(instance: &Instance, subgrid: &SubproblemGrid) -> Result<(Policy, f64)> {
    instance.validate()?;
    let k = subgrid.resolution;
    let n = instance.n_core;
    let n_points = n * k + 1;
    if subgrid.values.len() != n_points || subgrid.decisions.len() != n_points {
        return Err(Error::InvalidParameter(
            "subproblem grid does not match the instance and resolution".into(),
        ));
    }

    let core_prices = &instance.grid.core_prices;
    // next_value[g] = V_{stage+1}(g / K); start from the boundary V_{N+1} = R_s.
    let mut next_value = subgrid.values.clone();
    let mut choices: Vec<Vec<usize>> = vec![Vec::new(); n];

    for stage in (0..n).rev() {
        // Before pricing product `stage`, at most `stage` rounded demands
        // have accumulated, so only indices up to stage*K are reachable.
        let reachable = stage * k + 1;
        let mut value = vec![f64::NEG_INFINITY; reachable];
        let mut choice = vec![0usize; reachable];
        for g in 0..reachable {
            for (j, &price) in core_prices.iter().enumerate() {
                let alpha = instance.demand.alpha_core[stage][j];
                let next = g + rounded_demand_index(alpha, k);
                let candidate = alpha * price + next_value[next];
                if candidate > value[g] {
                    value[g] = candidate;
                    choice[g] = j;
                }
            }
        }
        choices[stage] = choice;
        next_value = value;
    }
    let approx_revenue = next_value[0];

    // Forward pass along the optimality equations.
    let mut g = 0usize;
    let mut core_price_idx = Vec::with_capacity(n);
    for (stage, choice) in choices.iter().enumerate() {
        let j = choice[g];
        core_price_idx.push(j);
        g += rounded_demand_index(instance.demand.alpha_core[stage][j], k);
    }
    let fragment = &subgrid.decisions[g];
    let policy = Policy {
        core_price_idx,
        supportive_price_idx: fragment.iter().map(|c| c.price_idx).collect(),
        addon_price_idx: fragment.iter().map(|c| c.addon_price_idx).collect(),
    };
    policy.validate(instance)?;

    Ok((policy, approx_revenue))
}

/// Runs the full scheme: grid evaluation of the subproblem, then the master
/// dynamic program.
pub fn fptas_solve(instance: &Instance, resolution: usize) -> Result<(Policy, f64)> {
    let subgrid = solve_subproblem_grid(instance, resolution)?;
    solve_master_dp(instance, &subgrid)
}

/// The resolution `K = ceil(p̂ M N / (v* eps))` that makes the returned
/// policy `(1 - eps)`-optimal whenever the optimum is at least `v*`.
pub fn resolution_for_epsilon(
    instance: &Instance,
    epsilon: f64,
    revenue_lower_bound: f64,
) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(revenue_lower_bound > 0.0) {
        return Err(Error::InvalidParameter(
            "revenue lower bound v* must be positive".into(),
        ));
    }
    let raw = instance.max_price() * instance.n_supportive as f64 * instance.n_core as f64
        / (revenue_lower_bound * epsilon);
    Ok((raw.ceil() as usize).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{bundled_scenario, DemandTable, EffectLevel, PriceGrid};

    fn tiny_instance() -> Instance {
        // One core product, one supportive product.
        Instance {
            n_core: 1,
            n_supportive: 1,
            space_limit: 1,
            grid: PriceGrid::new(vec![400.0], vec![100.0], vec![80.0]).unwrap(),
            demand: DemandTable {
                alpha_core: vec![vec![0.5]],
                alpha_supportive: vec![vec![0.1]],
                beta_addon_discount: vec![vec![0.3]],
                beta_addon_original: vec![vec![0.05]],
            },
        }
    }

    #[test]
    fn subproblem_at_gamma_zero_matches_primary_maxima() {
        let inst = bundled_scenario(EffectLevel::Medium, 6);
        let grid = solve_subproblem_grid(&inst, 4).unwrap();
        // Add-on terms vanish at gamma = 0; game 1's inner max is 4.12 at 100.
        let expected: f64 = (0..20)
            .map(|m| {
                inst.grid
                    .supportive_prices
                    .iter()
                    .enumerate()
                    .map(|(j, &p)| inst.demand.alpha_supportive[m][j] * p)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum();
        assert!((grid.values[0] - expected).abs() < 1e-9);

        let game1_max = inst
            .grid
            .supportive_prices
            .iter()
            .enumerate()
            .map(|(j, &p)| inst.demand.alpha_supportive[0][j] * p)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((game1_max - 4.12).abs() < 1e-9);
        assert_eq!(grid.decisions[0][0].price_idx, 1); // price 100
    }

    #[test]
    fn zero_space_limit_never_flags() {
        let inst = bundled_scenario(EffectLevel::High, 0);
        let grid = solve_subproblem_grid(&inst, 8).unwrap();
        for fragment in &grid.decisions {
            assert!(fragment.iter().all(|c| c.addon_price_idx.is_none()));
        }
    }

    #[test]
    fn discount_argmax_matches_pair_enumeration() {
        // alpha = 0, a discounted gain that beats every original-price
        // option: the flag is set and the discount price maximizes
        // beta'(p') * p' subject to p' < the chosen original price.
        let grid = PriceGrid::new(
            vec![100.0],
            vec![80.0, 100.0, 120.0],
            vec![60.0, 90.0, 110.0],
        )
        .unwrap();
        let inst = Instance {
            n_core: 1,
            n_supportive: 1,
            space_limit: 1,
            grid,
            demand: DemandTable {
                alpha_core: vec![vec![1.0]],
                alpha_supportive: vec![vec![0.0, 0.0, 0.0]],
                beta_addon_discount: vec![vec![1.0, 1.0, 1.0]],
                beta_addon_original: vec![vec![1.0, 0.1, 0.1]],
            },
        };
        let k = 7;
        let sub = solve_subproblem_grid(&inst, k).unwrap();
        // Naive enumeration over flag, p and p' at gamma = 1 (grid index K).
        let gamma = 1.0;
        let mut best = f64::NEG_INFINITY;
        let mut best_choice = SupportiveChoice {
            price_idx: 0,
            addon_price_idx: None,
        };
        for (j, &p) in inst.grid.supportive_prices.iter().enumerate() {
            let unflagged = gamma * inst.demand.beta_addon_original[0][j] * p;
            if unflagged > best {
                best = unflagged;
                best_choice = SupportiveChoice {
                    price_idx: j,
                    addon_price_idx: None,
                };
            }
            for (dj, &dp) in inst.grid.addon_prices.iter().enumerate() {
                if dp < p {
                    let v = gamma * inst.demand.beta_addon_discount[0][dj] * dp;
                    if v > best {
                        best = v;
                        best_choice = SupportiveChoice {
                            price_idx: j,
                            addon_price_idx: Some(dj),
                        };
                    }
                }
            }
        }
        let choice = sub.decisions[k][0];
        assert!(choice.addon_price_idx.is_some());
        assert_eq!(choice, best_choice);
        assert!((sub.values[k] - best).abs() < 1e-9);
    }

    #[test]
    fn master_dp_single_action() {
        let mut inst = tiny_instance();
        inst.n_supportive = 0;
        inst.space_limit = 0;
        inst.demand.alpha_supportive.clear();
        inst.demand.beta_addon_discount.clear();
        inst.demand.beta_addon_original.clear();
        let (policy, revenue) = fptas_solve(&inst, 2).unwrap();
        assert!((revenue - 0.5 * 400.0).abs() < 1e-12);
        assert_eq!(policy.core_price_idx, vec![0]);
    }

    #[test]
    fn zero_core_demand_terminates_at_gamma_zero() {
        let mut inst = bundled_scenario(EffectLevel::Medium, 6);
        for row in &mut inst.demand.alpha_core {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        let sub = solve_subproblem_grid(&inst, 16).unwrap();
        let (_, revenue) = solve_master_dp(&inst, &sub).unwrap();
        assert!((revenue - sub.values[0]).abs() < 1e-9);
    }

    #[test]
    fn singleton_grids_return_unique_policy() {
        let inst = tiny_instance();
        for k in [1, 3, 97] {
            let (policy, _) = fptas_solve(&inst, k).unwrap();
            assert_eq!(policy.core_price_idx, vec![0]);
            assert_eq!(policy.supportive_price_idx, vec![0]);
            // Discount 80 < 100 with gain 0.5*(0.3*80) - 0.5*(0.05*100) > 0.
            assert_eq!(policy.addon_price_idx, vec![Some(0)]);
        }
    }

    #[test]
    fn resolution_formula() {
        let inst = bundled_scenario(EffectLevel::Medium, 6);
        assert_eq!(resolution_for_epsilon(&inst, 0.1, 100.0).unwrap(), 4800);
        // eps -> 1 boundary and the half case.
        let phat_mn = 800.0 * 20.0 * 3.0;
        assert_eq!(resolution_for_epsilon(&inst, 0.999999, phat_mn).unwrap(), 2);
        assert_eq!(resolution_for_epsilon(&inst, 0.5, phat_mn).unwrap(), 2);
        assert!(resolution_for_epsilon(&inst, 0.0, 1.0).is_err());
        assert!(resolution_for_epsilon(&inst, 0.5, 0.0).is_err());
    }

    #[test]
    fn subgrid_is_monotone_lipschitz_convex() {
        let inst = bundled_scenario(EffectLevel::Medium, 6);
        let k = 50;
        let sub = solve_subproblem_grid(&inst, k).unwrap();
        let lip = inst.n_supportive as f64 * inst.max_price();
        let step = 1.0 / k as f64;
        let mut prev_slope = f64::NEG_INFINITY;
        for w in sub.values.windows(2) {
            let slope = (w[1] - w[0]) / step;
            assert!(w[1] + 1e-12 >= w[0], "values must be nondecreasing");
            assert!(slope <= lip + 1e-9, "slope exceeds the Lipschitz bound");
            assert!(slope + 1e-9 >= prev_slope, "slopes must be nondecreasing");
            prev_slope = slope;
        }
    }

    #[test]
    fn returned_policy_respects_budget() {
        for s in [0, 1, 6, 20] {
            let inst = bundled_scenario(EffectLevel::High, s);
            let (policy, _) = fptas_solve(&inst, 100).unwrap();
            assert!(policy.addon_count() <= s);
            policy.validate(&inst).unwrap();
        }
    }
}
