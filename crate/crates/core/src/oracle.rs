//! Exact reference solver for small instances.
//!
//! `exact_policy_revenue` evaluates the expected per-period revenue of a
//! policy directly from the demand table. `brute_force_solve` enumerates
//! every core price vector; given the exact core demand `gamma`, the
//! supportive side is separable, so per-product maxima plus a greedy top-`S`
//! selection of positive gains solve it exactly. This is the ground truth
//! the approximation scheme and the learner are checked against.

use crate::fptas::Policy;
use crate::{Error, Instance, Result};

/// Expected per-period revenue of `policy` under the instance's demand.
pub fn exact_policy_revenue(instance: &Instance, policy: &Policy) -> Result<f64> {
    policy.validate(instance)?;

    let mut core_revenue = 0.0;
    let mut gamma = 0.0;
    for n in 0..instance.n_core {
        let j = policy.core_price_idx[n];
        let alpha = instance.demand.alpha_core[n][j];
        core_revenue += alpha * instance.grid.core_prices[j];
        gamma += alpha;
    }

    let mut supportive_revenue = 0.0;
    let mut addon_revenue = 0.0;
    for m in 0..instance.n_supportive {
        let j = policy.supportive_price_idx[m];
        let price = instance.grid.supportive_prices[j];
        supportive_revenue += instance.demand.alpha_supportive[m][j] * price;
        match policy.addon_price_idx[m] {
            Some(dj) => {
                let dprice = instance.grid.addon_prices[dj];
                addon_revenue += instance.demand.beta_addon_discount[m][dj] * dprice;
            }
            None => {
                addon_revenue += instance.demand.beta_addon_original[m][j] * price;
            }
        }
    }

    Ok(core_revenue + supportive_revenue + gamma * addon_revenue)
}

/// Exact supportive-side solution for a fixed core demand `gamma`.
pub(crate) fn solve_supportive_exact(
    instance: &Instance,
    gamma: f64,
) -> (Vec<usize>, Vec<Option<usize>>, f64) {
    let m_count = instance.n_supportive;
    let supp_prices = &instance.grid.supportive_prices;
    let addon_prices = &instance.grid.addon_prices;

    let mut originals: Vec<(f64, usize)> = Vec::with_capacity(m_count);
    let mut discounted: Vec<(f64, usize, usize)> = Vec::with_capacity(m_count);
    let mut gains: Vec<(usize, f64)> = Vec::with_capacity(m_count);
    for m in 0..m_count {
        let mut best_r = f64::NEG_INFINITY;
        let mut best_r_j = 0;
        let mut best_rp = f64::NEG_INFINITY;
        let mut best_rp_j = 0;
        let mut best_rp_dj = 0;
        for (j, &p) in supp_prices.iter().enumerate() {
            let base = instance.demand.alpha_supportive[m][j] * p;
            let r = base + gamma * instance.demand.beta_addon_original[m][j] * p;
            if r > best_r {
                best_r = r;
                best_r_j = j;
            }
            for (dj, &dp) in addon_prices.iter().enumerate() {
                if dp < p {
                    let rp = base + gamma * instance.demand.beta_addon_discount[m][dj] * dp;
                    if rp > best_rp {
                        best_rp = rp;
                        best_rp_j = j;
                        best_rp_dj = dj;
                    }
                }
            }
        }
        originals.push((best_r, best_r_j));
        discounted.push((best_rp, best_rp_j, best_rp_dj));
        gains.push((m, best_rp - best_r));
    }

    gains.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("gains are never NaN"));
    let mut flagged = vec![false; m_count];
    for &(m, gain) in gains.iter().take(instance.space_limit) {
        if gain > 0.0 {
            flagged[m] = true;
        }
    }

    let mut value = 0.0;
    let mut price_idx = Vec::with_capacity(m_count);
    let mut addon_idx = Vec::with_capacity(m_count);
    for m in 0..m_count {
        if flagged[m] {
            let (rp, j, dj) = discounted[m];
            value += rp;
            price_idx.push(j);
            addon_idx.push(Some(dj));
        } else {
            let (r, j) = originals[m];
            value += r;
            price_idx.push(j);
            addon_idx.push(None);
        }
    }
    (price_idx, addon_idx, value)
}

/// Exact optimum by enumerating every core price vector.
///
/// Refuses instances with more than `enumeration_cap` core price vectors.
/// Ties are broken toward the lexicographically smallest core price-index
/// vector (enumeration order, strict improvement only).
pub fn brute_force_solve(instance: &Instance, enumeration_cap: u64) -> Result<(Policy, f64)> {
    instance.validate()?;
    let n = instance.n_core;
    let n_prices = instance.grid.core_prices.len();
    let candidates = (n_prices as u128).pow(n as u32);
    if candidates > enumeration_cap as u128 {
        return Err(Error::InstanceTooLarge {
            candidates,
            cap: enumeration_cap,
        });
    }

    let mut best_revenue = f64::NEG_INFINITY;
    let mut best_policy: Option<Policy> = None;
    let mut core_idx = vec![0usize; n];
    loop {
        let mut core_revenue = 0.0;
        let mut gamma = 0.0;
        for (stage, &j) in core_idx.iter().enumerate() {
            let alpha = instance.demand.alpha_core[stage][j];
            core_revenue += alpha * instance.grid.core_prices[j];
            gamma += alpha;
        }
        let (price_idx, addon_idx, supportive_value) = solve_supportive_exact(instance, gamma);
        let revenue = core_revenue + supportive_value;
        if revenue > best_revenue {
            best_revenue = revenue;
            best_policy = Some(Policy {
                core_price_idx: core_idx.clone(),
                supportive_price_idx: price_idx,
                addon_price_idx: addon_idx,
            });
        }

        // Odometer over core price indices, most significant digit first.
        let mut pos = n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            core_idx[pos] += 1;
            if core_idx[pos] < n_prices {
                break;
            }
            core_idx[pos] = 0;
        }
        if core_idx.iter().all(|&j| j == 0) {
            break;
        }
    }

    let policy = best_policy.expect("at least one candidate exists");
    Ok((policy, best_revenue))
}
