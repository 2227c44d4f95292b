//! Cross-module properties checked on randomized instances.

use addon_pricing::demand::{bundled_scenario, DemandTable, EffectLevel, PriceGrid};
use addon_pricing::fptas::{fptas_solve, solve_subproblem_grid};
use addon_pricing::oracle::{brute_force_solve, exact_policy_revenue};
use addon_pricing::sim::{simulate_period, DrawKind, DrawStream};
use addon_pricing::{Instance, Policy};
use proptest::prelude::*;

/// Deterministic random instance, addressed by a single index so the suite
/// is reproducible without carrying generator state around.
fn random_instance(index: u64, max_n: usize, max_m: usize, max_grid: usize) -> Instance {
    let stream = DrawStream::new(0xA5EED).split(index);
    let mut cursor = 0u64;
    let mut next = |hi: f64| {
        cursor += 1;
        stream.uniform(cursor, DrawKind::CorePrimary, 0, 0) * hi
    };
    let mut dim = |max: usize| 1 + (next(max as f64) as usize).min(max - 1);

    let n = dim(max_n);
    let m = dim(max_m);
    let gc = dim(max_grid);
    let gs = dim(max_grid);
    let ga = dim(max_grid);

    let mut prices = |count: usize| {
        let mut v: Vec<f64> = (0..count).map(|_| 1.0 + next(99.0)).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Separate near-duplicates so the grid stays strictly increasing.
        for i in 1..v.len() {
            if v[i] <= v[i - 1] {
                v[i] = v[i - 1] + 1e-3;
            }
        }
        v
    };
    let grid = PriceGrid::new(prices(gc), prices(gs), prices(ga)).unwrap();

    let mut probs = |rows: usize, cols: usize| -> Vec<Vec<f64>> {
        (0..rows)
            .map(|_| (0..cols).map(|_| next(1.0)).collect())
            .collect()
    };
    let demand = DemandTable {
        alpha_core: probs(n, gc),
        alpha_supportive: probs(m, gs),
        beta_addon_discount: probs(m, ga),
        beta_addon_original: probs(m, gs),
    };

    let space_limit = (next(m as f64 + 1.0) as usize).min(m);
    let inst = Instance {
        n_core: n,
        n_supportive: m,
        space_limit,
        grid,
        demand,
    };
    inst.validate().unwrap();
    inst
}

#[test]
fn approximate_value_tracks_its_own_policy() {
    // The DP value uses rounded demand transitions; the drift per stage is at
    // most 1/(2K), so the value can differ from the returned policy's exact
    // revenue by at most p_max * M * N / (2K).
    for index in 0..60 {
        let inst = random_instance(index, 3, 4, 4);
        for k in [5usize, 50, 500] {
            let (policy, approx) = fptas_solve(&inst, k).unwrap();
            let exact = exact_policy_revenue(&inst, &policy).unwrap();
            let slack = inst.max_price() * (inst.n_supportive * inst.n_core) as f64
                / (2.0 * k as f64);
            assert!(
                (approx - exact).abs() <= slack + 1e-9,
                "instance {index} K={k}: approx {approx} exact {exact} slack {slack}"
            );
        }
    }
}

#[test]
fn fptas_gap_to_oracle_within_bound() {
    for index in 0..60 {
        let inst = random_instance(index, 3, 4, 4);
        let (_, best) = brute_force_solve(&inst, 1 << 20).unwrap();
        for k in [5usize, 50] {
            let (policy, _) = fptas_solve(&inst, k).unwrap();
            let achieved = exact_policy_revenue(&inst, &policy).unwrap();
            assert!(
                best - achieved <= inst.fptas_error_bound(k) + 1e-9,
                "instance {index} K={k}: best {best} achieved {achieved}"
            );
        }
    }
}

#[test]
fn subproblem_grid_is_lipschitz_convex_monotone() {
    for index in 0..40 {
        let inst = random_instance(index, 3, 4, 4);
        let k = 100usize;
        let grid = solve_subproblem_grid(&inst, k).unwrap();
        let lip = inst.n_supportive as f64 * inst.max_price() / k as f64;
        let mut prev_slope = f64::NEG_INFINITY;
        for w in grid.values.windows(2) {
            let step = w[1] - w[0];
            assert!(step >= -1e-9, "values must be nondecreasing in gamma");
            assert!(step <= lip + 1e-9, "step {step} exceeds Lipschitz bound {lip}");
            assert!(step >= prev_slope - 1e-9, "slopes must be nondecreasing");
            prev_slope = step;
        }
    }
}

#[test]
fn flag_budget_respected_everywhere() {
    for index in 0..40 {
        let inst = random_instance(index, 3, 4, 4);
        let grid = solve_subproblem_grid(&inst, 25).unwrap();
        for decisions in &grid.decisions {
            let flagged = decisions.iter().filter(|c| c.addon_price_idx.is_some()).count();
            assert!(flagged <= inst.space_limit);
            for c in decisions {
                if let Some(dj) = c.addon_price_idx {
                    assert!(
                        inst.grid.addon_prices[dj] < inst.grid.supportive_prices[c.price_idx]
                    );
                }
            }
        }
        let (policy, _) = fptas_solve(&inst, 25).unwrap();
        assert!(policy.addon_count() <= inst.space_limit);
    }
}

#[test]
fn simulated_mean_revenue_matches_analytic_value() {
    let inst = bundled_scenario(EffectLevel::Medium, 6);
    let policy = Policy {
        core_price_idx: vec![1, 2, 0],
        supportive_price_idx: vec![2; 20],
        addon_price_idx: (0..20).map(|m| if m < 6 { Some(1) } else { None }).collect(),
    };
    let expected = exact_policy_revenue(&inst, &policy).unwrap();
    let stream = DrawStream::new(31337);
    let periods = 40_000u64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for t in 1..=periods {
        let r = simulate_period(&inst, &policy, &stream, t).revenue;
        sum += r;
        sum_sq += r * r;
    }
    let mean = sum / periods as f64;
    let var = (sum_sq / periods as f64 - mean * mean).max(0.0);
    let se = (var / periods as f64).sqrt();
    assert!(
        (mean - expected).abs() <= 4.0 * se,
        "mean {mean} expected {expected} se {se}"
    );
}

proptest! {
    #[test]
    fn policy_revenue_is_nonnegative_and_bounded(index in 0u64..500) {
        let inst = random_instance(index, 3, 4, 4);
        let (policy, value) = fptas_solve(&inst, 10).unwrap();
        let exact = exact_policy_revenue(&inst, &policy).unwrap();
        // Coarse sanity envelope: every term is a probability times a price.
        let ceiling = inst.max_price()
            * (inst.n_core + inst.n_supportive + inst.n_core * inst.n_supportive) as f64;
        prop_assert!(exact >= 0.0);
        prop_assert!(exact <= ceiling + 1e-9);
        prop_assert!(value >= -1e-9);
        prop_assert!(value <= ceiling + 1e-9);
    }

    #[test]
    fn removing_the_flag_budget_never_gains_revenue(index in 0u64..100) {
        let mut inst = random_instance(index, 2, 3, 3);
        let (_, with_budget) = brute_force_solve(&inst, 1 << 20).unwrap();
        inst.space_limit = 0;
        let (policy, without) = brute_force_solve(&inst, 1 << 20).unwrap();
        prop_assert_eq!(policy.addon_count(), 0);
        prop_assert!(with_budget >= without - 1e-9);
    }
}
