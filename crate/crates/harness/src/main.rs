use std::path::PathBuf;
use std::process::ExitCode;

use addon_pricing::demand::{load_scenario, EffectLevel};
use addon_pricing::fptas::{fptas_solve, resolution_for_epsilon};
use addon_pricing::learner::MAX_RESOLUTION;
use addon_pricing::oracle::{brute_force_solve, exact_policy_revenue};
use addon_pricing::{Error, Instance, Policy};
use addon_pricing_harness::{
    benchmark_revenue, compute_regret_percentage, learning_csv, optimality_gap,
    run_learning_batch, run_table1_suite, table1_csv, write_with_metadata, CHECKPOINTS,
};
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "addon-pricing", version, about = "Add-on discount pricing: offline solver, learning experiments, reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate solve of a scenario via the gamma-grid dynamic program
    Solve {
        /// Scenario JSON file
        scenario: PathBuf,
        /// Target relative accuracy; used with --vstar to pick the grid resolution
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Grid resolution override; bypasses --epsilon/--vstar
        #[arg(long)]
        k: Option<usize>,
        /// Lower bound on the optimal revenue, for resolution selection
        #[arg(long)]
        vstar: Option<f64>,
    },
    /// Exact solve by enumerating core price vectors
    Oracle {
        scenario: PathBuf,
        /// Refuse instances with more core price vectors than this
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
    },
    /// Simulated learning runs; writes one CSV row per period per seed
    Learn {
        scenario: PathBuf,
        #[arg(long, default_value_t = 8760)]
        horizon: u64,
        /// Number of independent replications
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.125)]
        ucb_scale: f64,
        /// Output CSV path; a .meta sidecar is written alongside
        #[arg(long)]
        out: PathBuf,
    },
    /// Revenue advantage of allowing add-on discounts over forbidding them
    Gap {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Gap and learner regret for every (effect, space limit) cell of the
    /// bundled scenario
    Table1 {
        /// Comma-separated effect levels (low, medium, high)
        #[arg(long, value_delimiter = ',', default_values_t = vec![EffectLevel::Low, EffectLevel::Medium, EffectLevel::High])]
        effects: Vec<EffectLevel>,
        /// Comma-separated flag budgets
        #[arg(long, value_delimiter = ',', default_values_t = vec![4, 6, 8])]
        space_limits: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.125)]
        ucb_scale: f64,
        /// Output CSV path; printed to stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn policy_json(instance: &Instance, policy: &Policy) -> serde_json::Value {
    json!({
        "core_prices": (0..instance.n_core).map(|n| policy.core_price(instance, n)).collect::<Vec<_>>(),
        "supportive_prices": (0..instance.n_supportive).map(|m| policy.supportive_price(instance, m)).collect::<Vec<_>>(),
        "addon_discount_prices": (0..instance.n_supportive).map(|m| policy.addon_price(instance, m)).collect::<Vec<_>>(),
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve { scenario, epsilon, k, vstar } => {
            let instance = load_scenario(&scenario)?;
            let resolution = match k {
                Some(k) => k,
                None => {
                    let v = match vstar {
                        Some(v) => v,
                        None => {
                            // Coarse solve supplies a valid revenue lower bound.
                            let (p, _) = fptas_solve(&instance, 1)?;
                            exact_policy_revenue(&instance, &p)?
                        }
                    };
                    resolution_for_epsilon(&instance, epsilon, v)?
                }
            };
            let (policy, value) = fptas_solve(&instance, resolution)?;
            let achieved = exact_policy_revenue(&instance, &policy)?;
            let out = json!({
                "resolution": resolution,
                "approximate_value": value,
                "policy_revenue": achieved,
                "error_bound": instance.fptas_error_bound(resolution),
                "policy": policy_json(&instance, &policy),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Oracle { scenario, cap } => {
            let instance = load_scenario(&scenario)?;
            let (policy, value) = brute_force_solve(&instance, cap)?;
            let out = json!({
                "optimal_revenue": value,
                "policy": policy_json(&instance, &policy),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Learn { scenario, horizon, seeds, base_seed, epsilon, ucb_scale, out } => {
            if horizon < 1 || seeds < 1 || !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::InvalidParameter(
                    "horizon >= 1, seeds >= 1 and epsilon in (0,1) required".into(),
                ));
            }
            let instance = load_scenario(&scenario)?;
            let benchmark = benchmark_revenue(&instance)?;
            let runs = run_learning_batch(&instance, horizon, seeds, base_seed, epsilon, ucb_scale)?;
            let csv = learning_csv(&runs, benchmark.r_star);
            let capped = runs.iter().any(|(_, r)| r.resolution_capped);
            let trajectories: Vec<_> = runs.iter().map(|(_, r)| r.records.clone()).collect();
            let cps: Vec<u64> = CHECKPOINTS.iter().copied().filter(|&c| c <= horizon).collect();
            let report = compute_regret_percentage(&trajectories, benchmark, &cps)?;
            let meta = json!({
                "command": "learn",
                "version": env!("CARGO_PKG_VERSION"),
                "scenario": scenario,
                "horizon": horizon,
                "seeds": seeds,
                "base_seed": base_seed,
                "epsilon": epsilon,
                "ucb_scale": ucb_scale,
                "r_star": benchmark.r_star,
                "r_star_method": benchmark.method,
                "resolution_cap": MAX_RESOLUTION,
                "resolution_cap_applied": capped,
                "report": report,
            });
            write_with_metadata(&out, &csv, &meta)?;
            for cp in &report.checkpoints {
                println!(
                    "t={}: mean regret {:.3}% (se {:.3})",
                    cp.period, cp.mean_regret_pct, cp.std_error
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Gap { scenario } => {
            let instance = load_scenario(&scenario)?;
            let (r_star, r0, gap) = optimality_gap(&instance)?;
            let out = json!({
                "r_star": r_star,
                "r_star_no_addon": r0,
                "gap_percent": gap,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Table1 { effects, space_limits, seeds, base_seed, epsilon, ucb_scale, out } => {
            if seeds < 1 || !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::InvalidParameter(
                    "seeds >= 1 and epsilon in (0,1) required".into(),
                ));
            }
            let rows = run_table1_suite(&effects, &space_limits, seeds, base_seed, epsilon, ucb_scale)?;
            let csv = table1_csv(&rows);
            match out {
                Some(path) => {
                    let meta = json!({
                        "command": "table1",
                        "version": env!("CARGO_PKG_VERSION"),
                        "effects": effects,
                        "space_limits": space_limits,
                        "seeds": seeds,
                        "base_seed": base_seed,
                        "epsilon": epsilon,
                        "ucb_scale": ucb_scale,
                        "checkpoints": CHECKPOINTS,
                    });
                    write_with_metadata(&path, &csv, &meta)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                // Scenario itself is unusable.
                Error::InvalidGrid(_)
                | Error::InvalidDemand(_)
                | Error::InvalidInstance(_)
                | Error::InstanceTooLarge { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
