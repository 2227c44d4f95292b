//! Tabular demand over finite price grids.
//!
//! All demand quantities are Bernoulli means tabulated on the price grids:
//! `alpha` is the primary (standalone) purchase probability of a product at
//! its posted price, `beta` the add-on purchase probability at the original
//! price, and `beta'` the add-on purchase probability at a discount price.
//! The bundled scenario reproduces the linear ground-truth model fitted from
//! store transaction data (3 consoles, 20 games).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The finite price sets for core products, supportive products and add-on
/// discounts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceGrid {
    pub core_prices: Vec<f64>,
    pub supportive_prices: Vec<f64>,
    pub addon_prices: Vec<f64>,
}

impl PriceGrid {
    pub fn new(core: Vec<f64>, supportive: Vec<f64>, addon: Vec<f64>) -> Result<Self> {
        let grid = PriceGrid {
            core_prices: core,
            supportive_prices: supportive,
            addon_prices: addon,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, list) in [
            ("core_prices", &self.core_prices),
            ("supportive_prices", &self.supportive_prices),
            ("addon_prices", &self.addon_prices),
        ] {
            if list.is_empty() {
                return Err(Error::InvalidGrid(format!("{name} is empty")));
            }
            if list.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
                return Err(Error::InvalidGrid(format!("{name} has a nonpositive price")));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGrid(format!(
                    "{name} is not strictly increasing"
                )));
            }
        }
        Ok(())
    }

    /// The global maximum price over all three grids.
    pub fn max_price(&self) -> f64 {
        self.core_prices
            .iter()
            .chain(&self.supportive_prices)
            .chain(&self.addon_prices)
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Coefficients of a linear demand curve `intercept + slope * price`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearDemandParams {
    pub intercept: f64,
    pub slope: f64,
}

impl LinearDemandParams {
    pub fn eval(&self, price: f64) -> f64 {
        self.intercept + self.slope * price
    }
}

/// Demand probabilities tabulated over the grids.
///
/// Row `n` of `alpha_core` holds the primary demand of core product `n` at
/// each core price; the supportive matrices are indexed the same way over
/// their grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandTable {
    /// `N x |core_prices|`
    pub alpha_core: Vec<Vec<f64>>,
    /// `M x |supportive_prices|`
    pub alpha_supportive: Vec<Vec<f64>>,
    /// `M x |addon_prices|`
    pub beta_addon_discount: Vec<Vec<f64>>,
    /// `M x |supportive_prices|`
    pub beta_addon_original: Vec<Vec<f64>>,
}

impl DemandTable {
    fn all_entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.alpha_core
            .iter()
            .chain(&self.alpha_supportive)
            .chain(&self.beta_addon_discount)
            .chain(&self.beta_addon_original)
            .flatten()
            .cloned()
    }
}

/// A full problem description: product counts, space limit, grids and demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n_core: usize,
    pub n_supportive: usize,
    pub space_limit: usize,
    pub grid: PriceGrid,
    pub demand: DemandTable,
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.n_core < 1 {
            return Err(Error::InvalidInstance("need at least one core product".into()));
        }
        if self.space_limit > self.n_supportive {
            return Err(Error::InvalidInstance(format!(
                "space limit {} exceeds supportive product count {}",
                self.space_limit, self.n_supportive
            )));
        }
        let dims = [
            ("alpha_core", &self.demand.alpha_core, self.n_core, self.grid.core_prices.len()),
            (
                "alpha_supportive",
                &self.demand.alpha_supportive,
                self.n_supportive,
                self.grid.supportive_prices.len(),
            ),
            (
                "beta_addon_discount",
                &self.demand.beta_addon_discount,
                self.n_supportive,
                self.grid.addon_prices.len(),
            ),
            (
                "beta_addon_original",
                &self.demand.beta_addon_original,
                self.n_supportive,
                self.grid.supportive_prices.len(),
            ),
        ];
        for (name, matrix, rows, cols) in dims {
            if matrix.len() != rows || matrix.iter().any(|r| r.len() != cols) {
                return Err(Error::InvalidInstance(format!(
                    "{name} dimensions do not match the instance"
                )));
            }
        }
        if self.demand.all_entries().any(|v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidInstance(
                "demand table entry outside [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn max_price(&self) -> f64 {
        self.grid.max_price()
    }

    /// The `p̂ * M * N / K` approximation error bound of the grid scheme.
    pub fn fptas_error_bound(&self, resolution: usize) -> f64 {
        self.max_price() * self.n_supportive as f64 * self.n_core as f64 / resolution as f64
    }

    /// Same instance with the add-on budget removed.
    pub fn without_addons(&self) -> Instance {
        Instance {
            space_limit: 0,
            ..self.clone()
        }
    }
}

/// Tabulates linear demand curves onto the grids.
///
/// The discount-demand curve for each product is `multiplier` times its
/// original-price add-on curve, evaluated on the addon grid and clamped to
/// [0, 1]. All other curves must already be valid probabilities on their
/// grids; a curve that leaves [0, 1] signals a misconfigured scenario.
pub fn tabulate(
    core_params: &[LinearDemandParams],
    supportive_params: &[LinearDemandParams],
    beta_params: &[LinearDemandParams],
    grid: &PriceGrid,
    effect_multiplier: f64,
) -> Result<DemandTable> {
    grid.validate()?;
    if !(effect_multiplier > 0.0) {
        return Err(Error::InvalidDemand(
            "effect multiplier must be positive".into(),
        ));
    }
    if supportive_params.len() != beta_params.len() {
        return Err(Error::InvalidDemand(
            "alpha and beta supportive parameter counts differ".into(),
        ));
    }

    let eval_checked = |params: &LinearDemandParams, prices: &[f64], what: &str| -> Result<Vec<f64>> {
        let row: Vec<f64> = prices.iter().map(|&p| params.eval(p)).collect();
        if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidDemand(format!(
                "{what} leaves [0, 1] on its price grid (intercept {}, slope {})",
                params.intercept, params.slope
            )));
        }
        Ok(row)
    };

    let alpha_core = core_params
        .iter()
        .enumerate()
        .map(|(n, p)| eval_checked(p, &grid.core_prices, &format!("alpha for core product {n}")))
        .collect::<Result<Vec<_>>>()?;
    let alpha_supportive = supportive_params
        .iter()
        .enumerate()
        .map(|(m, p)| {
            eval_checked(
                p,
                &grid.supportive_prices,
                &format!("alpha for supportive product {m}"),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let beta_addon_original = beta_params
        .iter()
        .enumerate()
        .map(|(m, p)| {
            eval_checked(
                p,
                &grid.supportive_prices,
                &format!("beta for supportive product {m}"),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    // The multiplier may push beta' above 1 at low prices; clamp since the
    // entries are Bernoulli means.
    let beta_addon_discount = beta_params
        .iter()
        .map(|p| {
            grid.addon_prices
                .iter()
                .map(|&price| (effect_multiplier * p.eval(price)).clamp(0.0, 1.0))
                .collect()
        })
        .collect();

    Ok(DemandTable {
        alpha_core,
        alpha_supportive,
        beta_addon_discount,
        beta_addon_original,
    })
}

/// Strength of the add-on discount effect: the discount-demand curve is 2x,
/// 3x or 4x the original-price add-on curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectLevel {
    Low,
    Medium,
    High,
}

impl EffectLevel {
    pub fn multiplier(self) -> f64 {
        match self {
            EffectLevel::Low => 2.0,
            EffectLevel::Medium => 3.0,
            EffectLevel::High => 4.0,
        }
    }

    pub const ALL: [EffectLevel; 3] = [EffectLevel::Low, EffectLevel::Medium, EffectLevel::High];
}

impl std::fmt::Display for EffectLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EffectLevel::Low => write!(f, "low"),
            EffectLevel::Medium => write!(f, "medium"),
            EffectLevel::High => write!(f, "high"),
        }
    }
}

impl std::str::FromStr for EffectLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(EffectLevel::Low),
            "medium" => Ok(EffectLevel::Medium),
            "high" => Ok(EffectLevel::High),
            other => Err(Error::InvalidParameter(format!(
                "unknown effect level '{other}' (expected low, medium or high)"
            ))),
        }
    }
}

// Linear coefficients fitted from the store transaction data: three game
// consoles and twenty video games.
const CONSOLE_PARAMS: [LinearDemandParams; 3] = [
    LinearDemandParams { intercept: 0.975, slope: -7.25e-4 },
    LinearDemandParams { intercept: 0.27, slope: -2.00e-4 },
    LinearDemandParams { intercept: 1.15, slope: -8.50e-4 },
];

const GAME_ALPHA_PARAMS: [LinearDemandParams; 20] = [
    LinearDemandParams { intercept: 0.085, slope: -4.38e-4 },
    LinearDemandParams { intercept: 0.353, slope: -1.81e-3 },
    LinearDemandParams { intercept: 0.097, slope: -5.00e-4 },
    LinearDemandParams { intercept: 0.073, slope: -3.75e-4 },
    LinearDemandParams { intercept: 0.044, slope: -2.25e-4 },
    LinearDemandParams { intercept: 0.260, slope: -1.34e-3 },
    LinearDemandParams { intercept: 0.029, slope: -1.50e-4 },
    LinearDemandParams { intercept: 0.024, slope: -1.25e-4 },
    LinearDemandParams { intercept: 0.066, slope: -3.38e-4 },
    LinearDemandParams { intercept: 0.013, slope: -6.25e-5 },
    LinearDemandParams { intercept: 0.243, slope: -1.25e-3 },
    LinearDemandParams { intercept: 0.015, slope: -7.50e-5 },
    LinearDemandParams { intercept: 0.063, slope: -3.25e-4 },
    LinearDemandParams { intercept: 0.129, slope: -6.63e-4 },
    LinearDemandParams { intercept: 0.095, slope: -4.88e-4 },
    LinearDemandParams { intercept: 0.019, slope: -1.00e-4 },
    LinearDemandParams { intercept: 0.019, slope: -1.00e-4 },
    LinearDemandParams { intercept: 0.316, slope: -1.63e-3 },
    LinearDemandParams { intercept: 0.241, slope: -1.24e-3 },
    LinearDemandParams { intercept: 0.019, slope: -1.00e-4 },
];

const GAME_BETA_PARAMS: [LinearDemandParams; 20] = [
    LinearDemandParams { intercept: 0.050, slope: -2.50e-4 },
    LinearDemandParams { intercept: 0.208, slope: -1.04e-3 },
    LinearDemandParams { intercept: 0.057, slope: -2.88e-4 },
    LinearDemandParams { intercept: 0.043, slope: -2.13e-4 },
    LinearDemandParams { intercept: 0.027, slope: -1.38e-4 },
    LinearDemandParams { intercept: 0.153, slope: -7.63e-4 },
    LinearDemandParams { intercept: 0.017, slope: -8.75e-5 },
    LinearDemandParams { intercept: 0.015, slope: -7.50e-5 },
    LinearDemandParams { intercept: 0.038, slope: -1.88e-4 },
    LinearDemandParams { intercept: 0.008, slope: -3.75e-5 },
    LinearDemandParams { intercept: 0.143, slope: -7.13e-4 },
    LinearDemandParams { intercept: 0.008, slope: -3.75e-5 },
    LinearDemandParams { intercept: 0.037, slope: -1.88e-4 },
    LinearDemandParams { intercept: 0.077, slope: -3.88e-4 },
    LinearDemandParams { intercept: 0.057, slope: -2.88e-4 },
    LinearDemandParams { intercept: 0.012, slope: -6.25e-5 },
    LinearDemandParams { intercept: 0.012, slope: -6.25e-5 },
    LinearDemandParams { intercept: 0.187, slope: -9.38e-4 },
    LinearDemandParams { intercept: 0.142, slope: -7.13e-4 },
    LinearDemandParams { intercept: 0.012, slope: -6.25e-5 },
];

/// The desk-scale experiment instance: 3 consoles, 20 games, the fitted
/// linear demand curves, and the standard price grids.
pub fn bundled_scenario(effect: EffectLevel, space_limit: usize) -> Instance {
    let grid = PriceGrid {
        core_prices: vec![200.0, 400.0, 600.0, 800.0],
        supportive_prices: vec![80.0, 100.0, 120.0, 140.0, 160.0],
        // 160 never makes a feasible discount, so it is not on the addon grid.
        addon_prices: vec![80.0, 100.0, 120.0, 140.0],
    };
    assert!(space_limit <= 20, "bundled scenario has 20 supportive products");
    let demand = tabulate(
        &CONSOLE_PARAMS,
        &GAME_ALPHA_PARAMS,
        &GAME_BETA_PARAMS,
        &grid,
        effect.multiplier(),
    )
    .expect("bundled coefficients are valid on the bundled grids");
    let instance = Instance {
        n_core: 3,
        n_supportive: 20,
        space_limit,
        grid,
        demand,
    };
    instance.validate().expect("bundled scenario is well-formed");
    instance
}

/// On-disk scenario description.
///
/// Demand is given either as per-product linear coefficients plus an effect
/// multiplier, or as explicit demand matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n_core: usize,
    pub n_supportive: usize,
    pub space_limit: usize,
    pub core_prices: Vec<f64>,
    pub supportive_prices: Vec<f64>,
    pub addon_prices: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_core_params: Option<Vec<LinearDemandParams>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_supportive_params: Option<Vec<LinearDemandParams>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_params: Option<Vec<LinearDemandParams>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_multiplier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<DemandTable>,
}

impl ScenarioFile {
    pub fn into_instance(self) -> Result<Instance> {
        let grid = PriceGrid::new(self.core_prices, self.supportive_prices, self.addon_prices)?;
        let demand = match (self.demand, self.alpha_core_params) {
            (Some(demand), _) => demand,
            (None, Some(core_params)) => {
                let supp = self.alpha_supportive_params.ok_or_else(|| {
                    Error::InvalidDemand("missing alpha_supportive_params".into())
                })?;
                let beta = self
                    .beta_params
                    .ok_or_else(|| Error::InvalidDemand("missing beta_params".into()))?;
                let multiplier = self.effect_multiplier.ok_or_else(|| {
                    Error::InvalidDemand("missing effect_multiplier".into())
                })?;
                tabulate(&core_params, &supp, &beta, &grid, multiplier)?
            }
            (None, None) => {
                return Err(Error::InvalidDemand(
                    "scenario needs either explicit demand matrices or linear coefficients".into(),
                ))
            }
        };
        let instance = Instance {
            n_core: self.n_core,
            n_supportive: self.n_supportive,
            space_limit: self.space_limit,
            grid,
            demand,
        };
        instance.validate()?;
        Ok(instance)
    }

    /// The bundled scenario in file form (linear coefficients).
    pub fn bundled(effect: EffectLevel, space_limit: usize) -> ScenarioFile {
        ScenarioFile {
            n_core: 3,
            n_supportive: 20,
            space_limit,
            core_prices: vec![200.0, 400.0, 600.0, 800.0],
            supportive_prices: vec![80.0, 100.0, 120.0, 140.0, 160.0],
            addon_prices: vec![80.0, 100.0, 120.0, 140.0],
            alpha_core_params: Some(CONSOLE_PARAMS.to_vec()),
            alpha_supportive_params: Some(GAME_ALPHA_PARAMS.to_vec()),
            beta_params: Some(GAME_BETA_PARAMS.to_vec()),
            effect_multiplier: Some(effect.multiplier()),
            demand: None,
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    let file: ScenarioFile = serde_json::from_str(&text)?;
    file.into_instance()
}
