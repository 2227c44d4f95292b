//! Revenue management with add-on discounts.
//!
//! A retailer prices `N` core products and `M` supportive products on finite
//! price grids and may flag up to `S` supportive products for an add-on
//! discount offered to customers who buy a core product in the same period.
//! This crate provides:
//!
//! * [`demand`] — tabular Bernoulli demand over the price grids, plus the
//!   bundled linear-model scenario used in the experiments;
//! * [`fptas`] — an approximation scheme that discretizes the expected core
//!   demand and solves the pricing problem to any desired accuracy;
//! * [`oracle`] — an exact brute-force solver and exact policy evaluator for
//!   small instances;
//! * [`sim`] — a deterministic, counter-addressed stochastic environment;
//! * [`learner`] — an episodic UCB algorithm that learns the demand tables
//!   online using the FPTAS as a planning subroutine.

pub mod demand;
pub mod error;
pub mod fptas;
pub mod learner;
pub mod oracle;
pub mod sim;

pub use demand::{DemandTable, EffectLevel, Instance, LinearDemandParams, PriceGrid};
pub use error::Error;
pub use fptas::{Policy, SubproblemGrid};
pub use learner::{LearnerState, LearningRun, PeriodRecord};
pub use sim::PeriodObservation;

pub type Result<T> = std::result::Result<T, Error>;
