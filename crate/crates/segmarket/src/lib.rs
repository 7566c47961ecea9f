//! Steady-state equilibrium analysis of a two-sector search labor market
//! with noisy screening.
//!
//! Workers are qualified or unqualified; low-tech firms hire anyone while
//! high-tech firms screen matches through a noisy signal with a monotone
//! likelihood ratio. Free entry ties the sector mix to the quality of the
//! unemployment pool, and qualified workers' willingness to take low-tech
//! jobs feeds back into that quality. The crate enumerates and classifies
//! all steady states of the one-group model, solves the two-group extension
//! (including asymmetric equilibria in which observably identical groups are
//! treated differently), checks a proportional-hiring quota, and verifies
//! every solution against an independent flow-iteration oracle plus a
//! finite-agent Monte Carlo.
//!
//! Entry points:
//! - [`Market::find_all_equilibria`] for the one-group taxonomy,
//! - [`groups`] for the two-group solvers and the quota check,
//! - [`simulator`] for the oracle and the simulations.

pub mod baseline;
pub mod error;
pub mod groups;
pub mod params;
pub mod rng;
pub mod roots;
pub mod signal;
pub mod simulator;

pub use baseline::{
    Bounds, EqKind, Equilibrium, EquilibriumSet, Market, PhiScan, RejectReason, RejectedCandidate,
};
pub use error::{ModelError, Result};
pub use params::{derive_valuations, Calibration, ModelParams, Valuations};
pub use signal::{HireRates, HiringRule, SignalModel, ThresholdCorner};
