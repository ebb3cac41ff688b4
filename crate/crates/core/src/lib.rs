//! Simulation and verification library for distribution-reporting auctions.
//!
//! Buyers commit ex-ante to a reported value distribution; the seller runs a
//! bid-reporting base mechanism (second-price or multi-unit VCG) and charges
//! an ex-ante entry threshold that depends only on the other buyers' reports.
//! This crate provides:
//!
//! * [`dist`]: value distributions, quantile calculus and instance generators,
//!   including the hard-instance families used for revenue ceilings.
//! * [`engine`]: exact (joint-support enumeration and order statistics) and
//!   Monte Carlo computation of welfare, base-mechanism revenue and the
//!   per-buyer quantities `w`, `s`, `r`, plus ex-ante utilities under the
//!   quantile coupling.
//! * [`mech`]: base mechanisms, threshold-augmented mechanisms, Peer-Max,
//!   Peer-Welfare, the i.i.d. full-extraction mechanism, and the induced
//!   bid-reporting mechanism on scaled families.
//! * [`verify`]: incentive-compatibility regret search, either-or bound
//!   checks, arrangement optimality, hard-family audits and random sweeps.

pub mod dist;
pub mod engine;
pub mod error;
pub mod mech;
pub mod rng;
pub mod verify;

pub use dist::{Atom, Distribution, Instance};
pub use engine::{ExactEngine, Model, PerBuyerStats};
pub use error::{Error, Result};
pub use mech::{BaseMechanism, BidOutcome, MechanismConfig, TamReport};
pub use verify::GuaranteeReport;

/// Absolute tolerance for comparisons that gate participation.
pub const GATE_TOL: f64 = 1e-12;

/// Absolute tolerance on probability vectors summing to one.
pub const PROB_TOL: f64 = 1e-12;

/// Default cap on the number of enumerated joint-support profiles.
pub const DEFAULT_CAP: u64 = 1_000_000;
