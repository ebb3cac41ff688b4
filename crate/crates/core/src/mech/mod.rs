//! Bid-reporting base mechanisms and the distribution-reporting mechanisms
//! built on them by adding ex-ante entry thresholds.

mod base;
mod config;
mod induced;
mod peer;
mod tam;

pub use base::{spa_outcome, vcg_outcome, BaseMechanism, BidOutcome, Settlement};
pub use config::{iid_tam_revenue, BaseKind, Component, Lottery, MechanismConfig};
pub use induced::{
    induce_bid_mechanism, FeasibilityRow, IcRow, InducedProfile, InducedTable, IrRow,
};
pub use peer::{
    alpha_support, peer_max_revenue, peer_revenue_from_stats, peer_welfare_revenue,
    rev_at_alpha, AlphaGrid, AlphaRev, PeerReport,
};
pub use tam::{tam_evaluate, TamReport};
