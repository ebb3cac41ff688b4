//! Numerical audits: incentive-compatibility regret search, either-or
//! revenue bounds, arrangement optimality, hard-family ceilings and random
//! sweeps.

mod arrangement;
mod hard;
mod ic;
mod sweep;

pub use arrangement::{arrangement_audit, ArrangementAudit};
pub use hard::{
    clopper_pearson_lower, concentration_audit, posted_price_cap, upper_bound_audit,
    ConcentrationReport, PostedPriceCap, UpperBoundReport,
};
pub use ic::{ic_audit, IcAudit, IcWitness};
pub use sweep::{sweep, SweepConfig, SweepReport, SweepSummary};

use serde::{Deserialize, Serialize};

/// Slack allowed before a revenue bound counts as violated.
pub const BOUND_TOL: f64 = 1e-9;

/// Absolute tolerance on IC regret.
pub const REGRET_TOL: f64 = 1e-9;

/// `min{wel / (24(K + log₂ n)), 2^K · base_rev}`.
pub fn either_or_bound(wel: f64, base_rev: f64, k: u32, n: usize) -> f64 {
    let welfare_part = wel / (24.0 * (k as f64 + (n as f64).log2()));
    let base_part = (k as f64).exp2() * base_rev;
    welfare_part.min(base_part)
}

/// Revenue guarantee check on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeReport {
    pub instance_id: u64,
    pub n: usize,
    pub k: u32,
    pub wel: f64,
    pub base_rev: f64,
    pub bound: f64,
    pub revenue: f64,
    pub margin: f64,
    pub satisfied: bool,
}

impl GuaranteeReport {
    pub fn new(instance_id: u64, n: usize, k: u32, wel: f64, base_rev: f64, revenue: f64) -> Self {
        let bound = either_or_bound(wel, base_rev, k, n);
        let margin = revenue - bound;
        GuaranteeReport {
            instance_id,
            n,
            k,
            wel,
            base_rev,
            bound,
            revenue,
            margin,
            satisfied: margin >= -BOUND_TOL,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_examples() {
        assert_eq!(either_or_bound(2.5, 1.5, 1, 2), 2.5 / 48.0);
        assert!((either_or_bound(2.5, 1.5, 1, 2) - 0.0520833).abs() < 1e-7);
        assert_eq!(either_or_bound(7.0, 0.0, 2, 3), 0.0);
        assert_eq!(either_or_bound(0.0, 3.0, 2, 3), 0.0);
    }

    #[test]
    fn report_margin() {
        let r = GuaranteeReport::new(0, 2, 1, 2.5, 1.5, 0.5);
        assert!(r.satisfied);
        assert_eq!(r.margin, 0.5 - 2.5 / 48.0);
        let r = GuaranteeReport::new(1, 2, 1, 2.5, 1.5, 0.0);
        assert!(!r.satisfied);
    }
}
