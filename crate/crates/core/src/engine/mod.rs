//! Expectations over value profiles.
//!
//! The exact engine sums over the joint support of discrete buyers. When the
//! support is larger than the configured cap, second-price quantities are
//! still available in closed form through order statistics of independent
//! buyers; VCG quantities are not.

mod coupling;
mod enumerate;
mod mc;
mod order_stats;

pub use coupling::{quantile_coupling, CouplingCell};
pub(crate) use enumerate::for_each_profile;
pub use mc::{mc_mean, stats_mc};

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Instance};
use crate::error::{Error, Result};
use crate::mech::BaseMechanism;
use crate::DEFAULT_CAP;

/// Which base mechanism defines `s` and `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    SingleItemSpa,
    MultiUnitVcg,
}

impl Model {
    /// SPA for single-item instances, VCG otherwise.
    pub fn default_for(instance: &Instance) -> Self {
        if instance.is_single_item() {
            Model::SingleItemSpa
        } else {
            Model::MultiUnitVcg
        }
    }

    pub fn base(self, instance: &Instance) -> Result<BaseMechanism> {
        match self {
            Model::SingleItemSpa if instance.is_single_item() => Ok(BaseMechanism::Spa),
            Model::SingleItemSpa => Err(Error::Parameter(
                "single-item model needs m = 1 and unit demands; use the VCG model".into(),
            )),
            Model::MultiUnitVcg => Ok(BaseMechanism::vcg_for(instance)),
        }
    }
}

/// Per-buyer welfare contribution `w`, base payment `s` and others' optimal
/// welfare `r`, with totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerBuyerStats {
    pub w: Vec<f64>,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub wel: f64,
    pub base_rev: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<StatsStderr>,
}

/// Monte Carlo standard errors, field by field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsStderr {
    pub w: Vec<f64>,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub wel: f64,
    pub base_rev: f64,
}

impl PerBuyerStats {
    pub(crate) fn from_parts(w: Vec<f64>, s: Vec<f64>, r: Vec<f64>) -> Self {
        let wel = w.iter().sum();
        let base_rev = s.iter().sum();
        PerBuyerStats {
            w,
            s,
            r,
            wel,
            base_rev,
            stderr: None,
        }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    /// Base-mechanism utility `w_i − s_i` of each buyer under truthful play.
    pub fn base_utility(&self) -> Vec<f64> {
        self.w.iter().zip(&self.s).map(|(w, s)| w - s).collect()
    }
}

/// Expected allocation and payment of one buyer at a fixed own bid, over the
/// others' bids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interim {
    pub bid: f64,
    pub alloc: f64,
    pub pay: f64,
}

/// Number of joint profiles of a list of discrete buyers (saturating).
pub fn profile_count(buyers: &[Distribution]) -> Result<u128> {
    let mut total: u128 = 1;
    for b in buyers {
        total = total.saturating_mul(b.atoms()?.len() as u128);
    }
    Ok(total)
}

/// Exact expectations with a cap on enumerated profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactEngine {
    cap: u64,
}

impl Default for ExactEngine {
    fn default() -> Self {
        ExactEngine { cap: DEFAULT_CAP }
    }
}

impl ExactEngine {
    pub fn new(cap: u64) -> Result<Self> {
        if cap == 0 {
            return Err(Error::Parameter("profile cap must be >= 1".into()));
        }
        Ok(ExactEngine { cap })
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    fn fits(&self, profiles: u128) -> bool {
        profiles <= self.cap as u128
    }

    /// Stats for `model`; see [`ExactEngine::stats_for`].
    pub fn stats(&self, instance: &Instance, model: Model) -> Result<PerBuyerStats> {
        self.stats_for(&model.base(instance)?, instance.buyers())
    }

    /// Stats of `base` on independent buyers. Enumerates within the cap;
    /// beyond it, second-price stats fall back to order statistics.
    pub fn stats_for(&self, base: &BaseMechanism, buyers: &[Distribution]) -> Result<PerBuyerStats> {
        base.check_market(buyers.len())?;
        let profiles = profile_count(buyers)?;
        if self.fits(profiles) {
            return Ok(enumerate::stats(base, buyers));
        }
        match base {
            BaseMechanism::Spa => order_stats::stats(buyers),
            BaseMechanism::Vcg { .. } => Err(Error::Capacity {
                profiles,
                cap: self.cap,
            }),
        }
    }

    /// Interim allocation and payment of buyer `i` at each of `bids`, the
    /// others bidding truthfully from `buyers`.
    pub fn interim(
        &self,
        base: &BaseMechanism,
        buyers: &[Distribution],
        i: usize,
        bids: &[f64],
    ) -> Result<Vec<Interim>> {
        base.check_market(buyers.len())?;
        if i >= buyers.len() {
            return Err(Error::Parameter(format!(
                "buyer index {i} out of range for {} buyers",
                buyers.len()
            )));
        }
        let mut profiles: u128 = bids.len().max(1) as u128;
        for (j, b) in buyers.iter().enumerate() {
            if j != i {
                profiles = profiles.saturating_mul(b.atoms()?.len() as u128);
            }
        }
        if self.fits(profiles) {
            return Ok(enumerate::interim(base, buyers, i, bids));
        }
        match base {
            BaseMechanism::Spa => order_stats::interim(buyers, i, bids),
            BaseMechanism::Vcg { .. } => Err(Error::Capacity {
                profiles,
                cap: self.cap,
            }),
        }
    }

    /// Ex-ante utility of buyer `i` with true law `true_f` who reports
    /// `reported[i]`, under the identity quantile arrangement.
    pub fn exante_utility(
        &self,
        base: &BaseMechanism,
        i: usize,
        reported: &[Distribution],
        true_f: &Distribution,
    ) -> Result<f64> {
        let cells = quantile_coupling(true_f, &reported.get(i).cloned().ok_or_else(|| {
            Error::Parameter(format!("buyer index {i} out of range"))
        })?)?;
        self.coupled_utility(base, i, reported, &cells)
    }

    /// Expected `true_value·x − p` over explicit coupling cells.
    pub fn coupled_utility(
        &self,
        base: &BaseMechanism,
        i: usize,
        reported: &[Distribution],
        cells: &[CouplingCell],
    ) -> Result<f64> {
        let mut bids: Vec<f64> = cells.iter().map(|c| c.bid_value).collect();
        bids.sort_by(|a, b| a.total_cmp(b));
        bids.dedup();
        let table = self.interim(base, reported, i, &bids)?;
        let lookup = |b: f64| {
            let k = bids.partition_point(|&x| x < b);
            table[k]
        };
        Ok(cells
            .iter()
            .map(|c| {
                let t = lookup(c.bid_value);
                c.measure * (c.true_value * t.alloc - t.pay)
            })
            .sum())
    }
}

/// Exact stats by full joint-support enumeration; errors beyond `cap`.
pub fn stats_exact(instance: &Instance, model: Model, cap: u64) -> Result<PerBuyerStats> {
    let base = model.base(instance)?;
    let profiles = profile_count(instance.buyers())?;
    if profiles > cap as u128 {
        return Err(Error::Capacity { profiles, cap });
    }
    Ok(enumerate::stats(&base, instance.buyers()))
}

/// Second-price stats from order statistics; no cap applies.
pub fn stats_order_statistics(buyers: &[Distribution]) -> Result<PerBuyerStats> {
    BaseMechanism::Spa.check_market(buyers.len())?;
    order_stats::stats(buyers)
}

/// Ex-ante utility by enumeration, see [`ExactEngine::exante_utility`].
pub fn exante_utility_exact(
    base: &BaseMechanism,
    i: usize,
    reported: &[Distribution],
    true_f: &Distribution,
    cap: u64,
) -> Result<f64> {
    ExactEngine::new(cap)?.exante_utility(base, i, reported, true_f)
}
