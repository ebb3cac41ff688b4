use serde::{Deserialize, Serialize};

use crate::dist::Instance;
use crate::error::{Error, Result};

/// Allocation and payment of a bid-reporting mechanism on one bid profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidOutcome {
    pub alloc: Vec<f64>,
    pub pay: Vec<f64>,
}

/// Outcome plus, for each buyer `i`, the optimal welfare of the others when
/// `i` is removed from the market.
#[derive(Debug, Clone, PartialEq)]
pub struct Settlement {
    pub outcome: BidOutcome,
    pub others_opt: Vec<f64>,
}

/// Index of the first maximal bid; lower index wins ties.
fn argmax(bids: &[f64]) -> usize {
    let mut best = 0;
    for (i, &b) in bids.iter().enumerate().skip(1) {
        if b > bids[best] {
            best = i;
        }
    }
    best
}

/// Second-price auction for one item.
pub fn spa_outcome(bids: &[f64]) -> Result<BidOutcome> {
    if bids.len() < 2 {
        return Err(Error::Parameter(format!(
            "second-price auction needs at least 2 bids, got {}",
            bids.len()
        )));
    }
    Ok(spa_settle(bids).outcome)
}

fn spa_settle(bids: &[f64]) -> Settlement {
    let n = bids.len();
    let winner = argmax(bids);
    // Largest and second largest, for "max of the others" in O(n).
    let top = bids[winner];
    let second = bids
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != winner)
        .map(|(_, &b)| b)
        .fold(0.0, f64::max);
    let mut alloc = vec![0.0; n];
    let mut pay = vec![0.0; n];
    alloc[winner] = 1.0;
    pay[winner] = second;
    let others_opt = (0..n)
        .map(|i| if i == winner { second } else { top })
        .collect();
    Settlement {
        outcome: BidOutcome { alloc, pay },
        others_opt,
    }
}

/// Greedy fill in descending bid order, lower index first on ties.
/// Returns the allocation and its welfare; `skip` removes one buyer.
fn greedy(bids: &[f64], m: f64, d: &[f64], skip: Option<usize>) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..bids.len()).filter(|&j| Some(j) != skip).collect();
    order.sort_by(|&a, &b| bids[b].total_cmp(&bids[a]));
    let mut alloc = vec![0.0; bids.len()];
    let mut left = m;
    let mut welfare = 0.0;
    for j in order {
        if left <= 0.0 {
            break;
        }
        let x = d[j].min(left);
        alloc[j] = x;
        welfare += x * bids[j];
        left -= x;
    }
    (alloc, welfare)
}

fn vcg_settle(bids: &[f64], m: f64, d: &[f64]) -> Settlement {
    let n = bids.len();
    let (alloc, _) = greedy(bids, m, d, None);
    let others_opt: Vec<f64> = (0..n).map(|i| greedy(bids, m, d, Some(i)).1).collect();
    let pay = (0..n)
        .map(|i| {
            let others_now: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| alloc[j] * bids[j])
                .sum();
            (others_opt[i] - others_now).max(0.0)
        })
        .collect();
    Settlement {
        outcome: BidOutcome { alloc, pay },
        others_opt,
    }
}

/// Multi-unit VCG with supply `m` and demand caps `d`.
pub fn vcg_outcome(bids: &[f64], m: f64, d: &[f64]) -> Result<BidOutcome> {
    if d.len() != bids.len() {
        return Err(Error::Parameter(format!(
            "{} bids but {} demand caps",
            bids.len(),
            d.len()
        )));
    }
    if m.is_nan() || m <= 0.0 || d.iter().any(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::Parameter(
            "supply and demand caps must be positive".into(),
        ));
    }
    Ok(vcg_settle(bids, m, d).outcome)
}

/// A truthful bid-reporting base mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseMechanism {
    Spa,
    Vcg { m: f64, demands: Vec<f64> },
}

impl BaseMechanism {
    /// VCG on the market of `instance`.
    pub fn vcg_for(instance: &Instance) -> Self {
        BaseMechanism::Vcg {
            m: instance.m(),
            demands: instance.demands().to_vec(),
        }
    }

    pub fn outcome(&self, bids: &[f64]) -> BidOutcome {
        self.settle(bids).outcome
    }

    pub fn settle(&self, bids: &[f64]) -> Settlement {
        match self {
            BaseMechanism::Spa => spa_settle(bids),
            BaseMechanism::Vcg { m, demands } => vcg_settle(bids, *m, demands),
        }
    }

    /// Optimal welfare of everyone except `i`.
    pub fn others_optimal_welfare(&self, bids: &[f64], i: usize) -> f64 {
        match self {
            BaseMechanism::Spa => bids
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &b)| b)
                .fold(0.0, f64::max),
            BaseMechanism::Vcg { m, demands } => greedy(bids, *m, demands, Some(i)).1,
        }
    }

    /// Check that the mechanism fits a market with `n` buyers.
    pub(crate) fn check_market(&self, n: usize) -> Result<()> {
        match self {
            BaseMechanism::Spa if n >= 2 => Ok(()),
            BaseMechanism::Spa => Err(Error::Parameter(format!(
                "second-price auction needs at least 2 buyers, got {n}"
            ))),
            BaseMechanism::Vcg { demands, .. } if demands.len() == n => Ok(()),
            BaseMechanism::Vcg { demands, .. } => Err(Error::Parameter(format!(
                "VCG has {} demand caps for {n} buyers",
                demands.len()
            ))),
        }
    }
}
