//! Bid-reporting mechanism induced by a distribution mechanism on a scaled
//! family `{a·v̂ : a in factors}`.
//!
//! A buyer whose law is `a·v̂` and who reports factor `a'` gets expected
//! utility `a·x̃(a', a₋) − p̃(a', a₋)`, where `x̃_i` is the expected
//! allocation weighted by the base value `v̂(q_i)` and `p̃_i` is the ex-ante
//! payment on the scaled reports.

use serde::{Deserialize, Serialize};

use crate::dist::{Atom, Distribution, Instance};
use crate::engine::{for_each_profile, ExactEngine};
use crate::error::{Error, Result};

use super::MechanismConfig;

const TABLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedProfile {
    pub factors: Vec<f64>,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

/// `a_i x̃_i(a) − p̃_i(a)` against the same with `a_i` replaced by `report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcRow {
    pub profile: usize,
    pub buyer: usize,
    pub report: f64,
    pub truthful: f64,
    pub deviating: f64,
    pub ok: bool,
}

/// `x̃_i ≤ E[v̂]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityRow {
    pub profile: usize,
    pub buyer: usize,
    pub x: f64,
    pub limit: f64,
    pub ok: bool,
}

/// `a_i x̃_i(a) − p̃_i(a) ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrRow {
    pub profile: usize,
    pub buyer: usize,
    pub utility: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedTable {
    pub factors: Vec<f64>,
    pub n: usize,
    pub base_mean: f64,
    /// Factor profiles in lexicographic order of factor indices.
    pub profiles: Vec<InducedProfile>,
    pub ic: Vec<IcRow>,
    pub feasibility: Vec<FeasibilityRow>,
    pub ir: Vec<IrRow>,
}

impl InducedTable {
    pub fn violations(&self) -> usize {
        self.ic.iter().filter(|r| !r.ok).count()
            + self.feasibility.iter().filter(|r| !r.ok).count()
            + self.ir.iter().filter(|r| !r.ok).count()
    }
}

/// Lexicographic index of a factor-index profile.
fn profile_index(idx: &[usize], radix: usize) -> usize {
    idx.iter().fold(0, |acc, &k| acc * radix + k)
}

fn profile_digits(mut index: usize, radix: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % radix;
        index /= radix;
    }
    out
}

/// Tabulate `x̃`, `p̃` and the IC, feasibility and IR conditions over all
/// factor profiles of `n` single-item buyers.
pub fn induce_bid_mechanism(
    engine: &ExactEngine,
    mech: &MechanismConfig,
    base: &Distribution,
    factors: &[f64],
    n: usize,
) -> Result<InducedTable> {
    if factors.is_empty() {
        return Err(Error::Parameter("factor grid is empty".into()));
    }
    if let Some(a) = factors.iter().find(|a| !a.is_finite() || **a < 0.0) {
        return Err(Error::Domain(format!(
            "factors must be finite and nonnegative, got {a}"
        )));
    }
    let atoms = base.atoms()?;
    let joint = (atoms.len() as u128).saturating_pow(n as u32);
    if joint > engine.cap() as u128 {
        return Err(Error::Capacity {
            profiles: joint,
            cap: engine.cap(),
        });
    }
    let scaled = factors
        .iter()
        .map(|&a| base.scale(a))
        .collect::<Result<Vec<_>>>()?;
    let radix = factors.len();
    let count = radix
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Parameter("too many factor profiles".into()))?;

    let mut profiles = Vec::with_capacity(count);
    for index in 0..count {
        let digits = profile_digits(index, radix, n);
        let a: Vec<f64> = digits.iter().map(|&k| factors[k]).collect();
        let reported =
            Instance::single_item(digits.iter().map(|&k| scaled[k].clone()).collect())?;
        let lottery = mech.lottery(engine, &reported)?;

        // E[v̂(q_i)·x_i] over the base quantiles, bids a_j·v̂(q_j).
        let supports: Vec<&[Atom]> = vec![atoms.as_ref(); n];
        let mut weighted = vec![0.0; n];
        let mut bids = vec![0.0; n];
        for_each_profile(&supports, |prob, values| {
            for j in 0..n {
                bids[j] = a[j] * values[j];
            }
            let o = lottery.base.outcome(&bids);
            for j in 0..n {
                weighted[j] += prob * values[j] * o.alloc[j];
            }
        });
        let x = (0..n).map(|i| lottery.participation(i) * weighted[i]).collect();
        profiles.push(InducedProfile {
            factors: a,
            x,
            p: lottery.payments(),
        });
    }

    let base_mean = base.mean();
    let (mut ic, mut feasibility, mut ir) = (Vec::new(), Vec::new(), Vec::new());
    for (index, prof) in profiles.iter().enumerate() {
        let digits = profile_digits(index, radix, n);
        for i in 0..n {
            let a_i = prof.factors[i];
            let truthful = a_i * prof.x[i] - prof.p[i];
            for (k, &report) in factors.iter().enumerate() {
                let mut dev = digits.clone();
                dev[i] = k;
                let other = &profiles[profile_index(&dev, radix)];
                let deviating = a_i * other.x[i] - other.p[i];
                ic.push(IcRow {
                    profile: index,
                    buyer: i,
                    report,
                    truthful,
                    deviating,
                    ok: deviating - truthful <= TABLE_TOL,
                });
            }
            feasibility.push(FeasibilityRow {
                profile: index,
                buyer: i,
                x: prof.x[i],
                limit: base_mean,
                ok: prof.x[i] <= base_mean + TABLE_TOL,
            });
            ir.push(IrRow {
                profile: index,
                buyer: i,
                utility: truthful,
                ok: truthful >= -TABLE_TOL,
            });
        }
    }
    Ok(InducedTable {
        factors: factors.to_vec(),
        n,
        base_mean,
        profiles,
        ic,
        feasibility,
        ir,
    })
}
