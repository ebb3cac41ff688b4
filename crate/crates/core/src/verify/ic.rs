use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Instance};
use crate::engine::ExactEngine;
use crate::error::{Error, Result};
use crate::mech::MechanismConfig;

/// True profile (as class indices), deviating buyer and its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcWitness {
    pub profile: Vec<usize>,
    pub buyer: usize,
    pub deviation: usize,
    pub truthful: f64,
    pub deviating: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcAudit {
    pub max_regret: f64,
    pub witness: Option<IcWitness>,
    /// Number of (profile, buyer, deviation) triples examined.
    pub checked: usize,
}

/// Largest gain from a unilateral misreport within `class`, over all true
/// profiles in `classⁿ` on the market `(m, demands)`, with `n` the number
/// of demand caps.
pub fn ic_audit(
    engine: &ExactEngine,
    mech: &MechanismConfig,
    class: &[Distribution],
    m: f64,
    demands: &[f64],
) -> Result<IcAudit> {
    let n = demands.len();
    if class.is_empty() {
        return Err(Error::Parameter("deviation class is empty".into()));
    }
    let size = class.len();
    let count = size
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Parameter("too many true profiles".into()))?;

    let digits = |mut index: usize| {
        let mut out = vec![0; n];
        for slot in out.iter_mut().rev() {
            *slot = index % size;
            index /= size;
        }
        out
    };
    let build = |idx: &[usize]| {
        Instance::new(idx.iter().map(|&k| class[k].clone()).collect(), m, demands.to_vec())
    };

    let per_profile: Vec<Vec<IcWitness>> = (0..count)
        .into_par_iter()
        .map(|index| {
            let profile = digits(index);
            let truth = build(&profile)?;
            let mut rows = Vec::new();
            for i in 0..n {
                let own = &class[profile[i]];
                let truthful = mech.utility(engine, &truth, i, own)?;
                for dev in (0..size).filter(|&d| d != profile[i]) {
                    let mut reported = profile.clone();
                    reported[i] = dev;
                    let deviating = mech.utility(engine, &build(&reported)?, i, own)?;
                    rows.push(IcWitness {
                        profile: profile.clone(),
                        buyer: i,
                        deviation: dev,
                        truthful,
                        deviating,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let mut audit = IcAudit {
        max_regret: 0.0,
        witness: None,
        checked: 0,
    };
    for row in per_profile.into_iter().flatten() {
        audit.checked += 1;
        let regret = row.deviating - row.truthful;
        if audit.witness.is_none() || regret > audit.max_regret {
            audit.max_regret = regret;
            audit.witness = Some(row);
        }
    }
    if audit.witness.is_none() {
        audit.max_regret = 0.0;
    }
    Ok(audit)
}
