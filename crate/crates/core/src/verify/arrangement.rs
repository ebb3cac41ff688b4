use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Instance};
use crate::engine::ExactEngine;
use crate::error::{Error, Result};
use crate::mech::MechanismConfig;

const GRID_TOL: f64 = 1e-9;
const MAX_CELLS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrangementAudit {
    pub cells: usize,
    pub identity: f64,
    pub best: f64,
    /// Bid cell assigned to each true-value cell by the best arrangement.
    pub best_arrangement: Vec<usize>,
    /// Identity attains the maximum (ties allowed).
    pub holds: bool,
}

fn check_grid(d: &Distribution, cells: usize, what: &str) -> Result<()> {
    for b in d.quantile_breakpoints()? {
        let scaled = b * cells as f64;
        if (scaled - scaled.round()).abs() > GRID_TOL {
            return Err(Error::Parameter(format!(
                "{what} has a quantile breakpoint at {b}, off the grid of {cells} equal cells"
            )));
        }
    }
    Ok(())
}

/// Buyer `i` has true law `instance.buyers()[i]` and reports `reported_i`;
/// the others report their laws in `instance`. Compares the identity
/// quantile arrangement against every permutation of `cells` equal cells.
pub fn arrangement_audit(
    engine: &ExactEngine,
    mech: &MechanismConfig,
    instance: &Instance,
    i: usize,
    reported_i: &Distribution,
    cells: usize,
) -> Result<ArrangementAudit> {
    if cells == 0 || cells > MAX_CELLS {
        return Err(Error::Parameter(format!(
            "cells must lie in 1..={MAX_CELLS}, got {cells}"
        )));
    }
    let true_f = instance
        .buyers()
        .get(i)
        .ok_or_else(|| Error::Parameter(format!("buyer index {i} out of range")))?;
    check_grid(true_f, cells, "true law")?;
    check_grid(reported_i, cells, "report")?;

    let mut buyers = instance.buyers().to_vec();
    buyers[i] = reported_i.clone();
    let reported = instance.with_buyers(buyers)?;
    let lottery = mech.lottery(engine, &reported)?;

    let mid = |k: usize| (k as f64 + 0.5) / cells as f64;
    let true_values: Vec<f64> = (0..cells).map(|k| true_f.quantile(mid(k))).collect();
    let bid_values: Vec<f64> = (0..cells).map(|k| reported_i.quantile(mid(k))).collect();
    let table = engine.interim(&lottery.base, reported.buyers(), i, &bid_values)?;

    let measure = 1.0 / cells as f64;
    let utility = |perm: &[usize]| {
        let base: f64 = perm
            .iter()
            .enumerate()
            .map(|(k, &b)| measure * (true_values[k] * table[b].alloc - table[b].pay))
            .sum();
        lottery.utility(i, base)
    };

    let identity_perm: Vec<usize> = (0..cells).collect();
    let identity = utility(&identity_perm);
    let mut best = identity;
    let mut best_arrangement = identity_perm;
    for perm in (0..cells).permutations(cells) {
        let u = utility(&perm);
        if u > best {
            best = u;
            best_arrangement = perm;
        }
    }
    Ok(ArrangementAudit {
        cells,
        identity,
        best,
        best_arrangement,
        holds: identity >= best - GRID_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mech::BaseKind;

    fn spa() -> MechanismConfig {
        MechanismConfig::Tam {
            base: BaseKind::Spa,
            thresholds: vec![0.0, 0.0],
        }
    }

    #[test]
    fn two_cell_example() {
        let inst = Instance::single_item(vec![
            Distribution::discrete([(3.0, 0.5), (1.0, 0.5)]).unwrap(),
            Distribution::degenerate(2.0).unwrap(),
        ])
        .unwrap();
        let report = Distribution::discrete([(4.0, 0.5), (0.0, 0.5)]).unwrap();
        let a = arrangement_audit(&ExactEngine::default(), &spa(), &inst, 0, &report, 2).unwrap();
        assert_eq!(a.identity, 0.5);
        assert_eq!(a.best, 0.5);
        assert!(a.holds);
    }

    #[test]
    fn single_cell_and_truthful() {
        let inst = Instance::single_item(vec![
            Distribution::degenerate(1.0).unwrap(),
            Distribution::degenerate(2.0).unwrap(),
        ])
        .unwrap();
        let e = ExactEngine::default();
        let a = arrangement_audit(&e, &spa(), &inst, 0, &inst.buyers()[0], 1).unwrap();
        assert!(a.holds);
        let f = Distribution::discrete([(3.0, 0.5), (1.0, 0.25), (0.0, 0.25)]).unwrap();
        let inst = inst.with_buyers(vec![f.clone(), inst.buyers()[1].clone()]).unwrap();
        let a = arrangement_audit(&e, &spa(), &inst, 0, &f, 4).unwrap();
        assert!(a.holds);
    }

    #[test]
    fn off_grid_is_rejected() {
        let f = Distribution::discrete([(3.0, 0.3), (1.0, 0.7)]).unwrap();
        let inst =
            Instance::single_item(vec![f.clone(), Distribution::degenerate(2.0).unwrap()]).unwrap();
        let e = ExactEngine::default();
        assert!(matches!(
            arrangement_audit(&e, &spa(), &inst, 0, &f, 2),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            arrangement_audit(&e, &spa(), &inst, 0, &f, 7),
            Err(Error::Parameter(_))
        ));
    }
}
