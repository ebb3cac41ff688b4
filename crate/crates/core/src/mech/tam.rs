use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Instance};
use crate::engine::ExactEngine;
use crate::error::{Error, Result};

use super::config::{Component, Lottery};
use super::BaseMechanism;

/// Outcome of a threshold-augmented mechanism on a reported profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TamReport {
    /// Base-mechanism utility of each buyer when the reports are taken as
    /// the true laws.
    pub u_base: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub participates: Vec<bool>,
    /// Ex-ante payments; zero for excluded buyers.
    pub p: Vec<f64>,
    pub revenue: f64,
    /// Ex-ante utility of each buyer under its true law, when supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_utility: Option<Vec<f64>>,
}

pub fn tam_evaluate(
    engine: &ExactEngine,
    base: &BaseMechanism,
    thresholds: &[f64],
    reported: &Instance,
    true_profile: Option<&[Distribution]>,
) -> Result<TamReport> {
    let n = reported.n();
    if thresholds.len() != n {
        return Err(Error::Parameter(format!(
            "{} thresholds for {n} buyers",
            thresholds.len()
        )));
    }
    if let Some(t) = true_profile {
        if t.len() != n {
            return Err(Error::Parameter(format!(
                "true profile has {} buyers, reports have {n}",
                t.len()
            )));
        }
    }
    let lottery = Lottery {
        base: base.clone(),
        stats: engine.stats_for(base, reported.buyers())?,
        components: vec![Component {
            weight: 1.0,
            thresholds: thresholds.to_vec(),
        }],
    };
    let comp = &lottery.components[0];
    let participates: Vec<bool> = (0..n).map(|i| lottery.participates(comp, i)).collect();
    let p = lottery.payments();
    let true_utility = true_profile
        .map(|t| {
            (0..n)
                .map(|i| {
                    if !participates[i] {
                        return Ok(0.0);
                    }
                    let u = engine.exante_utility(base, i, reported.buyers(), &t[i])?;
                    Ok(lottery.utility(i, u))
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Ok(TamReport {
        u_base: lottery.stats.base_utility(),
        thresholds: thresholds.to_vec(),
        participates,
        revenue: p.iter().sum(),
        p,
        true_utility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(v: f64) -> Distribution {
        Distribution::degenerate(v).unwrap()
    }

    #[test]
    fn zero_thresholds_reduce_to_spa() {
        let inst = Instance::single_item(vec![
            Distribution::discrete([(3.0, 0.5), (1.0, 0.5)]).unwrap(),
            deg(2.0),
        ])
        .unwrap();
        let rep = tam_evaluate(
            &ExactEngine::default(),
            &BaseMechanism::Spa,
            &[0.0, 0.0],
            &inst,
            Some(inst.buyers()),
        )
        .unwrap();
        assert_eq!(rep.participates, vec![true, true]);
        assert_eq!(rep.p, vec![1.0, 0.5]);
        assert_eq!(rep.revenue, 1.5);
        assert_eq!(rep.true_utility, Some(vec![0.5, 0.5]));
    }

    #[test]
    fn exclusion_deters_underreporting() {
        let e = ExactEngine::default();
        let truth = [deg(2.0), deg(1.0)];
        let inst = Instance::single_item(truth.to_vec()).unwrap();
        let rep = tam_evaluate(&e, &BaseMechanism::Spa, &[0.5, 0.5], &inst, Some(&truth)).unwrap();
        assert_eq!(rep.u_base, vec![1.0, 0.0]);
        assert_eq!(rep.participates, vec![true, false]);
        assert_eq!(rep.p, vec![1.5, 0.0]);
        assert_eq!(rep.revenue, 1.5);
        let truthful = rep.true_utility.unwrap()[0];
        assert_eq!(truthful, 0.5);

        let lie = Instance::single_item(vec![deg(1.0), deg(1.0)]).unwrap();
        let rep = tam_evaluate(&e, &BaseMechanism::Spa, &[0.5, 0.5], &lie, Some(&truth)).unwrap();
        assert_eq!(rep.u_base[0], 0.0);
        assert!(!rep.participates[0]);
        assert!(rep.true_utility.unwrap()[0] < truthful);
    }

    #[test]
    fn infinite_thresholds_exclude_everyone() {
        let inst = Instance::single_item(vec![deg(2.0), deg(1.0)]).unwrap();
        let rep = tam_evaluate(
            &ExactEngine::default(),
            &BaseMechanism::Spa,
            &[f64::INFINITY; 2],
            &inst,
            None,
        )
        .unwrap();
        assert_eq!(rep.participates, vec![false, false]);
        assert_eq!(rep.revenue, 0.0);
    }
}
