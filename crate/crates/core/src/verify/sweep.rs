use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{random_discrete_instance, random_multi_unit_instance};
use crate::engine::{ExactEngine, Model};
use crate::error::{Error, Result};
use crate::mech::peer_revenue_from_stats;
use crate::rng::substream;

use super::GuaranteeReport;

/// Random-instance sweep. Instance `id` is generated from sub-stream `id`
/// of `seed`, so reports do not depend on scheduling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub count: u64,
    pub n_min: usize,
    pub n_max: usize,
    /// Atoms per buyer, drawn per instance.
    pub atoms_min: usize,
    pub atoms_max: usize,
    /// Candidate values of `K`, one drawn per instance.
    pub ks: Vec<u32>,
    pub seed: u64,
    pub model: Model,
    pub vmax: f64,
    /// Supply and demand ranges for the VCG model.
    pub m_max: u32,
    pub d_max: u32,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            count: 1000,
            n_min: 2,
            n_max: 5,
            atoms_min: 1,
            atoms_max: 3,
            ks: vec![1],
            seed: 7,
            model: Model::SingleItemSpa,
            vmax: 10.0,
            m_max: 3,
            d_max: 2,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.n_min < 2 || self.n_min > self.n_max {
            return Err(Error::Parameter(format!(
                "need 2 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.atoms_min < 1 || self.atoms_min > self.atoms_max {
            return Err(Error::Parameter(format!(
                "need 1 <= atoms_min <= atoms_max, got {}..{}",
                self.atoms_min, self.atoms_max
            )));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::Parameter("K values must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub count: u64,
    pub violations: u64,
    /// Smallest `revenue − bound`; absent for an empty sweep.
    pub min_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub reports: Vec<GuaranteeReport>,
    pub summary: SweepSummary,
}

pub fn sweep(engine: &ExactEngine, config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let reports: Vec<GuaranteeReport> = (0..config.count)
        .into_par_iter()
        .map(|id| {
            let mut rng = substream(config.seed, id);
            let n = rng.gen_range(config.n_min..=config.n_max);
            let atoms = rng.gen_range(config.atoms_min..=config.atoms_max);
            let k = config.ks[rng.gen_range(0..config.ks.len())];
            let instance = match config.model {
                Model::SingleItemSpa => random_discrete_instance(n, atoms, config.vmax, &mut rng)?,
                Model::MultiUnitVcg => random_multi_unit_instance(
                    n,
                    atoms,
                    config.vmax,
                    config.m_max,
                    config.d_max,
                    &mut rng,
                )?,
            };
            let stats = engine.stats(&instance, config.model)?;
            let peer = peer_revenue_from_stats(&stats, k)?;
            Ok(GuaranteeReport::new(
                id,
                n,
                k,
                stats.wel,
                stats.base_rev,
                peer.revenue,
            ))
        })
        .collect::<Result<_>>()?;
    let summary = SweepSummary {
        count: config.count,
        violations: reports.iter().filter(|r| !r.satisfied).count() as u64,
        min_margin: reports.iter().map(|r| r.margin).reduce(f64::min),
    };
    Ok(SweepReport {
        config: config.clone(),
        reports,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweep() {
        let cfg = SweepConfig {
            count: 0,
            ..SweepConfig::default()
        };
        let r = sweep(&ExactEngine::default(), &cfg).unwrap();
        assert!(r.reports.is_empty());
        assert_eq!(r.summary.violations, 0);
        assert_eq!(r.summary.min_margin, None);
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = SweepConfig {
            count: 50,
            ..SweepConfig::default()
        };
        let e = ExactEngine::default();
        let a = serde_json::to_string(&sweep(&e, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&sweep(&e, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_ranges() {
        let e = ExactEngine::default();
        for cfg in [
            SweepConfig { n_min: 1, ..SweepConfig::default() },
            SweepConfig { atoms_min: 4, atoms_max: 3, ..SweepConfig::default() },
            SweepConfig { ks: vec![], ..SweepConfig::default() },
        ] {
            assert!(matches!(sweep(&e, &cfg), Err(Error::Parameter(_))));
        }
    }
}
