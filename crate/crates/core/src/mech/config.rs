use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dist::{Distribution, Instance};
use crate::engine::{CouplingCell, ExactEngine, PerBuyerStats};
use crate::error::{Error, Result};
use crate::GATE_TOL;

use super::{alpha_support, BaseMechanism};

/// Base mechanism named in a config; the market comes from the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    Spa,
    Vcg,
}

impl BaseKind {
    pub fn mechanism(self, instance: &Instance) -> Result<BaseMechanism> {
        match self {
            BaseKind::Spa if instance.is_single_item() => Ok(BaseMechanism::Spa),
            BaseKind::Spa => Err(Error::Parameter(
                "second-price base needs a single-item instance".into(),
            )),
            BaseKind::Vcg => Ok(BaseMechanism::vcg_for(instance)),
        }
    }
}

/// A distribution-reporting mechanism, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mech", rename_all = "snake_case", deny_unknown_fields)]
pub enum MechanismConfig {
    /// Fixed entry fees on top of a base mechanism; `"inf"` excludes a buyer.
    Tam {
        base: BaseKind,
        #[serde(
            serialize_with = "ser_thresholds",
            deserialize_with = "de_thresholds"
        )]
        thresholds: Vec<f64>,
    },
    PeerMax {
        k: u32,
    },
    PeerWelfare {
        k: u32,
    },
    IidTam,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawThreshold {
    Num(f64),
    Text(String),
}

fn ser_thresholds<S: Serializer>(t: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(t.iter().map(|&x| {
        if x == f64::INFINITY {
            RawThreshold::Text("inf".into())
        } else {
            RawThreshold::Num(x)
        }
    }))
}

fn de_thresholds<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    let raw = Vec::<RawThreshold>::deserialize(d)?;
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| match r {
            RawThreshold::Num(x) if x >= 0.0 && !x.is_nan() => Ok(x),
            RawThreshold::Text(s) if matches!(s.as_str(), "inf" | "+inf" | "infinity") => {
                Ok(f64::INFINITY)
            }
            _ => Err(serde::de::Error::custom(format!(
                "thresholds[{i}]: expected a nonnegative number or \"inf\""
            ))),
        })
        .collect()
}

/// One threshold-augmented mechanism inside a lottery.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub weight: f64,
    pub thresholds: Vec<f64>,
}

/// A mechanism instantiated on a reported profile: a lottery over TAMs that
/// share one base mechanism, with that base's stats under the reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lottery {
    pub base: BaseMechanism,
    pub stats: PerBuyerStats,
    pub components: Vec<Component>,
}

impl Lottery {
    pub fn n(&self) -> usize {
        self.stats.n()
    }

    /// Whether buyer `i` clears its threshold in component `c`.
    pub fn participates(&self, c: &Component, i: usize) -> bool {
        self.stats.w[i] - self.stats.s[i] >= c.thresholds[i] - GATE_TOL
    }

    /// Probability that buyer `i` takes part, over the lottery.
    pub fn participation(&self, i: usize) -> f64 {
        self.components
            .iter()
            .filter(|c| self.participates(c, i))
            .map(|c| c.weight)
            .sum()
    }

    /// Expected ex-ante payment of each buyer.
    pub fn payments(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                self.components
                    .iter()
                    .filter(|c| self.participates(c, i))
                    .map(|c| c.weight * (self.stats.s[i] + c.thresholds[i]))
                    .sum()
            })
            .collect()
    }

    pub fn revenue(&self) -> f64 {
        self.payments().iter().sum()
    }

    /// Ex-ante utility of buyer `i` given its base-mechanism utility under
    /// the actual coupling of true values and bids.
    pub fn utility(&self, i: usize, base_utility: f64) -> f64 {
        self.components
            .iter()
            .filter(|c| self.participates(c, i))
            .map(|c| c.weight * (base_utility - c.thresholds[i]))
            .sum()
    }
}

impl MechanismConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MechanismConfig::Tam { .. } => "tam",
            MechanismConfig::PeerMax { .. } => "peer_max",
            MechanismConfig::PeerWelfare { .. } => "peer_welfare",
            MechanismConfig::IidTam => "iid_tam",
        }
    }

    pub fn base(&self, instance: &Instance) -> Result<BaseMechanism> {
        match self {
            MechanismConfig::Tam { base, .. } => base.mechanism(instance),
            MechanismConfig::PeerMax { .. } | MechanismConfig::IidTam => {
                BaseKind::Spa.mechanism(instance)
            }
            MechanismConfig::PeerWelfare { .. } => BaseKind::Vcg.mechanism(instance),
        }
    }

    /// Instantiate on the reported profile. Every threshold of buyer `i`
    /// depends on the other buyers' reports only.
    pub fn lottery(&self, engine: &ExactEngine, reported: &Instance) -> Result<Lottery> {
        let base = self.base(reported)?;
        let stats = engine.stats_for(&base, reported.buyers())?;
        let n = reported.n();
        let components = match self {
            MechanismConfig::Tam { thresholds, .. } => {
                if thresholds.len() != n {
                    return Err(Error::Parameter(format!(
                        "{} thresholds for {n} buyers",
                        thresholds.len()
                    )));
                }
                vec![Component {
                    weight: 1.0,
                    thresholds: thresholds.clone(),
                }]
            }
            MechanismConfig::PeerMax { k } | MechanismConfig::PeerWelfare { k } => {
                alpha_support(*k, n)?
                    .weights()
                    .into_iter()
                    .map(|(alpha, weight)| Component {
                        weight,
                        thresholds: stats.r.iter().map(|r| alpha * r).collect(),
                    })
                    .collect()
            }
            MechanismConfig::IidTam => {
                let thresholds = iid_thresholds(engine, &base, reported.buyers(), &stats)?;
                vec![Component {
                    weight: 1.0,
                    thresholds,
                }]
            }
        };
        Ok(Lottery {
            base,
            stats,
            components,
        })
    }

    pub fn revenue(&self, engine: &ExactEngine, reported: &Instance) -> Result<f64> {
        Ok(self.lottery(engine, reported)?.revenue())
    }

    /// Ex-ante utility of buyer `i` with true law `true_f` when the reports
    /// are `reported`, under the identity arrangement.
    pub fn utility(
        &self,
        engine: &ExactEngine,
        reported: &Instance,
        i: usize,
        true_f: &Distribution,
    ) -> Result<f64> {
        let lottery = self.lottery(engine, reported)?;
        if lottery.participation(i) == 0.0 {
            return Ok(0.0);
        }
        let u = engine.exante_utility(&lottery.base, i, reported.buyers(), true_f)?;
        Ok(lottery.utility(i, u))
    }

    /// Like [`MechanismConfig::utility`] with explicit coupling cells.
    pub fn coupled_utility(
        &self,
        engine: &ExactEngine,
        reported: &Instance,
        i: usize,
        cells: &[CouplingCell],
    ) -> Result<f64> {
        let lottery = self.lottery(engine, reported)?;
        let u = engine.coupled_utility(&lottery.base, i, reported.buyers(), cells)?;
        Ok(lottery.utility(i, u))
    }
}

/// `τ_i`: buyer `i`'s truthful base utility if its own report were replaced
/// by that of the lowest-indexed other buyer.
fn iid_thresholds(
    engine: &ExactEngine,
    base: &BaseMechanism,
    buyers: &[Distribution],
    stats: &PerBuyerStats,
) -> Result<Vec<f64>> {
    (0..buyers.len())
        .map(|i| {
            let peer = if i == 0 { 1 } else { 0 };
            if buyers[peer] == buyers[i] {
                return Ok(stats.w[i] - stats.s[i]);
            }
            let mut swapped = buyers.to_vec();
            swapped[i] = buyers[peer].clone();
            let st = engine.stats_for(base, &swapped)?;
            Ok(st.w[i] - st.s[i])
        })
        .collect()
}

/// Revenue of the i.i.d. full-extraction mechanism on a single-item
/// instance.
pub fn iid_tam_revenue(engine: &ExactEngine, instance: &Instance) -> Result<f64> {
    MechanismConfig::IidTam.revenue(engine, instance)
}
