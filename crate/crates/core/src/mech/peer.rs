use serde::{Deserialize, Serialize};

use crate::dist::Instance;
use crate::engine::{ExactEngine, Model, PerBuyerStats};
use crate::error::{Error, Result};
use crate::GATE_TOL;

/// Support of the threshold multiplier `α`: the high atom `2^(K+1)` with
/// probability ½, and the remaining ½ spread uniformly over
/// `{0, 2^-L, …, 1, …, 2^K}` with `L = ⌈log₂(4n)⌉`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub k: u32,
    pub l: u32,
    pub grid: Vec<f64>,
    pub high_atom: f64,
}

impl AlphaGrid {
    /// Probability of each grid point.
    pub fn grid_weight(&self) -> f64 {
        0.5 / self.grid.len() as f64
    }

    /// `(α, probability)` pairs, grid first, high atom last.
    pub fn weights(&self) -> Vec<(f64, f64)> {
        let w = self.grid_weight();
        self.grid
            .iter()
            .map(|&a| (a, w))
            .chain(std::iter::once((self.high_atom, 0.5)))
            .collect()
    }
}

/// `⌈log₂ x⌉` for `x ≥ 1`.
fn ceil_log2(x: usize) -> u32 {
    x.next_power_of_two().trailing_zeros()
}

pub fn alpha_support(k: u32, n: usize) -> Result<AlphaGrid> {
    if k < 1 {
        return Err(Error::Parameter("K must be >= 1".into()));
    }
    if n < 2 {
        return Err(Error::Parameter(format!("need n >= 2, got {n}")));
    }
    if k > 60 {
        return Err(Error::Parameter(format!("K = {k} is too large")));
    }
    let l = ceil_log2(4 * n);
    let mut grid = vec![0.0];
    grid.extend((-(l as i32)..=k as i32).map(|e| (e as f64).exp2()));
    Ok(AlphaGrid {
        k,
        l,
        grid,
        high_atom: ((k + 1) as f64).exp2(),
    })
}

/// `REV(α) = Σ_i 1[w_i ≥ s_i + α r_i] (s_i + α r_i)`, boundary included.
pub fn rev_at_alpha(stats: &PerBuyerStats, alpha: f64) -> f64 {
    (0..stats.n())
        .map(|i| {
            let tau = alpha * stats.r[i];
            if stats.w[i] - stats.s[i] >= tau - GATE_TOL {
                stats.s[i] + tau
            } else {
                0.0
            }
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaRev {
    pub alpha: f64,
    pub rev: f64,
}

/// Expected revenue of a Peer-Max or Peer-Welfare run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeerReport {
    pub k: u32,
    pub l: u32,
    pub revenue: f64,
    /// `REV(α)` over the uniform grid, in increasing `α`.
    pub per_alpha: Vec<AlphaRev>,
    pub high: AlphaRev,
    pub stats: PerBuyerStats,
}

/// Closed-form expectation over the α distribution.
pub fn peer_revenue_from_stats(stats: &PerBuyerStats, k: u32) -> Result<PeerReport> {
    let grid = alpha_support(k, stats.n())?;
    let per_alpha: Vec<AlphaRev> = grid
        .grid
        .iter()
        .map(|&alpha| AlphaRev {
            alpha,
            rev: rev_at_alpha(stats, alpha),
        })
        .collect();
    let high = AlphaRev {
        alpha: grid.high_atom,
        rev: rev_at_alpha(stats, grid.high_atom),
    };
    let uniform: f64 = per_alpha.iter().map(|a| a.rev).sum();
    let revenue = 0.5 * high.rev + grid.grid_weight() * uniform;
    Ok(PeerReport {
        k,
        l: grid.l,
        revenue,
        per_alpha,
        high,
        stats: stats.clone(),
    })
}

/// Peer-Max on a single-item instance.
pub fn peer_max_revenue(engine: &ExactEngine, instance: &Instance, k: u32) -> Result<PeerReport> {
    let stats = engine.stats(instance, Model::SingleItemSpa)?;
    peer_revenue_from_stats(&stats, k)
}

/// Peer-Welfare: the same lottery with VCG stats on the instance's market.
pub fn peer_welfare_revenue(
    engine: &ExactEngine,
    instance: &Instance,
    k: u32,
) -> Result<PeerReport> {
    let stats = engine.stats(instance, Model::MultiUnitVcg)?;
    peer_revenue_from_stats(&stats, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Distribution;
    use approx::assert_abs_diff_eq;

    fn i1() -> Instance {
        Instance::single_item(vec![
            Distribution::discrete([(3.0, 0.5), (1.0, 0.5)]).unwrap(),
            Distribution::degenerate(2.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn grid_examples() {
        let g = alpha_support(1, 2).unwrap();
        assert_eq!(g.l, 3);
        assert_eq!(g.grid, vec![0.0, 0.125, 0.25, 0.5, 1.0, 2.0]);
        assert_eq!(g.high_atom, 4.0);
        let g = alpha_support(2, 4).unwrap();
        assert_eq!(g.l, 4);
        assert_eq!(g.grid, vec![0.0, 0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0]);
        assert_eq!(g.high_atom, 8.0);
        for (k, n) in [(1, 2), (3, 5), (2, 17), (5, 64)] {
            let g = alpha_support(k, n).unwrap();
            assert_eq!(g.grid.len() as u32, k + g.l + 2);
            assert!(g.grid.windows(2).all(|w| w[0] < w[1]));
            assert!(g.l >= 3);
            let total: f64 = g.weights().iter().map(|w| w.1).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-15);
        }
        assert!(alpha_support(0, 2).is_err());
        assert!(alpha_support(1, 1).is_err());
    }

    #[test]
    fn rev_examples() {
        let st = ExactEngine::default().stats(&i1(), Model::SingleItemSpa).unwrap();
        assert_eq!(rev_at_alpha(&st, 0.0), 1.5);
        assert_eq!(rev_at_alpha(&st, 0.25), 2.5);
        assert_eq!(rev_at_alpha(&st, 1.0), 0.0);
    }

    #[test]
    fn i1_peer_max() {
        let rep = peer_max_revenue(&ExactEngine::default(), &i1(), 1).unwrap();
        let revs: Vec<f64> = rep.per_alpha.iter().map(|a| a.rev).collect();
        assert_eq!(revs, vec![1.5, 2.0, 2.5, 0.0, 0.0, 0.0]);
        assert_eq!(rep.high, AlphaRev { alpha: 4.0, rev: 0.0 });
        assert_abs_diff_eq!(rep.revenue, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn peer_welfare_specializes_to_peer_max() {
        let e = ExactEngine::default();
        let pm = peer_max_revenue(&e, &i1(), 2).unwrap();
        let pw = peer_welfare_revenue(&e, &i1(), 2).unwrap();
        assert_eq!(pm.revenue, pw.revenue);
    }

    #[test]
    fn peer_welfare_degenerate_market() {
        let buyers = [5.0, 3.0, 2.0]
            .iter()
            .map(|&v| Distribution::degenerate(v).unwrap())
            .collect();
        let inst = Instance::new(buyers, 2.0, vec![1.0; 3]).unwrap();
        let rep = peer_welfare_revenue(&ExactEngine::default(), &inst, 1).unwrap();
        // w − s = (3, 1, 0), r = (5, 7, 8), L = ⌈log₂ 12⌉ = 4.
        let by_hand = |a: f64| {
            let mut t = 0.0;
            if 3.0 >= 5.0 * a {
                t += 2.0 + 5.0 * a;
            }
            if 1.0 >= 7.0 * a {
                t += 2.0 + 7.0 * a;
            }
            if 0.0 >= 8.0 * a {
                t += 8.0 * a;
            }
            t
        };
        let grid = [0.0, 1.0 / 16.0, 0.125, 0.25, 0.5, 1.0, 2.0];
        let expect = 0.5 * by_hand(4.0) + grid.iter().map(|&a| by_hand(a)).sum::<f64>() / 14.0;
        assert_abs_diff_eq!(rep.revenue, expect, epsilon = 1e-12);
    }
}
