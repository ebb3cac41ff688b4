//! Second-price quantities of independent discrete buyers in closed form.
//!
//! With lowest-index tie-breaking, buyer `i` bidding `b` wins with
//! probability `Π_{j<i} P[v_j < b] · Π_{j>i} P[v_j ≤ b]`. Its expected
//! payment is the mean of the others' maximum restricted to that event:
//! mass below `b` comes from the CDF of the maximum, and the atom at `b`
//! carries whatever is left of the win probability.

use crate::dist::{Atom, Distribution};
use crate::error::Result;

use super::{Interim, PerBuyerStats};

struct Buyer<'a> {
    atoms: std::borrow::Cow<'a, [Atom]>,
}

impl Buyer<'_> {
    fn cdf(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.value <= x).map(|a| a.prob).sum()
    }

    fn cdf_below(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.value < x).map(|a| a.prob).sum()
    }
}

struct Others<'a> {
    buyers: Vec<Buyer<'a>>,
    /// Distinct values of the other buyers, ascending.
    values: Vec<f64>,
}

impl<'a> Others<'a> {
    fn new(buyers: &'a [Distribution], i: usize) -> Result<Self> {
        let buyers: Vec<Buyer<'a>> = buyers
            .iter()
            .map(|b| Ok(Buyer { atoms: b.atoms()? }))
            .collect::<Result<_>>()?;
        let mut values: Vec<f64> = buyers
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, b)| b.atoms.iter().map(|a| a.value))
            .collect();
        values.sort_by(|a, b| a.total_cmp(b));
        values.dedup();
        Ok(Others { buyers, values })
    }

    /// `P[max_{j≠i} v_j ≤ y]` and `P[max_{j≠i} v_j < y]`.
    fn max_cdf(&self, i: usize, y: f64) -> (f64, f64) {
        let mut at = 1.0;
        let mut below = 1.0;
        for (j, b) in self.buyers.iter().enumerate() {
            if j != i {
                at *= b.cdf(y);
                below *= b.cdf_below(y);
            }
        }
        (at, below)
    }

    fn win_prob(&self, i: usize, bid: f64) -> f64 {
        let mut p = 1.0;
        for (j, b) in self.buyers.iter().enumerate() {
            if j < i {
                p *= b.cdf_below(bid);
            } else if j > i {
                p *= b.cdf(bid);
            }
        }
        p
    }

    fn interim(&self, i: usize, bid: f64) -> Interim {
        let alloc = self.win_prob(i, bid);
        let mut pay = 0.0;
        for &y in self.values.iter().take_while(|&&y| y < bid) {
            let (at, below) = self.max_cdf(i, y);
            pay += y * (at - below);
        }
        let (_, below_bid) = self.max_cdf(i, bid);
        pay += bid * (alloc - below_bid).max(0.0);
        Interim { bid, alloc, pay }
    }

    fn mean_max(&self, i: usize) -> f64 {
        self.values
            .iter()
            .map(|&y| {
                let (at, below) = self.max_cdf(i, y);
                y * (at - below)
            })
            .sum()
    }
}

pub(crate) fn interim(buyers: &[Distribution], i: usize, bids: &[f64]) -> Result<Vec<Interim>> {
    let others = Others::new(buyers, i)?;
    Ok(bids.iter().map(|&b| others.interim(i, b)).collect())
}

pub(crate) fn stats(buyers: &[Distribution]) -> Result<PerBuyerStats> {
    let n = buyers.len();
    let (mut w, mut s, mut r) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let others = Others::new(buyers, i)?;
        for a in others.buyers[i].atoms.iter() {
            let t = others.interim(i, a.value);
            w[i] += a.prob * a.value * t.alloc;
            s[i] += a.prob * t.pay;
        }
        r[i] = others.mean_max(i);
    }
    Ok(PerBuyerStats::from_parts(w, s, r))
}
