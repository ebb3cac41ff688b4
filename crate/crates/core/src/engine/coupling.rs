use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::Result;

/// A quantile interval of length `measure` on which the true value and the
/// bid are both constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCell {
    pub measure: f64,
    pub true_value: f64,
    pub bid_value: f64,
}

/// Breakpoints closer than this are treated as one.
const MERGE_TOL: f64 = 1e-12;

/// Identity-in-quantile coupling of a true law `f` with a reported law `b`.
pub fn quantile_coupling(f: &Distribution, b: &Distribution) -> Result<Vec<CouplingCell>> {
    let mut cuts = f.quantile_breakpoints()?;
    cuts.extend(b.quantile_breakpoints()?);
    cuts.sort_by(|x, y| x.total_cmp(y));

    let mut edges = vec![0.0];
    for c in cuts {
        if c > MERGE_TOL && c < 1.0 - MERGE_TOL && c - edges[edges.len() - 1] > MERGE_TOL {
            edges.push(c);
        }
    }
    edges.push(1.0);

    Ok(edges
        .windows(2)
        .map(|e| {
            let mid = 0.5 * (e[0] + e[1]);
            CouplingCell {
                measure: e[1] - e[0],
                true_value: f.quantile(mid),
                bid_value: b.quantile(mid),
            }
        })
        .collect())
}
