use std::borrow::Cow;

use crate::dist::{Atom, Distribution};
use crate::mech::BaseMechanism;

use super::{Interim, PerBuyerStats};

/// Visit every joint profile in lexicographic order of atom indices,
/// passing its probability and values. Buyers must be discrete.
pub(crate) fn for_each_profile(supports: &[&[Atom]], mut visit: impl FnMut(f64, &[f64])) {
    let n = supports.len();
    if supports.iter().any(|s| s.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; n];
    let mut values: Vec<f64> = supports.iter().map(|s| s[0].value).collect();
    loop {
        let prob: f64 = idx
            .iter()
            .zip(supports)
            .map(|(&k, s)| s[k].prob)
            .product();
        visit(prob, &values);
        // Odometer step, last buyer fastest.
        let mut j = n;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < supports[j].len() {
                values[j] = supports[j][idx[j]].value;
                break;
            }
            idx[j] = 0;
            values[j] = supports[j][0].value;
        }
    }
}

fn supports(buyers: &[Distribution]) -> Vec<Cow<'_, [Atom]>> {
    buyers
        .iter()
        .map(|b| b.atoms().expect("caller checked that buyers are discrete"))
        .collect()
}

pub(crate) fn stats(base: &BaseMechanism, buyers: &[Distribution]) -> PerBuyerStats {
    let n = buyers.len();
    let owned = supports(buyers);
    let refs: Vec<&[Atom]> = owned.iter().map(|c| c.as_ref()).collect();
    let (mut w, mut s, mut r) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for_each_profile(&refs, |prob, values| {
        let st = base.settle(values);
        for i in 0..n {
            w[i] += prob * values[i] * st.outcome.alloc[i];
            s[i] += prob * st.outcome.pay[i];
            r[i] += prob * st.others_opt[i];
        }
    });
    PerBuyerStats::from_parts(w, s, r)
}

pub(crate) fn interim(
    base: &BaseMechanism,
    buyers: &[Distribution],
    i: usize,
    bids: &[f64],
) -> Vec<Interim> {
    // Buyer i's own law is never read, so it may be non-discrete.
    let owned: Vec<Cow<'_, [Atom]>> = buyers
        .iter()
        .enumerate()
        .map(|(j, b)| match j == i {
            true => Cow::Owned(Vec::new()),
            false => b.atoms().expect("caller checked that the others are discrete"),
        })
        .collect();
    let mut out = Vec::with_capacity(bids.len());
    for &bid in bids {
        let own = [Atom::new(bid, 1.0)];
        let mut refs: Vec<&[Atom]> = owned.iter().map(|c| c.as_ref()).collect();
        refs[i] = &own;
        let (mut alloc, mut pay) = (0.0, 0.0);
        for_each_profile(&refs, |prob, values| {
            let o = base.outcome(values);
            alloc += prob * o.alloc[i];
            pay += prob * o.pay[i];
        });
        out.push(Interim { bid, alloc, pay });
    }
    out
}
