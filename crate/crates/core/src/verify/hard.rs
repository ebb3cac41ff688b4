use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::dist::{draw_hard_instance, hard_family, HardFamily, HardKind};
use crate::engine::ExactEngine;
use crate::error::{Error, Result};
use crate::mech::MechanismConfig;
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostedPriceCap {
    /// Revenue per buyer at each price `1/(2ʲε)`, `j = 1..=L`.
    pub per_price: Vec<f64>,
    pub cap: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Best per-buyer posted-price revenue against the family mixture: the
/// price `1/(2ʲε)` sells with probability `ε·Σ_{k≤j} δ2ᵏ`, so it earns
/// `2^-j·Σ_{k≤j} δ2ᵏ`.
pub fn posted_price_cap(family: &HardFamily) -> PostedPriceCap {
    let mut per_price = Vec::with_capacity(family.members.len());
    let mut cumulative = 0.0;
    for m in &family.members {
        cumulative += m.weight;
        per_price.push(HardFamily::factor(m.j) * cumulative);
    }
    let cap = per_price.iter().copied().fold(0.0, f64::max);
    let bound = 2.0 * family.delta;
    PostedPriceCap {
        per_price,
        cap,
        bound,
        ok: cap <= bound + 1e-15,
    }
}

/// One-sided lower confidence bound on a binomial proportion.
pub fn clopper_pearson_lower(successes: u64, trials: u64, confidence: f64) -> f64 {
    if successes == 0 || trials == 0 {
        return 0.0;
    }
    let alpha = 1.0 - confidence;
    if successes == trials {
        // Beta(n, 1) has CDF xⁿ.
        return alpha.powf(1.0 / trials as f64);
    }
    let beta = Beta::new(successes as f64, (trials - successes + 1) as f64)
        .expect("shape parameters are positive");
    beta.inverse_cdf(alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub trials: u64,
    /// `(2/3)·n·δ·L`.
    pub threshold: f64,
    pub hits: u64,
    pub frequency: f64,
    /// One-sided 99% Clopper–Pearson lower bound on the event probability.
    pub lower_99: f64,
    pub ok: bool,
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    Ok(())
}

/// Frequency of `Σ_i E[v_i] ≥ (2/3)nδL` over instances drawn from the
/// general hard family; trial `t` uses sub-stream `t` of `seed`.
pub fn concentration_audit(n: usize, trials: u64, seed: u64) -> Result<ConcentrationReport> {
    check_trials(trials)?;
    if n < 64 {
        return Err(Error::Parameter(format!(
            "concentration audit needs n >= 64 so that L >= 2, got n = {n}"
        )));
    }
    let family = hard_family(HardKind::General, n)?;
    let threshold = 2.0 / 3.0 * n as f64 * family.delta * family.levels as f64;
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = draw_hard_instance(&family, &mut substream(seed, t))?;
            let total: f64 = inst.instance.buyers().iter().map(|b| b.mean()).sum();
            Ok(total >= threshold)
        })
        .collect::<Result<_>>()?;
    let hits = hits.iter().filter(|&&h| h).count() as u64;
    let lower_99 = clopper_pearson_lower(hits, trials, 0.99);
    Ok(ConcentrationReport {
        n,
        trials,
        threshold,
        hits,
        frequency: hits as f64 / trials as f64,
        lower_99,
        ok: lower_99 >= 0.5,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundReport {
    pub n: usize,
    pub trials: u64,
    pub mean_rev: f64,
    pub stderr: f64,
    /// `2nδ`.
    pub ceiling: f64,
    pub ok: bool,
}

/// Mean exact revenue of `mech` over instances drawn from the general hard
/// family, against the ceiling `2nδ` (plus four standard errors).
pub fn upper_bound_audit(
    engine: &ExactEngine,
    mech: &MechanismConfig,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<UpperBoundReport> {
    check_trials(trials)?;
    let family = hard_family(HardKind::General, n)?;
    let revenues: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = draw_hard_instance(&family, &mut substream(seed, t))?;
            mech.revenue(engine, &inst.instance)
        })
        .collect::<Result<_>>()?;
    let count = revenues.len() as f64;
    let mean_rev = revenues.iter().sum::<f64>() / count;
    let stderr = if revenues.len() < 2 {
        0.0
    } else {
        let var = revenues.iter().map(|r| (r - mean_rev).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    };
    let ceiling = 2.0 * n as f64 * family.delta;
    Ok(UpperBoundReport {
        n,
        trials,
        mean_rev,
        stderr,
        ceiling,
        ok: mean_rev <= ceiling + 4.0 * stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn posted_price_examples() {
        let c = posted_price_cap(&hard_family(HardKind::General, 64).unwrap());
        assert_relative_eq!(c.per_price[0], 1.0 / 6.0);
        assert_relative_eq!(c.per_price[1], 0.25);
        assert_relative_eq!(c.cap, 0.25);
        assert_relative_eq!(c.bound, 1.0 / 3.0);
        assert!(c.ok);

        let fam = hard_family(HardKind::General, 16).unwrap();
        assert_eq!(fam.levels, 1);
        let c = posted_price_cap(&fam);
        assert_relative_eq!(c.cap, fam.delta);

        let c = posted_price_cap(&hard_family(HardKind::General, 256).unwrap());
        assert_eq!(c.per_price.len(), 3);
        assert_relative_eq!(c.per_price[0], 1.0 / 14.0);
        assert_relative_eq!(c.per_price[1], 6.0 / 14.0 / 4.0);
        assert_relative_eq!(c.per_price[2], 14.0 / 14.0 / 8.0);
        assert_relative_eq!(c.cap, 0.125);
        assert!(c.ok);
    }

    #[test]
    fn clopper_pearson_values() {
        // Closed form when every trial succeeds.
        assert_relative_eq!(clopper_pearson_lower(10, 10, 0.99), 0.01f64.powf(0.1));
        assert_eq!(clopper_pearson_lower(0, 10, 0.99), 0.0);
        // 50 of 100 at 99%: the exact bound is about 0.38072.
        let lo = clopper_pearson_lower(50, 100, 0.99);
        assert!((lo - 0.380717).abs() < 1e-5, "{lo}");
        // Monotone in the number of successes.
        assert!(clopper_pearson_lower(60, 100, 0.99) > lo);
    }

    #[test]
    fn concentration_errors() {
        assert!(matches!(concentration_audit(64, 0, 1), Err(Error::Domain(_))));
        let err = concentration_audit(63, 10, 1).unwrap_err();
        assert!(err.to_string().contains("L >= 2"));
    }

    #[test]
    fn infinite_fee_earns_nothing() {
        let mech = MechanismConfig::Tam {
            base: crate::mech::BaseKind::Spa,
            thresholds: vec![f64::INFINITY; 16],
        };
        let r = upper_bound_audit(&ExactEngine::default(), &mech, 16, 5, 3).unwrap();
        assert_eq!(r.mean_rev, 0.0);
        assert!(r.ok);
    }
}
