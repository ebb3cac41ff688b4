use rand::Rng;

use crate::dist::{Distribution, Instance};
use crate::error::{Error, Result};

use super::{Model, PerBuyerStats, StatsStderr};

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Sample standard deviation over `√count`; zero for a single sample.
    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.count - 1) as f64;
        (var / self.count as f64).sqrt()
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::Parameter("samples must be >= 1".into()));
    }
    Ok(())
}

/// Monte Carlo estimates of the per-buyer stats. All fields are read off the
/// same sampled profiles.
pub fn stats_mc<R: Rng + ?Sized>(
    instance: &Instance,
    model: Model,
    samples: u64,
    rng: &mut R,
) -> Result<PerBuyerStats> {
    check_samples(samples)?;
    let base = model.base(instance)?;
    let n = instance.n();
    let (mut w, mut s, mut r) = (
        vec![Moments::default(); n],
        vec![Moments::default(); n],
        vec![Moments::default(); n],
    );
    let (mut wel, mut rev) = (Moments::default(), Moments::default());
    let mut values = vec![0.0; n];
    for _ in 0..samples {
        for (v, b) in values.iter_mut().zip(instance.buyers()) {
            *v = b.sample(rng);
        }
        let st = base.settle(&values);
        let (mut wel_k, mut rev_k) = (0.0, 0.0);
        for i in 0..n {
            let wi = values[i] * st.outcome.alloc[i];
            w[i].push(wi);
            s[i].push(st.outcome.pay[i]);
            r[i].push(st.others_opt[i]);
            wel_k += wi;
            rev_k += st.outcome.pay[i];
        }
        wel.push(wel_k);
        rev.push(rev_k);
    }
    let means = |m: &[Moments]| m.iter().map(|x| x.mean).collect::<Vec<_>>();
    let errs = |m: &[Moments]| m.iter().map(|x| x.stderr()).collect::<Vec<_>>();
    Ok(PerBuyerStats {
        w: means(&w),
        s: means(&s),
        r: means(&r),
        wel: wel.mean,
        base_rev: rev.mean,
        stderr: Some(StatsStderr {
            w: errs(&w),
            s: errs(&s),
            r: errs(&r),
            wel: wel.stderr(),
            base_rev: rev.stderr(),
        }),
    })
}

/// Sample mean of `dist` and its standard error.
pub fn mc_mean<R: Rng + ?Sized>(dist: &Distribution, samples: u64, rng: &mut R) -> Result<(f64, f64)> {
    check_samples(samples)?;
    let mut m = Moments::default();
    for _ in 0..samples {
        m.push(dist.sample(rng));
    }
    Ok((m.mean, m.stderr()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{make_truncated_er_iid, truncated_er_spa};
    use crate::engine::stats_exact;
    use crate::rng::stream;
    use crate::DEFAULT_CAP;

    fn i1() -> Instance {
        Instance::single_item(vec![
            Distribution::discrete([(3.0, 0.5), (1.0, 0.5)]).unwrap(),
            Distribution::degenerate(2.0).unwrap(),
        ])
        .unwrap()
    }

    fn within(est: f64, se: f64, truth: f64) -> bool {
        (est - truth).abs() <= 4.0 * se + 1e-12
    }

    #[test]
    fn agrees_with_exact_on_i1() {
        let exact = stats_exact(&i1(), Model::SingleItemSpa, DEFAULT_CAP).unwrap();
        let mc = stats_mc(&i1(), Model::SingleItemSpa, 200_000, &mut stream(5)).unwrap();
        let se = mc.stderr.as_ref().unwrap();
        for i in 0..2 {
            assert!(within(mc.w[i], se.w[i], exact.w[i]));
            assert!(within(mc.s[i], se.s[i], exact.s[i]));
            assert!(within(mc.r[i], se.r[i], exact.r[i]));
        }
        assert!(within(mc.wel, se.wel, exact.wel));
    }

    #[test]
    fn truncated_er_spa_closed_form() {
        let inst = make_truncated_er_iid(2, 4.0, 1.0).unwrap();
        let mc = stats_mc(&inst, Model::SingleItemSpa, 200_000, &mut stream(11)).unwrap();
        let se = mc.stderr.unwrap();
        assert!(within(mc.base_rev, se.base_rev, truncated_er_spa(2, 4.0, 1.0)));
    }

    #[test]
    fn single_sample_is_finite() {
        let mc = stats_mc(&i1(), Model::SingleItemSpa, 1, &mut stream(0)).unwrap();
        let se = mc.stderr.unwrap();
        assert!(se.w.iter().chain(&se.s).chain(&se.r).all(|x| *x == 0.0));
        assert!(mc.base_rev <= mc.wel);
        assert!(stats_mc(&i1(), Model::SingleItemSpa, 0, &mut stream(0)).is_err());
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = stats_mc(&i1(), Model::SingleItemSpa, 1000, &mut stream(3)).unwrap();
        let b = stats_mc(&i1(), Model::SingleItemSpa, 1000, &mut stream(3)).unwrap();
        assert_eq!(a, b);
    }
}
