use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use exante_core::dist::{
    hard_family, max_distribution, random_discrete_instance, random_multi_unit_instance, HardFamily,
    HardKind,
};
use exante_core::mech::{
    induce_bid_mechanism, peer_max_revenue, peer_welfare_revenue, vcg_outcome, BaseKind,
};
use exante_core::rng::stream;
use exante_core::verify::{either_or_bound, ic_audit, posted_price_cap, BOUND_TOL, REGRET_TOL};
use exante_core::{Distribution, ExactEngine, Instance, MechanismConfig, Model};

const TOL: f64 = 1e-9;

fn single_item(seed: u64, n: usize, k: usize) -> Instance {
    random_discrete_instance(n, k, 10.0, &mut stream(seed)).unwrap()
}

fn multi_unit(seed: u64, n: usize, k: usize) -> Instance {
    random_multi_unit_instance(n, k, 10.0, 3, 2, &mut stream(seed)).unwrap()
}

fn check_accounting(inst: &Instance, model: Model) {
    let st = ExactEngine::default().stats(inst, model).unwrap();
    let total: f64 = st.w.iter().sum();
    for i in 0..inst.n() {
        assert_abs_diff_eq!(st.r[i], st.s[i] + total - st.w[i], epsilon = TOL);
        assert!(st.base_rev <= st.r[i] + TOL);
        assert!(st.r[i] <= st.wel + TOL);
        assert!(st.wel <= st.r[i] + st.w[i] + TOL);
        assert!(st.r[i] + st.w[i] <= 2.0 * st.wel + TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn accounting_identity_spa(seed in any::<u64>(), n in 2usize..6, k in 1usize..4) {
        check_accounting(&single_item(seed, n, k), Model::SingleItemSpa);
    }

    #[test]
    fn accounting_identity_vcg(seed in any::<u64>(), n in 2usize..5, k in 1usize..4) {
        check_accounting(&multi_unit(seed, n, k), Model::MultiUnitVcg);
    }

    #[test]
    fn max_law_mean_is_welfare(seed in any::<u64>(), n in 2usize..6, k in 1usize..4) {
        let inst = single_item(seed, n, k);
        let wel = ExactEngine::default().stats(&inst, Model::SingleItemSpa).unwrap().wel;
        let max = max_distribution(inst.buyers()).unwrap();
        prop_assert!((max.mean() - wel).abs() <= TOL);
    }

    #[test]
    fn vcg_allocation_is_feasible(
        bids in prop::collection::vec(0u8..8, 1..6),
        m in 1u8..5,
        caps in prop::collection::vec(1u8..3, 6),
    ) {
        let bids: Vec<f64> = bids.into_iter().map(f64::from).collect();
        let d: Vec<f64> = caps[..bids.len()].iter().map(|&c| f64::from(c)).collect();
        let out = vcg_outcome(&bids, f64::from(m), &d).unwrap();
        prop_assert!(out.alloc.iter().sum::<f64>() <= f64::from(m));
        for (x, cap) in out.alloc.iter().zip(&d) {
            prop_assert!(*x >= 0.0 && x <= cap);
        }
    }

    #[test]
    fn peer_max_meets_either_or_bound(seed in any::<u64>(), n in 2usize..6, k in 1usize..4, big_k in 1u32..4) {
        let inst = single_item(seed, n, k);
        let rep = peer_max_revenue(&ExactEngine::default(), &inst, big_k).unwrap();
        let bound = either_or_bound(rep.stats.wel, rep.stats.base_rev, big_k, n);
        prop_assert!(rep.revenue >= bound - BOUND_TOL, "{} < {}", rep.revenue, bound);
    }

    #[test]
    fn peer_welfare_meets_either_or_bound(seed in any::<u64>(), n in 2usize..5, k in 1usize..3, big_k in 1u32..3) {
        let inst = multi_unit(seed, n, k);
        let rep = peer_welfare_revenue(&ExactEngine::default(), &inst, big_k).unwrap();
        let bound = either_or_bound(rep.stats.wel, rep.stats.base_rev, big_k, n);
        prop_assert!(rep.revenue >= bound - BOUND_TOL, "{} < {}", rep.revenue, bound);
    }
}

fn class_from(seed: u64, size: usize) -> Vec<Distribution> {
    let mut rng = stream(seed);
    (0..size)
        .map(|_| random_discrete_instance(2, 2, 6.0, &mut rng).unwrap().buyers()[0].clone())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tam_is_ic_and_ir(
        seed in any::<u64>(),
        size in 1usize..4,
        fees in prop::collection::vec(0.0f64..3.0, 3),
        vcg in any::<bool>(),
    ) {
        let engine = ExactEngine::default();
        let class = class_from(seed, size);
        let n = 2 + (seed % 2) as usize;
        let base = if vcg { BaseKind::Vcg } else { BaseKind::Spa };
        let (m, demands) = if vcg { (2.0, vec![1.0, 2.0, 1.0][..n].to_vec()) } else { (1.0, vec![1.0; n]) };
        let mech = MechanismConfig::Tam { base, thresholds: fees[..n].to_vec() };
        let audit = ic_audit(&engine, &mech, &class, m, &demands).unwrap();
        prop_assert!(audit.max_regret <= REGRET_TOL, "{:?}", audit.witness);

        let inst = Instance::new(vec![class[0].clone(); n], m, demands).unwrap();
        for i in 0..n {
            let u = mech.utility(&engine, &inst, i, &class[0]).unwrap();
            prop_assert!(u >= -TOL);
        }
    }

    #[test]
    fn induced_tables_are_clean(seed in any::<u64>(), size in 1usize..4) {
        let engine = ExactEngine::default();
        let base = class_from(seed, 1).remove(0);
        let factors: Vec<f64> = (1..=size).map(|j| j as f64 * 0.75).collect();
        for mech in [
            MechanismConfig::PeerMax { k: 1 },
            MechanismConfig::PeerWelfare { k: 2 },
            MechanismConfig::IidTam,
            MechanismConfig::Tam { base: BaseKind::Spa, thresholds: vec![0.5, 1.0] },
        ] {
            let t = induce_bid_mechanism(&engine, &mech, &base, &factors, 2).unwrap();
            prop_assert_eq!(t.violations(), 0);
        }
    }
}

#[test]
fn hard_family_weights_and_tails() {
    for kind in [HardKind::General, HardKind::Regular] {
        for n in [16, 64, 256, 1024] {
            let fam = hard_family(kind, n).unwrap();
            let total: f64 = fam.members.iter().map(|m| m.weight).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            for m in &fam.members {
                assert_abs_diff_eq!(m.weight, fam.delta * 2f64.powi(m.j as i32), epsilon = 1e-12);
                let top = HardFamily::factor(m.j) / fam.eps;
                assert_abs_diff_eq!(m.dist.max_value(), top, epsilon = 1e-9 * top);
                match kind {
                    HardKind::General => assert_abs_diff_eq!(1.0 - m.dist.cdf(0.0), fam.eps, epsilon = 1e-12),
                    HardKind::Regular => assert_abs_diff_eq!(
                        1.0 - m.dist.cdf(top * (1.0 - 1e-12)),
                        fam.eps,
                        epsilon = 1e-9
                    ),
                }
            }
        }
    }
}

#[test]
fn posted_price_cap_holds() {
    for n in [16, 64, 256, 1024] {
        let cap = posted_price_cap(&hard_family(HardKind::General, n).unwrap());
        assert!(cap.ok, "n={n}: {} > {}", cap.cap, cap.bound);
    }
}
