//! Property tests for the invariants of the bounds, sensitivity, inference
//! and resampling layers.

use proptest::prelude::*;
use regime_bounds::bounds_bp::bp_bounds;
use regime_bounds::bounds_msm::{msm_arm_bounds, msm_bounds, msm_bounds_bisection, MsmProblem};
use regime_bounds::estimation::pipeline::fold_assignment;
use regime_bounds::estimation::Dataset;
use regime_bounds::induced::{classify, cross_bound, induce, width_identity};
use regime_bounds::inference_ci::{critical_value, im_jd_ci, norm_quantile, theta_tilde, ThetaEstimates};
use regime_bounds::law::{validate, StratumObs};
use regime_bounds::oracle::response_type::PiTable;
use regime_bounds::oracle::{ground_truth, observed_law, sharp_bounds_lp, ResponseTypeLaw, Target};
use regime_bounds::regimes::{deterministic_worst_regret, mixed_policy};
use regime_bounds::{Interval, Regime};

fn pi_table() -> impl Strategy<Value = PiTable> {
    prop::array::uniform16(0.001f64..1.0).prop_map(|v| {
        let tot: f64 = v.iter().sum();
        let mut pi = [[0.0; 4]; 4];
        for (i, x) in v.iter().enumerate() {
            pi[i / 4][i % 4] = x / tot;
        }
        pi
    })
}

fn rt_law() -> impl Strategy<Value = ResponseTypeLaw> {
    (pi_table(), 0.05f64..0.95).prop_map(|(pi, pz)| ResponseTypeLaw::single(pi, pz))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn closed_form_bounds_are_lp_sharp(rt in rt_law()) {
        let law = observed_law(&rt);
        let obs = validate(&law).unwrap();
        let arms = bp_bounds(&law.strata[0].p);
        let ib = induce(&obs.strata[0], arms).unwrap();
        for (t, i) in [
            (Target::EY0, arms[0]),
            (Target::EY1, arms[1]),
            (Target::Cate, ib.cate_l),
            (Target::CateGivenA(0), ib.cate[0]),
            (Target::CateGivenA(1), ib.cate[1]),
        ] {
            let lp = sharp_bounds_lp(&law, t, 0).unwrap();
            prop_assert!(lp.max_abs_diff(&i) < 1e-9, "{t:?}: {i:?} vs {lp:?}");
        }
    }
}

proptest! {
    #[test]
    fn truth_inside_bounds_and_width_identity(rt in rt_law()) {
        let law = observed_law(&rt);
        let obs = validate(&law).unwrap();
        let ib = induce(&obs.strata[0], bp_bounds(&law.strata[0].p)).unwrap();
        let gt = ground_truth(&rt, None).unwrap();
        let t = &gt.strata[0];
        prop_assert!(ib.cate_l.contains(t.cate, 1e-9));
        for ap in 0..2 {
            prop_assert!(ib.cate[ap].contains(t.cate_given_a[ap], 1e-9));
        }
        let w = width_identity(&ib);
        prop_assert!(w.residual < 1e-12);
        prop_assert!(w.rho0.min(w.rho1) - 1e-12 <= w.omega && w.omega <= w.rho0.max(w.rho1) + 1e-12);
    }

    #[test]
    fn subgroup_sign_of_other_group_is_implied(rt in rt_law()) {
        // the cross bound from the l-CATE and one subgroup contains the other subgroup's interval
        let law = observed_law(&rt);
        let obs = validate(&law).unwrap();
        let ib = induce(&obs.strata[0], bp_bounds(&law.strata[0].p)).unwrap();
        for ap in 0..2 {
            let cb = cross_bound(ib.cate_l, ib.cate[ap], obs.strata[0].pa[ap]).unwrap();
            prop_assert!(cb.contains_interval(&ib.cate[1 - ap], 1e-9));
        }
    }

    #[test]
    fn msm_bounds_nested_and_match_bisection(e in 0.01f64..0.99, mu in 0.0f64..1.0, g1 in 1.0f64..8.0, dg in 0.0f64..8.0) {
        let a = msm_bounds(&MsmProblem::new(e, mu, g1).unwrap()).unwrap();
        let b = msm_bounds(&MsmProblem::new(e, mu, g1 + dg).unwrap()).unwrap();
        prop_assert!(b.contains_interval(&a, 1e-12));
        prop_assert!(a.contains(mu, 1e-12));
        let bis = msm_bounds_bisection(&MsmProblem::new(e, mu, g1).unwrap()).unwrap();
        prop_assert!(bis.max_abs_diff(&a) < 1e-8);
    }

    #[test]
    fn msm_subgroup_sign_implies_stratum_sign(e in 0.01f64..0.99, mu0 in 0.0f64..1.0, mu1 in 0.0f64..1.0, g in 1.0f64..20.0) {
        let obs = StratumObs::new("l", 1.0, e, [mu0, mu1]).unwrap();
        let ib = induce(&obs, msm_arm_bounds(&obs, g).unwrap()).unwrap();
        let cls = classify(&ib, 0.0).unwrap();
        if cls.a_status.iter().any(|s| s.is_identified()) {
            prop_assert!(cls.l_status.is_identified(), "{ib:?}");
        }
    }

    #[test]
    fn critical_value_bounded_and_monotone(g1 in 0.0f64..20.0, dg in 0.0f64..20.0, alpha in 0.01f64..0.2) {
        let c1 = critical_value(g1, alpha).unwrap();
        let c2 = critical_value(g1 + dg, alpha).unwrap();
        prop_assert!(c2 <= c1 + 1e-9);
        prop_assert!(norm_quantile(1.0 - alpha) - 1e-9 <= c1 && c1 <= norm_quantile(1.0 - alpha / 2.0) + 1e-9);
    }

    #[test]
    fn im_ci_contains_estimates(lo in -1.0f64..1.0, gap in 0.0f64..1.0, sl in 0.001f64..0.5, su in 0.001f64..0.5) {
        let ci = im_jd_ci(&ThetaEstimates::simple(lo, sl, lo + gap, su, 0.05)).unwrap();
        prop_assert!(ci.ci_lo <= lo && lo + gap <= ci.ci_up);
    }

    #[test]
    fn theta_tilde_commutes_with_selection(
        l in prop::collection::vec(0.0f64..0.5, 4),
        u in prop::collection::vec(0.5f64..1.0, 4),
        mu in 0.0f64..1.0,
        pi in 0.05f64..0.95,
    ) {
        let est = ThetaEstimates { theta_l: l.clone(), se_l: vec![0.01; 4], theta_u: u.clone(), se_u: vec![0.01; 4], alpha: 0.05 };
        let t = theta_tilde(&est, mu, 0.0, pi, 1.0 - pi).unwrap();
        let ci = im_jd_ci(&t).unwrap();
        let max_l = l.iter().cloned().fold(f64::MIN, f64::max);
        let min_u = u.iter().cloned().fold(f64::MAX, f64::min);
        let f = |x: f64| (x - mu * pi) / (1.0 - pi);
        prop_assert!((t.theta_l[ci.d_l] - f(max_l)).abs() < 1e-12);
        prop_assert!((t.theta_u[ci.d_u] - f(min_u)).abs() < 1e-12);
    }

    #[test]
    fn mixed_regret_beats_deterministic(l in -1.0f64..-1e-6, u in 1e-6f64..1.0) {
        let e = Interval::new(l, u);
        let m = mixed_policy(e);
        prop_assert!(m.worst_case_regret < deterministic_worst_regret(e, 0).min(deterministic_worst_regret(e, 1)));
    }

    #[test]
    fn folds_partition_rows(n in 10usize..500, k in 2usize..10, seed in any::<u64>()) {
        prop_assume!(n >= k);
        let f = fold_assignment(n, k, seed);
        prop_assert_eq!(f.len(), n);
        let mut counts = vec![0usize; k];
        f.iter().for_each(|&j| counts[j] += 1);
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        prop_assert_eq!(f, fold_assignment(n, k, seed));
    }

    #[test]
    fn interval_clip_keeps_order(a in -3.0f64..3.0, w in 0.0f64..3.0) {
        let i = Interval::new(a, a + w).clip_prob();
        prop_assert!(i.lo <= i.up && i.lo >= 0.0 && i.up <= 1.0);
    }

    #[test]
    fn dataset_csv_round_trip(rows in prop::collection::vec((0u8..2, 0u8..2, 0u8..2, -1e3f64..1e3), 1..50)) {
        let mut d = Dataset::new(1);
        for (y, a, z, x) in &rows {
            d.push(*y, *a, *z, &[*x]);
        }
        let back = Dataset::from_reader(d.to_csv_string().as_bytes()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn regime_json_round_trip(bits in prop::collection::vec((0u8..2, 0u8..2), 1..6)) {
        let labels: Vec<String> = (0..bits.len()).map(|i| format!("s{i}")).collect();
        let g = Regime::from_fn(&labels, |s, ap| regime_bounds::regime::Action::from_bit(if ap == 0 { bits[s].0 } else { bits[s].1 }));
        prop_assert_eq!(Regime::from_json(&g.to_json()).unwrap(), g);
    }
}
