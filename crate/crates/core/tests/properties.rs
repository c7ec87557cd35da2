use busrmt_core::circle::{circle_km, CircleParams, CyclicConfig};
use busrmt_core::equilibrium::{UnfoldMode, Unfolder};
use busrmt_core::model_line::{arrival_density, arrival_density_from_km, position_pmf, position_pmf_from_km};
use busrmt_core::numeric::{det, log_det};
use busrmt_core::{ArrivalTimes, LogValue, ModelParams, PositionConfig};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (2u32..25)
        .prop_flat_map(|big_n| (Just(big_n), 1u32..big_n.min(6)))
        .prop_flat_map(|(big_n, n)| (Just(big_n), Just(n), 1u32..=(big_n + 1 - n), 0.3f64..4.0))
        .prop_map(|(big_n, n, x, t)| ModelParams::new(big_n, n, x, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ratio_identity(p in params(), seeds in prop::collection::vec(0.01f64..0.99, 5)) {
        let n = p.buses() as usize;
        let mut ts: Vec<f64> = seeds[..n].iter().map(|u| u * p.horizon()).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        prop_assume!(ts.len() == n);
        let a = ArrivalTimes::new(ts).unwrap();
        let d = arrival_density(&p, &a).unwrap();
        let r = arrival_density_from_km(&p, &a).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - r).abs() <= 1e-9 * d.max(1e-300), "{d} vs {r}");
    }

    #[test]
    fn position_law_is_a_probability(p in params(), frac in 0.02f64..0.98, pick in any::<prop::sample::Index>()) {
        let t = frac * p.horizon();
        let configs = PositionConfig::enumerate(&p);
        let c = &configs[pick.index(configs.len())];
        let v = position_pmf(&p, t, c).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        let w = position_pmf_from_km(&p, t, c).unwrap();
        prop_assert!((v - w).abs() <= 1e-12 + 1e-9 * v);
    }

    #[test]
    fn log_det_matches_plain_det(entries in prop::collection::vec(-3.0f64..3.0, 16)) {
        let logs: Vec<LogValue> = entries.iter().map(|&v| LogValue::from_f64(v)).collect();
        let a = log_det(&logs, 4).value();
        let b = det(&entries, 4);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
    }

    #[test]
    fn circle_determinant_is_a_probability(m in 3usize..9, k in 1usize..4, t in 0.0f64..6.0, pick in any::<prop::sample::Index>()) {
        prop_assume!(k < m);
        let p = CircleParams::packed(m, k, 1.0).unwrap();
        let configs = CyclicConfig::enumerate(m, k);
        let c = &configs[pick.index(configs.len())];
        let v = circle_km(&p, c, t).unwrap();
        prop_assert!((-1e-13..=1.0 + 1e-13).contains(&v), "{v}");
    }

    #[test]
    fn cyclic_rotations_name_the_same_configuration(m in 3usize..10, pick in any::<prop::sample::Index>(), r in 0usize..3) {
        let configs = CyclicConfig::enumerate(m, 3);
        let c = &configs[pick.index(configs.len())];
        let mut labels = c.sites().to_vec();
        labels.rotate_left(r);
        prop_assert_eq!(&CyclicConfig::new(labels, m).unwrap(), c);
    }

    #[test]
    fn unfolding_is_increasing(p in params(), ys in prop::collection::vec(-0.999f64..0.999, 2..20)) {
        let mut ys = ys;
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let u = Unfolder::new(&p, UnfoldMode::ExactFiniteN).unwrap().unfold(&ys).unwrap();
        prop_assert!(u.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(u.iter().all(|&v| v >= 0.0 && v <= f64::from(p.buses()) + 1e-9));
    }
}
