use modneat::objectives::{modularity_reward_fitness, torque_deviation, QImportanceConfig};
use proptest::prelude::*;

fn totals() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1e3, 2..6)
}

proptest! {
    #[test]
    fn deviation_is_in_unit_range(x in totals()) {
        let d = torque_deviation(&x).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn deviation_is_scale_invariant(x in totals(), c in 1e-3f64..1e3) {
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let (a, b) = (torque_deviation(&x).unwrap(), torque_deviation(&scaled).unwrap());
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn deviation_ignores_actuator_order(mut x in totals()) {
        let d = torque_deviation(&x).unwrap();
        x.reverse();
        prop_assert_eq!(torque_deviation(&x).unwrap(), d);
    }

    #[test]
    fn fitness_is_monotone_in_q(r in -500.0f64..500.0, q1 in 0.0f64..1.0, q2 in 0.0f64..1.0, i in 0.0f64..1.0) {
        let cfg = QImportanceConfig::with_importance(i).unwrap();
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(modularity_reward_fitness(r, lo, &cfg) <= modularity_reward_fitness(r, hi, &cfg));
    }

    #[test]
    fn fitness_is_monotone_in_importance(r in -500.0f64..500.0, q in 0.0f64..1.0, i1 in 0.0f64..1.0, i2 in 0.0f64..1.0) {
        let (lo, hi) = if i1 <= i2 { (i1, i2) } else { (i2, i1) };
        let a = modularity_reward_fitness(r, q, &QImportanceConfig::with_importance(lo).unwrap());
        let b = modularity_reward_fitness(r, q, &QImportanceConfig::with_importance(hi).unwrap());
        prop_assert!(a <= b);
    }

    #[test]
    fn zero_importance_is_bitwise_identity(r in any::<f64>().prop_filter("finite", |r| r.is_finite()), q in -1.0f64..2.0) {
        let cfg = QImportanceConfig::with_importance(0.0).unwrap();
        prop_assert_eq!(modularity_reward_fitness(r, q, &cfg).to_bits(), r.to_bits());
    }

    #[test]
    fn bonus_is_bounded_by_upper_clamp(r in -500.0f64..2000.0, q in 0.0f64..1.0, i in 0.0f64..1.0) {
        let cfg = QImportanceConfig::with_importance(i).unwrap();
        let f = modularity_reward_fitness(r, q, &cfg);
        prop_assert!(f >= r);
        prop_assert!(f - r <= i * 300.0 + 1e-9);
    }
}
