use proptest::prelude::*;
use semrdp::{
    binary_entropy, build_model, conditional_mutual_information, distortion_transform,
    dsbs_model, ternary_entropy, tv_distance, FiniteDistribution, JointDistribution,
    TransformDirection,
};

fn dist(weights: Vec<f64>) -> FiniteDistribution {
    FiniteDistribution::renormalized(weights).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn binary_entropy_bounded_and_symmetric(p in 0.0f64..=1.0) {
        let h = binary_entropy(p).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&h));
        prop_assert!((h - binary_entropy(1.0 - p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ternary_entropy_bounded(x in 0.0f64..=1.0, frac in 0.0f64..=1.0) {
        let y = (1.0 - x) * frac;
        let h = ternary_entropy(x, y).unwrap();
        prop_assert!(h >= -1e-12 && h <= 3f64.log2() + 1e-12);
    }

    #[test]
    fn tv_is_a_metric(
        a in prop::collection::vec(0.01f64..1.0, 4),
        b in prop::collection::vec(0.01f64..1.0, 4),
        c in prop::collection::vec(0.01f64..1.0, 4),
    ) {
        let (p, q, r) = (dist(a), dist(b), dist(c));
        let pq = tv_distance(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!((pq - tv_distance(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!(tv_distance(&p, &p).unwrap() == 0.0);
        let pr = tv_distance(&p, &r).unwrap();
        let rq = tv_distance(&r, &q).unwrap();
        prop_assert!(pq <= pr + rq + 1e-12);
    }

    #[test]
    fn cmi_is_nonnegative(w in prop::collection::vec(0.0f64..1.0, 8)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-6);
        let total: f64 = w.iter().sum();
        let masses = w.iter().map(|v| v / total).collect();
        let j = JointDistribution::new(vec!["A", "B", "C"], vec![2, 2, 2], masses).unwrap();
        prop_assert!(conditional_mutual_information(&j, &["A"], &["B"], &["C"]).unwrap() >= -1e-12);
    }

    #[test]
    fn transform_round_trips(q in 0.0f64..0.49, frac in 0.0f64..=1.0) {
        let d = q + frac * (0.5 - q);
        let dx = distortion_transform(d, q, TransformDirection::SemanticToObserved).unwrap();
        let back = distortion_transform(dx, q, TransformDirection::ObservedToSemantic).unwrap();
        prop_assert!((back - d).abs() < 1e-12);
    }

    #[test]
    fn side_channel_recovered_from_joint(
        pi in 0.05f64..0.5,
        q1 in 0.0f64..0.45,
        q2 in 0.0f64..0.45,
        a in 0.0f64..0.45,
        b in 0.0f64..0.45,
    ) {
        let m = build_model(pi, q1, q2, a, b).unwrap();
        let p_x = |x| m.mass(0, x, 0) + m.mass(0, x, 1) + m.mass(1, x, 0) + m.mass(1, x, 1);
        let p_xy = |x, y| m.mass(0, x, y) + m.mass(1, x, y);
        prop_assert!((p_xy(0, 1) / p_x(0) - a).abs() < 1e-9);
        prop_assert!((p_xy(1, 0) / p_x(1) - b).abs() < 1e-9);
        let total: f64 = m.joint().masses().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dsbs_posterior_composes(q in 0.0f64..0.45, pi_x in 0.01f64..=0.5) {
        let m = dsbs_model(q, pi_x).unwrap();
        let expected = q + pi_x - 2.0 * q * pi_x;
        prop_assert!((m.u_star() - expected).abs() < 1e-12);
        prop_assert!((m.v_star() - expected).abs() < 1e-12);
        prop_assert!((m.pi_x_prime().unwrap() - expected).abs() < 1e-12);
    }
}
