use hd_core::{
    build_mapping, fc_align, hd_loss, map_features, scatter_code, AlignLayer, CurveSpec, Layout, LinearCode, Region,
    Sampling, Tensor,
};
use proptest::prelude::*;

fn code(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0f64..10.0, len).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

proptest! {
    #[test]
    fn positive_scale_invariance(a in code(16), b in code(16), c in 0.01f64..100.0, d in 0.01f64..100.0) {
        let (a, b) = (LinearCode::dense(a), LinearCode::dense(b));
        let base = hd_loss(&a, &b, Sampling::Left).unwrap().value;
        let scaled = hd_loss(&a.scale(c), &b.scale(d), Sampling::Left).unwrap().value;
        prop_assert!((base - scaled).abs() <= 1e-10);
    }

    #[test]
    fn symmetric_without_rescale(a in code(12), b in code(12)) {
        let (a, b) = (LinearCode::dense(a), LinearCode::dense(b));
        let ab = hd_loss(&a, &b, Sampling::Left).unwrap().value;
        let ba = hd_loss(&b, &a, Sampling::Left).unwrap().value;
        prop_assert!((ab - ba).abs() <= 1e-12);
    }

    #[test]
    fn bounded_by_two_root_length(a in code(64), b in code(16), center in any::<bool>()) {
        let sampling = if center { Sampling::Center } else { Sampling::Left };
        let (a, b) = (LinearCode::dense(a), LinearCode::dense(b));
        match hd_loss(&a, &b, sampling) {
            Ok(l) => prop_assert!(l.value >= 0.0 && l.value <= 2.0 * 4.0 + 1e-12),
            // Every sampled teacher slot can be zero only if the rescale hits zeros.
            Err(e) => prop_assert!(matches!(e, hd_core::Error::DegenerateInput(_))),
        }
    }

    #[test]
    fn mapping_adjoint(e0 in 1usize..=8, e1 in 1usize..=8, seed in any::<u64>(), padded in any::<bool>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let r = Region::new(&[e0, e1]).unwrap();
        let layout = if padded { Layout::Padded } else { Layout::Compacted };
        let t = build_mapping(CurveSpec::new(2, 3).unwrap(), &r, layout).unwrap();
        let eta = Tensor::from_fn(&[e0, e1], |_| rng.gen_range(-1.0..1.0));
        let g: Vec<f64> = (0..t.code_length()).map(|s| if t.is_valid(s) { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect();
        let lhs: f64 = map_features(&eta, &t).unwrap().values().iter().zip(&g).map(|(a, b)| a * b).sum();
        let rhs = eta.dot(&scatter_code(&g, &t).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn align_identity_is_neutral(x in code(8)) {
        let x = LinearCode::dense(x);
        prop_assert_eq!(fc_align(&x, &AlignLayer::identity(8)).unwrap(), x);
    }
}
