use hd_core::Tensor;
use hd_harness::{mean, reduce3d, std_dev, ReduceMode};
use proptest::prelude::*;

fn volume() -> impl Strategy<Value = (usize, usize, usize, Vec<f64>)> {
    (1usize..5, 1usize..5, 1usize..5).prop_flat_map(|(d, w, h)| {
        proptest::collection::vec(-10.0f64..10.0, d * w * h).prop_map(move |v| (d, w, h, v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn avg_sits_between_min_and_max((d, w, h, v) in volume()) {
        let t = Tensor::from_vec(&[d, w, h], v.clone()).unwrap();
        let avg = reduce3d(&t, &ReduceMode::Avg).unwrap();
        let max = reduce3d(&t, &ReduceMode::Max).unwrap();
        prop_assert_eq!(avg.shape(), &[w, h][..]);
        for i in 0..w {
            for j in 0..h {
                let col: Vec<f64> = (0..d).map(|k| v[(k * w + i) * h + j]).collect();
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let a = avg.get(&[i, j]);
                prop_assert!(a >= lo - 1e-12 && a <= max.get(&[i, j]) + 1e-12);
            }
        }
    }

    #[test]
    fn uniform_conv_kernel_equals_avg((d, w, h, v) in volume()) {
        let t = Tensor::from_vec(&[d, w, h], v).unwrap();
        let avg = reduce3d(&t, &ReduceMode::Avg).unwrap();
        let conv = reduce3d(&t, &ReduceMode::Conv(vec![1.0 / d as f64; d])).unwrap();
        for (a, c) in avg.data().iter().zip(conv.data()) {
            prop_assert!((a - c).abs() <= 1e-12);
        }
    }

    #[test]
    fn std_dev_ignores_shift(xs in proptest::collection::vec(-100.0f64..100.0, 1..20), c in -50.0f64..50.0) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        prop_assert!((mean(&shifted) - mean(&xs) - c).abs() <= 1e-9);
        prop_assert!((std_dev(&shifted) - std_dev(&xs)).abs() <= 1e-9);
        prop_assert!(std_dev(&xs) >= 0.0);
    }
}
