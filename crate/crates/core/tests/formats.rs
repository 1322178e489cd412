use hd_core::curve::{read_hdmt, read_json, write_hdmt, write_json};
use hd_core::tensor_file::{from_bytes, to_bytes};
use hd_core::{build_mapping, CurveSpec, Layout, Region, Tensor};
use proptest::prelude::*;

proptest! {
    #[test]
    fn tensor_files_round_trip(shape in proptest::collection::vec(1usize..5, 1..=4), seed in any::<u32>()) {
        let len: usize = shape.iter().product();
        let data: Vec<f32> = (0..len).map(|i| f32::from_bits(seed.wrapping_mul(2654435761).wrapping_add(i as u32 * 40503) & 0x7f7f_ffff)).collect();
        let t = Tensor::from_vec(&shape, data).unwrap();
        let back = from_bytes(&to_bytes(&t).unwrap()).unwrap();
        prop_assert_eq!(back.shape(), t.shape());
        prop_assert!(back.data().iter().zip(t.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn mapping_files_round_trip(n in 2usize..=3, p in 1u32..=3, seed in any::<u64>(), compact in any::<bool>()) {
        let s = CurveSpec::new(n, p).unwrap();
        let ext: Vec<usize> = (0..n).map(|a| 1 + ((seed >> (8 * a)) as usize % s.side())).collect();
        let r = Region::new(&ext).unwrap();
        let layout = if compact { Layout::Compacted } else { Layout::Padded };
        let t = build_mapping(s, &r, layout).unwrap();
        prop_assert_eq!(read_hdmt(&write_hdmt(&t).unwrap()).unwrap(), t.clone());
        prop_assert_eq!(read_json(&write_json(&t).unwrap()).unwrap(), t);
    }
}
