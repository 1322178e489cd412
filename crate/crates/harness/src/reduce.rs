//! Depth reducers used by the alignment baselines: 3D maps `D×W×H` to `W×H`.

use hd_core::{Scalar, Tensor};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ReduceMode<T> {
    Avg,
    Max,
    /// `D×1×1` kernel, one weight per depth slice.
    Conv(Vec<T>),
}

pub fn reduce3d<T: Scalar>(features: &Tensor<T>, mode: &ReduceMode<T>) -> Result<Tensor<T>> {
    let s = features.shape();
    if s.len() != 3 || s[0] == 0 {
        return Err(HarnessError::Shape(format!("reduce3d: expected a non-empty D×W×H map, got {s:?}")));
    }
    let (d, plane) = (s[0], s[1] * s[2]);
    let x = features.data();
    let out: Vec<T> = match mode {
        ReduceMode::Avg => {
            let k = T::one() / T::lit(d as f64);
            (0..plane).map(|p| (0..d).map(|z| x[z * plane + p]).sum::<T>() * k).collect()
        }
        ReduceMode::Max => (0..plane)
            .map(|p| (1..d).fold(x[p], |m, z| m.max(x[z * plane + p])))
            .collect(),
        ReduceMode::Conv(w) => {
            if w.len() != d {
                return Err(HarnessError::Shape(format!("reduce3d: {} conv weights for depth {d}", w.len())));
            }
            (0..plane).map(|p| (0..d).map(|z| w[z] * x[z * plane + p]).sum::<T>()).collect()
        }
    };
    Ok(Tensor::from_vec(&s[1..], out)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_slice_is_identity() {
        let t = Tensor::from_vec(&[1, 2, 2], vec![1.0f64, -2.0, 3.0, 4.0]).unwrap();
        for m in [ReduceMode::Avg, ReduceMode::Max, ReduceMode::Conv(vec![1.0])] {
            assert_eq!(reduce3d(&t, &m).unwrap().data(), &[1.0, -2.0, 3.0, 4.0]);
        }
    }

    #[test]
    fn constant_volume() {
        let t = Tensor::filled(&[3, 2, 2], 2.5f64);
        assert!(reduce3d(&t, &ReduceMode::Avg).unwrap().data().iter().all(|&v| (v - 2.5).abs() < 1e-15));
        assert!(reduce3d(&t, &ReduceMode::Max).unwrap().data().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn brute_force_small_volume() {
        let v: Vec<f64> = vec![1.0, 5.0, -1.0, 0.5, 2.0, -3.0, 4.0, 0.0, 0.0, 1.0, -2.0, 7.0];
        let t = Tensor::from_vec(&[3, 2, 2], v.clone()).unwrap();
        let avg = reduce3d(&t, &ReduceMode::Avg).unwrap();
        let max = reduce3d(&t, &ReduceMode::Max).unwrap();
        for p in 0..4 {
            let col = [v[p], v[4 + p], v[8 + p]];
            assert!((avg.data()[p] - col.iter().sum::<f64>() / 3.0).abs() < 1e-15);
            assert_eq!(max.data()[p], col.iter().copied().fold(f64::MIN, f64::max));
        }
        assert!(reduce3d(&t, &ReduceMode::Conv(vec![1.0])).is_err());
    }
}
