//! Synthetic volumetric classification task.
//!
//! Each volume holds one bright bar in the `(H, W)` plane, repeated through
//! every depth slice, under independent Gaussian noise. The class is the bar's
//! orientation: rows, columns, diagonal, anti-diagonal. The teacher sees the
//! whole noisy volume; the student sees one slice, so it gets the same
//! geometry with far less signal.

use hd_core::Tensor;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const CLASSES: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub samples: usize,
    pub side: usize,
    pub noise: f32,
    pub amplitude: f32,
    /// Fraction of samples in the training split.
    pub train_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            samples: 400,
            side: 16,
            noise: 0.5,
            amplitude: 1.0,
            train_fraction: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    /// `[1, side, side, side]`.
    pub volume: Tensor<f32>,
    /// `[1, side, side]`, the middle depth slice.
    pub slice: Tensor<f32>,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthDataset {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub seed: u64,
    pub config: SynthConfig,
}

/// Whether cell `(y, x)` lies on the bar of `class` at offset `o`.
pub fn on_bar(class: usize, o: i64, side: i64, y: i64, x: i64) -> bool {
    match class {
        0 => y == o,
        1 => x == o,
        2 => y - x == o - side / 2,
        _ => y + x == o + side / 2,
    }
}

/// Recovers the label of a noiseless volume from the generative rule.
pub fn classify_clean(volume: &Tensor<f32>) -> Option<usize> {
    let side = volume.shape()[1] as i64;
    let slice = |y: i64, x: i64| volume.get(&[0, 0, y as usize, x as usize]) > 0.0;
    (0..CLASSES).find(|&c| (0..side).any(|o| (0..side).all(|y| (0..side).all(|x| on_bar(c, o, side, y, x) == slice(y, x)))))
}

fn make_sample(class: usize, cfg: &SynthConfig, noise: Option<&Normal<f32>>, rng: &mut ChaCha8Rng) -> Sample {
    let side = cfg.side;
    let o = rng.gen_range(side as i64 / 4..side as i64 * 3 / 4);
    let plane: Vec<f32> = (0..side * side)
        .map(|k| {
            let (y, x) = ((k / side) as i64, (k % side) as i64);
            if on_bar(class, o, side as i64, y, x) {
                cfg.amplitude
            } else {
                0.0
            }
        })
        .collect();
    let mut vol = Vec::with_capacity(side * side * side);
    for _ in 0..side {
        for &v in &plane {
            vol.push(v + noise.map_or(0.0, |n| n.sample(rng)));
        }
    }
    let mid = side / 2;
    let slice = vol[mid * side * side..(mid + 1) * side * side].to_vec();
    Sample {
        volume: Tensor::from_vec(&[1, side, side, side], vol).expect("volume shape"),
        slice: Tensor::from_vec(&[1, side, side], slice).expect("slice shape"),
        label: class,
    }
}

/// Deterministic dataset; classes are balanced within one sample overall and
/// both splits are drawn from a seeded shuffle.
pub fn make_synthetic(cfg: &SynthConfig, seed: u64) -> Result<SynthDataset> {
    if cfg.samples < 2 || cfg.side < 4 || cfg.side % 4 != 0 {
        return Err(HarnessError::Config {
            key: "data".into(),
            reason: format!("need at least 2 samples and a side divisible by 4, got {} and {}", cfg.samples, cfg.side),
        });
    }
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(HarnessError::Config {
            key: "train_fraction".into(),
            reason: "must lie in (0, 1)".into(),
        });
    }
    let noise = if cfg.noise > 0.0 {
        Some(Normal::new(0.0, cfg.noise).map_err(|e| HarnessError::Config {
            key: "noise".into(),
            reason: e.to_string(),
        })?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<Sample> = (0..cfg.samples)
        .map(|i| make_sample(i % CLASSES, cfg, noise.as_ref(), &mut rng))
        .collect();
    samples.shuffle(&mut rng);
    let n_train = ((cfg.samples as f64 * cfg.train_fraction).round() as usize).clamp(1, cfg.samples - 1);
    let test = samples.split_off(n_train);
    Ok(SynthDataset {
        train: samples,
        test,
        seed,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_balanced() {
        let cfg = SynthConfig::default();
        let a = make_synthetic(&cfg, 3).unwrap();
        assert_eq!(a, make_synthetic(&cfg, 3).unwrap());
        let mut counts = [0usize; CLASSES];
        for s in a.train.iter().chain(&a.test) {
            counts[s.label] += 1;
        }
        assert_eq!(counts, [100; 4]);
        assert_eq!(a.train.len(), 320);
        assert_ne!(a, make_synthetic(&cfg, 4).unwrap());
    }

    #[test]
    fn clean_volumes_follow_the_rule() {
        let cfg = SynthConfig {
            noise: 0.0,
            samples: 40,
            ..SynthConfig::default()
        };
        let d = make_synthetic(&cfg, 1).unwrap();
        for s in d.train.iter().chain(&d.test) {
            assert_eq!(classify_clean(&s.volume), Some(s.label));
        }
    }

    #[test]
    fn slice_is_middle_depth() {
        let d = make_synthetic(&SynthConfig { samples: 8, ..SynthConfig::default() }, 2).unwrap();
        let s = &d.train[0];
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(s.slice.get(&[0, y, x]), s.volume.get(&[0, 8, y, x]));
            }
        }
    }
}
