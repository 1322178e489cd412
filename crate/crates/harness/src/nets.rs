//! Two-block convolutional classifiers: 3D for the teacher, 2D for the student.
//!
//! `conv(3) → ReLU → avgpool(2)` twice, then global average pool and a linear
//! head. On 16-sided inputs the block outputs are 8- and 4-sided.

use hd_core::{Scalar, Tensor};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{HarnessError, Result};
use crate::tape::{Tape, Var};

#[derive(Clone, Debug, PartialEq)]
pub struct Net<T> {
    /// Spatial dimensionality, 2 or 3.
    pub dims: usize,
    /// `[conv1_w, conv1_b, conv2_w, conv2_b, fc_w, fc_b]`.
    pub params: Vec<Tensor<T>>,
}

/// Nodes recorded by one forward pass.
pub struct Forward {
    pub params: Vec<Var>,
    /// Block outputs, index 0 for block 1.
    pub blocks: [Var; 2],
    pub logits: Var,
}

fn he<T: Scalar>(shape: &[usize], fan_in: usize, rng: &mut impl Rng) -> Tensor<T> {
    let dist = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
    Tensor::from_fn(shape, |_| T::lit(dist.sample(rng)))
}

impl<T: Scalar> Net<T> {
    pub fn new(dims: usize, widths: [usize; 2], classes: usize, rng: &mut impl Rng) -> Result<Self> {
        if dims != 2 && dims != 3 {
            return Err(HarnessError::Shape(format!("network dims {dims}")));
        }
        let k = vec![3usize; dims];
        let shape = |o: usize, i: usize| [vec![o, i], k.clone()].concat();
        let taps = 3usize.pow(dims as u32);
        let [c1, c2] = widths;
        Ok(Self {
            dims,
            params: vec![
                he(&shape(c1, 1), taps, rng),
                Tensor::zeros(&[c1]),
                he(&shape(c2, c1), taps * c1, rng),
                Tensor::zeros(&[c2]),
                he(&[classes, c2], c2, rng),
                Tensor::zeros(&[classes]),
            ],
        })
    }

    pub fn widths(&self) -> [usize; 2] {
        [self.params[0].shape()[0], self.params[2].shape()[0]]
    }

    /// Records the forward pass for a `[B, 1, ...spatial]` batch.
    pub fn forward(&self, tape: &mut Tape<T>, x: Var) -> Result<Forward> {
        let p: Vec<Var> = self.params.iter().map(|t| tape.leaf(t.clone())).collect();
        let h = tape.conv(x, p[0], p[1])?;
        let h = tape.relu(h);
        let b1 = tape.avg_pool2(h)?;
        let h = tape.conv(b1, p[2], p[3])?;
        let h = tape.relu(h);
        let b2 = tape.avg_pool2(h)?;
        let g = tape.gap(b2)?;
        let logits = tape.linear(g, p[4], p[5])?;
        Ok(Forward {
            params: p,
            blocks: [b1, b2],
            logits,
        })
    }

    /// Plain SGD step.
    pub fn sgd(&mut self, grads: &[Option<&Tensor<T>>], lr: T) -> Result<()> {
        for (p, g) in self.params.iter_mut().zip(grads) {
            if let Some(g) = g {
                p.add_scaled(g, -lr)?;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

/// Stacks per-sample `[1, ...]` inputs into a `[B, 1, ...]` batch.
pub fn batch<T: Scalar>(items: &[&Tensor<T>]) -> Result<Tensor<T>> {
    let owned: Vec<Tensor<T>> = items.iter().map(|t| (*t).clone()).collect();
    Ok(Tensor::stack(&owned)?)
}
