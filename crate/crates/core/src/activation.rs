//! Gradient-weighted activation mapping (AM) and its thresholded mask.

use crate::curve::Region;
use crate::error::{Error, Result};
use crate::scalar::{sigmoid, Scalar};
use crate::tensor::Tensor;
use crate::vh::ActivationMask;

/// Threshold used when none is configured: the logistic midpoint.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Spatial importance map, same extents as one feature map.
pub type ActivationMap<T> = Tensor<T>;

/// Channel-first stack of 2D or 3D feature maps, shape `[channels, ...spatial]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStack<T> {
    maps: Tensor<T>,
}

impl<T: Scalar> FeatureStack<T> {
    pub fn new(maps: Tensor<T>) -> Result<Self> {
        if maps.ndim() != 3 && maps.ndim() != 4 {
            return Err(Error::InvalidDimension(maps.ndim().saturating_sub(1)));
        }
        if maps.is_empty() {
            return Err(Error::Empty("feature stack"));
        }
        if !maps.is_finite() {
            return Err(Error::NonFinite("feature stack"));
        }
        Ok(Self { maps })
    }

    pub fn from_maps(maps: &[Tensor<T>]) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Empty("feature stack"));
        }
        Self::new(Tensor::stack(maps)?)
    }

    pub fn channels(&self) -> usize {
        self.maps.shape()[0]
    }

    pub fn spatial_shape(&self) -> &[usize] {
        &self.maps.shape()[1..]
    }

    pub fn channel(&self, c: usize) -> Tensor<T> {
        self.maps.index_axis0(c)
    }

    pub fn as_tensor(&self) -> &Tensor<T> {
        &self.maps
    }
}

/// Per-class gradients of the class scores with respect to each feature map,
/// shape `[classes, channels, ...spatial]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientStack<T> {
    grads: Tensor<T>,
}

impl<T: Scalar> GradientStack<T> {
    pub fn new(grads: Tensor<T>) -> Result<Self> {
        if grads.ndim() != 4 && grads.ndim() != 5 {
            return Err(Error::InvalidDimension(grads.ndim().saturating_sub(2)));
        }
        Ok(Self { grads })
    }

    /// Wraps gradients already summed over `classes` classes. Each class slab
    /// holds `sum / classes`, so the double mean still divides by `z·c`.
    pub fn accumulated(sum: &FeatureStack<T>, classes: usize) -> Result<Self> {
        if classes == 0 {
            return Err(Error::Empty("gradient classes"));
        }
        let share = sum.as_tensor().scale(T::one() / T::lit(classes as f64));
        let slabs = vec![share; classes];
        Self::new(Tensor::stack(&slabs)?)
    }

    pub fn classes(&self) -> usize {
        self.grads.shape()[0]
    }

    pub fn channels(&self) -> usize {
        self.grads.shape()[1]
    }

    pub fn spatial_shape(&self) -> &[usize] {
        &self.grads.shape()[2..]
    }

    /// Spatial positions per map.
    pub fn positions(&self) -> usize {
        self.spatial_shape().iter().product()
    }

    pub fn as_tensor(&self) -> &Tensor<T> {
        &self.grads
    }
}

/// γ per channel: the mean gradient over all spatial positions and classes.
pub fn channel_weights<T: Scalar>(grads: &GradientStack<T>) -> Result<Vec<T>> {
    let (c, m, z) = (grads.classes(), grads.channels(), grads.positions());
    if c == 0 || m == 0 || z == 0 {
        return Err(Error::Empty("gradient stack"));
    }
    if !grads.as_tensor().is_finite() {
        return Err(Error::NonFinite("gradient stack"));
    }
    let data = grads.as_tensor().data();
    let denom = (z * c) as f64;
    Ok((0..m)
        .map(|ch| {
            // Accumulate in f64 with a fixed order so f32 stacks stay deterministic and accurate.
            let s: f64 = (0..c)
                .flat_map(|k| {
                    let start = (k * m + ch) * z;
                    data[start..start + z].iter()
                })
                .map(|g| g.to_f64_lossy())
                .sum();
            T::lit(s / denom)
        })
        .collect())
}

/// AM(x) = Σ_ch γ_ch · η_ch(x).
pub fn activation_map<T: Scalar>(features: &FeatureStack<T>, gamma: &[T]) -> Result<ActivationMap<T>> {
    if gamma.len() != features.channels() {
        return Err(Error::ChannelMismatch {
            expected: features.channels(),
            found: gamma.len(),
        });
    }
    let shape = features.spatial_shape().to_vec();
    let z: usize = shape.iter().product();
    let data = features.as_tensor().data();
    let mut out = vec![T::zero(); z];
    for (ch, &g) in gamma.iter().enumerate() {
        for (o, &v) in out.iter_mut().zip(&data[ch * z..(ch + 1) * z]) {
            *o = *o + g * v;
        }
    }
    Tensor::from_vec(&shape, out)
}

/// Cell active iff `sigmoid(AM) > θ` (strict); θ must lie in (0, 1).
pub fn activation_mask<T: Scalar>(am: &ActivationMap<T>, theta: f64) -> Result<ActivationMask> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidThreshold(theta));
    }
    let region = Region::new(am.shape())?;
    let active = am
        .data()
        .iter()
        .map(|&v| sigmoid(v.to_f64_lossy()) > theta)
        .collect();
    ActivationMask::new(region, active)
}
