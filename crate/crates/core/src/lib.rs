//! Hilbert-curve toolkit for cross-dimensional feature distillation.
//!
//! The crate builds vanilla Hilbert curves (from the L-system walking guides
//! and from a per-level coordinate-transform construction), variable-length
//! Hilbert curves that stay dense over activated cells, and the losses that
//! compare 3D teacher and 2D student feature maps after flattening them along
//! those curves.
//!
//! Numeric code is generic over [`Scalar`]; the `*32` / `*64` aliases below
//! fix the scalar type for callers that do not care.

pub mod activation;
pub mod curve;
pub mod error;
pub mod losses;
pub mod scalar;
pub mod tensor;
pub mod tensor_file;
pub mod vh;

pub use activation::{ActivationMap, DEFAULT_THRESHOLD, activation_map, activation_mask, channel_weights, FeatureStack, GradientStack};
pub use curve::{
    build_mapping, expand_guides, render_svg, select_order, transform_index, CurveSpec, Heading,
    LatticePoint, Layout, MappingTable, Region, Token, WalkGuide,
};
pub use error::{Error, Result};
pub use losses::{
    distill_channels, hd_loss_maps, rescale_indices, scatter_code, AlignGrads,
    fc_align, hd_loss, map_features, map_features_weighted, nearest_rescale, total_loss, vhd_loss,
    AlignLayer, CodeLoss, LinearCode, LossOptions, LossReport, Sampling,
};
pub use scalar::Scalar;
pub use tensor::Tensor;
pub use vh::{subtree_activity, vh_expand, vh_mapping, ActivationMask, SummedArea, VhMappingTable};

pub type Tensor32 = Tensor<f32>;
pub type Tensor64 = Tensor<f64>;
pub type LinearCode32 = LinearCode<f32>;
pub type LinearCode64 = LinearCode<f64>;
pub type LossReport32 = LossReport<f32>;
pub type LossReport64 = LossReport<f64>;
pub type AlignLayer32 = AlignLayer<f32>;
pub type AlignLayer64 = AlignLayer<f64>;
pub type FeatureStack32 = FeatureStack<f32>;
pub type FeatureStack64 = FeatureStack<f64>;
