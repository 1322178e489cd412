//! Desk-scale cross-dimensional distillation: a small reverse-mode tape, a 3D
//! teacher and a 2D student on synthetic volumes, depth-reducing baselines,
//! the ARI metric and mapping benchmarks.

pub mod bench;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod metrics;
pub mod nets;
pub mod reduce;
pub mod tape;
pub mod train;

pub use bench::{bench_curve, format_rows, TimingRow};
pub use data::{make_synthetic, Sample, SynthConfig, SynthDataset, CLASSES};
pub use error::{HarnessError, Result};
pub use gradcheck::{grad_check, tape_grad_check, GradCheck};
pub use metrics::{ari, mean, std_dev};
pub use nets::Net;
pub use reduce::{reduce3d, ReduceMode};
pub use tape::{DepthReduce, Grads, Tape, Var};
pub use train::{accuracy, run_arms, train_student, train_teacher, HarnessConfig, LossKind, RunReport, Teacher};
