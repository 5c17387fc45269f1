//! Sparse diffusion-convolutional neural networks for node classification.
//!
//! The pipeline: load or generate a [`GraphDataset`], turn its adjacency
//! into a random-walk transition matrix, build a thresholded
//! [`DiffusionKernel`], diffuse the node features through every hop, and
//! train a [`DcnnModel`] on top with full-batch gradient descent.
//! [`trainer::sweep`] repeats that across thresholds and records kernel
//! density, peak stored entries, and classification metrics per threshold.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graph;
pub mod hexfloat;
pub mod kernel;
pub mod model;
pub mod sparse;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use graph::{load_dataset, make_splits, transition_matrix, DatasetPaths, GraphDataset, Split, SplitConfig};
pub use kernel::{DiffusedFeatures, DiffusionKernel, KernelMode, MemoryLedger, MemoryReport};
pub use model::{Activation, Checkpoint, DcnnModel, ForwardTrace, Gradients};
pub use sparse::{CsrMatrix, DenseMatrix};
pub use synth::{generate_synthetic, SynthKind, SynthSpec};
pub use trainer::{evaluate, sweep, train, train_with_kernel, Metrics, SweepReport, ThresholdKind, TrainConfig};
