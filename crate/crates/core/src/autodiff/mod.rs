//! Reverse-mode differentiation over dense `f64` tensors.
//!
//! A [`Graph`] is a tape: every op appends a node holding its output value and
//! whatever it needs for the backward rule. [`Graph::backward`] walks the tape
//! in reverse and adds (never assigns) into the gradient buffer of every node
//! that contributed to the loss.
//!
//! Parameters live outside the graph in a [`ParamStore`]; a training step binds
//! them as leaves, runs forward and backward, pulls the leaf gradients back into
//! the store and calls [`sgd_step`].

mod checkpoint;
mod gradcheck;
mod graph;
mod params;
mod tensor;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use gradcheck::{grad_check, relative_error};
pub use graph::{Graph, Var};
pub use params::{glorot_limit, sgd_step, ParamStore, Parameter};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AutodiffError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },
    #[error("backward requires a single-element loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("unknown parameter {0:?}")]
    UnknownParameter(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
