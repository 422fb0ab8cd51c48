//! Hand-written actor and critic networks with exact gradients.

pub mod checkpoint;
pub mod kernels;
pub mod net;
pub mod optim;
mod scalar;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use net::{log_softmax_at, softmax, Layout, Net, NetError, NetShape, Tape};
pub use optim::{Adam, AnyOptimizer, Optimizer, OptimizerKind, Sgd};
pub use scalar::Scalar;

#[cfg(test)]
mod gradcheck;
