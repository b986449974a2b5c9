//! Small-scale quantum machine learning on a statevector simulator: data
//! qubitization, variational classifiers trained with Adam, a one-qubit
//! generative model, and a classical baseline for comparison.

// `!(x > 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod circuits;
pub mod datasets;
pub mod encoding;
pub mod error;
pub mod experiments;
pub mod sim;
pub mod training;

pub use error::{Error, Result};
