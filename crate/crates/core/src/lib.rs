//! Nodal domains of eigenvectors of symmetric matrices viewed as signed graphs.

pub mod basis;
pub mod error;
pub mod fixtures;
pub mod frustration;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod nodal;
pub mod random;
pub mod rng;
pub mod spectral;

pub use error::{NodalError, Result};
pub use graph::{SignedGraph, StateVector};
pub use matrix::DenseSymmetricMatrix;
