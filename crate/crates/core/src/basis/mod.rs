//! Eigenspace structure and signed eigenbasis construction.

pub mod construct;
pub mod perturb;
pub mod strong;
pub mod structure;
pub mod validate;

pub use construct::{construct_signed_basis, ConstructionConfig, PiClass, SignedBasisResult, SignedVector};
pub use perturb::{perturbation_stability_test, PerturbationReport};
pub use strong::{construct_strong_support_basis, StrongBasisConfig, StrongBasisResult, StrongVector};
pub use structure::{analyze_eigenspace, EigenspaceStructure, StructureConfig};
pub use validate::{validate_signed_basis, BoundStatus, ValidationConfig, ValidationReport, VectorCheck};
