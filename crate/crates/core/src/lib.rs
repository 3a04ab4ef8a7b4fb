//! Matrix-product-state toolkit for measurement-based gate teleportation.
//!
//! Covers the cluster state, a one-parameter deformation with bond
//! dimension 2 and a bond-dimension-4 direct-sum family, together with
//! correlation-space teleportation, generalized stabilizers and the
//! entanglement spectrum. Every fast path has a dense-statevector oracle.

pub mod entanglement;
pub mod error;
pub mod cli;
pub mod families;
pub mod mps;
pub mod numerics;
pub mod operator;
pub mod spt;
pub mod teleport;

pub use error::{Error, Result};
pub use mps::{DenseState, MpsState, SiteTensor};
pub use numerics::{CMatrix, CVector, C64};
pub use operator::{LocalOperator, OperatorString};
