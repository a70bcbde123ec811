//! Locally repairable convolutional codes for distributed storage.
//!
//! The crate provides exact finite-field and polynomial-matrix linear
//! algebra, a convolutional-code object model with column-distance oracles,
//! a locality layer with the block-diagonal local-code construction and
//! partial-MDP verification, an explicit MSRD outer-code construction, and
//! an erasure-repair engine (local repair plus adaptive sliding-window
//! global repair, with tail-biting termination).
//!
//! The `parallel` feature (on by default) runs the combinatorial sweeps on
//! rayon; without it everything falls back to sequential loops with
//! identical results.

pub mod codespec;
pub mod conv;
pub mod error;
pub mod field;
pub mod locality;
pub mod mat;
pub mod msrd;
pub mod poly;
pub mod polymat;
pub mod repair;
pub mod sim;
pub mod workload;

pub use conv::{ConvCode, SumRankLayout};
pub use error::{Error, Result};
pub use field::{ExtField, Fe, QMat};
pub use locality::{LocalStructure, LrccCode};
pub use polymat::PolyMatrix;
pub use repair::ErasureStream;
pub use workload::{Execution, Workload};
