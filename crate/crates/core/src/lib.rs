//! Combinatorial classification of KMS weights and states for gauge-type
//! actions on graph C*-algebras of row-finite, sink-free directed graphs.

pub mod classify;
pub mod cli;
pub mod conformal;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod lattice;
pub mod periods;
pub mod report;
pub mod spectral;
pub mod structure;

pub use error::{Error, Result};
