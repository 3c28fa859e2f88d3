//! Simulation of bipartite pure-state entanglement concentration under local
//! operations and classical communication.
//!
//! The crate builds optimal single-copy concentration filters, decides when
//! one local filter concentrates two different states at once (exactly when
//! they share the marginal of the filtering party), checks the matrix
//! identities behind that criterion, and runs randomized searches showing
//! that no individual-pair protocol beats it. Two applications sit on top:
//! probabilistic superdense coding and the failure of single-pair
//! purification of mixed states.

pub mod concentrate;
pub mod error;
pub mod io;
pub mod lqcc;
pub mod numerics;
pub mod parallel;
pub mod rng;
pub mod states;
pub mod superdense;
pub mod theorem;
pub mod verify;

pub use error::{Error, Result};
pub use parallel::Execution;
pub use states::{DensityMatrix, Party, PureBipartiteState, SchmidtForm};
