//! Exact widths of Hamming balls and spheres around a fixed set in the
//! Boolean lattice.

pub mod antichain;
pub mod certificate;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod flow;
pub mod poset;
pub mod report;
pub mod sweep;

pub use error::{Error, Result};
