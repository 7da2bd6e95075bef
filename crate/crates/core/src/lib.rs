//! Stabilizer-free C0 weak Galerkin finite elements for the biharmonic
//! equation `Δ²u = f` on polygonal domains, together with the stabilized C0
//! weak Galerkin and C0 interior penalty methods it is compared against.

pub mod error;
pub mod mesh;
pub mod polybasis;
pub mod space;
pub mod sparse;
pub mod weaklap;
pub mod assemble;
pub mod solve;
pub mod errnorms;
pub mod cli;

pub use error::{Error, Result};
