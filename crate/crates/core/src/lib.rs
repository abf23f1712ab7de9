//! Reproducing pairs of vector families, frame and resolution operators, the
//! quotient spaces `V_φ`, and the partial-inner-product-space machinery
//! (lattices of Banach and Hilbert spaces, operators on them) around them,
//! all realised over finite measure spaces.

pub mod cli;
pub mod error;
pub mod frames;
pub mod lattice;
pub mod linalg;
pub mod measure;
pub mod operators;
pub mod par;
pub mod scales;
pub mod optim;
pub mod spaces;
pub mod sweep;
pub mod vspace;

pub use error::{Error, Result};
