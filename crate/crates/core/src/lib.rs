//! Phase-field (AT1) brittle fracture of adhesive asperity junctions in plane strain.

pub mod energy;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod pipeline;
pub mod post;
pub mod solver;
pub mod study;
pub mod tensor;

pub use error::{Error, Result};
