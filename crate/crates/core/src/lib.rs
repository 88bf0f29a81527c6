pub mod cohomology;
pub mod deformation;
pub mod error;
pub mod numerics;
pub mod holonomy;
pub mod localsys;
pub mod residues;
pub mod surface;

pub use error::{Error, Result};
