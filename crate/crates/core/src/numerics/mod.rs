//! Path quadrature, branch tracking and elliptic functions.

pub mod branch;
pub mod linalg;
pub mod loops;
pub mod quadrature;
pub mod weierstrass;

pub use branch::{continuous_log, winding_number};
pub use loops::LoopPath;
pub use quadrature::{cauchy_residue, integrate, Path, Quadrature, Segment};
pub use weierstrass::{quasi_periods, weierstrass_sigma, weierstrass_zeta, LatticeData};
