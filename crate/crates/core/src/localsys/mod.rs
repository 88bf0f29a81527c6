//! Rank-one local systems on triangulated surfaces with boundary.

pub mod character;
pub mod complex;
pub mod pairing;
pub mod standard;
pub mod twisted;

pub use character::{Character, CharacterData, Generators};
pub use complex::{ComplexData, SurfaceComplex};
pub use pairing::{pairing_matrix, veech_pairing, PairingReport};
pub use standard::{barycentric_refinement, StandardSurface};
pub use twisted::{compact_support_cohomology, duality_dims, twisted_cohomology, CochainComplex, TwistedCohomology};
