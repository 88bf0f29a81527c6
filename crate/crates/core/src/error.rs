use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integrand is not finite at z = {at}")]
    NonFiniteEvaluation { at: Complex64 },

    #[error("quadrature did not reach abs_tol = {abs_tol:e} after {refinements} refinements")]
    ToleranceNotReached { abs_tol: f64, refinements: usize },

    #[error("successive arguments differ by {step} >= pi at sample {index}")]
    BranchJump { index: usize, step: f64 },

    #[error("lattice parameter tau = {tau} does not have positive imaginary part")]
    DegenerateLattice { tau: Complex64 },

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("evaluation at cone point {index} (z = {at})")]
    EvaluationAtConePoint { index: usize, at: Complex64 },

    #[error("exponential action coefficients sum to {sum}, expected 0")]
    ResidueSumNonzero { sum: Complex64 },

    #[error("loop derivative vanishes at sample {index}")]
    ZeroDerivativeSample { index: usize },

    #[error("cone point {index} is not an integral pole")]
    NotIntegralPole { index: usize },

    #[error("invalid arc tree: {0}")]
    InvalidTree(String),

    #[error("all integral-pole residues vanish; projectivization undefined")]
    AllResiduesZero,

    #[error("surface is not a translation surface")]
    NotTranslationSurface,

    #[error("genus {genus} is not supported")]
    GenusUnsupported { genus: u32 },

    #[error("(g, n) = ({genus}, {points}) is unstable: 2g - 2 + n <= 0")]
    UnstableConfiguration { genus: u32, points: u32 },

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("character is not flat on triangle {triangle}: holonomy {holonomy}")]
    NonFlatCharacter { triangle: usize, holonomy: Complex64 },

    #[error("invalid character: {0}")]
    InvalidCharacter(String),

    #[error("character is not unitary on edge {edge}: |value| = {modulus}")]
    NonUnitaryCharacter { edge: usize, modulus: f64 },

    #[error("pairing is degenerate: sigma_min / sigma_max = {ratio:e}")]
    DegeneratePairing { ratio: f64 },

    #[error("perturbation {direction} moved a cone point onto a basis loop")]
    StepCollision { direction: usize },

    #[error("surface is not in the admissible locus: {0}")]
    NotInAdmissibleLocus(String),

    #[error("Newton correction did not converge (residual {residual:e})")]
    NewtonDivergence { residual: f64 },

    #[error("isoresidual leaf is a point at this surface (kernel is zero)")]
    ZeroKernel,

    #[error("invalid family: {0}")]
    InvalidFamily(String),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFiniteEvaluation { .. } => "NonFiniteEvaluation",
            Error::ToleranceNotReached { .. } => "ToleranceNotReached",
            Error::BranchJump { .. } => "BranchJump",
            Error::DegenerateLattice { .. } => "DegenerateLattice",
            Error::InvalidLoop(_) => "InvalidLoop",
            Error::InvalidSurface(_) => "InvalidSurface",
            Error::EvaluationAtConePoint { .. } => "EvaluationAtConePoint",
            Error::ResidueSumNonzero { .. } => "ResidueSumNonzero",
            Error::ZeroDerivativeSample { .. } => "ZeroDerivativeSample",
            Error::NotIntegralPole { .. } => "NotIntegralPole",
            Error::InvalidTree(_) => "InvalidTree",
            Error::AllResiduesZero => "AllResiduesZero",
            Error::NotTranslationSurface => "NotTranslationSurface",
            Error::GenusUnsupported { .. } => "GenusUnsupported",
            Error::UnstableConfiguration { .. } => "UnstableConfiguration",
            Error::InvalidComplex(_) => "InvalidComplex",
            Error::NonFlatCharacter { .. } => "NonFlatCharacter",
            Error::InvalidCharacter(_) => "InvalidCharacter",
            Error::NonUnitaryCharacter { .. } => "NonUnitaryCharacter",
            Error::DegeneratePairing { .. } => "DegeneratePairing",
            Error::StepCollision { .. } => "StepCollision",
            Error::NotInAdmissibleLocus(_) => "NotInAdmissibleLocus",
            Error::NewtonDivergence { .. } => "NewtonDivergence",
            Error::ZeroKernel => "ZeroKernel",
            Error::InvalidFamily(_) => "InvalidFamily",
        }
    }
}
