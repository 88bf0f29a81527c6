use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::character::Character;
use super::complex::SurfaceComplex;
use super::twisted::compact_support_cohomology;
use crate::error::{Error, Result};
use crate::numerics::linalg;

/// Below this value of σ_min/σ_max the pairing counts as degenerate.
pub const NONDEGENERACY_TOL: f64 = 1e-8;
const UNITARY_TOL: f64 = 1e-12;

/// The cup-product form on compactly supported `H¹` for a unitary character.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    /// Row-major Hermitian matrix on the `H¹_c` basis.
    pub matrix: Vec<Vec<Complex64>>,
    /// Numbers of positive and negative eigenvalues.
    pub signature: (usize, usize),
    /// Smallest singular value.
    pub margin: f64,
    /// σ_min over the larger of σ_max and the norm of the cochain-level
    /// cup form (1 for the empty matrix).
    pub ratio: f64,
    /// Largest entry of `H − H*`.
    pub hermitian_defect: f64,
}

impl PairingReport {
    pub fn dimension(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.ratio >= NONDEGENERACY_TOL
    }
}

/// `i·⟨φ ∪ ψ̄, [K]⟩` on an orthonormal basis of `H¹_c(K; ℂ_χ)`, without the
/// nondegeneracy gate.
pub fn pairing_matrix(k: &SurfaceComplex, chi: &Character) -> Result<PairingReport> {
    chi.check_unitary(UNITARY_TOL)?;
    let h = compact_support_cohomology(k, chi)?;
    let basis = &h.h1_basis;
    let n = basis.len();
    // Front face [a,b] in the fiber at a; back face [b,c] transported from b to a.
    let tris: Vec<(usize, usize, Complex64, f64)> = (0..k.triangles().len())
        .map(|t| {
            let (s, sign) = k.oriented_triangle(t);
            let ab = k.edge(s[0], s[1]).unwrap();
            let bc = k.edge(s[1], s[2]).unwrap();
            (ab, bc, chi.value(ab).conj(), sign)
        })
        .collect();
    let raw = DMatrix::from_fn(n, n, |i, j| {
        let (phi, psi) = (&basis[i], &basis[j]);
        let sum: Complex64 = tris
            .iter()
            .map(|&(ab, bc, g, sign)| phi[ab] * g * psi[bc].conj() * sign)
            .sum();
        Complex64::i() * sum
    });
    // The same form on all relative cochains sets the scale, so that an
    // identically vanishing form is not rescued by σ_min/σ_max = 1.
    let relative: Vec<usize> = (0..k.edges().len()).filter(|&e| !k.is_boundary_edge(e)).collect();
    let mut slot = vec![None; k.edges().len()];
    for (p, &e) in relative.iter().enumerate() {
        slot[e] = Some(p);
    }
    let mut cochain_form = DMatrix::<Complex64>::zeros(relative.len(), relative.len());
    for &(ab, bc, g, sign) in &tris {
        if let (Some(p), Some(q)) = (slot[ab], slot[bc]) {
            cochain_form[(p, q)] += g * sign;
        }
    }
    let cochain_scale = linalg::spectral_norm(&cochain_form);
    let defect = (&raw - raw.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let herm = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let (signature, margin, ratio) = if n == 0 {
        ((0, 0), 0.0, 1.0)
    } else {
        let sv = raw.singular_values();
        let (smin, smax) = (sv.min(), sv.max());
        let denom = smax.max(cochain_scale);
        let eig = herm.symmetric_eigenvalues();
        let pos = eig.iter().filter(|&&e| e > NONDEGENERACY_TOL * denom).count();
        let neg = eig.iter().filter(|&&e| e < -NONDEGENERACY_TOL * denom).count();
        ((pos, neg), smin, if denom > 0.0 { smin / denom } else { 0.0 })
    };
    let matrix = (0..n).map(|i| (0..n).map(|j| raw[(i, j)]).collect()).collect();
    Ok(PairingReport {
        matrix,
        signature,
        margin,
        ratio,
        hermitian_defect: defect,
    })
}

/// The Hermitian cup-product pairing; a degenerate form is an error.
pub fn veech_pairing(k: &SurfaceComplex, chi: &Character) -> Result<PairingReport> {
    let report = pairing_matrix(k, chi)?;
    if !report.is_nondegenerate() {
        return Err(Error::DegeneratePairing { ratio: report.ratio });
    }
    Ok(report)
}
