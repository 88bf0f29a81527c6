//! Dimension bookkeeping: Riemann–Roch in genus 0 and 1, the deformation
//! complex, the two coderivative rows, and the sheaf of flat vector fields.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::{character_on_basis, LoopBasis, CHARACTER_TOL};
use crate::localsys::{compact_support_cohomology, StandardSurface};
use crate::numerics::Quadrature;
use crate::surface::AffineSurface;

/// `(h⁰, h¹)` of a degree-`degree` line bundle on a curve of genus 0 or 1.
/// `trivial` only matters in genus 1, degree 0.
pub fn line_bundle_dims(genus: u32, degree: i64, trivial: bool) -> Result<(usize, usize)> {
    let clamp = |x: i64| x.max(0) as usize;
    match genus {
        0 => Ok((clamp(degree + 1), clamp(-degree - 1))),
        1 => Ok(match degree {
            d if d > 0 => (d as usize, 0),
            d if d < 0 => (0, (-d) as usize),
            _ if trivial => (1, 1),
            _ => (0, 0),
        }),
        g => Err(Error::GenusUnsupported { genus: g }),
    }
}

fn check_stable(genus: u32, points: u32) -> Result<()> {
    if genus > 1 {
        return Err(Error::GenusUnsupported { genus });
    }
    if 2 * i64::from(genus) - 2 + i64::from(points) <= 0 {
        return Err(Error::UnstableConfiguration { genus, points });
    }
    Ok(())
}

/// `h⁰(Ω(C))`: degree `2g−2+n`; the canonical bundle of a torus is trivial.
pub fn h0_omega_c(genus: u32, points: u32) -> Result<usize> {
    check_stable(genus, points)?;
    Ok(line_bundle_dims(genus, 2 * i64::from(genus) - 2 + i64::from(points), true)?.0)
}

/// `h¹(T(−C))`: degree `2−2g−n`.
pub fn h1_t_minus_c(genus: u32, points: u32) -> Result<usize> {
    check_stable(genus, points)?;
    Ok(line_bundle_dims(genus, 2 - 2 * i64::from(genus) - i64::from(points), true)?.1)
}

/// Dimension of the first hypercohomology of the deformation complex, as
/// `h⁰(Ω(C)) + h¹(T(−C))`.
#[allow(non_snake_case)]
pub fn dim_H1_L(genus: u32, points: u32) -> Result<usize> {
    Ok(h0_omega_c(genus, points)? + h1_t_minus_c(genus, points)?)
}

/// Dimension of the space of affine surfaces: moduli of curves plus the
/// affine fibre of connections, `(3g−3+n) + (g+n−1)`.
pub fn dim_moduli(genus: u32, points: u32) -> Result<usize> {
    check_stable(genus, points)?;
    let (g, n) = (i64::from(genus), i64::from(points));
    Ok(((3 * g - 3 + n) + (g + n - 1)) as usize)
}

/// A three-term exact row `0 → left → middle → right → 0` as dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactRow {
    pub left: usize,
    pub middle: usize,
    pub right: usize,
    pub exact: bool,
}

impl ExactRow {
    fn new(left: usize, middle: usize, right: usize) -> Self {
        ExactRow {
            left,
            middle,
            right,
            exact: left + right == middle,
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimReport {
    pub genus: u32,
    pub points: u32,
    pub h0_omega_C: usize,
    pub h1_T_minus_C: usize,
    pub dim_H1_L: usize,
    pub dim_moduli: usize,
    /// `dim H¹(X∖C; ℂ)`, the dimension of the holonomy target.
    pub dim_hol_target: usize,
    /// `(h⁰(Ω), dim H₁(X∖C), h¹(O(−C)))`.
    pub top_row: ExactRow,
    /// `(h⁰(Ω²(C)), dim ℍ¹(L•)*, h¹(O(−C)))`.
    pub bottom_row: ExactRow,
    /// Serre duality `h¹(O(−C)) = h⁰(Ω(C))`.
    pub serre_duality: bool,
}

pub fn coderivative_rows(genus: u32, points: u32) -> Result<DimReport> {
    check_stable(genus, points)?;
    let (g, n) = (i64::from(genus), i64::from(points));
    let h0_omega = line_bundle_dims(genus, 2 * g - 2, true)?.0;
    let h1_o_minus_c = line_bundle_dims(genus, -n, true)?.1;
    let h0_quadratic = line_bundle_dims(genus, 4 * g - 4 + n, true)?.0;
    let h0_omega_c = h0_omega_c(genus, points)?;
    let h1_t = h1_t_minus_c(genus, points)?;
    let dim_h1_l = h0_omega_c + h1_t;
    // Rank of H₁ of a genus-g surface with n ≥ 1 punctures.
    let first_homology = (2 * g + n - 1) as usize;
    Ok(DimReport {
        genus,
        points,
        h0_omega_C: h0_omega_c,
        h1_T_minus_C: h1_t,
        dim_H1_L: dim_h1_l,
        dim_moduli: dim_moduli(genus, points)?,
        dim_hol_target: first_homology,
        top_row: ExactRow::new(h0_omega, first_homology, h1_o_minus_c),
        bottom_row: ExactRow::new(h0_quadratic, dim_h1_l, h1_o_minus_c),
        serre_duality: h1_o_minus_c == h0_omega_c,
    })
}

/// Cohomology of the sheaf of flat vector fields vanishing on the cone points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransDims {
    pub h0: usize,
    pub h1: usize,
    pub h2: usize,
    /// Trivial holonomy on the basis loops.
    pub translation: bool,
    /// `|C′|`, cone points that are not integral poles.
    pub punctures: usize,
    pub integral_poles: usize,
    /// `χ(trans) − χ(T(−C)) + χ(O) − |P_ℤ|`; zero when the sequence is exact.
    pub euler_defect: i64,
}

fn snap(z: Complex64) -> Complex64 {
    if (z - 1.0).norm() <= CHARACTER_TOL {
        Complex64::new(1.0, 0.0)
    } else {
        z
    }
}

pub fn trans_dims(surface: &AffineSurface, q: &Quadrature) -> Result<TransDims> {
    let basis = LoopBasis::standard(surface);
    let report = character_on_basis(surface, &basis, q)?;
    let translation = report.is_trivial();
    let cone = surface.cone_points();
    let open: Vec<usize> = (0..cone.len()).filter(|&j| !cone[j].is_integral_pole()).collect();
    let integral_poles = cone.len() - open.len();
    let genus = surface.genus();
    let model = StandardSurface::new(genus as usize, open.len())?;
    let chi_of = |id: &str| {
        report
            .chi(id)
            .map(snap)
            .ok_or_else(|| Error::InvalidLoop(format!("basis has no loop {id}")))
    };
    let lattice: Vec<Complex64> = if genus == 1 {
        vec![chi_of("a")?, chi_of("b")?]
    } else {
        Vec::new()
    };
    let punctures: Vec<Complex64> = open.iter().map(|j| chi_of(&format!("c{j}"))).collect::<Result<_>>()?;
    let chi = model.character_from_punctures(&lattice, &punctures)?;
    let h1 = compact_support_cohomology(&model.complex, &chi)?.dims[1];
    let h2 = usize::from(translation);
    let poles_only = cone.iter().all(|c| c.order.im.abs() <= 1e-9 && c.order.re <= -1.0 + 1e-9);
    let h0 = usize::from(translation && poles_only);
    let (g, n) = (i64::from(genus), cone.len() as i64);
    let euler_trans = h0 as i64 - h1 as i64 + h2 as i64;
    let euler_defect = euler_trans - (3 - 3 * g - n) + (1 - g) - integral_poles as i64;
    Ok(TransDims {
        h0,
        h1,
        h2,
        translation,
        punctures: open.len(),
        integral_poles,
        euler_defect,
    })
}
