//! Holonomy characters and turning numbers along loops.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{Path, Quadrature};
use crate::numerics::LoopPath;
use crate::surface::AffineSurface;

pub const CHARACTER_TOL: f64 = 1e-9;

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// Integration path of `lp` on `surface`.
pub fn loop_path(surface: &AffineSurface, lp: &LoopPath) -> Result<Path> {
    if lp.is_lattice() && surface.genus() != 1 {
        return Err(Error::InvalidLoop("lattice loops need a genus-1 surface".into()));
    }
    lp.to_path(surface.tau())
}

/// `∮_loop Γ dz`.
pub fn loop_integral(surface: &AffineSurface, lp: &LoopPath, q: &Quadrature) -> Result<Complex64> {
    surface.connection_integral(&loop_path(surface, lp)?, q)
}

/// `−∮Γ`, the logarithm of the holonomy with its branch fixed by the path.
pub fn log_holonomy(surface: &AffineSurface, lp: &LoopPath, q: &Quadrature) -> Result<Complex64> {
    Ok(-loop_integral(surface, lp, q)?)
}

/// `χ(γ) = exp(−∮_γ Γ)`.
pub fn holonomy(surface: &AffineSurface, lp: &LoopPath, q: &Quadrature) -> Result<Complex64> {
    Ok(log_holonomy(surface, lp, q)?.exp())
}

/// `τ(γ) = wind(γ') − (1/2πi)∮_γ Γ`.
pub fn turning_number(surface: &AffineSurface, lp: &LoopPath, q: &Quadrature) -> Result<Complex64> {
    let wind = lp.tangent_winding()?;
    Ok(wind - loop_integral(surface, lp, q)? / two_pi_i())
}

/// Circle around a cone point, following the point when it moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeLoop {
    pub index: usize,
    pub radius: f64,
}

/// A marking: small loops around the cone points and, on a torus, the two
/// lattice loops from a fixed basepoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopBasis {
    pub cone: Vec<ConeLoop>,
    pub lattice_basepoint: Option<Complex64>,
}

impl LoopBasis {
    pub fn standard(surface: &AffineSurface) -> Self {
        let cone = (0..surface.cone_points().len())
            .map(|index| ConeLoop {
                index,
                radius: 0.25 * finite_or(surface.separation(index), 1.0),
            })
            .collect();
        let lattice_basepoint = surface.tau().map(|tau| best_basepoint(surface, tau));
        LoopBasis {
            cone,
            lattice_basepoint,
        }
    }

    /// `(id, loop)` pairs: `c<j>` for cone loops, then `a`, `b`.
    pub fn loops(&self, surface: &AffineSurface) -> Vec<(String, LoopPath)> {
        let mut out: Vec<(String, LoopPath)> = self
            .cone
            .iter()
            .map(|c| {
                let center = surface.cone_points()[c.index].z;
                (format!("c{}", c.index), LoopPath::circle(center, c.radius))
            })
            .collect();
        if let Some(basepoint) = self.lattice_basepoint {
            out.push(("a".into(), LoopPath::LatticeA { basepoint }));
            out.push(("b".into(), LoopPath::LatticeB { basepoint }));
        }
        out
    }

    pub fn lattice_loops(&self) -> Vec<LoopPath> {
        self.lattice_basepoint
            .map(|basepoint| vec![LoopPath::LatticeA { basepoint }, LoopPath::LatticeB { basepoint }])
            .unwrap_or_default()
    }
}

fn finite_or(x: f64, fallback: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        fallback
    }
}

/// Basepoint in the fundamental cell whose two lattice segments stay farthest
/// from the cone points.
fn best_basepoint(surface: &AffineSurface, tau: Complex64) -> Complex64 {
    const GRID: usize = 24;
    let mut best = (Complex64::new(0.0, 0.0), f64::NEG_INFINITY);
    for i in 0..GRID {
        for j in 0..GRID {
            let x = (i as f64 + 0.5) / GRID as f64;
            let y = (j as f64 + 0.5) / GRID as f64;
            let b = x + y * tau;
            let a = surface.path_clearance(&Path::line(b, b + 1.0)).1;
            let bb = surface.path_clearance(&Path::line(b, b + tau)).1;
            let score = a.min(bb);
            if score > best.1 + 1e-12 {
                best = (b, score);
            }
        }
    }
    best.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopValue {
    pub id: String,
    pub chi: Complex64,
    pub tau: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyReport {
    pub loops: Vec<LoopValue>,
    /// Product of the cone-loop holonomies.
    pub cone_product: Complex64,
    pub consistent: bool,
}

impl HolonomyReport {
    pub fn chi(&self, id: &str) -> Option<Complex64> {
        self.loops.iter().find(|l| l.id == id).map(|l| l.chi)
    }

    pub fn is_trivial(&self) -> bool {
        self.loops.iter().all(|l| (l.chi - 1.0).norm() <= CHARACTER_TOL)
    }
}

pub fn character_on_basis(
    surface: &AffineSurface,
    basis: &LoopBasis,
    q: &Quadrature,
) -> Result<HolonomyReport> {
    let mut loops = Vec::new();
    let mut framing_ok = true;
    for (id, lp) in basis.loops(surface) {
        let integral = loop_integral(surface, &lp, q)?;
        let chi = (-integral).exp();
        let tau = lp.tangent_winding()? - integral / two_pi_i();
        let framed = (two_pi_i() * tau).exp();
        framing_ok &= (framed - chi).norm() <= CHARACTER_TOL * chi.norm().max(1.0);
        loops.push(LoopValue { id, chi, tau });
    }
    let cone_product: Complex64 = loops
        .iter()
        .filter(|l| l.id.starts_with('c'))
        .map(|l| l.chi)
        .product();
    let consistent = framing_ok && (cone_product - 1.0).norm() <= CHARACTER_TOL;
    Ok(HolonomyReport {
        loops,
        cone_product,
        consistent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslationClass {
    FiniteArea,
    InfiniteArea,
    NotTranslation,
}

pub fn is_translation_surface(surface: &AffineSurface, q: &Quadrature) -> Result<TranslationClass> {
    let report = character_on_basis(surface, &LoopBasis::standard(surface), q)?;
    Ok(classify(surface, &report))
}

pub fn classify(surface: &AffineSurface, report: &HolonomyReport) -> TranslationClass {
    if !report.is_trivial() {
        TranslationClass::NotTranslation
    } else if surface.cone_points().iter().all(|c| c.order.re > -1.0) {
        TranslationClass::FiniteArea
    } else {
        TranslationClass::InfiniteArea
    }
}
