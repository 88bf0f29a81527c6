use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::branch::winding_number;
use super::quadrature::Path;
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 16;

fn positive() -> i8 {
    1
}

/// A closed loop on the surface.
///
/// Lattice loops are straight segments `basepoint → basepoint + ω`; they are
/// closed only on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopPath {
    Circle {
        center: Complex64,
        radius: f64,
        #[serde(default = "positive")]
        orientation: i8,
    },
    Samples {
        points: Vec<Complex64>,
    },
    LatticeA {
        basepoint: Complex64,
    },
    LatticeB {
        basepoint: Complex64,
    },
}

impl LoopPath {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        LoopPath::Circle {
            center,
            radius,
            orientation: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LoopPath::Circle {
                center,
                radius,
                orientation,
            } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidLoop(format!("radius must be positive, got {radius}")));
                }
                if *orientation != 1 && *orientation != -1 {
                    return Err(Error::InvalidLoop(format!(
                        "orientation must be 1 or -1, got {orientation}"
                    )));
                }
                finite(*center)
            }
            LoopPath::Samples { points } => {
                if points.len() < MIN_SAMPLES {
                    return Err(Error::InvalidLoop(format!(
                        "sampled loop needs at least {MIN_SAMPLES} points, got {}",
                        points.len()
                    )));
                }
                points.iter().try_for_each(|&p| finite(p))?;
                let (first, last) = (points[0], points[points.len() - 1]);
                let scale = 1.0 + first.norm();
                if (first - last).norm() > 1e-12 * scale {
                    return Err(Error::InvalidLoop(
                        "sampled loop is not closed (first != last)".into(),
                    ));
                }
                Ok(())
            }
            LoopPath::LatticeA { basepoint } | LoopPath::LatticeB { basepoint } => finite(*basepoint),
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, LoopPath::LatticeA { .. } | LoopPath::LatticeB { .. })
    }

    /// Integration path; `tau` is needed for `lattice_b`.
    pub fn to_path(&self, tau: Option<Complex64>) -> Result<Path> {
        self.validate()?;
        Ok(match self {
            LoopPath::Circle {
                center,
                radius,
                orientation,
            } => Path::circle(*center, *radius, *orientation),
            LoopPath::Samples { points } => Path::polyline(points),
            LoopPath::LatticeA { basepoint } => Path::line(*basepoint, basepoint + 1.0),
            LoopPath::LatticeB { basepoint } => {
                let tau = tau.ok_or_else(|| {
                    Error::InvalidLoop("lattice_b loop on a surface without a lattice".into())
                })?;
                Path::line(*basepoint, basepoint + tau)
            }
        })
    }

    /// Winding number of the velocity `γ'` (unrounded).
    pub fn tangent_winding(&self) -> Result<f64> {
        self.validate()?;
        match self {
            LoopPath::Circle { orientation, .. } => {
                let s = f64::from(*orientation);
                let velocity: Vec<Complex64> = (0..64)
                    .map(|k| {
                        let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                        Complex64::new(0.0, s) * Complex64::from_polar(1.0, s * t)
                    })
                    .collect();
                winding_number(&velocity)
            }
            LoopPath::Samples { points } => winding_number(&sample_velocities(points)?),
            LoopPath::LatticeA { .. } | LoopPath::LatticeB { .. } => Ok(0.0),
        }
    }

    /// The same loop traversed backwards.
    pub fn reversed(&self) -> Option<LoopPath> {
        match self {
            LoopPath::Circle {
                center,
                radius,
                orientation,
            } => Some(LoopPath::Circle {
                center: *center,
                radius: *radius,
                orientation: -orientation,
            }),
            LoopPath::Samples { points } => Some(LoopPath::Samples {
                points: points.iter().rev().copied().collect(),
            }),
            _ => None,
        }
    }

    /// Distance from the loop's trace to `p` (plain plane distance).
    pub fn distance_to(&self, p: Complex64, tau: Option<Complex64>) -> Result<f64> {
        Ok(self.to_path(tau)?.distance_to(p))
    }
}

/// Central differences on a closed sample list (last point == first).
pub fn sample_velocities(points: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = points.len() - 1;
    (0..n)
        .map(|k| {
            let next = points[(k + 1) % n];
            let prev = points[(k + n - 1) % n];
            let v = next - prev;
            if v.norm() == 0.0 {
                Err(Error::ZeroDerivativeSample { index: k })
            } else {
                Ok(v)
            }
        })
        .collect()
}

fn finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidLoop(format!("non-finite coordinate {z}")))
    }
}
