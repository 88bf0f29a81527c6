//! Affine surfaces of genus 0 and 1 given by cone data and a connection parameter.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate, Path, Quadrature};
use crate::numerics::LatticeData;

/// Tolerance for the Gauss–Bonnet constraint.
pub const GAUSS_BONNET_TOL: f64 = 1e-12;
/// Distance to ℤ below which an order counts as an integer.
pub const INTEGRALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConePoint {
    pub z: Complex64,
    pub order: Complex64,
}

impl ConePoint {
    pub fn new(z: Complex64, order: Complex64) -> Self {
        ConePoint { z, order }
    }

    /// `Some(k)` when the order is the integer `k` (within [`INTEGRALITY_TOL`]).
    pub fn integral_order(&self) -> Option<i64> {
        let k = self.order.re.round();
        let close = (self.order - k).norm() <= INTEGRALITY_TOL;
        close.then_some(k as i64)
    }

    pub fn is_integral_pole(&self) -> bool {
        self.integral_order().is_some_and(|k| k <= -1)
    }
}

/// Serialized description of an affine surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSurfaceSpec {
    pub genus: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Complex64>,
    pub cone_points: Vec<ConePoint>,
}

impl AffineSurfaceSpec {
    pub fn genus0(points: &[(Complex64, Complex64)]) -> Self {
        AffineSurfaceSpec {
            genus: 0,
            tau: None,
            lambda: None,
            cone_points: points.iter().map(|&(z, m)| ConePoint::new(z, m)).collect(),
        }
    }

    pub fn genus1(tau: Complex64, lambda: Complex64, points: &[(Complex64, Complex64)]) -> Self {
        AffineSurfaceSpec {
            genus: 1,
            tau: Some(tau),
            lambda: Some(lambda),
            cone_points: points.iter().map(|&(z, m)| ConePoint::new(z, m)).collect(),
        }
    }

    pub fn orders(&self) -> Vec<Complex64> {
        self.cone_points.iter().map(|c| c.order).collect()
    }

    /// `λ`, defaulting to 0 on a torus.
    pub fn lambda_or_zero(&self) -> Complex64 {
        self.lambda.unwrap_or_default()
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    GaussBonnetViolation,
    UnsupportedGenus,
    MissingTau,
    DegenerateLattice,
    UnexpectedParameter,
    CoincidentConePoints,
    NonFiniteValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub order_sum: Complex64,
    pub expected_sum: f64,
    pub violations: Vec<Violation>,
}

pub fn validate(spec: &AffineSurfaceSpec) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |kind, message: String| violations.push(Violation { kind, message });
    let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();

    let order_sum: Complex64 = spec.cone_points.iter().map(|c| c.order).sum();
    let expected_sum = 2.0 * f64::from(spec.genus) - 2.0;

    if spec.genus > 1 {
        push(
            ViolationKind::UnsupportedGenus,
            format!("genus {} is not supported (only 0 and 1)", spec.genus),
        );
    }
    for (k, c) in spec.cone_points.iter().enumerate() {
        if !finite(c.z) || !finite(c.order) {
            push(ViolationKind::NonFiniteValue, format!("cone point {k} has a non-finite entry"));
        }
    }
    let mut lattice = None;
    if spec.genus == 0 {
        if spec.tau.is_some() {
            push(ViolationKind::UnexpectedParameter, "tau given for a genus-0 surface".into());
        }
        if spec.lambda.is_some() {
            push(ViolationKind::UnexpectedParameter, "lambda given for a genus-0 surface".into());
        }
    } else if spec.genus == 1 {
        match spec.tau {
            None => push(ViolationKind::MissingTau, "genus-1 surface needs tau".into()),
            Some(tau) => match LatticeData::new(tau) {
                Ok(l) => lattice = Some(l),
                Err(_) => push(
                    ViolationKind::DegenerateLattice,
                    format!("tau = {tau} must have positive imaginary part"),
                ),
            },
        }
        if spec.lambda.is_some_and(|l| !finite(l)) {
            push(ViolationKind::NonFiniteValue, "lambda is not finite".into());
        }
    }
    if finite(order_sum) && (order_sum - expected_sum).norm() > GAUSS_BONNET_TOL {
        push(
            ViolationKind::GaussBonnetViolation,
            format!("orders sum to {order_sum}, expected {expected_sum}"),
        );
    }
    let pts = &spec.cone_points;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i].z - pts[j].z;
            let dist = match &lattice {
                Some(l) => l.distance_to_lattice(d),
                None => d.norm(),
            };
            if dist <= 1e-12 {
                push(
                    ViolationKind::CoincidentConePoints,
                    format!("cone points {i} and {j} coincide"),
                );
            }
        }
    }
    ValidationReport {
        valid: violations.is_empty(),
        order_sum,
        expected_sum,
        violations,
    }
}

/// A validated surface with cached lattice data.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSurface {
    spec: AffineSurfaceSpec,
    lattice: Option<LatticeData>,
}

impl AffineSurface {
    pub fn new(spec: AffineSurfaceSpec) -> Result<Self> {
        let report = validate(&spec);
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidSurface(format!("{:?}: {}", v.kind, v.message)));
        }
        let lattice = match spec.tau {
            Some(tau) if spec.genus == 1 => Some(LatticeData::new(tau)?),
            _ => None,
        };
        Ok(AffineSurface { spec, lattice })
    }

    pub fn spec(&self) -> &AffineSurfaceSpec {
        &self.spec
    }

    pub fn into_spec(self) -> AffineSurfaceSpec {
        self.spec
    }

    pub fn genus(&self) -> u32 {
        self.spec.genus
    }

    pub fn cone_points(&self) -> &[ConePoint] {
        &self.spec.cone_points
    }

    pub fn lattice(&self) -> Option<&LatticeData> {
        self.lattice.as_ref()
    }

    pub fn tau(&self) -> Option<Complex64> {
        self.lattice.as_ref().map(LatticeData::tau)
    }

    /// Distance between two points of the surface (modulo the lattice on a torus).
    pub fn distance(&self, a: Complex64, b: Complex64) -> f64 {
        match &self.lattice {
            Some(l) => l.distance_to_lattice(a - b),
            None => (a - b).norm(),
        }
    }

    /// Closest cone point to `z` and its distance.
    pub fn nearest_cone_point(&self, z: Complex64) -> Option<(usize, f64)> {
        self.cone_points()
            .iter()
            .enumerate()
            .map(|(k, c)| (k, self.distance(z, c.z)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Distance from cone point `j` to every other cone point and to its own translates.
    pub fn separation(&self, j: usize) -> f64 {
        let cj = self.cone_points()[j].z;
        let others = self
            .cone_points()
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, c)| self.distance(cj, c.z))
            .fold(f64::INFINITY, f64::min);
        match &self.lattice {
            Some(l) => others.min(l.shortest_vector()),
            None => others,
        }
    }

    /// Smallest distance between two distinct cone points (or translates).
    pub fn min_separation(&self) -> f64 {
        (0..self.cone_points().len())
            .map(|j| self.separation(j))
            .fold(f64::INFINITY, f64::min)
    }

    /// All cone points and, on a torus, their translates that can lie near `path`.
    pub fn cone_images_near(&self, path: &Path) -> Vec<(usize, Complex64)> {
        let Some(l) = &self.lattice else {
            return self.cone_points().iter().map(|c| c.z).enumerate().collect();
        };
        let samples = path.sample(8);
        if samples.is_empty() {
            return Vec::new();
        }
        let margin = path
            .segments()
            .iter()
            .map(|s| s.length())
            .fold(0.0, f64::max);
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for z in samples {
            let (x, y) = l.coordinates(z);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let pad = 2.0 + margin / l.shortest_vector();
        let tau = l.tau();
        let mut out = Vec::new();
        for (k, c) in self.cone_points().iter().enumerate() {
            let (cx, cy) = l.coordinates(c.z);
            let m_range = ((x0 - cx - pad).floor() as i64)..=((x1 - cx + pad).ceil() as i64);
            for m in m_range {
                for n in ((y0 - cy - pad).floor() as i64)..=((y1 - cy + pad).ceil() as i64) {
                    out.push((k, c.z + m as f64 + n as f64 * tau));
                }
            }
        }
        out
    }

    /// Smallest distance from `path` to a cone point (or a translate), with its index.
    pub fn path_clearance(&self, path: &Path) -> (Option<usize>, f64) {
        self.cone_images_near(path)
            .into_iter()
            .map(|(k, p)| (Some(k), path.distance_to(p)))
            .fold((None, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    /// `Γ(z)` without the cone-point check; non-finite at cone points.
    pub fn connection_form_unchecked(&self, z: Complex64) -> Complex64 {
        match &self.lattice {
            None => self
                .cone_points()
                .iter()
                .map(|c| -c.order / (z - c.z))
                .sum(),
            Some(l) => {
                self.spec.lambda_or_zero()
                    + self
                        .cone_points()
                        .iter()
                        .map(|c| -c.order * l.zeta(z - c.z))
                        .sum::<Complex64>()
            }
        }
    }

    pub fn connection_form(&self, z: Complex64) -> Result<Complex64> {
        if let Some((index, d)) = self.nearest_cone_point(z) {
            if d <= 1e-12 * (1.0 + z.norm()) {
                return Err(Error::EvaluationAtConePoint { index, at: z });
            }
        }
        Ok(self.connection_form_unchecked(z))
    }

    /// Rejects paths that run through a cone point.
    pub fn check_path(&self, path: &Path) -> Result<()> {
        if let (Some(index), d) = self.path_clearance(path) {
            if d <= 1e-9 {
                let at = self.cone_points()[index].z;
                return Err(Error::EvaluationAtConePoint { index, at });
            }
        }
        Ok(())
    }

    /// `∫_path Γ(z) dz`.
    pub fn connection_integral(&self, path: &Path, q: &Quadrature) -> Result<Complex64> {
        self.check_path(path)?;
        integrate(|z| self.connection_form_unchecked(z), path, q)
    }

    /// Branch-tracked `-∫_path Γ`, the log of the flat multiplier.
    pub fn log_flat_multiplier(&self, path: &Path, q: &Quadrature) -> Result<Complex64> {
        Ok(-self.connection_integral(path, q)?)
    }

    /// `exp(-∫_path Γ)`: ratio of a flat form's coefficient at the end and start of `path`.
    pub fn flat_multiplier(&self, path: &Path, q: &Quadrature) -> Result<Complex64> {
        Ok(self.log_flat_multiplier(path, q)?.exp())
    }

    /// `(1/2πi)∮Γ` over a circle enclosing every cone point (genus 0).
    pub fn big_circle_index(&self, q: &Quadrature) -> Result<Complex64> {
        if self.genus() != 0 {
            return Err(Error::InvalidSurface("big-circle index is a genus-0 check".into()));
        }
        let reach = self.cone_points().iter().map(|c| c.z.norm()).fold(0.0, f64::max);
        let circle = Path::circle(Complex64::new(0.0, 0.0), 2.0 * reach + 1.0, 1);
        Ok(self.connection_integral(&circle, q)? / (2.0 * PI * Complex64::i()))
    }

    /// The meromorphic form `α` of the exponential action with coefficients `a`, `a0`.
    pub fn action_form(&self, a: &[Complex64], a0: Complex64, z: Complex64) -> Complex64 {
        let pts = self.cone_points();
        match &self.lattice {
            None => pts.iter().zip(a).map(|(c, &aj)| aj / (z - c.z)).sum(),
            Some(l) => a0 + pts.iter().zip(a).map(|(c, &aj)| aj * l.zeta(z - c.z)).sum::<Complex64>(),
        }
    }
}

/// `∇ ↦ ∇ − α`: orders become `m_j + a_j` and, on a torus, `λ ↦ λ − a0`.
pub fn exponential_action(
    spec: &AffineSurfaceSpec,
    a: &[Complex64],
    a0: Complex64,
) -> Result<AffineSurfaceSpec> {
    if a.len() != spec.cone_points.len() {
        return Err(Error::InvalidSurface(format!(
            "{} action coefficients for {} cone points",
            a.len(),
            spec.cone_points.len()
        )));
    }
    let sum: Complex64 = a.iter().sum();
    let scale: f64 = 1.0 + a.iter().map(|x| x.norm()).sum::<f64>();
    if sum.norm() > GAUSS_BONNET_TOL * scale {
        return Err(Error::ResidueSumNonzero { sum });
    }
    if spec.genus == 0 && a0 != Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidSurface("a0 must vanish on a genus-0 surface".into()));
    }
    let mut out = spec.clone();
    for (c, aj) in out.cone_points.iter_mut().zip(a) {
        c.order += aj;
    }
    if spec.genus == 1 {
        out.lambda = Some(spec.lambda_or_zero() - a0);
    }
    Ok(out)
}

/// Orders at the two branches of a node on the normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeGluing {
    pub branch_orders: (Complex64, Complex64),
}

/// True iff the two branch orders sum to exactly −2.
pub fn check_node_gluing(g: &NodeGluing) -> bool {
    g.branch_orders.0 + g.branch_orders.1 == Complex64::new(-2.0, 0.0)
}
