//! Finite-difference Jacobians of the holonomy and residue maps over
//! parametrized families, their numerical rank, and isoresidual leaf steps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::{character_on_basis, loop_path, log_holonomy, LoopBasis};
use crate::numerics::linalg::decompose;
use crate::numerics::{LoopPath, Quadrature};
use crate::residues::{fubini_study_distance, integral_poles, raw_residues, res_gamma, ArcTree};
use crate::surface::{AffineSurface, AffineSurfaceSpec, ConePoint};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;
/// Singular values below this fraction of the largest one are dropped.
pub const RANK_REL_TOL: f64 = 1e-6;
/// Singular values below this absolute size are dropped too.
pub const RANK_ABS_FLOOR: f64 = 1e-6;
/// Accuracy a leaf step must reach on holonomy and projective residues.
pub const LEAF_TOL: f64 = 1e-7;
const NEWTON_TARGET: f64 = 1e-11;
const MAX_NEWTON: usize = 10;
/// A loop may lose at most this fraction of its clearance under a perturbation.
const COLLISION_FRACTION: f64 = 0.5;

/// One complex parameter of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Direction {
    MovePoint { index: usize },
    /// `m_plus += t`, `m_minus −= t`.
    OrderPair { plus: usize, minus: usize },
    Lambda,
    Tau,
}

impl Direction {
    pub fn label(&self) -> String {
        match self {
            Direction::MovePoint { index } => format!("move_point[{index}]"),
            Direction::OrderPair { plus, minus } => format!("order_pair[{plus},{minus}]"),
            Direction::Lambda => "lambda".into(),
            Direction::Tau => "tau".into(),
        }
    }
}

/// A base surface and the directions spanning a complex-parameter family
/// through it. Serialized as the base spec with an extra `directions` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FamilyRepr", into = "FamilyRepr")]
pub struct SpecFamily {
    pub base: AffineSurfaceSpec,
    pub directions: Vec<Direction>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyRepr {
    genus: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<Complex64>,
    cone_points: Vec<ConePoint>,
    directions: Vec<Direction>,
}

impl From<FamilyRepr> for SpecFamily {
    fn from(r: FamilyRepr) -> Self {
        let base = AffineSurfaceSpec {
            genus: r.genus,
            tau: r.tau,
            lambda: r.lambda,
            cone_points: r.cone_points,
        };
        SpecFamily {
            base,
            directions: r.directions,
        }
    }
}

impl From<SpecFamily> for FamilyRepr {
    fn from(f: SpecFamily) -> Self {
        FamilyRepr {
            genus: f.base.genus,
            tau: f.base.tau,
            lambda: f.base.lambda,
            cone_points: f.base.cone_points,
            directions: f.directions,
        }
    }
}

impl SpecFamily {
    pub fn new(base: AffineSurfaceSpec, directions: Vec<Direction>) -> Result<SpecFamily> {
        let family = SpecFamily { base, directions };
        family.validate()?;
        Ok(family)
    }

    /// The directions of the stratum through `base` with orders fixed, modulo
    /// the automorphisms of the chart: at genus 0 the first three cone points
    /// stay put, at genus 1 the first one does.
    pub fn stratum(base: AffineSurfaceSpec) -> Result<SpecFamily> {
        let n = base.cone_points.len();
        let directions = match base.genus {
            0 => (3.min(n)..n).map(|index| Direction::MovePoint { index }).collect(),
            1 => (1..n)
                .map(|index| Direction::MovePoint { index })
                .chain([Direction::Lambda, Direction::Tau])
                .collect(),
            g => return Err(Error::GenusUnsupported { genus: g }),
        };
        SpecFamily::new(base, directions)
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn validate(&self) -> Result<()> {
        AffineSurface::new(self.base.clone())?;
        let n = self.base.cone_points.len();
        let bad = |m: String| Err(Error::InvalidFamily(m));
        for d in &self.directions {
            match *d {
                Direction::MovePoint { index } if index >= n => {
                    return bad(format!("move_point index {index} out of range"))
                }
                Direction::OrderPair { plus, minus } if plus >= n || minus >= n || plus == minus => {
                    return bad(format!("order_pair ({plus}, {minus}) is not a pair of distinct cone points"))
                }
                Direction::Lambda | Direction::Tau if self.base.genus != 1 => {
                    return bad(format!("{} needs a genus-1 surface", d.label()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn spec_at(&self, params: &[Complex64]) -> AffineSurfaceSpec {
        let mut spec = self.base.clone();
        for (d, &t) in self.directions.iter().zip(params) {
            match *d {
                Direction::MovePoint { index } => spec.cone_points[index].z += t,
                Direction::OrderPair { plus, minus } => {
                    spec.cone_points[plus].order += t;
                    spec.cone_points[minus].order -= t;
                }
                Direction::Lambda => spec.lambda = Some(spec.lambda_or_zero() + t),
                Direction::Tau => spec.tau = spec.tau.map(|tau| tau + t),
            }
        }
        spec
    }

    pub fn surface_at(&self, params: &[Complex64]) -> Result<AffineSurface> {
        AffineSurface::new(self.spec_at(params))
    }

    pub fn rebased(&self, base: AffineSurfaceSpec) -> SpecFamily {
        SpecFamily {
            base,
            directions: self.directions.clone(),
        }
    }

    /// Rank of the order changes seen by the first `n − 1` cone loops.
    fn order_rank(&self) -> usize {
        let n = self.base.cone_points.len();
        if n < 2 {
            return 0;
        }
        let cols: Vec<&Direction> = self
            .directions
            .iter()
            .filter(|d| matches!(d, Direction::OrderPair { .. }))
            .collect();
        let m = DMatrix::from_fn(n - 1, cols.len(), |row, col| {
            let Direction::OrderPair { plus, minus } = *cols[col] else {
                unreachable!()
            };
            let x = f64::from(u8::from(plus == row)) - f64::from(u8::from(minus == row));
            Complex64::new(x, 0.0)
        });
        decompose(&m, 1e-9, 1e-9).rank
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianOptions {
    pub step: f64,
    pub quadrature: Quadrature,
}

impl Default for JacobianOptions {
    fn default() -> Self {
        JacobianOptions {
            step: DEFAULT_STEP,
            quadrature: Quadrature::new(1e-13, 40).expect("valid tolerance"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Submersion,
    RankDeficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRanks {
    pub holonomy: usize,
    pub residue: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    /// Row labels: loop ids, then `res[j]` for residue chart coordinates.
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// Row-major complex Jacobian.
    pub jacobian: Vec<Vec<Complex64>>,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub rank: usize,
    /// Rows that are not constant on the family by construction.
    pub target_dim: usize,
    pub verdict: Verdict,
    /// Orthonormal kernel vectors in parameter space.
    pub kernel: Vec<Vec<Complex64>>,
    /// Largest `|∂F/∂Im t − i ∂F/∂Re t|` over all entries.
    pub cauchy_riemann_defect: f64,
    pub blocks: Option<BlockRanks>,
}

impl RankReport {
    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.jacobian[row][col]
    }
}

/// Residue rows: chart coordinates `r_j / r_lead` with the tree dragged along.
#[derive(Debug, Clone)]
struct ResidueRows {
    tree: ArcTree,
    poles: Vec<usize>,
    lead: usize,
}

/// The map `params ↦ (log χ on the marked loops, residue chart)`.
#[derive(Debug, Clone)]
struct FamilyMap<'a> {
    family: &'a SpecFamily,
    base: AffineSurface,
    /// `(id, loop, base clearance)`.
    loops: Vec<(String, LoopPath, f64)>,
    basis: LoopBasis,
    residues: Option<ResidueRows>,
    q: Quadrature,
}

impl<'a> FamilyMap<'a> {
    fn new(family: &'a SpecFamily, basis: &LoopBasis, q: Quadrature) -> Result<Self> {
        family.validate()?;
        let base = AffineSurface::new(family.base.clone())?;
        let n = base.cone_points().len();
        let keep = |id: &str| match id.strip_prefix('c') {
            Some(j) => j.parse::<usize>().map(|j| j + 1 < n).unwrap_or(false),
            None => true,
        };
        let mut loops = Vec::new();
        for (id, lp) in basis.loops(&base) {
            if keep(&id) {
                let clearance = base.path_clearance(&loop_path(&base, &lp)?).1;
                loops.push((id, lp, clearance));
            }
        }
        Ok(FamilyMap {
            family,
            base,
            loops,
            basis: basis.clone(),
            residues: None,
            q,
        })
    }

    fn with_residues(mut self, tree: &ArcTree) -> Result<Self> {
        let poles = integral_poles(&self.base);
        for d in &self.family.directions {
            if let Direction::OrderPair { plus, minus } = *d {
                if poles.contains(&plus) || poles.contains(&minus) {
                    return Err(Error::InvalidFamily(format!(
                        "{} changes the order of an integral pole",
                        d.label()
                    )));
                }
            }
        }
        let tuple = res_gamma(&self.base, tree, &self.q)?;
        let lead = tuple
            .raw
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(k, _)| k)
            .ok_or(Error::AllResiduesZero)?;
        self.residues = Some(ResidueRows {
            tree: tree.clone(),
            poles: tuple.pole_indices,
            lead,
        });
        Ok(self)
    }

    fn row_labels(&self) -> Vec<String> {
        let mut rows: Vec<String> = self.loops.iter().map(|(id, _, _)| id.clone()).collect();
        if let Some(r) = &self.residues {
            for (k, j) in r.poles.iter().enumerate() {
                if k != r.lead {
                    rows.push(format!("res[{j}]"));
                }
            }
        }
        rows
    }

    fn hol_rows(&self) -> usize {
        self.loops.len()
    }

    fn eval(&self, params: &[Complex64]) -> Result<Vec<Complex64>> {
        let surface = self.family.surface_at(params)?;
        let direction = params.iter().position(|t| t.norm() > 0.0).unwrap_or(0);
        let current: Vec<(String, LoopPath)> = self.basis.loops(&surface);
        let mut out = Vec::with_capacity(self.loops.len() + 2);
        for (id, _, clearance) in &self.loops {
            let lp = &current.iter().find(|(k, _)| k == id).expect("same marking").1;
            let now = surface.path_clearance(&loop_path(&surface, lp)?).1;
            if now < COLLISION_FRACTION * clearance {
                return Err(Error::StepCollision { direction });
            }
            out.push(log_holonomy(&surface, lp, &self.q)?);
        }
        if let Some(r) = &self.residues {
            let tree = r.tree.deform(&self.base, &surface);
            let raw = raw_residues(&surface, &tree, &self.q)?;
            let lead = raw[r.lead].value;
            for (k, res) in raw.iter().enumerate() {
                if k != r.lead {
                    out.push(res.value / lead);
                }
            }
        }
        Ok(out)
    }

    fn unit(&self, k: usize, t: Complex64) -> Vec<Complex64> {
        let mut p = vec![Complex64::new(0.0, 0.0); self.family.dim()];
        p[k] = t;
        p
    }

    /// Central-difference Jacobian at `at`; with `cr`, also the imaginary-step
    /// columns for the Cauchy–Riemann check.
    fn jacobian(&self, at: &[Complex64], h: f64, cr: bool) -> Result<(DMatrix<Complex64>, f64)> {
        let d = self.family.dim();
        let shifted = |k: usize, t: Complex64| -> Vec<Complex64> {
            let mut p = at.to_vec();
            p[k] += self.unit(k, t)[k];
            p
        };
        let columns: Vec<(Vec<Complex64>, f64)> = (0..d)
            .into_par_iter()
            .map(|k| -> Result<(Vec<Complex64>, f64)> {
                let plus = self.eval(&shifted(k, Complex64::new(h, 0.0)))?;
                let minus = self.eval(&shifted(k, Complex64::new(-h, 0.0)))?;
                let col: Vec<Complex64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect();
                let mut defect: f64 = 0.0;
                if cr {
                    let up = self.eval(&shifted(k, Complex64::new(0.0, h)))?;
                    let down = self.eval(&shifted(k, Complex64::new(0.0, -h)))?;
                    for ((a, b), c) in up.iter().zip(&down).zip(&col) {
                        let dy = (a - b) / (2.0 * h);
                        defect = defect.max((dy - Complex64::i() * c).norm());
                    }
                }
                Ok((col, defect))
            })
            .collect::<Result<_>>()?;
        let rows = columns.first().map_or(self.row_labels().len(), |c| c.0.len());
        let m = DMatrix::from_fn(rows, d, |i, j| columns[j].0[i]);
        let defect = columns.iter().map(|c| c.1).fold(0.0, f64::max);
        Ok((m, defect))
    }

    fn target_dim(&self) -> usize {
        let lattice = self.loops.iter().filter(|(id, _, _)| !id.starts_with('c')).count();
        let residue = self.residues.as_ref().map_or(0, |r| r.poles.len() - 1);
        lattice + self.family.order_rank() + residue
    }

    fn report(&self, opts: &JacobianOptions) -> Result<RankReport> {
        let zero = vec![Complex64::new(0.0, 0.0); self.family.dim()];
        let (j, defect) = self.jacobian(&zero, opts.step, true)?;
        let dec = decompose(&j, RANK_REL_TOL, RANK_ABS_FLOOR);
        let largest = dec.singular_values.first().copied().unwrap_or(0.0);
        let threshold = (RANK_REL_TOL * largest).max(RANK_ABS_FLOOR);
        let target_dim = self.target_dim();
        let blocks = self.residues.as_ref().map(|_| {
            let h = self.hol_rows();
            let top = j.rows(0, h).into_owned();
            let bottom = j.rows(h, j.nrows() - h).into_owned();
            BlockRanks {
                holonomy: decompose(&top, RANK_REL_TOL, RANK_ABS_FLOOR).rank,
                residue: decompose(&bottom, RANK_REL_TOL, RANK_ABS_FLOOR).rank,
            }
        });
        Ok(RankReport {
            rows: self.row_labels(),
            columns: self.family.directions.iter().map(Direction::label).collect(),
            jacobian: (0..j.nrows()).map(|r| j.row(r).iter().copied().collect()).collect(),
            singular_values: dec.singular_values.clone(),
            threshold,
            rank: dec.rank,
            target_dim,
            verdict: if dec.rank == target_dim {
                Verdict::Submersion
            } else {
                Verdict::RankDeficient
            },
            kernel: dec.kernel.iter().map(|v| v.iter().copied().collect()).collect(),
            cauchy_riemann_defect: defect,
            blocks,
        })
    }
}

/// Jacobian of `log χ` on the marked loops (lattice loops and the first
/// `n − 1` cone loops) with respect to the family parameters.
pub fn hol_jacobian(family: &SpecFamily, basis: &LoopBasis, opts: &JacobianOptions) -> Result<RankReport> {
    FamilyMap::new(family, basis, opts.quadrature)?.report(opts)
}

fn check_admissible(surface: &AffineSurface, basis: &LoopBasis, q: &Quadrature) -> Result<()> {
    if integral_poles(surface).is_empty() {
        return Err(Error::NotInAdmissibleLocus("no integral pole".into()));
    }
    if character_on_basis(surface, basis, q)?.is_trivial() {
        return Err(Error::NotInAdmissibleLocus("translation surface".into()));
    }
    Ok(())
}

/// Jacobian of `(log χ, residue chart)`; the base must be a non-translation
/// surface with an integral pole of nonzero residue.
pub fn hol_res_jacobian(
    family: &SpecFamily,
    basis: &LoopBasis,
    tree: &ArcTree,
    opts: &JacobianOptions,
) -> Result<RankReport> {
    let map = FamilyMap::new(family, basis, opts.quadrature)?;
    check_admissible(&map.base, basis, &opts.quadrature)?;
    map.with_residues(tree)?.report(opts)
}

/// Observed order of the central difference from steps `h`, `h/2`, `h/4`.
pub fn difference_order(
    family: &SpecFamily,
    basis: &LoopBasis,
    tree: Option<&ArcTree>,
    h: f64,
    q: &Quadrature,
) -> Result<f64> {
    let mut map = FamilyMap::new(family, basis, *q)?;
    if let Some(t) = tree {
        map = map.with_residues(t)?;
    }
    let zero = vec![Complex64::new(0.0, 0.0); family.dim()];
    let j1 = map.jacobian(&zero, h, false)?.0;
    let j2 = map.jacobian(&zero, h / 2.0, false)?.0;
    let j3 = map.jacobian(&zero, h / 4.0, false)?.0;
    Ok(((&j1 - &j2).norm() / (&j2 - &j3).norm()).log2())
}

/// Result of one isoresidual leaf step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafStep {
    pub spec: AffineSurfaceSpec,
    pub tree: ArcTree,
    pub kernel_dim: usize,
    pub newton_iterations: usize,
    /// Largest change of `log χ` on the marked loops.
    pub holonomy_drift: f64,
    /// Fubini–Study distance between the projective residue tuples.
    pub residue_distance: f64,
}

/// Moves `spec` by `step` along its isoresidual leaf inside the stratum.
pub fn leaf_step(spec: &AffineSurfaceSpec, tree: &ArcTree, step: f64, opts: &JacobianOptions) -> Result<LeafStep> {
    let family = SpecFamily::stratum(spec.clone())?;
    let base = AffineSurface::new(spec.clone())?;
    let basis = LoopBasis::standard(&base);
    let q = opts.quadrature;
    check_admissible(&base, &basis, &q)?;
    let map = FamilyMap::new(&family, &basis, q)?.with_residues(tree)?;
    let zero = vec![Complex64::new(0.0, 0.0); family.dim()];
    let f0 = DVector::from_vec(map.eval(&zero)?);
    let (j0, _) = map.jacobian(&zero, opts.step, false)?;
    let dec = decompose(&j0, RANK_REL_TOL, RANK_ABS_FLOOR);
    let kernel_dim = dec.kernel.len();
    let Some(direction) = dec.kernel.first() else {
        return Err(Error::ZeroKernel);
    };
    if step == 0.0 {
        return Ok(LeafStep {
            spec: spec.clone(),
            tree: tree.clone(),
            kernel_dim,
            newton_iterations: 0,
            holonomy_drift: 0.0,
            residue_distance: 0.0,
        });
    }
    // Fix the phase: largest component real and positive.
    let lead = direction
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    let mut params: Vec<Complex64> = direction.iter().map(|v| v * phase * step).collect();

    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..=MAX_NEWTON {
        let r = DVector::from_vec(map.eval(&params)?) - &f0;
        residual = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if residual <= NEWTON_TARGET || iterations == MAX_NEWTON {
            break;
        }
        let (j, _) = map.jacobian(&params, opts.step, false)?;
        let largest = j.clone().singular_values().max();
        let eps = (RANK_REL_TOL * largest).max(RANK_ABS_FLOOR);
        let delta = j
            .svd(true, true)
            .solve(&(-r), eps)
            .map_err(|_| Error::NewtonDivergence { residual })?;
        for (p, dp) in params.iter_mut().zip(delta.iter()) {
            *p += dp;
        }
        iterations += 1;
    }

    let new_spec = family.spec_at(&params);
    let new_surface = AffineSurface::new(new_spec.clone())?;
    let new_tree = tree.deform(&base, &new_surface);
    let comparison = compare(&base, tree, &new_surface, &new_tree, &basis, &q)?;
    if !(residual <= LEAF_TOL && comparison.holonomy_drift <= LEAF_TOL && comparison.residue_distance <= LEAF_TOL) {
        return Err(Error::NewtonDivergence {
            residual: residual.max(comparison.holonomy_drift).max(comparison.residue_distance),
        });
    }
    Ok(LeafStep {
        spec: new_spec,
        tree: new_tree,
        kernel_dim,
        newton_iterations: iterations,
        holonomy_drift: comparison.holonomy_drift,
        residue_distance: comparison.residue_distance,
    })
}

/// Holonomy and projective-residue differences between two nearby surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafComparison {
    /// Largest `|log χ_b − log χ_a|` on the marked loops.
    pub holonomy_drift: f64,
    pub residue_distance: f64,
}

impl LeafComparison {
    pub fn same_leaf(&self, tol: f64) -> bool {
        self.holonomy_drift <= tol && self.residue_distance <= tol
    }
}

fn compare(
    a: &AffineSurface,
    tree_a: &ArcTree,
    b: &AffineSurface,
    tree_b: &ArcTree,
    basis: &LoopBasis,
    q: &Quadrature,
) -> Result<LeafComparison> {
    let loops_a = basis.loops(a);
    let loops_b = basis.loops(b);
    let mut drift: f64 = 0.0;
    for ((_, la), (_, lb)) in loops_a.iter().zip(&loops_b) {
        let d = log_holonomy(b, lb, q)? - log_holonomy(a, la, q)?;
        drift = drift.max(d.norm());
    }
    let ra = res_gamma(a, tree_a, q)?;
    let rb = res_gamma(b, tree_b, q)?;
    Ok(LeafComparison {
        holonomy_drift: drift,
        residue_distance: fubini_study_distance(&ra.raw, &rb.raw),
    })
}

/// Compares `b` with `a`, dragging `tree` from `a` to `b` and using the
/// standard marking of `a`.
pub fn leaf_comparison(
    a: &AffineSurfaceSpec,
    b: &AffineSurfaceSpec,
    tree: &ArcTree,
    q: &Quadrature,
) -> Result<LeafComparison> {
    if a.genus != b.genus || a.cone_points.len() != b.cone_points.len() {
        return Err(Error::InvalidFamily("surfaces are not in the same stratum".into()));
    }
    let sa = AffineSurface::new(a.clone())?;
    let sb = AffineSurface::new(b.clone())?;
    let basis = LoopBasis::standard(&sa);
    let tree_b = tree.deform(&sa, &sb);
    compare(&sa, tree, &sb, &tree_b, &basis, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn torus(lambda: Complex64) -> SpecFamily {
        let base = AffineSurfaceSpec::genus1(c(0.1, 1.05), lambda, &[(c(0.0, 0.0), c(0.0, 0.0))]);
        SpecFamily::new(base, vec![Direction::Lambda, Direction::Tau]).unwrap()
    }

    #[test]
    fn family_json_round_trip() {
        let f = torus(c(0.7, 0.1));
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains(r#"{"kind":"lambda"}"#), "{text}");
        assert!(text.starts_with(r#"{"genus":1,"#), "{text}");
        let back: SpecFamily = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let extra = text.replacen('{', r#"{"bogus":1,"#, 1);
        assert!(serde_json::from_str::<SpecFamily>(&extra).is_err());
    }

    #[test]
    fn lambda_direction_needs_a_torus() {
        let base = AffineSurfaceSpec::genus0(&[(c(0.0, 0.0), c(-1.0, 0.0)), (c(1.0, 0.0), c(-1.0, 0.0))]);
        assert!(matches!(
            SpecFamily::new(base, vec![Direction::Lambda]),
            Err(Error::InvalidFamily(_))
        ));
    }

    #[test]
    fn torus_jacobian_closed_form() {
        let lambda = c(0.7, 0.1);
        let f = torus(lambda);
        let basis = LoopBasis::standard(&AffineSurface::new(f.base.clone()).unwrap());
        let r = hol_jacobian(&f, &basis, &JacobianOptions::default()).unwrap();
        let tau = f.base.tau.unwrap();
        let expected = [[c(-1.0, 0.0), c(0.0, 0.0)], [-tau, -lambda]];
        for (i, row) in expected.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                assert!((r.entry(i, j) - e).norm() < 1e-6, "{i},{j}: {}", r.entry(i, j));
            }
        }
        assert_eq!(r.rank, 2);
        assert_eq!(r.verdict, Verdict::Submersion);
        assert!(r.cauchy_riemann_defect < 1e-6);
    }

    #[test]
    fn translation_torus_is_rank_deficient() {
        let f = torus(c(0.0, 0.0));
        let basis = LoopBasis::standard(&AffineSurface::new(f.base.clone()).unwrap());
        let r = hol_jacobian(&f, &basis, &JacobianOptions::default()).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.verdict, Verdict::RankDeficient);
        assert_eq!(r.kernel_dim(), 1);
    }

    #[test]
    fn order_directions_give_two_pi_i() {
        let base = AffineSurfaceSpec::genus0(&[
            (c(0.0, 0.0), c(0.3, 0.0)),
            (c(1.0, 0.0), c(0.2, 0.0)),
            (c(0.0, 1.0), c(-2.5, 0.0)),
        ]);
        let f = SpecFamily::new(
            base,
            vec![Direction::OrderPair { plus: 0, minus: 2 }, Direction::OrderPair { plus: 1, minus: 2 }],
        )
        .unwrap();
        let basis = LoopBasis::standard(&AffineSurface::new(f.base.clone()).unwrap());
        let r = hol_jacobian(&f, &basis, &JacobianOptions::default()).unwrap();
        let two_pi_i = c(0.0, 2.0 * std::f64::consts::PI);
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { two_pi_i } else { c(0.0, 0.0) };
                assert!((r.entry(i, j) - e).norm() < 1e-6);
            }
        }
        assert_eq!(r.verdict, Verdict::Submersion);
    }
}
