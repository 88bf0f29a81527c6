//! Residues of flat one-forms at integral poles, with branches fixed by a tree of arcs.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::{character_on_basis, classify, LoopBasis, TranslationClass};
use crate::numerics::quadrature::{integrate, integrate_segment, Path, Quadrature, Segment};
use crate::surface::AffineSurface;

/// Residue circle radius as a fraction of the pole's separation.
pub const DEFAULT_RADIUS_FRACTION: f64 = 0.25;
/// Normalization point distance from the root, as a fraction of the minimal separation.
pub const NORMALIZATION_FRACTION: f64 = 0.1;
/// Relative size below which a residue counts as zero.
pub const ZERO_RESIDUE_TOL: f64 = 1e-10;

const MIN_NODES: usize = 64;
const MAX_NODES: usize = 8192;

/// Indices of the cone points that are integral poles.
pub fn integral_poles(surface: &AffineSurface) -> Vec<usize> {
    surface
        .cone_points()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_integral_pole())
        .map(|(k, _)| k)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeArc {
    pub to_index: usize,
    pub points: Vec<Complex64>,
}

/// Arcs from a root integral pole to every other integral pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcTree {
    pub root_index: usize,
    pub arcs: Vec<TreeArc>,
}

impl ArcTree {
    /// Tree made of (possibly bent) straight routes from the first integral pole.
    pub fn straight(surface: &AffineSurface) -> Result<ArcTree> {
        let poles = integral_poles(surface);
        let Some(&root_index) = poles.first() else {
            return Err(Error::InvalidTree("surface has no integral pole".into()));
        };
        let root = surface.cone_points()[root_index].z;
        let mut arcs = Vec::new();
        for &j in &poles[1..] {
            let target = nearest_image(surface, root, surface.cone_points()[j].z);
            let path = route(surface, root, target)?;
            arcs.push(TreeArc {
                to_index: j,
                points: path.sample(16),
            });
        }
        let tree = ArcTree { root_index, arcs };
        tree.validate(surface)?;
        Ok(tree)
    }

    pub fn arc_to(&self, index: usize) -> Option<&TreeArc> {
        self.arcs.iter().find(|a| a.to_index == index)
    }

    pub fn validate(&self, surface: &AffineSurface) -> Result<()> {
        let poles = integral_poles(surface);
        let pts = surface.cone_points();
        let bad = |m: String| Err(Error::InvalidTree(m));
        if !poles.contains(&self.root_index) {
            return bad(format!("root {} is not an integral pole", self.root_index));
        }
        let root = pts[self.root_index].z;
        let mut seen = vec![false; pts.len()];
        seen[self.root_index] = true;
        for arc in &self.arcs {
            let j = arc.to_index;
            if !poles.contains(&j) {
                return bad(format!("arc target {j} is not an integral pole"));
            }
            if seen[j] {
                return bad(format!("integral pole {j} is reached twice"));
            }
            seen[j] = true;
            if arc.points.len() < 2 {
                return bad(format!("arc to {j} has fewer than two points"));
            }
            let (start, end) = (arc.points[0], arc.points[arc.points.len() - 1]);
            if (start - root).norm() > 1e-9 {
                return bad(format!("arc to {j} does not start at the root"));
            }
            if surface.distance(end, pts[j].z) > 1e-9 {
                return bad(format!("arc to {j} does not end at its pole"));
            }
            let path = Path::polyline(&arc.points);
            let clearance = clearance_excluding(surface, &path, &[start, end]);
            if clearance <= 1e-9 {
                return bad(format!("arc to {j} runs through a cone point"));
            }
            if arc.points.len() > 2 {
                let inner = Path::polyline(&arc.points[1..arc.points.len() - 1]);
                if inner.distance_to(start) <= 1e-9 || inner.distance_to(end) <= 1e-9 {
                    return bad(format!("arc to {j} revisits an endpoint"));
                }
            }
        }
        if let Some(missing) = poles.iter().find(|&&p| !seen[p]) {
            return bad(format!("integral pole {missing} is not reached by the tree"));
        }
        for (a, arc_a) in self.arcs.iter().enumerate() {
            for arc_b in &self.arcs[a + 1..] {
                if polylines_cross(&arc_a.points, &arc_b.points, root) {
                    return bad(format!(
                        "arcs to {} and {} intersect away from the root",
                        arc_a.to_index, arc_b.to_index
                    ));
                }
            }
        }
        Ok(())
    }

    /// The same tree on a nearby surface: each arc is dragged along by
    /// blending its endpoint displacements linearly in arclength.
    pub fn deform(&self, from: &AffineSurface, to: &AffineSurface) -> ArcTree {
        let shift = |k: usize| to.cone_points()[k].z - from.cone_points()[k].z;
        let root_shift = shift(self.root_index);
        let arcs = self
            .arcs
            .iter()
            .map(|arc| {
                let end_shift = shift(arc.to_index);
                let mut lengths = vec![0.0];
                for w in arc.points.windows(2) {
                    lengths.push(lengths[lengths.len() - 1] + (w[1] - w[0]).norm());
                }
                let total = lengths[lengths.len() - 1].max(f64::MIN_POSITIVE);
                let points = arc
                    .points
                    .iter()
                    .zip(&lengths)
                    .map(|(&p, &s)| {
                        let t = s / total;
                        p + root_shift * (1.0 - t) + end_shift * t
                    })
                    .collect();
                TreeArc {
                    to_index: arc.to_index,
                    points,
                }
            })
            .collect();
        ArcTree {
            root_index: self.root_index,
            arcs,
        }
    }
}

fn nearest_image(surface: &AffineSurface, from: Complex64, to: Complex64) -> Complex64 {
    match surface.lattice() {
        Some(l) => from + l.centered(to - from),
        None => to,
    }
}

/// Distance from `path` to the cone points, ignoring images located at `exclude`.
pub fn clearance_excluding(surface: &AffineSurface, path: &Path, exclude: &[Complex64]) -> f64 {
    surface
        .cone_images_near(path)
        .into_iter()
        .filter(|(_, p)| exclude.iter().all(|e| (e - p).norm() > 1e-9))
        .map(|(_, p)| path.distance_to(p))
        .fold(f64::INFINITY, f64::min)
}

/// A polyline from `from` to `to` keeping away from cone points other than the endpoints.
pub fn route(surface: &AffineSurface, from: Complex64, to: Complex64) -> Result<Path> {
    let want = 0.1 * finite_or(surface.min_separation(), 1.0);
    let d = to - from;
    let mid = from + d * 0.5;
    let normal = Complex64::new(0.0, 1.0) * d;
    let mut best: Option<(Path, f64)> = None;
    for s in [0.0, 0.15, -0.15, 0.3, -0.3, 0.5, -0.5, 0.8, -0.8, 1.2, -1.2] {
        let path = if s == 0.0 {
            Path::line(from, to)
        } else {
            Path::polyline(&[from, mid + normal * s, to])
        };
        let clearance = clearance_excluding(surface, &path, &[from, to]);
        if clearance >= want {
            return Ok(path);
        }
        if best.as_ref().is_none_or(|b| clearance > b.1) {
            best = Some((path, clearance));
        }
    }
    match best {
        Some((path, c)) if c > 1e-6 => Ok(path),
        _ => Err(Error::InvalidTree(format!(
            "no route from {from} to {to} avoids the cone points"
        ))),
    }
}

fn finite_or(x: f64, fallback: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        fallback
    }
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> Option<Complex64> {
    let r = p2 - p1;
    let s = q2 - q1;
    let denom = cross(r, s);
    if denom.abs() < 1e-300 {
        // Parallel: report overlap of collinear pieces through an endpoint.
        if cross(q1 - p1, r).abs() > 1e-14 * (1.0 + r.norm()) {
            return None;
        }
        let rr = r.norm_sqr().max(f64::MIN_POSITIVE);
        let t0 = ((q1 - p1) * r.conj()).re / rr;
        let t1 = ((q2 - p1) * r.conj()).re / rr;
        let (lo, hi) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
        return (lo <= hi).then(|| p1 + r * lo);
    }
    let t = cross(q1 - p1, s) / denom;
    let u = cross(q1 - p1, r) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| p1 + r * t)
}

fn polylines_cross(a: &[Complex64], b: &[Complex64], root: Complex64) -> bool {
    for wa in a.windows(2) {
        for wb in b.windows(2) {
            if let Some(x) = segments_intersect(wa[0], wa[1], wb[0], wb[1]) {
                if (x - root).norm() > 1e-9 {
                    return true;
                }
            }
        }
    }
    false
}

/// First point along the polyline where the distance to `center` crosses `radius`
/// (outward if the polyline starts inside, inward otherwise), with the index of
/// the segment containing it.
fn crossing(points: &[Complex64], center: Complex64, radius: f64) -> Option<(usize, Complex64)> {
    let inside0 = (points[0] - center).norm() < radius;
    for (k, w) in points.windows(2).enumerate() {
        let inside1 = (w[1] - center).norm() < radius;
        if inside1 != inside0 {
            // Solve |w0 + t d - center| = radius for t in [0, 1].
            let d = w[1] - w[0];
            let e = w[0] - center;
            let a = d.norm_sqr();
            let b = 2.0 * (e * d.conj()).re;
            let c = e.norm_sqr() - radius * radius;
            let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
            let t = if inside0 { (-b + disc) / (2.0 * a) } else { (-b - disc) / (2.0 * a) };
            return Some((k, w[0] + d * t.clamp(0.0, 1.0)));
        }
    }
    None
}

/// Arc of the circle around `center` from the direction of `from` to that of `to`.
fn short_arc(center: Complex64, radius: f64, from: Complex64, to: Complex64) -> Path {
    let start = (from - center).arg();
    let mut sweep = (to - center).arg() - start;
    if sweep > PI {
        sweep -= 2.0 * PI;
    } else if sweep <= -PI {
        sweep += 2.0 * PI;
    }
    if sweep == 0.0 {
        Path::new()
    } else {
        Path::arc(center, radius, start, sweep)
    }
}

/// Branch data of the flat form used by [`res_gamma`].
#[derive(Debug, Clone)]
pub struct FlatBranch<'a> {
    surface: &'a AffineSurface,
    tree: &'a ArcTree,
    q: Quadrature,
    root: Complex64,
    inner_radius: f64,
    normalization: Complex64,
}

impl<'a> FlatBranch<'a> {
    pub fn new(surface: &'a AffineSurface, tree: &'a ArcTree, q: &Quadrature) -> Result<Self> {
        tree.validate(surface)?;
        let root = surface.cone_points()[tree.root_index].z;
        let inner_radius = NORMALIZATION_FRACTION * finite_or(surface.min_separation(), 1.0);
        let normalization = match tree.arcs.first() {
            Some(arc) => crossing(&arc.points, root, inner_radius)
                .map(|(_, z)| z)
                .ok_or_else(|| Error::InvalidTree("first arc never leaves the root".into()))?,
            None => root + inner_radius,
        };
        Ok(FlatBranch {
            surface,
            tree,
            q: *q,
            root,
            inner_radius,
            normalization,
        })
    }

    /// The point where the flat form is normalized to 1.
    pub fn normalization_point(&self) -> Complex64 {
        self.normalization
    }

    /// Path from the normalization point to the circle of `radius` around pole
    /// `index`, and the pole position (the arc endpoint).
    pub fn transport_path(&self, index: usize, radius: f64) -> Result<(Path, Complex64)> {
        if index == self.tree.root_index {
            let dir = (self.normalization - self.root) / (self.normalization - self.root).norm();
            let entry = self.root + dir * radius;
            return Ok((Path::line(self.normalization, entry), self.root));
        }
        let arc = self
            .tree
            .arc_to(index)
            .ok_or_else(|| Error::InvalidTree(format!("no arc reaches pole {index}")))?;
        let pole = arc.points[arc.points.len() - 1];
        let (k0, leave) = crossing(&arc.points, self.root, self.inner_radius)
            .ok_or_else(|| Error::InvalidTree(format!("arc to {index} never leaves the root")))?;
        let reversed: Vec<Complex64> = arc.points.iter().rev().copied().collect();
        let (k1_rev, enter) = crossing(&reversed, pole, radius)
            .ok_or_else(|| Error::InvalidTree(format!("arc to {index} never reaches the residue circle")))?;
        let k1 = arc.points.len() - 2 - k1_rev;
        if k1 < k0 {
            return Err(Error::InvalidTree(format!(
                "arc to {index}: residue circle overlaps the root neighbourhood"
            )));
        }
        let mut pts = vec![leave];
        pts.extend_from_slice(&arc.points[k0 + 1..=k1]);
        pts.push(enter);
        pts.dedup();
        let path = short_arc(self.root, self.inner_radius, self.normalization, leave)
            .then(&Path::polyline(&pts));
        Ok((path, pole))
    }

    /// Residue of the normalized flat form at integral pole `index`.
    pub fn residue(&self, index: usize, radius: Option<f64>) -> Result<PoleResidue> {
        let c = self.surface.cone_points().get(index).ok_or(Error::NotIntegralPole { index })?;
        if !c.is_integral_pole() {
            return Err(Error::NotIntegralPole { index });
        }
        let radius = radius.unwrap_or(DEFAULT_RADIUS_FRACTION * finite_or(self.surface.separation(index), 1.0));
        let (path, pole) = self.transport_path(index, radius)?;
        self.surface.check_path(&path)?;
        let log_entry = -integrate(|z| self.surface.connection_form_unchecked(z), &path, &self.q)?;
        let entry_angle = match path.end() {
            Some(e) => (e - pole).arg(),
            None => 0.0,
        };
        circle_residue(self.surface, index, pole, radius, entry_angle, log_entry, &self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleResidue {
    pub index: usize,
    pub value: Complex64,
    /// `max |f| · radius` on the residue circle.
    pub scale: f64,
    pub radius: f64,
}

impl PoleResidue {
    pub fn is_zero(&self) -> bool {
        self.value.norm() <= ZERO_RESIDUE_TOL * self.scale
    }
}

/// Residue of `exp(L)` where `L` is continued from `log_entry` around the circle.
fn circle_residue(
    surface: &AffineSurface,
    index: usize,
    pole: Complex64,
    radius: f64,
    entry_angle: f64,
    log_entry: Complex64,
    q: &Quadrature,
) -> Result<PoleResidue> {
    let gamma = |z: Complex64| surface.connection_form_unchecked(z);
    let mut previous: Option<Complex64> = None;
    let mut nodes = MIN_NODES;
    while nodes <= MAX_NODES {
        let step = 2.0 * PI / nodes as f64;
        let tol = q.abs_tol / nodes as f64;
        let mut log = log_entry;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut max_f: f64 = 0.0;
        for k in 0..nodes {
            let theta = entry_angle + step * k as f64;
            let z = pole + Complex64::from_polar(radius, theta);
            let f = log.exp();
            max_f = max_f.max(f.norm());
            sum += f * (z - pole);
            let seg = Segment::Arc {
                center: pole,
                radius,
                start: theta,
                sweep: step,
            };
            log -= integrate_segment(&gamma, &seg, tol, q)?;
        }
        let closure = (log.exp() - log_entry.exp()).norm();
        if closure > 1e-9 * max_f {
            return Err(Error::NotIntegralPole { index });
        }
        let value = sum / nodes as f64;
        let scale = max_f * radius;
        if let Some(prev) = previous {
            if (value - prev).norm() <= 1e-13 * scale {
                return Ok(PoleResidue {
                    index,
                    value,
                    scale,
                    radius,
                });
            }
        }
        previous = Some(value);
        nodes *= 2;
    }
    Err(Error::ToleranceNotReached {
        abs_tol: q.abs_tol,
        refinements: MAX_NODES.trailing_zeros() as usize,
    })
}

/// Residue at pole `index` of the flat form normalized at the tree's base point.
pub fn flat_residue_at(
    surface: &AffineSurface,
    tree: &ArcTree,
    index: usize,
    radius: Option<f64>,
    q: &Quadrature,
) -> Result<Complex64> {
    Ok(FlatBranch::new(surface, tree, q)?.residue(index, radius)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueTuple {
    pub pole_indices: Vec<usize>,
    /// Residues of the flat form equal to 1 at the normalization point.
    pub raw: Vec<Complex64>,
    pub zero: Vec<bool>,
    /// Projective coordinates (first nonzero entry equal to 1).
    pub values: Vec<Complex64>,
    pub projective: bool,
}

/// Residues at every integral pole, in cone-point order.
pub fn raw_residues(surface: &AffineSurface, tree: &ArcTree, q: &Quadrature) -> Result<Vec<PoleResidue>> {
    let branch = FlatBranch::new(surface, tree, q)?;
    integral_poles(surface)
        .into_iter()
        .map(|j| branch.residue(j, None))
        .collect()
}

pub fn res_gamma(surface: &AffineSurface, tree: &ArcTree, q: &Quadrature) -> Result<ResidueTuple> {
    let residues = raw_residues(surface, tree, q)?;
    let zero: Vec<bool> = residues.iter().map(PoleResidue::is_zero).collect();
    let raw: Vec<Complex64> = residues.iter().map(|r| r.value).collect();
    let lead = zero.iter().position(|z| !z).ok_or(Error::AllResiduesZero)?;
    let values = raw
        .iter()
        .zip(&zero)
        .map(|(&v, &z)| if z { Complex64::new(0.0, 0.0) } else { v / raw[lead] })
        .collect();
    Ok(ResidueTuple {
        pole_indices: residues.iter().map(|r| r.index).collect(),
        raw,
        zero,
        values,
        projective: true,
    })
}

/// Affine chart of a projective point: the largest-modulus coordinate set to 1.
pub fn largest_coordinate_chart(v: &[Complex64]) -> Option<(usize, Vec<Complex64>)> {
    let (lead, big) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
    if big.norm() == 0.0 {
        return None;
    }
    Some((lead, v.iter().map(|x| x / big).collect()))
}

/// Fubini–Study distance between two points of projective space.
pub fn fubini_study_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    // Chord between the phase-aligned unit representatives; accurate for nearby points.
    let phase = if dot.norm() > 0.0 { dot / dot.norm() } else { Complex64::new(1.0, 0.0) };
    let chord = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x / na - phase * y / nb).norm_sqr())
        .sum::<f64>()
        .sqrt();
    2.0 * (0.5 * chord).min(1.0).asin()
}

/// Closed loop comparing two arcs to the same pole: out along `new_arc`,
/// around the pole, back along the tree's arc. Its holonomy is the factor
/// relating the residues computed with the two arcs.
pub fn arc_change_loop(
    surface: &AffineSurface,
    tree: &ArcTree,
    new_arc: &TreeArc,
    q: &Quadrature,
) -> Result<Path> {
    let mut changed = tree.clone();
    let slot = changed
        .arcs
        .iter_mut()
        .find(|a| a.to_index == new_arc.to_index)
        .ok_or_else(|| Error::InvalidTree(format!("no arc reaches pole {}", new_arc.to_index)))?;
    *slot = new_arc.clone();
    let index = new_arc.to_index;
    let radius = DEFAULT_RADIUS_FRACTION * finite_or(surface.separation(index), 1.0);
    let old = FlatBranch::new(surface, tree, q)?;
    let new = FlatBranch::new(surface, &changed, q)?;
    if (old.normalization - new.normalization).norm() > 1e-12 {
        return Err(Error::InvalidTree("changing the first arc moves the normalization point".into()));
    }
    let (out, pole) = new.transport_path(index, radius)?;
    let (back, _) = old.transport_path(index, radius)?;
    let (Some(e_new), Some(e_old)) = (out.end(), back.end()) else {
        return Err(Error::InvalidTree("empty transport path".into()));
    };
    Ok(out.then(&short_arc(pole, radius, e_new, e_old)).then(&back.reversed()))
}

/// Residues of the global flat form at every pole of a translation surface,
/// each reached by a separate route from one base point.
pub fn translation_residues(surface: &AffineSurface, q: &Quadrature) -> Result<Vec<PoleResidue>> {
    let report = character_on_basis(surface, &LoopBasis::standard(surface), q)?;
    if classify(surface, &report) == TranslationClass::NotTranslation {
        return Err(Error::NotTranslationSurface);
    }
    let base = open_point(surface);
    let mut out = Vec::new();
    for (index, c) in surface.cone_points().iter().enumerate() {
        if c.order.re > -1.0 {
            continue;
        }
        let pole = nearest_image(surface, base, c.z);
        let radius = DEFAULT_RADIUS_FRACTION * finite_or(surface.separation(index), 1.0);
        let dir = (base - pole) / (base - pole).norm();
        let entry = pole + dir * radius;
        let path = route(surface, base, entry)?;
        let log_entry = surface.log_flat_multiplier(&path, q)?;
        out.push(circle_residue(surface, index, pole, radius, dir.arg(), log_entry, q)?);
    }
    Ok(out)
}

/// Sum of the residues of the global flat form (zero by the residue theorem).
pub fn residue_sum_check(surface: &AffineSurface, q: &Quadrature) -> Result<Complex64> {
    Ok(translation_residues(surface, q)?.iter().map(|r| r.value).sum())
}

/// A point far from all cone points.
fn open_point(surface: &AffineSurface) -> Complex64 {
    let pts = surface.cone_points();
    let (lo, span) = match surface.tau() {
        Some(tau) => (Complex64::new(0.0, 0.0), [Complex64::new(1.0, 0.0), tau]),
        None => {
            let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for (k, c) in pts.iter().enumerate() {
                if k == 0 {
                    (x0, x1, y0, y1) = (c.z.re, c.z.re, c.z.im, c.z.im);
                }
                x0 = x0.min(c.z.re);
                x1 = x1.max(c.z.re);
                y0 = y0.min(c.z.im);
                y1 = y1.max(c.z.im);
            }
            let pad = 0.5 + 0.25 * (x1 - x0).max(y1 - y0);
            (
                Complex64::new(x0 - pad, y0 - pad),
                [Complex64::new(x1 - x0 + 2.0 * pad, 0.0), Complex64::new(0.0, y1 - y0 + 2.0 * pad)],
            )
        }
    };
    const GRID: usize = 20;
    let mut best = (lo, f64::NEG_INFINITY);
    for i in 0..GRID {
        for j in 0..GRID {
            let z = lo + span[0] * ((i as f64 + 0.5) / GRID as f64) + span[1] * ((j as f64 + 0.5) / GRID as f64);
            let d = surface.nearest_cone_point(z).map_or(f64::INFINITY, |(_, d)| d);
            if d > best.1 + 1e-12 {
                best = (z, d);
            }
        }
    }
    best.0
}
