//! Adaptive composite Gauss–Legendre integration of complex functions along
//! piecewise paths made of straight segments and circular arcs.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GL_DEGREE: usize = 16;

fn gl_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(GL_DEGREE)
            .expect("degree >= 2")
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Quadrature settings shared by every path integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_refinements: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-10,
            max_refinements: 40,
        }
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64, max_refinements: usize) -> Result<Self> {
        if !(abs_tol.is_finite() && abs_tol > 0.0) {
            return Err(Error::InvalidLoop(format!(
                "abs_tol must be positive, got {abs_tol}"
            )));
        }
        Ok(Quadrature {
            abs_tol,
            max_refinements,
        })
    }

    pub fn with_tol(abs_tol: f64) -> Result<Self> {
        Self::new(abs_tol, Quadrature::default().max_refinements)
    }
}

/// One smooth piece of a path, parametrized over `t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line { from: Complex64, to: Complex64 },
    /// `center + radius·e^{i(start + sweep·t)}`; negative sweep is clockwise.
    Arc {
        center: Complex64,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => from + (to - from) * t,
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => center + Complex64::from_polar(radius, start + sweep * t),
        }
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc {
                radius,
                start,
                sweep,
                ..
            } => Complex64::i() * sweep * Complex64::from_polar(radius, start + sweep * t),
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => Segment::Arc {
                center,
                radius,
                start: start + sweep,
                sweep: -sweep,
            },
        }
    }

    /// Restriction to the parameter interval `[a, b]`, reparametrized over `[0, 1]`.
    pub fn restrict(&self, a: f64, b: f64) -> Segment {
        match *self {
            Segment::Line { .. } => Segment::Line {
                from: self.point(a),
                to: self.point(b),
            },
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => Segment::Arc {
                center,
                radius,
                start: start + sweep * a,
                sweep: sweep * (b - a),
            },
        }
    }

    /// Smallest distance from `p` to the segment.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - from).norm();
                }
                let t = ((p - from) * d.conj()).re / len2;
                (p - self.point(t.clamp(0.0, 1.0))).norm()
            }
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let rel = p - center;
                let endpoints = (p - self.start()).norm().min((p - self.end()).norm());
                if rel.norm() == 0.0 {
                    return radius;
                }
                // Angle of p measured from `start` in the sweep direction.
                let mut phi = (rel.arg() - start) * sweep.signum();
                phi = phi.rem_euclid(2.0 * PI);
                if phi <= sweep.abs() {
                    (rel.norm() - radius).abs()
                } else {
                    endpoints
                }
            }
        }
    }
}

/// A piecewise smooth path: consecutive segments share endpoints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    segments: Vec<Segment>,
}

impl Path {
    pub fn new() -> Self {
        Path::default()
    }

    pub fn line(from: Complex64, to: Complex64) -> Self {
        Path {
            segments: vec![Segment::Line { from, to }],
        }
    }

    /// Full circle (or any arc) around `center`, split into quarter turns.
    pub fn arc(center: Complex64, radius: f64, start: f64, sweep: f64) -> Self {
        let pieces = ((sweep.abs() / FRAC_PI_2).ceil() as usize).max(1);
        let step = sweep / pieces as f64;
        Path {
            segments: (0..pieces)
                .map(|k| Segment::Arc {
                    center,
                    radius,
                    start: start + step * k as f64,
                    sweep: step,
                })
                .collect(),
        }
    }

    pub fn circle(center: Complex64, radius: f64, orientation: i8) -> Self {
        Path::arc(center, radius, 0.0, 2.0 * PI * f64::from(orientation.signum()))
    }

    pub fn polyline(points: &[Complex64]) -> Self {
        Path {
            segments: points
                .windows(2)
                .map(|w| Segment::Line {
                    from: w[0],
                    to: w[1],
                })
                .collect(),
        }
    }

    pub fn from_segments(segments: Vec<Segment>) -> Self {
        Path { segments }
    }

    pub fn push(&mut self, segment: Segment) {
        self.segments.push(segment);
    }

    pub fn extend(&mut self, other: &Path) {
        self.segments.extend_from_slice(&other.segments);
    }

    pub fn then(mut self, other: &Path) -> Path {
        self.extend(other);
        self
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn start(&self) -> Option<Complex64> {
        self.segments.first().map(Segment::start)
    }

    pub fn end(&self) -> Option<Complex64> {
        self.segments.last().map(Segment::end)
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn reversed(&self) -> Path {
        Path {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    pub fn distance_to(&self, p: Complex64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Points along the path, `per_segment` intervals per segment, endpoints included once.
    pub fn sample(&self, per_segment: usize) -> Vec<Complex64> {
        let per_segment = per_segment.max(1);
        let mut out = Vec::with_capacity(self.segments.len() * per_segment + 1);
        for seg in &self.segments {
            for k in 0..per_segment {
                out.push(seg.point(k as f64 / per_segment as f64));
            }
        }
        if let Some(end) = self.end() {
            out.push(end);
        }
        out
    }
}

struct Panel {
    value: Complex64,
    magnitude: f64,
}

fn gl_panel<F: Fn(Complex64) -> Complex64>(
    f: &F,
    seg: &Segment,
    a: f64,
    b: f64,
) -> Result<Panel> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut value = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for &(x, w) in gl_rule() {
        let t = mid + half * x;
        let z = seg.point(t);
        let fz = f(z);
        if !(fz.re.is_finite() && fz.im.is_finite()) {
            return Err(Error::NonFiniteEvaluation { at: z });
        }
        let term = fz * seg.derivative(t) * (w * half);
        magnitude += term.norm();
        value += term;
    }
    Ok(Panel { value, magnitude })
}

fn adapt<F: Fn(Complex64) -> Complex64>(
    f: &F,
    seg: &Segment,
    (a, b): (f64, f64),
    whole: Panel,
    tol: f64,
    depth: usize,
    q: &Quadrature,
) -> Result<Complex64> {
    let m = 0.5 * (a + b);
    let left = gl_panel(f, seg, a, m)?;
    let right = gl_panel(f, seg, m, b)?;
    let refined = left.value + right.value;
    let err = (refined - whole.value).norm();
    // Roundoff floor of the panel sums.
    let floor = 64.0 * f64::EPSILON * (left.magnitude + right.magnitude);
    if err <= tol.max(floor) {
        return Ok(refined);
    }
    if depth >= q.max_refinements {
        return Err(Error::ToleranceNotReached {
            abs_tol: q.abs_tol,
            refinements: depth,
        });
    }
    let l = adapt(f, seg, (a, m), left, 0.5 * tol, depth + 1, q)?;
    let r = adapt(f, seg, (m, b), right, 0.5 * tol, depth + 1, q)?;
    Ok(l + r)
}

/// `∫_seg f(z) dz` to absolute tolerance `tol`.
pub fn integrate_segment<F: Fn(Complex64) -> Complex64>(
    f: &F,
    seg: &Segment,
    tol: f64,
    q: &Quadrature,
) -> Result<Complex64> {
    for z in [seg.start(), seg.end()] {
        let fz = f(z);
        if !(fz.re.is_finite() && fz.im.is_finite()) {
            return Err(Error::NonFiniteEvaluation { at: z });
        }
    }
    let whole = gl_panel(f, seg, 0.0, 1.0)?;
    adapt(f, seg, (0.0, 1.0), whole, tol, 0, q)
}

/// `∫_path f(z) dz`. The tolerance budget is split across segments by length.
pub fn integrate<F: Fn(Complex64) -> Complex64>(
    f: F,
    path: &Path,
    q: &Quadrature,
) -> Result<Complex64> {
    let total = path.length();
    let mut sum = Complex64::new(0.0, 0.0);
    if total == 0.0 {
        return Ok(sum);
    }
    for seg in path.segments() {
        let len = seg.length();
        if len == 0.0 {
            continue;
        }
        sum += integrate_segment(&f, seg, q.abs_tol * len / total, q)?;
    }
    Ok(sum)
}

/// `(1/2πi) ∮_{|z-p|=radius} f(z) dz`, positively oriented.
pub fn cauchy_residue<F: Fn(Complex64) -> Complex64>(
    f: F,
    p: Complex64,
    radius: f64,
    q: &Quadrature,
) -> Result<Complex64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidLoop(format!("radius must be positive, got {radius}")));
    }
    let circle = Path::circle(p, radius, 1);
    let q = Quadrature {
        abs_tol: q.abs_tol * 2.0 * PI,
        ..*q
    };
    Ok(integrate(f, &circle, &q)? / (2.0 * PI * Complex64::i()))
}
