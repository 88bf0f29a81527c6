//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any criterion fails.

// `ensure!(a <= b)` is negated on purpose so that NaN fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use affsurf::cohomology::{coderivative_rows, dim_H1_L, trans_dims, DimReport, TransDims};
use affsurf::deformation::{
    hol_jacobian, hol_res_jacobian, leaf_comparison, leaf_step, Direction, JacobianOptions, RankReport, SpecFamily,
    Verdict,
};
use affsurf::holonomy::{
    character_on_basis, classify, holonomy, log_holonomy, loop_integral, turning_number, LoopBasis, TranslationClass,
};
use affsurf::localsys::{
    barycentric_refinement, compact_support_cohomology, duality_dims, pairing_matrix, twisted_cohomology,
    StandardSurface,
};
use affsurf::numerics::{LoopPath, Quadrature};
use affsurf::residues::{arc_change_loop, res_gamma, residue_sum_check, ArcTree, TreeArc};
use affsurf::surface::{
    check_node_gluing, exponential_action, validate, AffineSurface, AffineSurfaceSpec, NodeGluing, ViolationKind,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn two_pi_i() -> Complex64 {
    c(0.0, 2.0 * PI)
}

fn fine() -> Quadrature {
    Quadrature::new(1e-12, 40).unwrap()
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

// ---------------------------------------------------------------- specs

fn random_genus0(rng: &mut ChaCha8Rng) -> AffineSurfaceSpec {
    let n = rng.gen_range(3..=5);
    let mut points: Vec<Complex64> = Vec::new();
    while points.len() < n {
        let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if points.iter().all(|p| (p - z).norm() > 0.6) {
            points.push(z);
        }
    }
    let mut orders: Vec<Complex64> = (0..n - 1)
        .map(|_| c(rng.gen_range(-1.5..1.5), rng.gen_range(-0.2..0.2)))
        .collect();
    let partial: Complex64 = orders.iter().sum();
    orders.push(c(-2.0, 0.0) - partial);
    let pairs: Vec<_> = points.into_iter().zip(orders).collect();
    AffineSurfaceSpec::genus0(&pairs)
}

fn random_genus1(rng: &mut ChaCha8Rng) -> AffineSurfaceSpec {
    let tau = c(rng.gen_range(-0.3..0.3), rng.gen_range(0.9..1.4));
    let n = rng.gen_range(1..=3);
    let mut points: Vec<Complex64> = Vec::new();
    while points.len() < n {
        let z = rng.gen_range(0.0..1.0) + tau * rng.gen_range(0.0..1.0);
        let far = points.iter().all(|p| {
            (-1..=1).all(|i| (-1..=1).all(|j| (z - p - f64::from(i) - tau * f64::from(j)).norm() > 0.35))
        });
        if far {
            points.push(z);
        }
    }
    let mut orders: Vec<Complex64> = (0..n - 1)
        .map(|_| c(rng.gen_range(-1.2..1.2), rng.gen_range(-0.15..0.15)))
        .collect();
    let partial: Complex64 = orders.iter().sum();
    orders.push(-partial);
    let lambda = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let pairs: Vec<_> = points.into_iter().zip(orders).collect();
    AffineSurfaceSpec::genus1(tau, lambda, &pairs)
}

fn random_specs(seed: u64, count: usize) -> Vec<AffineSurfaceSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| if k % 2 == 0 { random_genus0(&mut rng) } else { random_genus1(&mut rng) })
        .collect()
}

fn small_circle(s: &AffineSurface, j: usize) -> LoopPath {
    let sep = s.separation(j);
    let radius = 0.3 * if sep.is_finite() { sep } else { 1.0 };
    LoopPath::circle(s.cone_points()[j].z, radius)
}

/// Random closed loops at distance at least 0.05 from every cone point.
fn random_loops(s: &AffineSurface, rng: &mut ChaCha8Rng, count: usize) -> Vec<LoopPath> {
    let mut out = Vec::new();
    while out.len() < count {
        let center = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let r0 = rng.gen_range(0.2..1.6);
        let lp = if out.len() % 2 == 0 {
            LoopPath::Circle {
                center,
                radius: r0,
                orientation: if rng.gen_bool(0.5) { 1 } else { -1 },
            }
        } else {
            let (k, amp, phase) = (rng.gen_range(2..5), rng.gen_range(0.0..0.3), rng.gen_range(0.0..2.0 * PI));
            let points = (0..=160)
                .map(|i| {
                    let t = 2.0 * PI * f64::from(i) / 160.0;
                    center + Complex64::from_polar(r0 * (1.0 + amp * (f64::from(k) * t + phase).cos()), t)
                })
                .collect();
            LoopPath::Samples { points }
        };
        let Ok(path) = affsurf::holonomy::loop_path(s, &lp) else {
            continue;
        };
        if s.path_clearance(&path).1 >= 0.05 {
            out.push(lp);
        }
    }
    out
}

fn two_pole_sphere() -> AffineSurfaceSpec {
    AffineSurfaceSpec::genus0(&[
        (c(0.0, 0.0), c(0.5, 0.0)),
        (c(1.0, 0.0), c(0.5, 0.0)),
        (c(0.3, 1.0), c(1.0, 0.0)),
        (c(-1.0, -0.5), c(-2.0, 0.0)),
        (c(2.0, -1.0), c(-2.0, 0.0)),
    ])
}

fn detour_below() -> TreeArc {
    TreeArc {
        to_index: 4,
        points: vec![c(-1.0, -0.5), c(-0.5, -2.5), c(1.5, -2.5), c(2.0, -1.0)],
    }
}

/// Passes above cone point 0 and between cone points 0 and 1.
fn detour_around_first() -> TreeArc {
    TreeArc {
        to_index: 4,
        points: vec![c(-1.0, -0.5), c(-0.5, 0.5), c(0.5, 0.5), c(0.6, -0.5), c(2.0, -1.0)],
    }
}

fn tree_with(arc: TreeArc) -> ArcTree {
    ArcTree {
        root_index: 3,
        arcs: vec![arc],
    }
}

/// `two_pole_sphere` with a simple pole added at index 5, reached first from the root.
fn three_pole_sphere() -> AffineSurfaceSpec {
    let mut spec = two_pole_sphere();
    spec.cone_points[2].order = c(2.0, 0.0);
    spec.cone_points.push(AffineSurfaceSpec::genus0(&[(c(-1.5, 1.5), c(-1.0, 0.0))]).cone_points[0]);
    spec
}

fn three_pole_tree(second: TreeArc) -> ArcTree {
    ArcTree {
        root_index: 3,
        arcs: vec![
            TreeArc {
                to_index: 5,
                points: vec![c(-1.0, -0.5), c(-1.5, 1.5)],
            },
            second,
        ],
    }
}

/// A double pole at 0 and a double zero at `half` on the square torus, with
/// λ chosen so that the a-holonomy vanishes.
fn half_period_torus(half: Complex64) -> Result<AffineSurfaceSpec, String> {
    let tau = c(0.0, 1.0);
    let points = [(c(0.0, 0.0), c(-2.0, 0.0)), (half, c(2.0, 0.0))];
    let trial = ok(AffineSurface::new(AffineSurfaceSpec::genus1(tau, c(0.0, 0.0), &points)), "surface")?;
    let a = LoopBasis::standard(&trial).lattice_loops()[0].clone();
    let log_a = ok(log_holonomy(&trial, &a, &fine()), "log holonomy")?;
    // Shifting λ by 2πik keeps the a-holonomy and moves the b-holonomy by exp(2πik τ).
    for k in -6..=6 {
        let lambda = log_a + c(0.0, 2.0 * PI * f64::from(k));
        let spec = AffineSurfaceSpec::genus1(tau, lambda, &points);
        let s = ok(AffineSurface::new(spec.clone()), "surface")?;
        let report = ok(character_on_basis(&s, &LoopBasis::standard(&s), &fine()), "character")?;
        if report.is_trivial() {
            return Ok(spec);
        }
    }
    Err(format!("no λ makes the torus with a zero at {half} a translation surface"))
}

fn half_period_tori() -> Result<Vec<AffineSurfaceSpec>, String> {
    [c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.5)].into_iter().map(half_period_torus).collect()
}

fn translation_spheres() -> Vec<AffineSurfaceSpec> {
    let pts = [c(0.0, 0.0), c(1.2, 0.1), c(-0.4, 1.0), c(0.5, -1.3)];
    [[1.0, 1.0, -2.0, -2.0], [2.0, -1.0, -1.0, -2.0], [1.0, -1.0, -1.0, -1.0]]
        .iter()
        .map(|orders| {
            let pairs: Vec<_> = pts.iter().zip(orders).map(|(&z, &m)| (z, c(m, 0.0))).collect();
            AffineSurfaceSpec::genus0(&pairs)
        })
        .collect()
}

fn torus_family(lambda: Complex64) -> SpecFamily {
    let base = AffineSurfaceSpec::genus1(c(0.1, 1.05), lambda, &[(c(0.0, 0.0), c(0.0, 0.0))]);
    SpecFamily::new(base, vec![Direction::Lambda, Direction::Tau]).unwrap()
}

// ------------------------------------------------------------- criteria

fn holonomy_law() -> Outcome {
    let q = Quadrature::default();
    let mut worst: f64 = 0.0;
    for spec in random_specs(11, 50) {
        let s = ok(AffineSurface::new(spec), "random spec")?;
        for (j, cp) in s.cone_points().iter().enumerate() {
            let chi = ok(holonomy(&s, &small_circle(&s, j), &q), "holonomy")?;
            worst = worst.max((chi - (two_pi_i() * cp.order).exp()).norm());
        }
    }
    ensure!(worst <= 1e-8, "max |chi - exp(2 pi i m)| = {worst:e}");
    Ok(format!("50 specs, max error {worst:.1e}"))
}

fn turning_law() -> Outcome {
    let q = Quadrature::default();
    let mut circle_err: f64 = 0.0;
    for spec in random_specs(11, 50) {
        let s = ok(AffineSurface::new(spec), "random spec")?;
        for (j, cp) in s.cone_points().iter().enumerate() {
            let tau = ok(turning_number(&s, &small_circle(&s, j), &q), "turning")?;
            circle_err = circle_err.max((tau - (cp.order + 1.0)).norm());
        }
    }
    ensure!(circle_err <= 1e-8, "max |tau - (m + 1)| = {circle_err:e}");
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let specs = random_specs(13, 10);
    let mut framing_err: f64 = 0.0;
    let mut loops = 0;
    for spec in specs {
        let s = ok(AffineSurface::new(spec), "random spec")?;
        for lp in random_loops(&s, &mut rng, 10) {
            let chi = ok(holonomy(&s, &lp, &q), "holonomy")?;
            let tau = ok(turning_number(&s, &lp, &q), "turning")?;
            framing_err = framing_err.max(((two_pi_i() * tau).exp() - chi).norm());
            loops += 1;
        }
    }
    ensure!(framing_err <= 1e-8, "max |exp(2 pi i tau) - chi| = {framing_err:e}");
    Ok(format!("circle error {circle_err:.1e}; framing error {framing_err:.1e} on {loops} loops"))
}

fn turning_difference() -> Outcome {
    let q = fine();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst: f64 = 0.0;
    let mut closed_form: f64 = 0.0;
    for (k, spec) in random_specs(22, 20).into_iter().enumerate() {
        let n = spec.cone_points.len();
        let mut a: Vec<Complex64> = (0..n - 1)
            .map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.2..0.2)))
            .collect();
        let partial: Complex64 = a.iter().sum();
        a.push(-partial);
        let a0 = if spec.genus == 1 { c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)) } else { c(0.0, 0.0) };
        let acted = ok(exponential_action(&spec, &a, a0), "exponential action")?;
        let s1 = ok(AffineSurface::new(spec), "spec")?;
        let s2 = ok(AffineSurface::new(acted), "acted spec")?;
        let mut loops: Vec<LoopPath> = (0..n).map(|j| small_circle(&s1, j)).collect();
        loops.extend(random_loops(&s1, &mut rng, 3));
        for lp in &loops {
            let t1 = ok(turning_number(&s1, lp, &q), "turning")?;
            let t2 = ok(turning_number(&s2, lp, &q), "turning")?;
            let d = ok(loop_integral(&s1, lp, &q), "integral")? - ok(loop_integral(&s2, lp, &q), "integral")?;
            worst = worst.max((t1 - t2 + d / two_pi_i()).norm());
        }
        // Genus 0 circles: the difference of connection forms has residues −a_j.
        if k % 2 == 0 {
            for (j, lp) in loops.iter().take(n).enumerate() {
                let t1 = ok(turning_number(&s1, lp, &q), "turning")?;
                let t2 = ok(turning_number(&s2, lp, &q), "turning")?;
                closed_form = closed_form.max((t1 - t2 + a[j]).norm());
            }
        }
    }
    ensure!(worst <= 1e-8, "max defect {worst:e}");
    ensure!(closed_form <= 1e-8, "closed-form defect {closed_form:e}");
    Ok(format!("20 pairs, max defect {worst:.1e} (closed form {closed_form:.1e})"))
}

fn gauss_bonnet() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut accepted, mut rejected) = (0, 0);
    for k in 0..200 {
        let mut spec = if k % 2 == 0 { random_genus0(&mut rng) } else { random_genus1(&mut rng) };
        let broken = k % 4 >= 2;
        if broken {
            let delta = Complex64::from_polar(10f64.powf(rng.gen_range(-6.0..0.0)), rng.gen_range(0.0..2.0 * PI));
            spec.cone_points[0].order += delta;
        }
        let report = validate(&spec);
        let flagged = report.violations.iter().any(|v| v.kind == ViolationKind::GaussBonnetViolation);
        ensure!(flagged == broken, "spec {k}: violation {flagged}, expected {broken}");
        ensure!(report.valid == !broken, "spec {k}: valid = {}", report.valid);
        if broken {
            rejected += 1;
        } else {
            accepted += 1;
        }
    }
    let q = Quadrature::new(1e-13, 40).unwrap();
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..20 {
        let s = ok(AffineSurface::new(random_genus0(&mut rng)), "spec")?;
        let big = LoopPath::circle(c(0.0, 0.0), 25.0);
        let v = ok(loop_integral(&s, &big, &q), "integral")? / two_pi_i();
        worst = worst.max((v - 2.0).norm());
    }
    ensure!(worst <= 1e-10, "big circle defect {worst:e}");
    Ok(format!("{accepted} accepted, {rejected} rejected; big-circle defect {worst:.1e}"))
}

fn veech_dichotomy() -> Outcome {
    let opts = JacobianOptions::default();
    let lambdas = [c(0.0, 0.0), c(1e-3, 0.0), c(0.0, 1e-3), c(-7e-4, 7.2e-4), c(0.7, 0.1), c(-1.5, 2.0)];
    let mut min_gap = f64::INFINITY;
    let mut max_err: f64 = 0.0;
    for lambda in lambdas {
        let family = torus_family(lambda);
        let s = ok(AffineSurface::new(family.base.clone()), "base")?;
        let r = ok(hol_jacobian(&family, &LoopBasis::standard(&s), &opts), "jacobian")?;
        let tau = family.base.tau.unwrap();
        let exact = [[c(-1.0, 0.0), c(0.0, 0.0)], [-tau, -lambda]];
        let mut err: f64 = 0.0;
        for (i, row) in exact.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                err = err.max((r.entry(i, j) - e).norm());
            }
        }
        ensure!(err <= 1e-6, "lambda = {lambda}: entry error {err:e}");
        max_err = max_err.max(err);
        let expected = if lambda.norm() == 0.0 { 1 } else { 2 };
        ensure!(r.rank == expected, "lambda = {lambda}: rank {} (expected {expected})", r.rank);
        // Distance of the smallest kept singular value from the noise, measured
        // by the entrywise error against the closed form (Weyl's bound).
        let noise = (2.0 * err).max(r.singular_values.get(r.rank).copied().unwrap_or(0.0));
        let gap = r.singular_values[r.rank - 1] / noise.max(f64::MIN_POSITIVE);
        min_gap = min_gap.min(gap);
    }
    ensure!(min_gap >= 1e3, "singular-value gap {min_gap:e}");
    Ok(format!("6 values of lambda, entry error {max_err:.1e}, gap {min_gap:.1e}"))
}

fn infinite_area() -> Outcome {
    let q = fine();
    let opts = JacobianOptions::default();
    let mut ranks = Vec::new();
    for spec in half_period_tori()? {
        let s = ok(AffineSurface::new(spec.clone()), "spec")?;
        let basis = LoopBasis::standard(&s);
        let report = ok(character_on_basis(&s, &basis, &q), "character")?;
        ensure!(report.is_trivial(), "half-period spec has nontrivial holonomy");
        ensure!(classify(&s, &report) == TranslationClass::InfiniteArea, "not classified infinite-area");
        let family = ok(SpecFamily::stratum(spec), "family")?;
        let r = ok(hol_jacobian(&family, &basis, &opts), "jacobian")?;
        ensure!(
            r.verdict == Verdict::Submersion && r.rank == 2,
            "rank {} of target {}",
            r.rank,
            r.target_dim
        );
        ranks.push(r.rank);
    }
    // The (1, −1) stratum has no trivial-holonomy point off the lattice.
    let mut min_b: f64 = f64::INFINITY;
    for i in 1..5 {
        for j in 1..5 {
            let z = c(f64::from(i) / 5.0, f64::from(j) / 5.0);
            let points = [(c(0.0, 0.0), c(-1.0, 0.0)), (z, c(1.0, 0.0))];
            let trial = ok(AffineSurface::new(AffineSurfaceSpec::genus1(c(0.0, 1.0), c(0.0, 0.0), &points)), "spec")?;
            let lat = LoopBasis::standard(&trial).lattice_loops();
            let lambda = ok(log_holonomy(&trial, &lat[0], &q), "log holonomy")?;
            let s = ok(AffineSurface::new(AffineSurfaceSpec::genus1(c(0.0, 1.0), lambda, &points)), "spec")?;
            let chi_b = ok(holonomy(&s, &lat[1], &q), "holonomy")?;
            min_b = min_b.min((chi_b - 1.0).norm());
        }
    }
    ensure!(min_b > 1e-3, "a (1,-1) spec has trivial holonomy: |chi(b) - 1| = {min_b:e}");
    Ok(format!("(2,-2) half-period specs: ranks {ranks:?}; (1,-1) sample min |chi(b)-1| = {min_b:.2}"))
}

fn dimension_identities() -> Outcome {
    let set = [(0, 3), (0, 4), (0, 5), (1, 1), (1, 2), (1, 3)];
    for (g, n) in set {
        let d = ok(dim_H1_L(g, n), "dim")?;
        ensure!(d as i64 == 4 * i64::from(g) - 4 + 2 * i64::from(n), "dim_H1_L({g},{n}) = {d}");
        let rows = ok(coderivative_rows(g, n), "rows")?;
        ensure!(rows.top_row.exact && rows.bottom_row.exact, "({g},{n}) rows not exact");
    }
    Ok(format!("{} pairs", set.len()))
}

fn twisted_cohomology_laws() -> Outcome {
    let shapes = [(0usize, 3usize), (0, 4), (1, 1), (2, 0), (1, 2)];
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    for k in 0..30 {
        let (g, b) = shapes[k % shapes.len()];
        let s = ok(StandardSurface::new(g, b), "surface")?;
        let values: Vec<Complex64> = (0..s.cycles.len())
            .map(|_| match rng.gen_range(0..5) {
                0 => c(1.0, 0.0),
                1 => c(-1.0, 0.0),
                _ => Complex64::from_polar(rng.gen_range(0.3..3.0), rng.gen_range(-PI..PI)),
            })
            .collect();
        let chi = ok(s.character(&values), "character")?;
        let h = ok(twisted_cohomology(&s.complex, &chi), "cohomology")?;
        let euler = 2 - 2 * g as i64 - b as i64;
        ensure!(h.euler_characteristic() == euler, "({g},{b}) case {k}: dims {:?}", h.dims);
        let (compact, dual, agree) = ok(duality_dims(&s.complex, &chi), "duality")?;
        ensure!(agree, "({g},{b}) case {k}: compact {compact:?} vs dual {dual:?}");
        let (k2, chi2) = ok(barycentric_refinement(&s.complex, &chi), "refinement")?;
        let h2 = ok(twisted_cohomology(&k2, &chi2), "refined cohomology")?;
        let c2 = ok(compact_support_cohomology(&k2, &chi2), "refined compact")?;
        ensure!(h2.dims == h.dims && c2.dims == compact, "({g},{b}) case {k}: refinement changed dims");
    }
    Ok("30 characters over 5 surfaces".into())
}

fn trans_dichotomy() -> Outcome {
    let q = Quadrature::default();
    let mut labelled: Vec<(AffineSurfaceSpec, bool)> = Vec::new();
    labelled.push((torus_family(c(0.0, 0.0)).base, true));
    labelled.push((torus_family(c(0.7, 0.1)).base, false));
    labelled.extend(half_period_tori()?.into_iter().map(|s| (s, true)));
    labelled.extend(translation_spheres().into_iter().map(|s| (s, true)));
    labelled.push((two_pole_sphere(), false));
    labelled.push((
        AffineSurfaceSpec::genus0(&[
            (c(0.0, 0.0), c(0.5, 0.0)),
            (c(1.0, 0.0), c(0.5, 0.0)),
            (c(0.4, 1.2), c(-3.0, 0.0)),
        ]),
        false,
    ));
    labelled.extend(random_specs(11, 10).into_iter().map(|s| (s, false)));
    for (spec, translation) in &labelled {
        let s = ok(AffineSurface::new(spec.clone()), "spec")?;
        let t = ok(trans_dims(&s, &q), "trans dims")?;
        ensure!(t.h2 == usize::from(*translation), "h2 = {} on {spec:?}", t.h2);
    }
    Ok(format!("{} specs", labelled.len()))
}

fn isoresidual_foliation() -> Outcome {
    let start = two_pole_sphere();
    let s = ok(AffineSurface::new(start.clone()), "spec")?;
    let q = Quadrature::default();
    let opts = JacobianOptions::default();
    let straight = ok(ArcTree::straight(&s), "tree")?;
    let family = ok(SpecFamily::stratum(start.clone()), "family")?;
    let r = ok(hol_res_jacobian(&family, &LoopBasis::standard(&s), &straight, &opts), "jacobian")?;
    let h1 = ok(trans_dims(&s, &q), "trans dims")?.h1;
    ensure!(r.kernel_dim() == 1 && h1 == 1, "kernel {} vs h1 {h1}", r.kernel_dim());

    let (mut spec, mut tree) = (start.clone(), straight.clone());
    let mut walk = Vec::new();
    for _ in 0..20 {
        let step = ok(leaf_step(&spec, &tree, 1e-2, &opts), "leaf step")?;
        spec = step.spec;
        tree = step.tree;
        walk.push(spec.clone());
    }
    let total = ok(leaf_comparison(&start, &spec, &straight, &q), "comparison")?;
    ensure!(total.holonomy_drift <= 2e-6, "holonomy drift {:e}", total.holonomy_drift);
    ensure!(total.residue_distance <= 2e-6, "residue drift {:e}", total.residue_distance);

    let detour = tree_with(detour_below());
    ok(detour.validate(&s), "detour tree")?;
    let mut candidates = vec![walk[4].clone(), walk[19].clone()];
    for (k, dz) in [c(1e-2, 0.0), c(0.0, 1e-2), c(-3e-2, 2e-2)].into_iter().enumerate() {
        let mut off = start.clone();
        off.cone_points[3 + k % 2].z += dz;
        candidates.push(off);
    }
    let mut decisions = Vec::new();
    for cand in &candidates {
        let a = ok(leaf_comparison(&start, cand, &straight, &q), "comparison")?.same_leaf(2e-6);
        let b = ok(leaf_comparison(&start, cand, &detour, &q), "comparison")?.same_leaf(2e-6);
        ensure!(a == b, "trees disagree on {cand:?}");
        decisions.push(a);
    }
    ensure!(decisions == [true, true, false, false, false], "membership {decisions:?}");
    Ok(format!(
        "kernel 1 = h1; drift {:.1e} / {:.1e} after 20 steps; trees agree on {} specs",
        total.holonomy_drift,
        total.residue_distance,
        candidates.len()
    ))
}

fn residue_laws() -> Outcome {
    let q = fine();
    let s = ok(AffineSurface::new(three_pole_sphere()), "spec")?;
    let old = three_pole_tree(TreeArc {
        to_index: 4,
        points: vec![c(-1.0, -0.5), c(2.0, -1.0)],
    });
    ok(old.validate(&s), "tree")?;
    let before = ok(res_gamma(&s, &old, &q), "residues")?;
    let mut worst: f64 = 0.0;
    for arc in [detour_below(), detour_around_first()] {
        let new = three_pole_tree(arc.clone());
        ok(new.validate(&s), "tree")?;
        let after = ok(res_gamma(&s, &new, &q), "residues")?;
        let path = ok(arc_change_loop(&s, &old, &arc, &q), "loop")?;
        let chi = (-ok(s.connection_integral(&path, &q), "integral")?).exp();
        let k = after.pole_indices.iter().position(|&j| j == 4).unwrap();
        let expected = before.values[k] * chi;
        worst = worst.max((after.values[k] - expected).norm() / after.values[k].norm().max(1.0));
    }
    ensure!(worst <= 1e-8, "arc change defect {worst:e}");
    let mut sums: f64 = 0.0;
    let mut specs = translation_spheres();
    specs.extend(half_period_tori()?);
    for spec in &specs {
        let s = ok(AffineSurface::new(spec.clone()), "spec")?;
        sums = sums.max(ok(residue_sum_check(&s, &Quadrature::new(1e-13, 40).unwrap()), "residue sum")?.norm());
    }
    ensure!(sums <= 1e-9, "residue sum {sums:e}");
    Ok(format!("arc change defect {worst:.1e}; residue sums {sums:.1e} on {} surfaces", specs.len()))
}

fn veech_pairing_laws() -> Outcome {
    let shapes = [(0usize, 3usize), (0, 4), (2, 0), (1, 2)];
    let mut rng = ChaCha8Rng::seed_from_u64(121);
    let mut min_ratio = f64::INFINITY;
    let mut max_defect: f64 = 0.0;
    let mut count = 0;
    for &(g, b) in &shapes {
        let s = ok(StandardSurface::new(g, b), "surface")?;
        for _ in 0..4 {
            let values: Vec<Complex64> =
                (0..s.cycles.len()).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.2..6.0))).collect();
            let chi = ok(s.character(&values), "character")?;
            let r = ok(pairing_matrix(&s.complex, &chi), "pairing")?;
            max_defect = max_defect.max(r.hermitian_defect);
            min_ratio = min_ratio.min(r.ratio);
            let (k2, chi2) = ok(barycentric_refinement(&s.complex, &chi), "refinement")?;
            let r2 = ok(pairing_matrix(&k2, &chi2), "refined pairing")?;
            ensure!(r2.signature == r.signature, "({g},{b}): signature {:?} -> {:?}", r.signature, r2.signature);
            count += 1;
        }
    }
    ensure!(max_defect <= 1e-10, "hermitian defect {max_defect:e}");
    ensure!(min_ratio >= 1e-8, "sigma_min / sigma_max = {min_ratio:e}");
    Ok(format!("{count} characters; defect {max_defect:.1e}; min ratio {min_ratio:.1e}"))
}

fn node_gluing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(131);
    let dyadic = |rng: &mut ChaCha8Rng| f64::from(rng.gen_range(-64..64)) / 8.0;
    let mut checked = 0;
    for k in 0..400 {
        let a = c(dyadic(&mut rng), dyadic(&mut rng));
        let b = match k % 4 {
            0 | 1 => c(-2.0, 0.0) - a,
            2 => c(-2.0, 0.0) - a + c(rng.gen_range(-1e-6..1e-6), 0.0),
            _ => c(dyadic(&mut rng), dyadic(&mut rng)),
        };
        // Dyadic values with small numerators add exactly.
        let sums_to_minus_two = a.re + b.re == -2.0 && a.im + b.im == 0.0;
        let accepted = check_node_gluing(&NodeGluing { branch_orders: (a, b) });
        ensure!(accepted == sums_to_minus_two, "({a}, {b}): accepted {accepted}");
        checked += 1;
    }
    Ok(format!("{checked} pairs"))
}

// ------------------------------------------------------------------ CLI

struct Scratch(PathBuf);

impl Scratch {
    fn new() -> Scratch {
        let dir = std::env::temp_dir().join(format!("affsurf-acceptance-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn write<T: serde::Serialize>(&self, name: &str, value: &T) -> PathBuf {
        let path = self.0.join(name);
        std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
        path
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_affsurf"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "{args:?} exited with {}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(out.stdout)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn cli_determinism() -> Outcome {
    let scratch = Scratch::new();
    let surface = scratch.write("surface.json", &two_pole_sphere());
    let stratum = scratch.write("stratum.json", &SpecFamily::stratum(two_pole_sphere()).unwrap());
    let torus = scratch.write("torus.json", &torus_family(c(0.7, 0.1)));
    let circle = scratch.write("loop.json", &LoopPath::circle(c(0.0, 0.0), 0.2));
    let (surface, stratum, torus, circle) = (path_str(&surface), path_str(&stratum), path_str(&torus), path_str(&circle));
    let runs: Vec<Vec<&str>> = vec![
        vec!["holonomy", "--surface", surface, "--loop", circle],
        vec!["holonomy", "--surface", surface],
        vec!["residues", "--surface", surface],
        vec!["trans-dims", "--surface", surface],
        vec!["dims", "--genus", "1", "--n", "2"],
        vec!["twisted", "--genus", "0", "--n", "4", "--cycle-values", "[[0,1],[0,1],[0,-1]]"],
        vec!["rank", "--family", torus],
        vec!["rank", "--family", stratum, "--residues"],
        vec!["rank", "--family", stratum, "--residues", "--format", "csv"],
        vec!["leaf-walk", "--surface", surface, "--steps", "2"],
    ];
    for args in &runs {
        let first = cli(args)?;
        let second = cli(args)?;
        ensure!(first == second, "{args:?}: repeated runs differ");
        let mut parallel = args.clone();
        parallel.extend(["--jobs", "4"]);
        ensure!(cli(&parallel)? == first, "{args:?}: --jobs 4 differs from --jobs 1");
    }
    // Reports read back through the library types.
    let rank: RankReport = serde_json::from_slice(&cli(&["rank", "--family", stratum, "--residues"])?)
        .map_err(|e| format!("rank report: {e}"))?;
    ensure!(rank.kernel_dim() == 1, "rank report kernel {}", rank.kernel_dim());
    let _: TransDims = serde_json::from_slice(&cli(&["trans-dims", "--surface", surface])?)
        .map_err(|e| format!("trans-dims report: {e}"))?;
    let _: DimReport = serde_json::from_slice(&cli(&["dims", "--genus", "1", "--n", "2"])?)
        .map_err(|e| format!("dims report: {e}"))?;
    Ok(format!("{} commands repeated and run with --jobs 4", runs.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 14] = [
        ("holonomy law", holonomy_law),
        ("turning law", turning_law),
        ("turning difference", turning_difference),
        ("Gauss-Bonnet gate", gauss_bonnet),
        ("Veech submersion dichotomy", veech_dichotomy),
        ("infinite-area robustness", infinite_area),
        ("dimension identities", dimension_identities),
        ("twisted cohomology", twisted_cohomology_laws),
        ("trans dichotomy", trans_dichotomy),
        ("isoresidual foliation", isoresidual_foliation),
        ("residue laws", residue_laws),
        ("Veech pairing", veech_pairing_laws),
        ("node gluing", node_gluing),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
