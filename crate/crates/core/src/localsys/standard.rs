use std::collections::BTreeSet;

use num_complex::Complex64;

use super::character::{Character, Generators};
use super::complex::SurfaceComplex;
use crate::error::{Error, Result};

/// Largest genus with a shipped triangulation.
pub const MAX_STANDARD_GENUS: usize = 2;

/// A triangulated genus-`g` surface with `b` boundary circles and a marked
/// basis `a₁, b₁, …, a_g, b_g, ∂₁, …, ∂_{b−1}` of its first homology.
#[derive(Debug, Clone)]
pub struct StandardSurface {
    pub complex: SurfaceComplex,
    pub generators: Generators,
    /// Closed vertex paths; the lattice-type cycles come first.
    pub cycles: Vec<Vec<usize>>,
}

impl StandardSurface {
    pub fn new(genus: usize, boundary: usize) -> Result<StandardSurface> {
        let (complex, lattice_cycles) = match genus {
            0 => sphere(boundary)?,
            1 => torus(boundary)?,
            2 => genus_two(boundary)?,
            g => return Err(Error::GenusUnsupported { genus: g as u32 }),
        };
        let mut cycles = lattice_cycles;
        for k in 0..boundary.saturating_sub(1) {
            cycles.push(complex.boundary_loop(k));
        }
        let generators = Generators::new(&complex);
        debug_assert_eq!(generators.len(), cycles.len());
        Ok(StandardSurface {
            complex,
            generators,
            cycles,
        })
    }

    pub fn genus(&self) -> usize {
        self.complex.genus()
    }

    pub fn boundary_count(&self) -> usize {
        self.complex.boundary_count()
    }

    /// Character with the given values on the marked cycles.
    pub fn character(&self, values: &[Complex64]) -> Result<Character> {
        Character::from_cycle_values(&self.complex, &self.generators, &self.cycles, values)
    }

    /// Character with holonomy `values[k]` around boundary circle `k` traversed
    /// as a small positive loop around the puncture (opposite to the induced
    /// boundary orientation), and `lattice[i]` on `a₁, b₁, …`.
    ///
    /// The last boundary value is implied; it is checked against the product relation.
    pub fn character_from_punctures(&self, lattice: &[Complex64], punctures: &[Complex64]) -> Result<Character> {
        let b = self.boundary_count();
        if punctures.len() != b || lattice.len() != 2 * self.genus() {
            return Err(Error::InvalidCharacter(format!(
                "expected {} lattice and {b} puncture values",
                2 * self.genus()
            )));
        }
        let mut values = lattice.to_vec();
        values.extend(punctures.iter().take(b.saturating_sub(1)).map(|v| v.inv()));
        let chi = self.character(&values)?;
        if b > 0 {
            let last = chi.holonomy(&self.complex, &self.complex.boundary_loop(b - 1))?.inv();
            if (last - punctures[b - 1]).norm() > 1e-9 * punctures[b - 1].norm().max(1.0) {
                return Err(Error::InvalidCharacter(format!(
                    "puncture holonomies do not multiply to 1: last value {} but {} is implied",
                    punctures[b - 1], last
                )));
            }
        }
        Ok(chi)
    }
}

fn grid_triangles(n: usize, index: impl Fn(usize, usize) -> usize, cells: usize) -> Vec<[usize; 3]> {
    let _ = n;
    let mut tris = Vec::new();
    for j in 0..cells {
        for i in 0..cells {
            let (p, q, r, s) = (index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1));
            tris.push([p, q, r]);
            tris.push([p, r, s]);
        }
    }
    tris
}

/// `n × n` periodic grid on vertices `offset + i + n·j`, with its `a` (row 0)
/// and `b` (column 0) cycles.
fn torus_grid(n: usize, offset: usize) -> (Vec<[usize; 3]>, Vec<usize>, Vec<usize>) {
    let index = |i: usize, j: usize| offset + (i % n) + n * (j % n);
    let tris = grid_triangles(n, index, n);
    let a = (0..=n).map(|i| index(i, 0)).collect();
    let b = (0..=n).map(|j| index(0, j)).collect();
    (tris, a, b)
}

/// Deletes `count` pairwise vertex-disjoint triangles avoiding `protected` vertices.
fn puncture(tris: &mut Vec<[usize; 3]>, count: usize, protected: &BTreeSet<usize>) -> bool {
    let mut used = protected.clone();
    let mut chosen = Vec::new();
    for (t, tri) in tris.iter().enumerate() {
        if chosen.len() == count {
            break;
        }
        if tri.iter().all(|v| !used.contains(v)) {
            used.extend(tri.iter().copied());
            chosen.push(t);
        }
    }
    if chosen.len() < count {
        return false;
    }
    for &t in chosen.iter().rev() {
        tris.remove(t);
    }
    true
}

fn sphere(boundary: usize) -> Result<(SurfaceComplex, Vec<Vec<usize>>)> {
    let mut k = 2 * (boundary as f64).sqrt().ceil() as usize + 1;
    k = k.max(3);
    loop {
        let index = |i: usize, j: usize| i + k * j;
        let mut tris = grid_triangles(k, index, k - 1);
        let apex = k * k;
        // Counter-clockwise boundary of the grid square.
        let mut rim = Vec::new();
        rim.extend((0..k - 1).map(|i| index(i, 0)));
        rim.extend((0..k - 1).map(|j| index(k - 1, j)));
        rim.extend((1..k).rev().map(|i| index(i, k - 1)));
        rim.extend((1..k).rev().map(|j| index(0, j)));
        for w in 0..rim.len() {
            let (x, y) = (rim[w], rim[(w + 1) % rim.len()]);
            tris.push([y, x, apex]);
        }
        if puncture(&mut tris, boundary, &BTreeSet::new()) {
            return Ok((SurfaceComplex::from_triangles(apex + 1, tris)?, Vec::new()));
        }
        k += 2;
    }
}

fn torus(boundary: usize) -> Result<(SurfaceComplex, Vec<Vec<usize>>)> {
    let mut n = 4;
    loop {
        let (mut tris, a, b) = torus_grid(n, 0);
        let protected: BTreeSet<usize> = a.iter().chain(&b).copied().collect();
        if puncture(&mut tris, boundary, &protected) {
            return Ok((SurfaceComplex::from_triangles(n * n, tris)?, vec![a, b]));
        }
        n += 2;
    }
}

/// Connected sum of two torus grids along one deleted triangle each.
fn genus_two(boundary: usize) -> Result<(SurfaceComplex, Vec<Vec<usize>>)> {
    let mut n = 4;
    loop {
        let (mut first, a1, b1) = torus_grid(n, 0);
        let (mut second, a2, b2) = torus_grid(n, n * n);
        let c = n / 2;
        let cut = [c + n * c, c + 1 + n * c, c + 1 + n * (c + 1)];
        let cut2 = cut.map(|v| v + n * n);
        first.retain(|t| *t != cut);
        second.retain(|t| *t != cut2);
        // p' ↦ p, q' ↦ r, r' ↦ q reverses the second boundary so the gluing is oriented.
        let glue = |v: usize| {
            if v == cut2[0] {
                Some(cut[0])
            } else if v == cut2[1] {
                Some(cut[2])
            } else if v == cut2[2] {
                Some(cut[1])
            } else {
                None
            }
        };
        // Compact relabelling of the second torus's remaining vertices.
        let mut relabel = vec![0usize; 2 * n * n];
        let mut next = n * n;
        for v in n * n..2 * n * n {
            relabel[v] = match glue(v) {
                Some(w) => w,
                None => {
                    next += 1;
                    next - 1
                }
            };
        }
        let map = |v: usize| if v < n * n { v } else { relabel[v] };
        let mut tris = first;
        tris.extend(second.iter().map(|t| t.map(map)));
        let a2: Vec<usize> = a2.into_iter().map(map).collect();
        let b2: Vec<usize> = b2.into_iter().map(map).collect();
        let protected: BTreeSet<usize> = a1
            .iter()
            .chain(&b1)
            .chain(&a2)
            .chain(&b2)
            .chain(&cut)
            .copied()
            .collect();
        if puncture(&mut tris, boundary, &protected) {
            let k = SurfaceComplex::from_triangles(next, tris)?;
            return Ok((k, vec![a1, b1, a2, b2]));
        }
        n += 2;
    }
}

/// One barycentric subdivision of `k`, with `χ` pulled back along the
/// vertex map sending each new vertex to a vertex of its carrier simplex.
///
/// New vertices are the old ones, then edge midpoints (`V + e`), then
/// triangle barycenters (`V + E + t`).
pub fn barycentric_refinement(k: &SurfaceComplex, chi: &Character) -> Result<(SurfaceComplex, Character)> {
    let nv = k.vertex_count();
    let ne = k.edges().len();
    let mid = |a: usize, b: usize| nv + k.edge(a, b).expect("edge of a triangle");
    let mut tris = Vec::with_capacity(6 * k.triangles().len());
    for (t, &[a, b, c]) in k.triangles().iter().enumerate() {
        let bary = nv + ne + t;
        let (mab, mbc, mca) = (mid(a, b), mid(b, c), mid(c, a));
        tris.extend([
            [a, mab, bary],
            [mab, b, bary],
            [b, mbc, bary],
            [mbc, c, bary],
            [c, mca, bary],
            [mca, a, bary],
        ]);
    }
    let mut parent: Vec<usize> = (0..nv).collect();
    parent.extend(k.edges().iter().map(|e| e[0]));
    parent.extend(k.triangles().iter().map(|t| *t.iter().min().unwrap()));
    let refined = SurfaceComplex::from_triangles(nv + ne + k.triangles().len(), tris)?;
    let values = refined
        .edges()
        .iter()
        .map(|&[x, y]| chi.transport(k, parent[x], parent[y]))
        .collect();
    let chi2 = Character::from_edge_values(&refined, values)?;
    Ok((refined, chi2))
}
