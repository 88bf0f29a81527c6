use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::complex::SurfaceComplex;
use crate::error::{Error, Result};

const FLATNESS_TOL: f64 = 1e-9;

/// Serialized character: values keyed by `"e<k>"`, `k` the canonical edge index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterData {
    pub edge_values: BTreeMap<String, Complex64>,
}

/// Tree–cotree decomposition of the edges.
///
/// Edges of a spanning tree carry the value 1, edges of a spanning tree of
/// the dual graph are solved for by flatness, and the remaining
/// `rank H₁` edges are free.
#[derive(Debug, Clone, PartialEq)]
pub struct Generators {
    edges: Vec<usize>,
    /// Integer exponent of each generator in each edge value.
    exponents: Vec<Vec<i64>>,
}

impl Generators {
    pub fn new(k: &SurfaceComplex) -> Generators {
        let n_edges = k.edges().len();
        let n_tri = k.triangles().len();
        let mut in_tree = vec![false; n_edges];
        let mut adj = vec![Vec::new(); k.vertex_count()];
        for (e, [a, b]) in k.edges().iter().enumerate() {
            adj[*a].push((*b, e));
            adj[*b].push((*a, e));
        }
        let mut seen = vec![false; k.vertex_count()];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    in_tree[e] = true;
                    queue.push_back(w);
                }
            }
        }

        // Dual graph: one node per triangle, plus one node for the outside
        // when there is boundary.
        let outside = n_tri;
        let has_outside = k.boundary_count() > 0;
        let n_dual = n_tri + usize::from(has_outside);
        let mut dual_adj = vec![Vec::new(); n_dual];
        for e in 0..n_edges {
            if in_tree[e] {
                continue;
            }
            let c = k.cofaces(e);
            let (s, t) = if c.len() == 2 { (c[0], c[1]) } else { (c[0], outside) };
            dual_adj[s].push((t, e));
            dual_adj[t].push((s, e));
        }
        let root = if has_outside { outside } else { 0 };
        let mut parent_edge = vec![usize::MAX; n_dual];
        let mut visited = vec![false; n_dual];
        let mut order = vec![root];
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(t) = queue.pop_front() {
            for &(s, e) in &dual_adj[t] {
                if !visited[s] {
                    visited[s] = true;
                    parent_edge[s] = e;
                    order.push(s);
                    queue.push_back(s);
                }
            }
        }
        let in_dual_tree: Vec<bool> = (0..n_edges).map(|e| parent_edge.contains(&e)).collect();
        let edges: Vec<usize> = (0..n_edges).filter(|&e| !in_tree[e] && !in_dual_tree[e]).collect();

        let n_gen = edges.len();
        let mut exponents = vec![vec![0i64; n_gen]; n_edges];
        for (g, &e) in edges.iter().enumerate() {
            exponents[e][g] = 1;
        }
        // Leaves first: every other edge of the triangle is already known.
        for &t in order.iter().rev() {
            if t == root {
                continue;
            }
            let unknown = parent_edge[t];
            let (s, _) = k.oriented_triangle(t);
            let [ab, bc, ac] = [
                k.edge(s[0], s[1]).unwrap(),
                k.edge(s[1], s[2]).unwrap(),
                k.edge(s[0], s[2]).unwrap(),
            ];
            // Flatness in exponents: E_ab + E_bc - E_ac = 0.
            let solved: Vec<i64> = (0..n_gen)
                .map(|g| {
                    let (x, y, z) = (exponents[ab][g], exponents[bc][g], exponents[ac][g]);
                    if unknown == ab {
                        z - y
                    } else if unknown == bc {
                        z - x
                    } else {
                        x + y
                    }
                })
                .collect();
            exponents[unknown] = solved;
        }
        Generators { edges, exponents }
    }

    /// Generator edge indices, in increasing order.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Exponent vector of a closed or open vertex path.
    pub fn path_exponents(&self, k: &SurfaceComplex, path: &[usize]) -> Result<Vec<i64>> {
        let mut out = vec![0i64; self.len()];
        for w in path.windows(2) {
            let e = k
                .edge(w[0], w[1])
                .ok_or_else(|| Error::InvalidCharacter(format!("({}, {}) is not an edge", w[0], w[1])))?;
            let sign = if w[0] < w[1] { 1 } else { -1 };
            for (o, x) in out.iter_mut().zip(&self.exponents[e]) {
                *o += sign * x;
            }
        }
        Ok(out)
    }
}

/// A flat rank-one character: one nonzero value `g_uv` per edge `u < v`.
///
/// Flat sections satisfy `f(u) = g_uv f(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    values: Vec<Complex64>,
}

impl Character {
    pub fn trivial(k: &SurfaceComplex) -> Character {
        Character {
            values: vec![Complex64::new(1.0, 0.0); k.edges().len()],
        }
    }

    /// Character with the given values on the generator edges of `gens`.
    pub fn from_generators(k: &SurfaceComplex, gens: &Generators, values: &[Complex64]) -> Result<Character> {
        if values.len() != gens.len() {
            return Err(Error::InvalidCharacter(format!(
                "{} generator values given, {} expected",
                values.len(),
                gens.len()
            )));
        }
        check_nonzero(values)?;
        let values = gens
            .exponents
            .iter()
            .map(|ex| {
                ex.iter()
                    .zip(values)
                    .fold(Complex64::new(1.0, 0.0), |acc, (&p, v)| acc * v.powi(p as i32))
            })
            .collect();
        let chi = Character { values };
        chi.check_flat(k)?;
        Ok(chi)
    }

    /// Character taking prescribed values on closed vertex paths forming a basis of H₁.
    pub fn from_cycle_values(
        k: &SurfaceComplex,
        gens: &Generators,
        cycles: &[Vec<usize>],
        values: &[Complex64],
    ) -> Result<Character> {
        let n = gens.len();
        if cycles.len() != n || values.len() != n {
            return Err(Error::InvalidCharacter(format!(
                "{} cycles and {} values given, first homology has rank {n}",
                cycles.len(),
                values.len()
            )));
        }
        for c in cycles {
            if c.first() != c.last() {
                return Err(Error::InvalidCharacter("cycle is not closed".into()));
            }
        }
        check_nonzero(values)?;
        let rows: Vec<Vec<i64>> = cycles
            .iter()
            .map(|c| gens.path_exponents(k, c))
            .collect::<Result<_>>()?;
        let inv = unimodular_inverse(&rows)
            .ok_or_else(|| Error::InvalidCharacter("cycles do not form a basis of first homology".into()))?;
        let gen_values: Vec<Complex64> = (0..n)
            .map(|g| {
                (0..n).fold(Complex64::new(1.0, 0.0), |acc, j| acc * values[j].powi(inv[g][j] as i32))
            })
            .collect();
        Character::from_generators(k, gens, &gen_values)
    }

    /// Character from explicit edge values; flatness is checked.
    pub fn from_edge_values(k: &SurfaceComplex, values: Vec<Complex64>) -> Result<Character> {
        if values.len() != k.edges().len() {
            return Err(Error::InvalidCharacter(format!(
                "{} edge values given, complex has {} edges",
                values.len(),
                k.edges().len()
            )));
        }
        check_nonzero(&values)?;
        let chi = Character { values };
        chi.check_flat(k)?;
        Ok(chi)
    }

    /// Reads the JSON form: values on exactly the generator edges, or on all edges.
    pub fn from_data(k: &SurfaceComplex, gens: &Generators, data: &CharacterData) -> Result<Character> {
        let mut given = BTreeMap::new();
        for (key, &v) in &data.edge_values {
            let index = key
                .strip_prefix('e')
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&e| e < k.edges().len())
                .ok_or_else(|| Error::InvalidCharacter(format!("bad edge key {key:?}")))?;
            if given.insert(index, v).is_some() {
                return Err(Error::InvalidCharacter(format!("edge {index} given twice")));
            }
        }
        let keys: Vec<usize> = given.keys().copied().collect();
        if keys == gens.edges() {
            let values: Vec<Complex64> = given.into_values().collect();
            Character::from_generators(k, gens, &values)
        } else if keys.len() == k.edges().len() {
            Character::from_edge_values(k, given.into_values().collect())
        } else {
            Err(Error::InvalidCharacter(format!(
                "values must be given on the generator edges {:?} or on all {} edges",
                gens.edges(),
                k.edges().len()
            )))
        }
    }

    pub fn to_data(&self) -> CharacterData {
        CharacterData {
            edge_values: self
                .values
                .iter()
                .enumerate()
                .map(|(e, &v)| (format!("e{e}"), v))
                .collect(),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, e: usize) -> Complex64 {
        self.values[e]
    }

    /// Transport coefficient from `y` to `x` along the edge between them.
    pub fn transport(&self, k: &SurfaceComplex, x: usize, y: usize) -> Complex64 {
        if x == y {
            return Complex64::new(1.0, 0.0);
        }
        let g = self.values[k.edge(x, y).expect("adjacent vertices")];
        if x < y {
            g
        } else {
            g.inv()
        }
    }

    /// Product of transports along a vertex path.
    pub fn holonomy(&self, k: &SurfaceComplex, path: &[usize]) -> Result<Complex64> {
        let mut out = Complex64::new(1.0, 0.0);
        for w in path.windows(2) {
            if k.edge(w[0], w[1]).is_none() {
                return Err(Error::InvalidCharacter(format!("({}, {}) is not an edge", w[0], w[1])));
            }
            out *= self.transport(k, w[0], w[1]);
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Character {
        Character {
            values: self.values.iter().map(|v| v.inv()).collect(),
        }
    }

    pub fn conj(&self) -> Character {
        Character {
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        match self.values.iter().position(|v| (v.norm() - 1.0).abs() > tol) {
            Some(edge) => Err(Error::NonUnitaryCharacter {
                edge,
                modulus: self.values[edge].norm(),
            }),
            None => Ok(()),
        }
    }

    pub fn check_flat(&self, k: &SurfaceComplex) -> Result<()> {
        for t in 0..k.triangles().len() {
            let (s, _) = k.oriented_triangle(t);
            let hol = self.transport(k, s[0], s[1]) * self.transport(k, s[1], s[2]) * self.transport(k, s[2], s[0]);
            if !hol.is_finite() || (hol - 1.0).norm() > FLATNESS_TOL {
                return Err(Error::NonFlatCharacter { triangle: t, holonomy: hol });
            }
        }
        Ok(())
    }
}

fn check_nonzero(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite() || v.norm() == 0.0) {
        Some(p) => Err(Error::InvalidCharacter(format!("value {p} is zero or not finite"))),
        None => Ok(()),
    }
}

/// Integer inverse of a unimodular integer matrix, if it exists.
fn unimodular_inverse(rows: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = rows.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j] as f64);
    let inv = m.try_inverse()?;
    let out: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| inv[(i, j)].round() as i64).collect())
        .collect();
    for i in 0..n {
        for j in 0..n {
            let s: i64 = (0..n).map(|l| rows[i][l] * out[l][j]).sum();
            if s != i64::from(i == j) {
                return None;
            }
        }
    }
    Some(out)
}
