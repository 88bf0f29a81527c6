use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serialized form of a triangulated surface with boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexData {
    pub vertices: usize,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default)]
    pub boundary_cycles: Vec<Vec<usize>>,
}

/// A triangulated compact oriented surface. Edges are the sorted vertex
/// pairs in lexicographic order; triangles keep their given orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceComplex {
    vertices: usize,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_index: BTreeMap<[usize; 2], usize>,
    /// For each edge, the triangles containing it.
    cofaces: Vec<Vec<usize>>,
    boundary_cycles: Vec<Vec<usize>>,
    genus: usize,
}

fn sorted(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl SurfaceComplex {
    /// Builds the complex, deriving the boundary cycles when `boundary_cycles` is `None`.
    pub fn from_triangles(vertices: usize, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, triangles, None)
    }

    pub fn from_data(data: &ComplexData) -> Result<Self> {
        Self::build(data.vertices, data.triangles.clone(), Some(data.boundary_cycles.clone()))
    }

    pub fn to_data(&self) -> ComplexData {
        ComplexData {
            vertices: self.vertices,
            triangles: self.triangles.clone(),
            boundary_cycles: self.boundary_cycles.clone(),
        }
    }

    fn build(vertices: usize, triangles: Vec<[usize; 3]>, given: Option<Vec<Vec<usize>>>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidComplex(m));
        if triangles.is_empty() {
            return bad("no triangles".into());
        }
        let mut used = vec![false; vertices];
        let mut all = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices {
                    return bad(format!("triangle {t} uses vertex {v} >= {vertices}"));
                }
                used[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return bad(format!("triangle {t} is degenerate"));
            }
            for k in 0..3 {
                all.insert(sorted(tri[k], tri[(k + 1) % 3]), ());
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return bad(format!("vertex {v} lies in no triangle"));
        }
        let edges: Vec<[usize; 2]> = all.into_keys().collect();
        let edge_index: BTreeMap<[usize; 2], usize> = edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        let mut cofaces = vec![Vec::new(); edges.len()];
        // Directed uses, to check coherent orientation.
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut seen_tri = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            let mut key = *tri;
            key.sort_unstable();
            if seen_tri.insert(key, t).is_some() {
                return bad(format!("triangle {t} is repeated"));
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                cofaces[edge_index[&sorted(a, b)]].push(t);
                *directed.entry((a, b)).or_default() += 1;
            }
        }
        for (e, c) in cofaces.iter().enumerate() {
            if c.len() > 2 {
                return bad(format!("edge {e} lies in {} triangles", c.len()));
            }
        }
        for (&(a, b), &n) in &directed {
            if n > 1 {
                return bad(format!("triangles are not coherently oriented along edge ({a}, {b})"));
            }
        }
        let boundary_edges: Vec<usize> = (0..edges.len()).filter(|&e| cofaces[e].len() == 1).collect();
        let derived = boundary_loops(&edges, &edge_index, &triangles, &cofaces, &boundary_edges)?;
        let boundary_cycles = match given {
            None => derived,
            Some(cycles) => {
                let mut listed: Vec<usize> = cycles.iter().flatten().copied().collect();
                listed.sort_unstable();
                if listed != boundary_edges {
                    return bad("boundary_cycles do not list exactly the boundary edges".into());
                }
                for (k, cycle) in cycles.iter().enumerate() {
                    if !is_cycle(&edges, cycle) {
                        return bad(format!("boundary cycle {k} is not a closed loop"));
                    }
                }
                if cycles.len() != derived.len() {
                    return bad(format!(
                        "{} boundary cycles listed but the boundary has {} components",
                        cycles.len(),
                        derived.len()
                    ));
                }
                cycles
            }
        };
        let euler = vertices as i64 - edges.len() as i64 + triangles.len() as i64;
        let b = boundary_cycles.len() as i64;
        let twice_genus = 2 - b - euler;
        if twice_genus < 0 || twice_genus % 2 != 0 {
            return bad(format!("Euler characteristic {euler} with {b} boundary circles is not a surface"));
        }
        let complex = SurfaceComplex {
            vertices,
            triangles,
            edges,
            edge_index,
            cofaces,
            boundary_cycles,
            genus: (twice_genus / 2) as usize,
        };
        if !complex.is_connected() {
            return bad("complex is not connected".into());
        }
        Ok(complex)
    }

    fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.vertices];
        for e in &self.edges {
            adj[e[0]].push(e[1]);
            adj[e[1]].push(e[0]);
        }
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_cycles(&self) -> &[Vec<usize>] {
        &self.boundary_cycles
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_cycles.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&sorted(a, b)).copied()
    }

    pub fn cofaces(&self, e: usize) -> &[usize] {
        &self.cofaces[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.cofaces[e].len() == 1
    }

    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut out = vec![false; self.vertices];
        for (e, [a, b]) in self.edges.iter().enumerate() {
            if self.is_boundary_edge(e) {
                out[*a] = true;
                out[*b] = true;
            }
        }
        out
    }

    /// Sorted vertices of triangle `t` and the sign of its orientation relative to that order.
    pub fn oriented_triangle(&self, t: usize) -> ([usize; 3], f64) {
        let tri = self.triangles[t];
        let mut s = tri;
        s.sort_unstable();
        // Cyclic rotations of the sorted order are even permutations.
        let even = (0..3).any(|r| [s[r], s[(r + 1) % 3], s[(r + 2) % 3]] == tri);
        (s, if even { 1.0 } else { -1.0 })
    }

    /// Closed vertex path along boundary cycle `k`, following the induced orientation.
    pub fn boundary_loop(&self, k: usize) -> Vec<usize> {
        let cycle = &self.boundary_cycles[k];
        let mut next = BTreeMap::new();
        for &e in cycle {
            let [a, b] = self.edges[e];
            let t = self.triangles[self.cofaces[e][0]];
            let forward = (0..3).any(|i| t[i] == a && t[(i + 1) % 3] == b);
            if forward {
                next.insert(a, b);
            } else {
                next.insert(b, a);
            }
        }
        let start = *next.keys().next().expect("nonempty cycle");
        let mut path = vec![start];
        let mut v = next[&start];
        while v != start {
            path.push(v);
            v = next[&v];
        }
        path.push(start);
        path
    }
}

fn is_cycle(edges: &[[usize; 2]], cycle: &[usize]) -> bool {
    if cycle.len() < 3 || cycle.iter().any(|&e| e >= edges.len()) {
        return false;
    }
    let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in cycle {
        for v in edges[e] {
            *degree.entry(v).or_default() += 1;
        }
    }
    if degree.values().any(|&d| d != 2) {
        return false;
    }
    // Connected: walk from the first edge.
    let mut remaining: Vec<usize> = cycle[1..].to_vec();
    let [start, mut v] = edges[cycle[0]];
    while v != start {
        let Some(pos) = remaining.iter().position(|&e| edges[e].contains(&v)) else {
            return false;
        };
        let e = remaining.swap_remove(pos);
        v = if edges[e][0] == v { edges[e][1] } else { edges[e][0] };
    }
    remaining.is_empty()
}

fn boundary_loops(
    edges: &[[usize; 2]],
    edge_index: &BTreeMap<[usize; 2], usize>,
    triangles: &[[usize; 3]],
    cofaces: &[Vec<usize>],
    boundary_edges: &[usize],
) -> Result<Vec<Vec<usize>>> {
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in boundary_edges {
        let [a, b] = edges[e];
        let t = triangles[cofaces[e][0]];
        let forward = (0..3).any(|i| t[i] == a && t[(i + 1) % 3] == b);
        let (from, to) = if forward { (a, b) } else { (b, a) };
        if next.insert(from, to).is_some() {
            return Err(Error::InvalidComplex(format!(
                "boundary is pinched at vertex {from}"
            )));
        }
    }
    let mut done = BTreeMap::new();
    let mut cycles = Vec::new();
    for &start in next.keys() {
        if done.contains_key(&start) {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = start;
        loop {
            done.insert(v, ());
            let w = *next
                .get(&v)
                .ok_or_else(|| Error::InvalidComplex(format!("boundary stops at vertex {v}")))?;
            cycle.push(edge_index[&sorted(v, w)]);
            v = w;
            if v == start {
                break;
            }
            if done.contains_key(&v) {
                return Err(Error::InvalidComplex("boundary is not a union of circles".into()));
            }
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}
