use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::character::Character;
use super::complex::SurfaceComplex;
use crate::error::Result;
use crate::numerics::linalg::{self, Decomposition};

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_TOL: f64 = 1e-9;

/// Twisted cochain complex `C⁰ → C¹ → C²` with coefficients in `ℂ_χ`.
///
/// Cochain values on a simplex live in the fiber over its smallest vertex:
/// `δf[u,v] = g_uv f(v) − f(u)` and `δφ[a,b,c] = g_ab φ[b,c] − φ[a,c] + φ[a,b]`.
/// The relative version drops boundary vertices and edges.
#[derive(Debug, Clone)]
pub struct CochainComplex {
    /// Kept vertex indices (columns of `d0`).
    pub vertices: Vec<usize>,
    /// Kept edge indices (rows of `d0`, columns of `d1`).
    pub edges: Vec<usize>,
    pub d0: DMatrix<Complex64>,
    pub d1: DMatrix<Complex64>,
}

impl CochainComplex {
    pub fn new(k: &SurfaceComplex, chi: &Character, relative: bool) -> Result<CochainComplex> {
        chi.check_flat(k)?;
        let on_boundary = k.boundary_vertices();
        let vertices: Vec<usize> = (0..k.vertex_count())
            .filter(|&v| !(relative && on_boundary[v]))
            .collect();
        let edges: Vec<usize> = (0..k.edges().len())
            .filter(|&e| !(relative && k.is_boundary_edge(e)))
            .collect();
        let mut vpos = vec![None; k.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            vpos[v] = Some(i);
        }
        let mut epos = vec![None; k.edges().len()];
        for (i, &e) in edges.iter().enumerate() {
            epos[e] = Some(i);
        }
        let one = Complex64::new(1.0, 0.0);
        let mut d0 = DMatrix::zeros(edges.len(), vertices.len());
        for (row, &e) in edges.iter().enumerate() {
            let [u, v] = k.edges()[e];
            if let Some(c) = vpos[v] {
                d0[(row, c)] += chi.value(e);
            }
            if let Some(c) = vpos[u] {
                d0[(row, c)] -= one;
            }
        }
        let n_tri = k.triangles().len();
        let mut d1 = DMatrix::zeros(n_tri, edges.len());
        for t in 0..n_tri {
            let (s, _) = k.oriented_triangle(t);
            let ab = k.edge(s[0], s[1]).unwrap();
            let bc = k.edge(s[1], s[2]).unwrap();
            let ac = k.edge(s[0], s[2]).unwrap();
            if let Some(c) = epos[bc] {
                d1[(t, c)] += chi.value(ab);
            }
            if let Some(c) = epos[ac] {
                d1[(t, c)] -= one;
            }
            if let Some(c) = epos[ab] {
                d1[(t, c)] += one;
            }
        }
        Ok(CochainComplex { vertices, edges, d0, d1 })
    }
}

/// Dimensions and orthonormal representatives of twisted cohomology.
#[derive(Debug, Clone)]
pub struct TwistedCohomology {
    pub dims: [usize; 3],
    /// `H⁰` basis, as vectors over all vertices.
    pub h0_basis: Vec<DVector<Complex64>>,
    /// `H¹` representatives, as cocycles over all edges (zero off the kept edges).
    pub h1_basis: Vec<DVector<Complex64>>,
    /// `H²` representatives orthogonal to the coboundaries, over all triangles.
    pub h2_basis: Vec<DVector<Complex64>>,
}

impl TwistedCohomology {
    pub fn euler_characteristic(&self) -> i64 {
        self.dims[0] as i64 - self.dims[1] as i64 + self.dims[2] as i64
    }
}

fn decompose(m: &DMatrix<Complex64>) -> Decomposition {
    linalg::decompose(m, RANK_TOL, 0.0)
}

fn cohomology(k: &SurfaceComplex, chi: &Character, relative: bool) -> Result<TwistedCohomology> {
    let cx = CochainComplex::new(k, chi, relative)?;
    let (nv, ne, nt) = (cx.vertices.len(), cx.edges.len(), k.triangles().len());
    let s0 = decompose(&cx.d0);
    // The adjoint is tall, so one thin SVD gives both im δ¹* and coker δ¹.
    let s1 = decompose(&cx.d1.adjoint());

    let h0_basis = s0
        .kernel
        .iter()
        .map(|w| {
            let mut full = DVector::zeros(k.vertex_count());
            for (i, &v) in cx.vertices.iter().enumerate() {
                full[v] = w[i];
            }
            full
        })
        .collect();

    // Harmonic representatives: orthogonal to im δ⁰ and to im δ¹*.
    let exact: Vec<DVector<Complex64>> = s0.image.iter().chain(&s1.image).cloned().collect();
    let h1_local = linalg::complement(&exact, ne);
    let h1_basis = h1_local
        .iter()
        .map(|w| {
            let mut full = DVector::zeros(k.edges().len());
            for (i, &e) in cx.edges.iter().enumerate() {
                full[e] = w[i];
            }
            full
        })
        .collect();

    let dims = [nv - s0.rank, ne - s0.rank - s1.rank, nt - s1.rank];
    Ok(TwistedCohomology {
        dims,
        h0_basis,
        h1_basis,
        h2_basis: s1.kernel,
    })
}

/// Cohomology of the surface with coefficients in `ℂ_χ`.
pub fn twisted_cohomology(k: &SurfaceComplex, chi: &Character) -> Result<TwistedCohomology> {
    cohomology(k, chi, false)
}

/// Compactly supported cohomology of the interior, as cohomology relative to the boundary.
pub fn compact_support_cohomology(k: &SurfaceComplex, chi: &Character) -> Result<TwistedCohomology> {
    cohomology(k, chi, true)
}

/// Checks `h^i_c(χ) = h^{2−i}(χ⁻¹)` and returns both dimension triples.
pub fn duality_dims(k: &SurfaceComplex, chi: &Character) -> Result<([usize; 3], [usize; 3], bool)> {
    let compact = compact_support_cohomology(k, chi)?.dims;
    let dual = twisted_cohomology(k, &chi.inverse())?.dims;
    let ok = (0..3).all(|i| compact[i] == dual[2 - i]);
    Ok((compact, dual, ok))
}
