//! Weierstrass σ and ζ for the lattice `ℤ + ℤτ`, via the Jacobi θ₁ series.
//!
//! The lattice is first Gauss-reduced to a basis `(w₁, w₂)` with
//! `τ' = w₂/w₁` in the fundamental domain, so the nome `q = e^{iπτ'}` has
//! `|q| ≤ e^{-π√3/2}`. Homogeneity `σ(cz; cΛ) = c σ(z; Λ)` moves everything
//! back to the original normalization `ω₁ = 1`, `ω₂ = τ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Quasi-periods and cached theta data of the lattice `ℤ + ℤτ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeData {
    tau: Complex64,
    /// `(η₁, η₂)` with `ζ(z+1) = ζ(z)+η₁`, `ζ(z+τ) = ζ(z)+η₂`.
    quasi_periods: (Complex64, Complex64),
    reduced: ReducedLattice,
}

/// Lattice `ℤ + ℤτ'` with `τ'` in the fundamental domain, scaled by `w1`.
#[derive(Debug, Clone, PartialEq)]
struct ReducedLattice {
    w1: Complex64,
    tau: Complex64,
    eta1: Complex64,
    eta2: Complex64,
    theta_prime0: Complex64,
    /// `(-1)^n q^{(n+1/2)^2}` for n = 0..
    coeffs: Vec<Complex64>,
}

fn i() -> Complex64 {
    Complex64::i()
}

impl ReducedLattice {
    fn new(w1: Complex64, tau: Complex64) -> Self {
        let terms = ((50.0 / (PI * tau.im) + 0.25).sqrt().ceil() as usize + 2).max(6);
        let coeffs: Vec<Complex64> = (0..terms)
            .map(|n| {
                let k = n as f64 + 0.5;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign * (i() * PI * tau * (k * k)).exp()
            })
            .collect();
        let mut theta_prime0 = Complex64::new(0.0, 0.0);
        let mut theta_third0 = Complex64::new(0.0, 0.0);
        for (n, &c) in coeffs.iter().enumerate() {
            let odd = (2 * n + 1) as f64;
            theta_prime0 += 2.0 * c * odd;
            theta_third0 -= 2.0 * c * odd * odd * odd;
        }
        let eta1 = -(PI * PI) * theta_third0 / (3.0 * theta_prime0);
        let eta2 = eta1 * tau - 2.0 * PI * i();
        ReducedLattice {
            w1,
            tau,
            eta1,
            eta2,
            theta_prime0,
            coeffs,
        }
    }

    /// Splits `w = w0 + m + nτ'` with `w0` in the centered parallelogram.
    fn reduce(&self, w: Complex64) -> (Complex64, f64, f64) {
        let n = (w.im / self.tau.im).round();
        let m = (w.re - n * self.tau.re).round();
        (w - m - n * self.tau, m, n)
    }

    fn theta1(&self, v: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, &c)| 2.0 * c * (v * (2 * n + 1) as f64).sin())
            .sum()
    }

    fn theta1_prime(&self, v: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, &c)| {
                let odd = (2 * n + 1) as f64;
                2.0 * c * odd * (v * odd).cos()
            })
            .sum()
    }

    fn sigma_centered(&self, w: Complex64) -> Complex64 {
        (self.eta1 * w * w * 0.5).exp() * self.theta1(PI * w) / (PI * self.theta_prime0)
    }

    fn zeta_centered(&self, w: Complex64) -> Complex64 {
        let v = PI * w;
        self.eta1 * w + PI * self.theta1_prime(v) / self.theta1(v)
    }

    fn sigma(&self, w: Complex64) -> Complex64 {
        let (w0, m, n) = self.reduce(w);
        let omega = m + n * self.tau;
        let eta = m * self.eta1 + n * self.eta2;
        let parity = (m + n + m * n).rem_euclid(2.0);
        let sign = if parity == 0.0 { 1.0 } else { -1.0 };
        sign * (eta * (w0 + omega * 0.5)).exp() * self.sigma_centered(w0)
    }

    fn zeta(&self, w: Complex64) -> Complex64 {
        let (w0, m, n) = self.reduce(w);
        self.zeta_centered(w0) + m * self.eta1 + n * self.eta2
    }

    /// Quasi-period of the reduced lattice for a lattice vector `omega`.
    fn eta_of(&self, omega: Complex64) -> Complex64 {
        let n = (omega.im / self.tau.im).round();
        let m = (omega.re - n * self.tau.re).round();
        m * self.eta1 + n * self.eta2
    }
}

/// Gauss reduction of the basis `(1, τ)`.
fn reduce_basis(tau: Complex64) -> (Complex64, Complex64) {
    let mut w1 = Complex64::new(1.0, 0.0);
    let mut w2 = tau;
    for _ in 0..200 {
        if w2.norm_sqr() < w1.norm_sqr() {
            std::mem::swap(&mut w1, &mut w2);
        }
        let k = (w2 / w1).re.round();
        if k == 0.0 {
            break;
        }
        w2 -= k * w1;
    }
    if w2.norm_sqr() < w1.norm_sqr() {
        std::mem::swap(&mut w1, &mut w2);
    }
    if (w2 / w1).im < 0.0 {
        w2 = -w2;
    }
    (w1, w2)
}

impl LatticeData {
    pub fn new(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0 && tau.re.is_finite() && tau.im.is_finite()) {
            return Err(Error::DegenerateLattice { tau });
        }
        let (w1, w2) = reduce_basis(tau);
        let reduced = ReducedLattice::new(w1, w2 / w1);
        let eta1 = reduced.eta_of(w1.inv()) / w1;
        let eta2 = reduced.eta_of(tau / w1) / w1;
        Ok(LatticeData {
            tau,
            quasi_periods: (eta1, eta2),
            reduced,
        })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn quasi_periods(&self) -> (Complex64, Complex64) {
        self.quasi_periods
    }

    pub fn sigma(&self, z: Complex64) -> Complex64 {
        let w1 = self.reduced.w1;
        w1 * self.reduced.sigma(z / w1)
    }

    pub fn zeta(&self, z: Complex64) -> Complex64 {
        let w1 = self.reduced.w1;
        self.reduced.zeta(z / w1) / w1
    }

    /// Coordinates `(x, y)` of `z = x + yτ`.
    pub fn coordinates(&self, z: Complex64) -> (f64, f64) {
        let y = z.im / self.tau.im;
        (z.re - y * self.tau.re, y)
    }

    /// Representative of `z` modulo the lattice with coordinates in `[-1/2, 1/2)`.
    pub fn centered(&self, z: Complex64) -> Complex64 {
        let (x, y) = self.coordinates(z);
        z - x.round() - y.round() * self.tau
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        let w = self.centered(z);
        let mut best = f64::INFINITY;
        for m in -1..=1 {
            for n in -1..=1 {
                let p = w - f64::from(m) - f64::from(n) * self.tau;
                best = best.min(p.norm());
            }
        }
        best
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        self.reduced.w1.norm()
    }
}

pub fn weierstrass_sigma(z: Complex64, lattice: &LatticeData) -> Complex64 {
    lattice.sigma(z)
}

pub fn weierstrass_zeta(z: Complex64, lattice: &LatticeData) -> Complex64 {
    lattice.zeta(z)
}

pub fn quasi_periods(tau: Complex64) -> Result<(Complex64, Complex64)> {
    Ok(LatticeData::new(tau)?.quasi_periods())
}
