use std::f64::consts::PI;

use affsurf::numerics::{quasi_periods, LatticeData};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn divisor_sum(n: u64) -> f64 {
    (1..=n).filter(|d| n.is_multiple_of(*d)).sum::<u64>() as f64
}

/// η₁ from the Eisenstein series E₂ with q = e^{iπτ}.
fn eta1_series(tau: Complex64) -> Complex64 {
    let q2 = (Complex64::i() * 2.0 * PI * tau).exp();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = q2;
    for n in 1..400u64 {
        sum += divisor_sum(n) * power;
        power *= q2;
    }
    (PI * PI / 3.0) * (1.0 - 24.0 * sum)
}

/// Lambert-series expansion of ζ, valid for |Im z| < Im τ.
fn zeta_series(z: Complex64, tau: Complex64) -> Complex64 {
    let eta1 = eta1_series(tau);
    let q2 = (Complex64::i() * 2.0 * PI * tau).exp();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = q2;
    for n in 1..400 {
        let growth = (2.0 * PI * n as f64 * z.im.abs()).exp();
        if power.norm() * growth < 1e-20 {
            break;
        }
        sum += power / (1.0 - power) * (2.0 * PI * n as f64 * z).sin();
        power *= q2;
    }
    eta1 * z + PI * (PI * z).cos() / (PI * z).sin() + 4.0 * PI * sum
}

const LATTICES: [(f64, f64); 5] = [(0.0, 1.0), (0.5, 1.2), (0.3, 1.1), (2.7, 0.6), (-0.45, 0.35)];

#[test]
fn legendre_relation() {
    for (re, im) in LATTICES {
        let tau = c(re, im);
        let (e1, e2) = quasi_periods(tau).unwrap();
        let defect = e1 * tau - e2 - 2.0 * PI * Complex64::i();
        assert!(defect.norm() < 1e-10, "tau = {tau}: {defect}");
    }
}

#[test]
fn eta1_matches_eisenstein_series() {
    for (re, im) in LATTICES {
        let tau = c(re, im);
        let (e1, _) = quasi_periods(tau).unwrap();
        let oracle = eta1_series(tau);
        assert!((e1 - oracle).norm() < 1e-10 * oracle.norm().max(1.0), "tau = {tau}: {e1} vs {oracle}");
    }
}

#[test]
fn zeta_matches_lambert_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (re, im) in [(0.3, 1.1), (2.7, 0.6), (0.5, 1.2)] {
        let tau = c(re, im);
        let lattice = LatticeData::new(tau).unwrap();
        for _ in 0..30 {
            let z = c(rng.gen_range(0.05..0.95), rng.gen_range(-0.4..0.4) * im);
            let oracle = zeta_series(z, tau);
            let got = lattice.zeta(z);
            assert!((got - oracle).norm() < 1e-9 * oracle.norm().max(1.0), "tau = {tau}, z = {z}: {got} vs {oracle}");
        }
    }
}

#[test]
fn quasi_periodicity_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (re, im) in LATTICES {
        let tau = c(re, im);
        let lattice = LatticeData::new(tau).unwrap();
        let (e1, e2) = lattice.quasi_periods();
        for _ in 0..100 {
            let z = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            if lattice.distance_to_lattice(z) < 1e-3
                || lattice.distance_to_lattice(z + 1.0) < 1e-3
                || lattice.distance_to_lattice(z + tau) < 1e-3
            {
                continue;
            }
            let s = lattice.sigma(z);
            let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm();
            let shifted_a = -(e1 * (z + 0.5)).exp() * s;
            let shifted_b = -(e2 * (z + tau * 0.5)).exp() * s;
            assert!(rel(lattice.sigma(z + 1.0), shifted_a) < 1e-10, "tau = {tau}, z = {z}");
            assert!(rel(lattice.sigma(z + tau), shifted_b) < 1e-10, "tau = {tau}, z = {z}");
            let zt = lattice.zeta(z);
            let scale = zt.norm().max(1.0);
            assert!((lattice.zeta(z + 1.0) - zt - e1).norm() < 1e-10 * scale);
            assert!((lattice.zeta(z + tau) - zt - e2).norm() < 1e-10 * scale);
            assert!(rel(lattice.sigma(-z), -s) < 1e-12);
        }
    }
}

#[test]
fn zeta_is_logarithmic_derivative_of_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-3;
    for (re, im) in LATTICES {
        let lattice = LatticeData::new(c(re, im)).unwrap();
        for _ in 0..20 {
            let z = c(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
            if lattice.distance_to_lattice(z) < 0.05 {
                continue;
            }
            let s = |w: Complex64| lattice.sigma(w);
            let d = (-s(z + 2.0 * h) + 8.0 * s(z + h) - 8.0 * s(z - h) + s(z - 2.0 * h)) / (12.0 * h);
            let oracle = d / s(z);
            let got = lattice.zeta(z);
            assert!((got - oracle).norm() < 1e-8 * got.norm().max(1.0), "z = {z}: {got} vs {oracle}");
        }
    }
}

#[test]
fn zeta_at_half_period() {
    // ζ is odd and η₁-quasi-periodic, so ζ(1/2) = η₁/2.
    for (re, im) in LATTICES {
        let lattice = LatticeData::new(c(re, im)).unwrap();
        let (e1, _) = lattice.quasi_periods();
        assert!((lattice.zeta(c(0.5, 0.0)) - e1 * 0.5).norm() < 1e-10);
    }
}
