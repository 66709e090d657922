#![allow(dead_code)]

use std::f64::consts::TAU;

use bulkspin::oracle::{CMatrix, DensityMatrix};
use bulkspin::SpinSystem;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Offsets uniform in ±500 Hz, every pair coupled with J uniform in
/// [5, 50] Hz (all in rad/s).
pub fn random_system(n: usize, rng: &mut impl Rng) -> SpinSystem {
    let omega = (0..n).map(|_| TAU * rng.random_range(-500.0..500.0)).collect();
    let mut j = vec![vec![0.0; n]; n];
    for p in 0..n {
        for q in p + 1..n {
            let v = TAU * rng.random_range(5.0..50.0);
            j[p][q] = v;
            j[q][p] = v;
        }
    }
    SpinSystem::with_frequencies(omega, j).unwrap()
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    let v: f64 = rng.random_range(0.0..TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

/// `G G† / Tr(G G†)` with complex Gaussian `G`: a full-rank mixed state.
pub fn random_density_matrix(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let dim = 1 << n;
    let g = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(n, m / Complex64::new(tr, 0.0)).unwrap()
}

/// Arbitrary (not necessarily physical) state values.
pub fn random_values(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-0.5..0.5)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
