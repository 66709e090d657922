//! Thermal-equilibrium initial conditions.
//!
//! Values are intensive: `⟨B_j⟩ = Tr[B_j e^{-βH}] / Tr[e^{-βH}]` for the
//! single-molecule Hamiltonian with the static field. The molecule count is
//! applied only when a signal is formed.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::Basis;
use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::system::{hamiltonian_coeffs_in, FieldSpec, SpinSystem};

/// Largest nucleus count for [`ThermalMode::Exact`].
pub const THERMAL_EXACT_MAX_NUCLEI: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThermalMode {
    /// Dense eigendecomposition of the `2^n` dimensional Hamiltonian.
    #[default]
    Exact,
    /// `⟨B_j⟩ ≈ -β Tr[B_j H] / 2^n`.
    HighTemperatureFirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ThermalOptions {
    pub mode: ThermalMode,
}

impl ThermalOptions {
    pub fn new(mode: ThermalMode) -> Self {
        ThermalOptions { mode }
    }
}

/// Equilibrium state of `sys` at its inverse temperature `beta` (s, with
/// energies in rad/s).
pub fn thermal_state(sys: &SpinSystem, opts: ThermalOptions) -> Result<StateVector> {
    let beta = sys.beta();
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    let n = sys.n();
    if opts.mode == ThermalMode::Exact && n > THERMAL_EXACT_MAX_NUCLEI {
        return Err(Error::CeilingExceeded {
            what: "thermal",
            n,
            max: THERMAL_EXACT_MAX_NUCLEI,
        });
    }
    let basis = Basis::new(n)?;
    if beta == 0.0 {
        return StateVector::zeros(n);
    }
    let h = hamiltonian_coeffs_in(&basis, sys, &FieldSpec::FREE)?;
    let v = match opts.mode {
        ThermalMode::HighTemperatureFirstOrder => h
            .iter()
            .enumerate()
            .map(|(j, hj)| -beta * hj / (1u64 << (2 * basis.rank(j))) as f64)
            .collect(),
        ThermalMode::Exact => exact(&basis, &h, beta),
    };
    StateVector::from_values(n, v)
}

fn exact(basis: &Basis, h: &[f64], beta: f64) -> Vec<f64> {
    let dim = 1usize << basis.n();
    let mut ham = DMatrix::<Complex64>::zeros(dim, dim);
    for (j, &hj) in h.iter().enumerate() {
        if hj == 0.0 {
            continue;
        }
        let p = PauliString::new(&basis.op(j));
        let scale = hj / (1u64 << basis.rank(j)) as f64;
        for c in 0..dim {
            ham[(p.row(c), c)] += p.element(c) * scale;
        }
    }
    let eig = ham.symmetric_eigen();
    let lowest = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|&e| (-beta * (e - lowest)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::from(weights[k] / z);
    }
    let rho = &scaled * v.adjoint();

    (0..basis.len())
        .map(|j| {
            let p = PauliString::new(&basis.op(j));
            let tr: Complex64 = (0..dim).map(|c| rho[(c, p.row(c))] * p.element(c)).sum();
            tr.re / (1u64 << basis.rank(j)) as f64
        })
        .collect()
}
