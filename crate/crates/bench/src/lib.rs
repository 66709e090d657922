//! Shared fixtures for the benchmarks.

use std::f64::consts::{FRAC_PI_2, TAU};

use bulkspin::dynamics::apply_rotation;
use bulkspin::{thermal_state, Axis, SpinSystem, StateVector, ThermalMode, ThermalOptions};

/// Linear chain with spread offsets and 7 Hz nearest-neighbour couplings.
pub fn chain(n: usize) -> SpinSystem {
    let omega = (0..n).map(|p| TAU * (37.0 * p as f64 - 120.0)).collect();
    let mut j = vec![vec![0.0; n]; n];
    for p in 1..n {
        j[p - 1][p] = TAU * 7.0;
        j[p][p - 1] = TAU * 7.0;
    }
    SpinSystem::new(omega, vec![1.0; n], j, 1.0, 1e-3).unwrap()
}

/// High-temperature thermal state after a 90 degree y pulse on every spin.
pub fn excited_state(sys: &SpinSystem) -> StateVector {
    let v = thermal_state(sys, ThermalOptions::new(ThermalMode::HighTemperatureFirstOrder)).unwrap();
    let all: Vec<usize> = (1..=sys.n()).collect();
    apply_rotation(&v, &all, Axis::Y, FRAC_PI_2).unwrap()
}
