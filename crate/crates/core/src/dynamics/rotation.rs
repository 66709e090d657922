use super::StateVector;
use crate::algebra::{Axis, Basis};
use crate::error::{Error, Result};

/// Active right-handed rotation matrix, `R(z, θ) x̂ = cos θ x̂ + sin θ ŷ`.
pub fn rotation_matrix(axis: Axis, angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    match axis {
        Axis::X => [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        Axis::Y => [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        Axis::Z => [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
    }
}

/// Ideal hard pulse: rotates every tensor slot that belongs to one of the
/// (1-based) `targets`, leaving other slots alone.
pub fn apply_rotation(state: &StateVector, targets: &[usize], axis: Axis, angle: f64) -> Result<StateVector> {
    let basis = Basis::new(state.n())?;
    apply_rotation_in(&basis, state, targets, axis, angle)
}

pub fn apply_rotation_in(
    basis: &Basis,
    state: &StateVector,
    targets: &[usize],
    axis: Axis,
    angle: f64,
) -> Result<StateVector> {
    let n = state.n();
    if basis.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: basis.n(),
        });
    }
    if let Some(&t) = targets.iter().find(|&&t| t == 0 || t > n) {
        return Err(Error::invalid(format!("rotation target {t} out of range 1..={n}")));
    }
    if !angle.is_finite() {
        return Err(Error::invalid("rotation angle must be finite"));
    }
    let r = rotation_matrix(axis, angle);
    let mut v = state.values().to_vec();
    let mut seen = vec![false; n];
    for &t in targets {
        let p = t - 1;
        if std::mem::replace(&mut seen[p], true) {
            continue;
        }
        for (j, op) in basis.ops().iter().enumerate() {
            if op.slot(p) != Some(Axis::X) {
                continue;
            }
            let stride = basis.slot_stride(op, p).expect("slot is occupied");
            let idx = [j, j + stride, j + 2 * stride];
            let old = [v[idx[0]], v[idx[1]], v[idx[2]]];
            for (row, &i) in r.iter().zip(&idx) {
                v[i] = row[0] * old[0] + row[1] * old[1] + row[2] * old[2];
            }
        }
    }
    StateVector::from_values(n, v)
}
