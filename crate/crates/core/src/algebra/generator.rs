use super::StructureConstants;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Linear generator of the expectation-value dynamics for `H = Σ_l h_l B_l`.
///
/// `d<B_j>/dt = i <[H, B_j]> = Σ_k A_jk <B_k>` with `A_jk = -Σ_l h_l f_ljk`.
/// Rows are assembled in basis order, so the result is deterministic.
pub fn adjoint_generator<S: StructureConstants>(source: &S, h: &[f64]) -> Result<SparseMatrix> {
    let basis = source.basis();
    let dim = basis.len();
    if h.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: h.len(),
        });
    }
    if let Some(l) = h.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "Hamiltonian coefficient for {} is not finite",
            basis.op(l)
        )));
    }
    let active: Vec<(usize, f64)> = h
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(l, &v)| (l, v))
        .collect();
    let rows = (0..dim).map(|j| {
        let mut row = Vec::new();
        for &(l, hl) in &active {
            for &(k, f) in source.bracket(l.into(), j.into()).terms() {
                row.push((k.get(), -hl * f.to_f64()));
            }
        }
        row
    });
    Ok(SparseMatrix::from_rows(dim, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Basis, StructureTable};

    #[test]
    fn zero_hamiltonian_gives_zero_generator() {
        let t = StructureTable::build(2).unwrap();
        let a = adjoint_generator(&t, &[0.0; 15]).unwrap();
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn larmor_precession_row() {
        let basis = Basis::new(1).unwrap();
        let omega = 3.0;
        // H = -ω S_z
        let a = adjoint_generator(&basis, &[0.0, 0.0, -omega]).unwrap();
        // dS_x/dt = ω S_y, dS_y/dt = -ω S_x
        assert_eq!(a.get(0, 1), omega);
        assert_eq!(a.get(1, 0), -omega);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn length_mismatch() {
        let basis = Basis::new(2).unwrap();
        assert!(matches!(
            adjoint_generator(&basis, &[0.0; 3]),
            Err(Error::DimensionMismatch { expected: 15, found: 3 })
        ));
    }
}
