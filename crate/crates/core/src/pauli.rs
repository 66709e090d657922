//! Dense action of product operators on the `2^n` computational basis.
//! Nucleus 1 is the most significant bit; bit value 0 is spin up.

use num_complex::Complex64;

use crate::algebra::{Axis, ProductOperator};

/// A product operator `Π_p σ_{a_p}` (without the `1/2^rank` factor) as a
/// signed permutation: column `c` maps to row `c ^ flip`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PauliString {
    flip: usize,
    sign_mask: usize,
    i_power: u32,
}

impl PauliString {
    pub fn new(op: &ProductOperator) -> Self {
        let n = op.n();
        let (mut flip, mut sign_mask, mut i_power) = (0, 0, 0);
        for (nucleus, axis) in op.factors() {
            let bit = 1usize << (n - nucleus);
            match axis {
                Axis::X => flip |= bit,
                Axis::Y => {
                    flip |= bit;
                    sign_mask |= bit;
                    i_power += 1;
                }
                Axis::Z => sign_mask |= bit,
            }
        }
        PauliString {
            flip,
            sign_mask,
            i_power,
        }
    }

    #[inline]
    pub fn row(&self, col: usize) -> usize {
        col ^ self.flip
    }

    /// Matrix element `⟨row(col)| P |col⟩`.
    #[inline]
    pub fn element(&self, col: usize) -> Complex64 {
        let base = match self.i_power % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if (col & self.sign_mask).count_ones() % 2 == 1 {
            -base
        } else {
            base
        }
    }
}
