use std::fmt;

use super::{check_nuclei, Dyadic};
use crate::error::{Error, Result};

/// Cartesian axis of a single-spin operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Axis {
    X = 1,
    Y = 2,
    Z = 3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn from_bits(bits: u32) -> Option<Axis> {
        match bits {
            1 => Some(Axis::X),
            2 => Some(Axis::Y),
            3 => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_letter(c: char) -> Option<Axis> {
        match c.to_ascii_lowercase() {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }

    /// 0-based position (x = 0).
    pub fn offset(self) -> usize {
        self as usize - 1
    }
}

/// Product of single-spin operators `Π_p S^p_{a_p}` over a set of nuclei.
///
/// Stored as two bits per nucleus (0 = identity, 1..3 = x, y, z); nucleus
/// `p` (0-based) lives at bits `2p..2p+2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProductOperator {
    n: u8,
    slots: u32,
}

impl ProductOperator {
    /// Builds an operator from `(nucleus, axis)` pairs with 1-based nuclei.
    pub fn new(n: usize, slots: &[(usize, Axis)]) -> Result<Self> {
        check_nuclei(n)?;
        if slots.is_empty() {
            return Err(Error::invalid("product operator needs at least one nucleus"));
        }
        let mut bits = 0u32;
        for &(p, axis) in slots {
            if p == 0 || p > n {
                return Err(Error::invalid(format!("nucleus {p} out of range 1..={n}")));
            }
            let shift = 2 * (p - 1);
            if bits >> shift & 3 != 0 {
                return Err(Error::invalid(format!("nucleus {p} appears twice")));
            }
            bits |= (axis as u32) << shift;
        }
        Ok(ProductOperator { n: n as u8, slots: bits })
    }

    /// Rank-1 operator `S_axis` on a 1-based nucleus.
    pub fn spin(n: usize, nucleus: usize, axis: Axis) -> Result<Self> {
        Self::new(n, &[(nucleus, axis)])
    }

    pub(crate) fn from_raw(n: usize, slots: u32) -> Self {
        ProductOperator { n: n as u8, slots }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Axis carried by a 0-based nucleus, if it is involved.
    #[inline]
    pub fn slot(&self, nucleus: usize) -> Option<Axis> {
        Axis::from_bits(self.slots >> (2 * nucleus) & 3)
    }

    pub fn rank(&self) -> usize {
        let occupied = (self.slots | self.slots >> 1) & 0x5555_5555;
        occupied.count_ones() as usize
    }

    /// `(nucleus, axis)` pairs with 1-based nuclei, ascending.
    pub fn factors(&self) -> impl Iterator<Item = (usize, Axis)> + '_ {
        (0..self.n()).filter_map(move |p| self.slot(p).map(|a| (p + 1, a)))
    }

    /// Commutator `[self, other] = i f C`, returned as `Some((C, f))`, or
    /// `None` when the operators commute.
    pub fn bracket(&self, other: &Self) -> Result<Option<(ProductOperator, Dyadic)>> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "cannot commute {self} (n = {}) with {other} (n = {})",
                self.n, other.n
            )));
        }
        Ok(self.bracket_unchecked(other))
    }

    #[inline]
    pub(crate) fn bracket_unchecked(&self, other: &Self) -> Option<(ProductOperator, Dyadic)> {
        // Pauli-string product σ_A σ_B = (i^m)(±1) σ_C; the strings anticommute
        // iff m, the number of sites with two different non-identity axes, is odd.
        let mut slots = 0u32;
        let mut m = 0u32;
        let mut negative = false;
        for p in 0..self.n() {
            let shift = 2 * p;
            let a = self.slots >> shift & 3;
            let b = other.slots >> shift & 3;
            let c = if a == 0 {
                b
            } else if b == 0 {
                a
            } else if a == b {
                0
            } else {
                m += 1;
                // σ_a σ_b = i ε_abc σ_c; cyclic (a, b) pairs carry +1.
                if b != a % 3 + 1 {
                    negative = !negative;
                }
                6 - a - b
            };
            slots |= c << shift;
        }
        if m % 2 == 0 {
            return None;
        }
        // [σ_A, σ_B] = 2 σ_A σ_B = 2i (-1)^((m-1)/2) (±1) σ_C
        if (m / 2) % 2 == 1 {
            negative = !negative;
        }
        let result = ProductOperator { n: self.n, slots };
        // Converting σ strings to spin operators: S = σ/2 on every occupied site.
        let shift = (self.rank() + other.rank() - result.rank() - 1) as u32;
        Some((result, Dyadic::signed_power(negative, shift)))
    }

    /// Parses `S[1z]` or `C[1x,2y]`.
    pub fn parse(n: usize, name: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("malformed operator name {name:?}"));
        let name = name.trim();
        let inner = name
            .strip_prefix("S[")
            .or_else(|| name.strip_prefix("C["))
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(bad)?;
        let mut slots = Vec::new();
        for part in inner.split(',') {
            let part = part.trim();
            let axis = part.chars().last().and_then(Axis::from_letter).ok_or_else(bad)?;
            let nucleus: usize = part[..part.len() - 1].parse().map_err(|_| bad())?;
            slots.push((nucleus, axis));
        }
        let op = Self::new(n, &slots)?;
        let expect_spin = name.starts_with('S');
        if expect_spin != (op.rank() == 1) {
            return Err(bad());
        }
        Ok(op)
    }
}

impl fmt::Display for ProductOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.rank() == 1 { "S[" } else { "C[" })?;
        for (i, (p, axis)) in self.factors().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}{}", axis.letter())?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for ProductOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for name in ["S[1z]", "C[1x,2z]", "C[1y,3x,4z]"] {
            let op = ProductOperator::parse(4, name).unwrap();
            assert_eq!(op.to_string(), name);
        }
        assert!(ProductOperator::parse(2, "S[3x]").is_err());
        assert!(ProductOperator::parse(2, "C[1x]").is_err());
        assert!(ProductOperator::parse(2, "S[1x,2y]").is_err());
        assert!(ProductOperator::parse(2, "C[1x,1y]").is_err());
        assert!(ProductOperator::parse(2, "Q[1x]").is_err());
    }

    #[test]
    fn rank_counts_occupied_slots() {
        let op = ProductOperator::new(5, &[(1, Axis::Z), (3, Axis::X), (5, Axis::Y)]).unwrap();
        assert_eq!(op.rank(), 3);
        assert_eq!(op.slot(1), None);
        assert_eq!(op.slot(4), Some(Axis::Y));
    }
}
