//! Collective product-operator basis for `n` spin-1/2 nuclei and its Lie
//! algebra.
//!
//! A basis element is a product of single-spin operators `S_a^p = σ_a/2`, one
//! per involved nucleus. Because distinct molecules commute, the structure
//! constants of the collective (summed over molecules) operators coincide
//! with the single-molecule ones, so everything here is computed for one
//! molecule.
//!
//! Commutators are evaluated symbolically, site by site, with the single-spin
//! product rule `S_a S_b = δ_ab/4 + (i/2) ε_abc S_c`. The result of
//! commuting two basis elements is always a single basis element with a
//! coefficient `±2^-k`, which [`Dyadic`] stores exactly.

mod combination;
mod dyadic;
mod generator;
mod operator;
mod table;

pub use combination::SparseCombination;
pub use dyadic::Dyadic;
pub use generator::adjoint_generator;
pub use operator::{Axis, ProductOperator};
pub use table::{
    build_structure_table, write_dump, StructureConstants, StructureTable, FULL_TABLE_MAX_NUCLEI,
};

use crate::error::{Error, Result};

/// Largest nucleus count the symbolic algebra accepts.
pub const MAX_NUCLEI: usize = 12;

/// Position of an operator in the canonical basis ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(pub u32);

impl BasisIndex {
    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for BasisIndex {
    fn from(i: usize) -> Self {
        BasisIndex(i as u32)
    }
}

/// Number of basis elements for `n` nuclei, `4^n - 1`.
pub fn basis_len(n: usize) -> usize {
    (1usize << (2 * n)) - 1
}

/// Canonically ordered product-operator basis with O(n) index lookup.
///
/// Ordering: ascending rank, then lexicographic in the involved nuclei, then
/// lexicographic in the axes (x < y < z, lowest nucleus most significant).
#[derive(Debug, Clone)]
pub struct Basis {
    n: usize,
    ops: Vec<ProductOperator>,
    rank_offset: Vec<usize>,
    binom: Vec<Vec<usize>>,
    pow3: Vec<usize>,
}

/// Returns the canonical basis for `n` nuclei (`4^n - 1` operators).
pub fn enumerate_basis(n: usize) -> Result<Vec<ProductOperator>> {
    Ok(Basis::new(n)?.ops)
}

pub(crate) fn check_nuclei(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("nucleus count must be at least 1"));
    }
    if n > MAX_NUCLEI {
        return Err(Error::CeilingExceeded {
            what: "algebra",
            n,
            max: MAX_NUCLEI,
        });
    }
    Ok(())
}

impl Basis {
    pub fn new(n: usize) -> Result<Self> {
        check_nuclei(n)?;
        let mut binom = vec![vec![0usize; n + 1]; n + 1];
        for a in 0..=n {
            binom[a][0] = 1;
            for b in 1..=a {
                binom[a][b] = binom[a - 1][b - 1] + if b < a { binom[a - 1][b] } else { 0 };
            }
        }
        let pow3: Vec<usize> = (0..=n).map(|k| 3usize.pow(k as u32)).collect();
        let mut rank_offset = vec![0usize; n + 2];
        for k in 1..=n {
            rank_offset[k + 1] = rank_offset[k] + binom[n][k] * pow3[k];
        }

        let mut ops = Vec::with_capacity(basis_len(n));
        for k in 1..=n {
            let mut combo: Vec<usize> = (0..k).collect();
            loop {
                for code in 0..pow3[k] {
                    let mut slots = 0u32;
                    let mut rest = code;
                    for i in (0..k).rev() {
                        let axis = (rest % 3) as u32 + 1;
                        rest /= 3;
                        slots |= axis << (2 * combo[i]);
                    }
                    ops.push(ProductOperator::from_raw(n, slots));
                }
                if !next_combination(&mut combo, n) {
                    break;
                }
            }
        }
        debug_assert_eq!(ops.len(), basis_len(n));
        Ok(Basis {
            n,
            ops,
            rank_offset,
            binom,
            pow3,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[ProductOperator] {
        &self.ops
    }

    #[inline]
    pub fn op(&self, j: usize) -> ProductOperator {
        self.ops[j]
    }

    pub fn rank(&self, j: usize) -> usize {
        self.ops[j].rank()
    }

    /// Index range occupied by operators of the given rank.
    pub fn rank_range(&self, rank: usize) -> std::ops::Range<usize> {
        self.rank_offset[rank]..self.rank_offset[rank + 1]
    }

    pub fn index_of(&self, op: &ProductOperator) -> Result<BasisIndex> {
        if op.n() != self.n {
            return Err(Error::invalid(format!(
                "operator {op} has n = {}, basis has n = {}",
                op.n(),
                self.n
            )));
        }
        Ok(BasisIndex(self.index_unchecked(op) as u32))
    }

    #[inline]
    pub(crate) fn index_unchecked(&self, op: &ProductOperator) -> usize {
        let k = op.rank();
        let mut comb_rank = 0usize;
        let mut axes = 0usize;
        let mut start = 0usize;
        let mut i = 0usize;
        for p in 0..self.n {
            if let Some(axis) = op.slot(p) {
                for v in start..p {
                    comb_rank += self.binom[self.n - 1 - v][k - 1 - i];
                }
                start = p + 1;
                i += 1;
                axes = axes * 3 + (axis as usize - 1);
            }
        }
        self.rank_offset[k] + comb_rank * self.pow3[k] + axes
    }

    /// Index offset between `op` and the same operator with the axis at
    /// `nucleus` (0-based) advanced by one, or `None` if that slot is empty.
    pub(crate) fn slot_stride(&self, op: &ProductOperator, nucleus: usize) -> Option<usize> {
        op.slot(nucleus)?;
        let after = (nucleus + 1..self.n).filter(|&p| op.slot(p).is_some()).count();
        Some(self.pow3[after])
    }

    /// Looks up an operator by its printed name, e.g. `S[1z]` or `C[1x,2y]`.
    pub fn parse_op(&self, name: &str) -> Result<BasisIndex> {
        let op = ProductOperator::parse(self.n, name)?;
        self.index_of(&op)
    }

    /// Symbolic commutator of two basis elements: `[a, b] = i Σ f_l B_l`.
    pub fn commute(&self, a: &ProductOperator, b: &ProductOperator) -> Result<SparseCombination> {
        if a.n() != self.n || b.n() != self.n {
            return Err(Error::invalid(format!(
                "operators {a} (n = {}) and {b} (n = {}) do not belong to an n = {} basis",
                a.n(),
                b.n(),
                self.n
            )));
        }
        Ok(self.bracket_ops(a, b))
    }

    fn bracket_ops(&self, a: &ProductOperator, b: &ProductOperator) -> SparseCombination {
        match a.bracket_unchecked(b) {
            Some((c, f)) => SparseCombination::single(BasisIndex(self.index_unchecked(&c) as u32), f),
            None => SparseCombination::new(),
        }
    }
}

/// Symbolic commutator of two product operators with equal `n`.
pub fn commute(a: &ProductOperator, b: &ProductOperator) -> Result<Vec<(ProductOperator, Dyadic)>> {
    Ok(a.bracket(b)?.into_iter().collect())
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use Axis::*;

    fn op(n: usize, slots: &[(usize, Axis)]) -> ProductOperator {
        ProductOperator::new(n, slots).unwrap()
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(enumerate_basis(1).unwrap().len(), 3);
        let b2 = Basis::new(2).unwrap();
        assert_eq!(b2.len(), 15);
        assert_eq!(b2.rank_range(1).len(), 6);
        assert_eq!(b2.rank_range(2).len(), 9);
        assert_eq!(enumerate_basis(3).unwrap().len(), 63);
        assert!(enumerate_basis(0).is_err());
        assert!(matches!(
            enumerate_basis(MAX_NUCLEI + 1),
            Err(Error::CeilingExceeded { .. })
        ));
    }

    #[test]
    fn canonical_order_n2() {
        let names: Vec<String> = enumerate_basis(2)
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(
            names,
            [
                "S[1x]", "S[1y]", "S[1z]", "S[2x]", "S[2y]", "S[2z]", "C[1x,2x]", "C[1x,2y]",
                "C[1x,2z]", "C[1y,2x]", "C[1y,2y]", "C[1y,2z]", "C[1z,2x]", "C[1z,2y]",
                "C[1z,2z]"
            ]
        );
    }

    #[test]
    fn index_lookup_is_inverse_of_enumeration() {
        for n in 1..=5 {
            let basis = Basis::new(n).unwrap();
            for (j, op) in basis.ops().iter().enumerate() {
                assert_eq!(basis.index_of(op).unwrap().get(), j, "{op}");
            }
        }
    }

    #[test]
    fn rank_then_lexicographic_ordering() {
        let basis = Basis::new(3).unwrap();
        let keys: Vec<_> = basis
            .ops()
            .iter()
            .map(|o| {
                let support: Vec<usize> = (0..3).filter(|&p| o.slot(p).is_some()).collect();
                let axes: Vec<u8> = (0..3).filter_map(|p| o.slot(p)).map(|a| a as u8).collect();
                (o.rank(), support, axes)
            })
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn spin_commutators() {
        let basis = Basis::new(1).unwrap();
        let c = basis.commute(&op(1, &[(1, X)]), &op(1, &[(1, Y)])).unwrap();
        assert_eq!(c.terms(), &[(basis.parse_op("S[1z]").unwrap(), Dyadic::ONE)]);
        let c = basis.commute(&op(1, &[(1, Z)]), &op(1, &[(1, Y)])).unwrap();
        assert_eq!(c.terms(), &[(basis.parse_op("S[1x]").unwrap(), -Dyadic::ONE)]);
    }

    #[test]
    fn two_spin_examples() {
        let basis = Basis::new(2).unwrap();
        let cxx = op(2, &[(1, X), (2, X)]);
        assert!(basis.commute(&cxx, &cxx).unwrap().is_empty());

        let c = basis
            .commute(&op(2, &[(1, X), (2, Y)]), &op(2, &[(1, X), (2, Z)]))
            .unwrap();
        assert_eq!(c.terms(), &[(basis.parse_op("S[2x]").unwrap(), Dyadic::new(1, 2))]);

        let c = basis.commute(&cxx, &op(2, &[(1, Z)])).unwrap();
        assert_eq!(c.terms(), &[(basis.parse_op("C[1y,2x]").unwrap(), -Dyadic::ONE)]);
    }

    #[test]
    fn mismatched_n_is_rejected() {
        let basis = Basis::new(2).unwrap();
        assert!(basis.commute(&op(1, &[(1, X)]), &op(2, &[(1, Y)])).is_err());
        assert!(commute(&op(1, &[(1, X)]), &op(2, &[(1, Y)])).is_err());
    }
}
