use std::io::{self, Write};

use super::{Basis, BasisIndex, Dyadic, SparseCombination};
use crate::error::{Error, Result};

/// Largest `n` for which [`StructureTable::build`] precomputes every pair.
/// Beyond this, use the on-demand [`Basis`] implementation of
/// [`StructureConstants`].
pub const FULL_TABLE_MAX_NUCLEI: usize = 5;

/// Source of structure constants `f` with `[B_j, B_k] = i Σ_l f_jkl B_l`.
pub trait StructureConstants {
    fn basis(&self) -> &Basis;

    fn bracket(&self, j: BasisIndex, k: BasisIndex) -> SparseCombination;

    /// Real combination `R` with `[B_a, X] = i R` for `X = Σ c_l B_l`.
    fn adjoint_action(&self, a: BasisIndex, x: &SparseCombination) -> SparseCombination {
        let terms = x.terms().iter().flat_map(|&(l, c)| {
            self.bracket(a, l)
                .terms()
                .iter()
                .map(move |&(m, f)| (m, c * f))
                .collect::<Vec<_>>()
        });
        SparseCombination::from_terms(terms)
    }

    /// `Σ_cyc [A, [B, C]]` divided by `-1`; empty exactly when the Jacobi
    /// identity holds for the triple.
    fn jacobi_residual(&self, a: BasisIndex, b: BasisIndex, c: BasisIndex) -> SparseCombination {
        let unit = |i| SparseCombination::single(i, Dyadic::ONE);
        let t1 = self.adjoint_action(a, &self.adjoint_action(b, &unit(c)));
        let t2 = self.adjoint_action(b, &self.adjoint_action(c, &unit(a)));
        let t3 = self.adjoint_action(c, &self.adjoint_action(a, &unit(b)));
        t1.plus(&t2).plus(&t3)
    }
}

impl StructureConstants for Basis {
    fn basis(&self) -> &Basis {
        self
    }

    fn bracket(&self, j: BasisIndex, k: BasisIndex) -> SparseCombination {
        let a = self.op(j.get());
        let b = self.op(k.get());
        self.bracket_ops(&a, &b)
    }
}

/// Precomputed commutator table; only nonzero `j < k` pairs are stored.
#[derive(Debug, Clone)]
pub struct StructureTable {
    basis: Basis,
    entries: Vec<(BasisIndex, BasisIndex, SparseCombination)>,
}

/// Builds the full commutator table for `n` nuclei.
pub fn build_structure_table(n: usize) -> Result<StructureTable> {
    StructureTable::build(n)
}

impl StructureTable {
    pub fn build(n: usize) -> Result<Self> {
        let basis = Basis::new(n)?;
        Self::from_basis(basis)
    }

    pub fn from_basis(basis: Basis) -> Result<Self> {
        let n = basis.n();
        if n > FULL_TABLE_MAX_NUCLEI {
            return Err(Error::CeilingExceeded {
                what: "full structure table",
                n,
                max: FULL_TABLE_MAX_NUCLEI,
            });
        }
        let len = basis.len();
        let mut entries = Vec::new();
        for j in 0..len {
            for k in j + 1..len {
                let c = StructureConstants::bracket(&basis, j.into(), k.into());
                if !c.is_empty() {
                    for &(l, _) in c.terms() {
                        // Closure: every result must land back in the basis.
                        if l.get() >= len {
                            return Err(Error::invalid(format!(
                                "commutator of {} and {} left the basis",
                                basis.op(j),
                                basis.op(k)
                            )));
                        }
                    }
                    entries.push((BasisIndex::from(j), BasisIndex::from(k), c));
                }
            }
        }
        Ok(StructureTable { basis, entries })
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    /// Stored `(j, k, [B_j, B_k]/i)` entries with `j < k`, in index order.
    pub fn entries(&self) -> &[(BasisIndex, BasisIndex, SparseCombination)] {
        &self.entries
    }

    /// Number of `j < k` pairs with a nonzero commutator.
    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, j: BasisIndex, k: BasisIndex) -> SparseCombination {
        use std::cmp::Ordering::*;
        let (lo, hi, flip) = match j.cmp(&k) {
            Equal => return SparseCombination::new(),
            Less => (j, k, false),
            Greater => (k, j, true),
        };
        match self.entries.binary_search_by(|e| (e.0, e.1).cmp(&(lo, hi))) {
            Ok(i) if flip => self.entries[i].2.negated(),
            Ok(i) => self.entries[i].2.clone(),
            Err(_) => SparseCombination::new(),
        }
    }

    pub fn write_dump<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (j, k, c) in &self.entries {
            write_dump_line(&self.basis, *j, *k, c, out)?;
        }
        Ok(())
    }
}

impl StructureConstants for StructureTable {
    fn basis(&self) -> &Basis {
        &self.basis
    }

    fn bracket(&self, j: BasisIndex, k: BasisIndex) -> SparseCombination {
        self.get(j, k)
    }
}

/// Streams every nonzero `j < k` commutator in dump format without
/// materializing the table. Returns the number of lines written.
pub fn write_dump<S: StructureConstants, W: Write>(source: &S, out: &mut W) -> io::Result<usize> {
    let basis = source.basis();
    let mut lines = 0;
    for j in 0..basis.len() {
        for k in j + 1..basis.len() {
            let c = source.bracket(j.into(), k.into());
            if !c.is_empty() {
                write_dump_line(basis, j.into(), k.into(), &c, out)?;
                lines += 1;
            }
        }
    }
    Ok(lines)
}

/// `[<op_j>,<op_k>] = sum(<p/2^k> <op_l>, ...)`
fn write_dump_line<W: Write>(
    basis: &Basis,
    j: BasisIndex,
    k: BasisIndex,
    c: &SparseCombination,
    out: &mut W,
) -> io::Result<()> {
    write!(out, "[{},{}] = sum(", basis.op(j.get()), basis.op(k.get()))?;
    for (i, (l, f)) in c.terms().iter().enumerate() {
        if i > 0 {
            out.write_all(b", ")?;
        }
        write!(out, "{f} {}", basis.op(l.get()))?;
    }
    out.write_all(b")\n")
}
