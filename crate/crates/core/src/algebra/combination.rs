use super::{BasisIndex, Dyadic};

/// Linear combination of basis elements with exact dyadic coefficients.
///
/// Terms are kept sorted by index, with no duplicates and no zeros, so two
/// combinations are equal exactly when their `terms` are.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SparseCombination {
    terms: Vec<(BasisIndex, Dyadic)>,
}

impl SparseCombination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(index: BasisIndex, coeff: Dyadic) -> Self {
        if coeff.is_zero() {
            return Self::new();
        }
        SparseCombination {
            terms: vec![(index, coeff)],
        }
    }

    /// Collects arbitrary terms, merging repeated indices and dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (BasisIndex, Dyadic)>) -> Self {
        let mut terms: Vec<_> = terms.into_iter().collect();
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(BasisIndex, Dyadic)> = Vec::with_capacity(terms.len());
        for (i, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 = last.1 + c,
                _ => merged.push((i, c)),
            }
        }
        merged.retain(|t| !t.1.is_zero());
        SparseCombination { terms: merged }
    }

    pub fn terms(&self) -> &[(BasisIndex, Dyadic)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, index: BasisIndex) -> Dyadic {
        self.terms
            .binary_search_by_key(&index, |t| t.0)
            .map(|i| self.terms[i].1)
            .unwrap_or(Dyadic::ZERO)
    }

    pub fn scaled(&self, factor: Dyadic) -> Self {
        Self::from_terms(self.terms.iter().map(|&(i, c)| (i, c * factor)))
    }

    pub fn negated(&self) -> Self {
        SparseCombination {
            terms: self.terms.iter().map(|&(i, c)| (i, -c)).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).copied())
    }

    /// Coefficients as binary64 values.
    pub fn to_f64(&self) -> Vec<(BasisIndex, f64)> {
        self.terms.iter().map(|&(i, c)| (i, c.to_f64())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_and_cancels() {
        let a = BasisIndex(3);
        let b = BasisIndex(1);
        let half = Dyadic::new(1, 1);
        let c = SparseCombination::from_terms([(a, half), (b, Dyadic::ONE), (a, -half)]);
        assert_eq!(c.terms(), &[(b, Dyadic::ONE)]);
        assert!(c.plus(&c.negated()).is_empty());
        assert_eq!(c.scaled(half).coefficient(b), half);
        assert_eq!(c.coefficient(a), Dyadic::ZERO);
    }
}
