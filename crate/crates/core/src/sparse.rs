/// Square real matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Assembles from per-row `(column, value)` lists. Repeated columns are
    /// summed and exact zeros dropped.
    pub fn from_rows(dim: usize, rows: impl IntoIterator<Item = Vec<(usize, f64)>>) -> Self {
        let mut m = SparseMatrix::zeros(dim);
        m.row_ptr.clear();
        m.row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let start = m.cols.len();
            for (c, v) in row {
                debug_assert!(c < dim);
                if m.cols.len() > start && *m.cols.last().unwrap() as usize == c {
                    *m.vals.last_mut().unwrap() += v;
                } else {
                    m.cols.push(c as u32);
                    m.vals.push(v);
                }
            }
            let mut w = start;
            for r in start..m.cols.len() {
                if m.vals[r] != 0.0 {
                    m.cols[w] = m.cols[r];
                    m.vals[w] = m.vals[r];
                    w += 1;
                }
            }
            m.cols.truncate(w);
            m.vals.truncate(w);
            m.row_ptr.push(w);
        }
        assert_eq!(m.row_ptr.len(), dim + 1, "row count must equal dimension");
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&(c as u32)) {
            Ok(i) => self.vals[span.start + i],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += self.vals[i] * x[self.cols[i] as usize];
            }
            *out = acc;
        }
    }

    /// Maximum absolute row sum of `D A D^-1` with `D = diag(scale)`.
    pub fn scaled_row_norm(&self, scale: &[f64]) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.row(r)
                    .map(|(c, v)| (v * scale[r] / scale[c]).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembly_merges_and_drops_zeros() {
        let m = SparseMatrix::from_rows(
            2,
            vec![vec![(1, 2.0), (0, 1.0), (1, -2.0)], vec![(0, 3.0)]],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), 0.0);
        let mut y = [0.0; 2];
        m.matvec(&[1.0, 5.0], &mut y);
        assert_eq!(y, [1.0, 3.0]);
    }
}
