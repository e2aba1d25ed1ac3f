use serde::{Deserialize, Serialize};

/// Sparse real vector with strictly increasing column indices and no
/// explicit zeros.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVec {
    /// Builds a vector from `(column, value)` pairs in any order. Repeated
    /// columns are summed; zeros are dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut v = SparseVec::default();
        for (i, x) in pairs {
            if v.indices.last() == Some(&i) {
                *v.values.last_mut().unwrap() += x;
            } else {
                v.indices.push(i);
                v.values.push(x);
            }
        }
        v.retain_nonzero();
        v
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let (indices, values) = dense.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, &x)| (i as u32, x)).unzip();
        SparseVec { indices, values }
    }

    fn retain_nonzero(&mut self) {
        if self.values.iter().any(|&x| x == 0.0) {
            let (indices, values) =
                self.indices.iter().zip(&self.values).filter(|(_, &x)| x != 0.0).map(|(&i, &x)| (i, x)).unzip();
            self.indices = indices;
            self.values = values;
        }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Value at `column`, zero when absent.
    pub fn get(&self, column: u32) -> f64 {
        match self.indices.binary_search(&column) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for x in &mut self.values {
            *x *= factor;
        }
    }
}

/// Row-major sparse matrix.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub n_cols: usize,
    pub rows: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn new(n_cols: usize, rows: Vec<SparseVec>) -> Self {
        debug_assert!(rows.iter().all(|r| r.indices.last().map_or(true, |&i| (i as usize) < n_cols)));
        SparseMatrix { n_cols, rows }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        SparseMatrix { n_cols, rows: rows.iter().map(|r| SparseVec::from_dense(r)).collect() }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_sorted_merged_and_pruned() {
        let v = SparseVec::from_pairs(vec![(5, 1.0), (2, 0.5), (5, 2.0), (7, 1.0), (7, -1.0)]);
        assert_eq!(v.indices(), &[2, 5]);
        assert_eq!(v.values(), &[0.5, 3.0]);
        assert_eq!(v.get(5), 3.0);
        assert_eq!(v.get(3), 0.0);
    }

    #[test]
    fn dense_round_trip() {
        let m = SparseMatrix::from_dense(&[vec![0.0, 1.5, 0.0], vec![-2.0, 0.0, 0.0]]);
        assert_eq!(m.n_cols, 3);
        assert_eq!(m.rows[0].nnz(), 1);
        assert_eq!(m.rows[1].get(0), -2.0);
    }
}
