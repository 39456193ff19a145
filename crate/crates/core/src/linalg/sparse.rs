use std::collections::BTreeMap;

use super::{DenseMatrix, LinalgError, C64};

/// Hermitian matrix stored as upper-triangle triplets `(row, col, value)` with `row <= col`.
///
/// Diagonal values are real and no coordinate appears twice.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseHermitian {
    dim: usize,
    triplets: Vec<(usize, usize, C64)>,
}

impl SparseHermitian {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, triplets: Vec::new() }
    }

    /// Builds from arbitrary entries; lower-triangle entries are folded onto the upper
    /// triangle by conjugation and duplicates are summed.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self, LinalgError> {
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in entries {
            if r >= dim || c >= dim {
                return Err(LinalgError::IndexOutOfRange { index: r.max(c), dim });
            }
            let (key, val) = if r <= c { ((r, c), v) } else { ((c, r), v.conj()) };
            *acc.entry(key).or_default() += val;
        }
        Ok(Self::from_upper_map(dim, acc))
    }

    /// Builds from an already Hermitian full map, reading only the upper triangle.
    pub(crate) fn from_upper_map(dim: usize, map: BTreeMap<(usize, usize), C64>) -> Self {
        let triplets = map
            .into_iter()
            .filter(|&((r, c), _)| r <= c)
            .map(|((r, c), v)| if r == c { (r, c, C64::new(v.re, 0.0)) } else { (r, c, v) })
            .filter(|&(_, _, v)| v.norm() > 1e-15)
            .collect();
        Self { dim, triplets }
    }

    pub fn from_dense(m: &DenseMatrix, hermitian_tol: f64) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        let asym = m.max_asymmetry();
        if asym > hermitian_tol {
            return Err(LinalgError::NotHermitian { max_asymmetry: asym });
        }
        let n = m.rows();
        let mut triplets = Vec::new();
        for r in 0..n {
            for c in r..n {
                let v = m[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    triplets.push((r, c, if r == c { C64::new(v.re, 0.0) } else { v }));
                }
            }
        }
        Ok(Self { dim: n, triplets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn triplets(&self) -> &[(usize, usize, C64)] {
        &self.triplets
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    /// `y += self * x`.
    pub fn apply_add(&self, x: &[C64], y: &mut [C64]) {
        for &(r, c, v) in &self.triplets {
            y[r] += v * x[c];
            if r != c {
                y[c] += v.conj() * x[r];
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.triplets {
            m[(r, c)] += v;
            if r != c {
                m[(c, r)] += v.conj();
            }
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { dim: self.dim, triplets: self.triplets.iter().map(|&(r, c, v)| (r, c, v * s)).collect() }
    }

    /// Sorted list of indices touched by a stored entry.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.triplets.iter().flat_map(|&(r, c, _)| [r, c]).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_entries_fold_onto_upper() {
        let h = SparseHermitian::from_entries(3, [(2, 0, C64::new(1.0, 2.0)), (0, 2, C64::new(1.0, -2.0))]).unwrap();
        assert_eq!(h.triplets(), &[(0, 2, C64::new(2.0, -4.0))]);
    }

    #[test]
    fn matvec_uses_both_triangles() {
        let h = SparseHermitian::from_entries(2, [(0, 1, C64::new(0.0, 1.0)), (0, 0, C64::new(2.0, 0.0))]).unwrap();
        let mut y = vec![C64::new(0.0, 0.0); 2];
        h.apply_add(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)], &mut y);
        assert_eq!(y, vec![C64::new(2.0, 1.0), C64::new(0.0, -1.0)]);
    }

    #[test]
    fn out_of_range_is_an_error() {
        assert!(SparseHermitian::from_entries(2, [(0, 2, C64::new(1.0, 0.0))]).is_err());
    }
}
