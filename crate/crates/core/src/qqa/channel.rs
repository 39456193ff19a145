use std::collections::{BTreeSet, HashMap};

use crate::linalg::{hermitian_eig, Direction, EigenSettings, Hamiltonian, RankOne, SparseHermitian, C64};

use super::op::{SparseOp, SparseVec};
use super::QqaError;

const FOLD_LIMIT: usize = 512;

/// Hermitian operator `shift * I + entries + sum_k w_k |v_k><v_k|` evolving under channels.
///
/// `entries` holds both triangles.
#[derive(Debug, Clone)]
pub(crate) struct OperatorSum {
    pub dim: usize,
    pub shift: f64,
    pub entries: HashMap<(usize, usize), C64>,
    pub rank_one: Vec<(f64, SparseVec)>,
}

impl OperatorSum {
    pub fn scalar(dim: usize, shift: f64) -> Self {
        Self { dim, shift, entries: HashMap::new(), rank_one: Vec::new() }
    }

    pub fn add_entry(&mut self, r: usize, c: usize, v: C64) {
        *self.entries.entry((r, c)).or_default() += v;
    }

    pub fn trace(&self) -> f64 {
        let diag: f64 = self.entries.iter().filter(|((r, c), _)| r == c).map(|(_, v)| v.re).sum();
        let low_rank: f64 = self.rank_one.iter().map(|(w, v)| w * v.values().map(|a| a.norm_sqr()).sum::<f64>()).sum();
        self.shift * self.dim as f64 + diag + low_rank
    }

    /// `rho -> sum_e K_e rho K_e^dagger`.
    ///
    /// With `unitary` set the family is a single validated unitary, so `U U^dagger = I`
    /// and the scalar part passes through unchanged.
    pub fn apply_family(&self, ops: &[SparseOp], unitary: bool) -> OperatorSum {
        let mut out = OperatorSum::scalar(self.dim, self.shift);
        if self.shift != 0.0 && !unitary {
            let mut row_weight = vec![0.0f64; self.dim];
            for op in ops {
                for c in 0..self.dim {
                    let col = op.column(c);
                    for &(r1, a1) in &col {
                        row_weight[r1] += a1.norm_sqr();
                        for &(r2, a2) in &col {
                            if r1 != r2 {
                                out.add_entry(r1, r2, a1 * a2.conj() * self.shift);
                            }
                        }
                    }
                }
            }
            for (r, w) in row_weight.into_iter().enumerate() {
                if (w - 1.0).abs() > 1e-15 {
                    out.add_entry(r, r, C64::new(self.shift * (w - 1.0), 0.0));
                }
            }
        }
        if !self.entries.is_empty() {
            for op in ops {
                let mut cache: HashMap<usize, Vec<(usize, C64)>> = HashMap::new();
                for (&(a, b), &v) in &self.entries {
                    let ca = cache.entry(a).or_insert_with(|| op.column(a)).clone();
                    let cb = cache.entry(b).or_insert_with(|| op.column(b));
                    for &(r, x) in &ca {
                        for &(s, y) in cb.iter() {
                            out.add_entry(r, s, x * v * y.conj());
                        }
                    }
                }
            }
        }
        for (w, v) in &self.rank_one {
            for op in ops {
                let image = op.apply(v);
                let n: f64 = image.values().map(|a| a.norm_sqr()).sum();
                if n > 1e-300 {
                    out.rank_one.push((*w, image));
                }
            }
        }
        out.entries.retain(|_, v| v.norm() > 1e-300);
        if out.rank_one.len() > FOLD_LIMIT {
            out.fold_rank_one();
        }
        out
    }

    pub fn fold_rank_one(&mut self) {
        for (w, v) in std::mem::take(&mut self.rank_one) {
            for (&r, &a) in &v {
                for (&c, &b) in &v {
                    *self.entries.entry((r, c)).or_default() += a * b.conj() * w;
                }
            }
        }
    }

    /// `Pi rho Pi` with `Pi` the projector onto the complement of `halting`.
    pub fn project_out(&mut self, halting: &[usize]) {
        if halting.is_empty() {
            return;
        }
        let set: BTreeSet<usize> = halting.iter().copied().collect();
        self.entries.retain(|(r, c), _| !set.contains(r) && !set.contains(c));
        for (_, v) in self.rank_one.iter_mut() {
            v.retain(|i, _| !set.contains(i));
        }
        self.rank_one.retain(|(_, v)| !v.is_empty());
        if self.shift != 0.0 {
            for &q in &set {
                self.entries.insert((q, q), C64::new(-self.shift, 0.0));
            }
        }
    }

    pub fn support(&self) -> Vec<usize> {
        let mut s: BTreeSet<usize> = self.entries.keys().flat_map(|&(r, c)| [r, c]).collect();
        for (_, v) in &self.rank_one {
            s.extend(v.keys().copied());
        }
        s.into_iter().collect()
    }

    pub fn into_hamiltonian(self) -> Result<Hamiltonian, QqaError> {
        let upper = self.entries.into_iter().filter(|((r, c), _)| r <= c).map(|((r, c), v)| (r, c, v));
        let sparse = SparseHermitian::from_entries(self.dim, upper)?;
        let rank_one = self
            .rank_one
            .into_iter()
            .map(|(w, v)| RankOne { weight: w, direction: Direction::Sparse(v.into_iter().collect()) })
            .collect();
        Ok(Hamiltonian::from_parts(self.dim, self.shift, sparse, rank_one)?)
    }

    /// Projector onto the range of this positive operator, as explicit entries.
    ///
    /// Eigenvalues at or below `rel_tol` times the largest count as zero.
    pub fn range_projector(&self, rel_tol: f64, settings: &EigenSettings) -> Result<Vec<(usize, usize, C64)>, QqaError> {
        let support = self.support();
        if support.is_empty() {
            return Ok(Vec::new());
        }
        if support.len() > settings.dense_max {
            return Err(QqaError::Capacity(format!(
                "reached support of {} states exceeds the dense limit {}",
                support.len(),
                settings.dense_max
            )));
        }
        let mut local = self.clone();
        local.fold_rank_one();
        let pos: HashMap<usize, usize> = support.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let n = support.len();
        let mut m = crate::linalg::DenseMatrix::zeros(n, n);
        for (&(r, c), &v) in &local.entries {
            m[(pos[&r], pos[&c])] += v;
        }
        let eig = hermitian_eig(&m, settings)?;
        let top = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut out = Vec::new();
        let kept: Vec<&crate::linalg::StateVector> =
            eig.values.iter().zip(&eig.vectors).filter(|(v, _)| **v > rel_tol * top).map(|(_, vec)| vec).collect();
        for (i, &r) in support.iter().enumerate() {
            for (j, &c) in support.iter().enumerate().skip(i) {
                let v: C64 = kept.iter().map(|vec| vec.amplitudes()[i] * vec.amplitudes()[j].conj()).sum();
                if v.norm() > 1e-14 {
                    out.push((r, c, v));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qqa::op::Rest;
    use std::collections::BTreeMap;

    #[test]
    fn unital_channel_keeps_identity() {
        let p = SparseOp::permutation(3, |c| (c + 1) % 3).unwrap();
        let rho = OperatorSum::scalar(3, 1.0).apply_family(&[p], false);
        assert!(rho.entries.values().all(|v| v.norm() < 1e-15));
        assert_eq!(rho.shift, 1.0);
    }

    #[test]
    fn amplitude_damping_moves_weight() {
        // K0 = |0><0| + sqrt(1-g)|1><1|, K1 = sqrt(g)|0><1|.
        let g: f64 = 0.36;
        let k0 = SparseOp::from_columns(
            2,
            BTreeMap::from([(0, vec![(0, C64::new(1.0, 0.0))]), (1, vec![(1, C64::new((1.0 - g).sqrt(), 0.0))])]),
            Rest::Zero,
        )
        .unwrap();
        let k1 = SparseOp::from_columns(2, BTreeMap::from([(1, vec![(0, C64::new(g.sqrt(), 0.0))])]), Rest::Zero).unwrap();
        let mut rho = OperatorSum::scalar(2, 0.0);
        rho.rank_one.push((1.0, SparseVec::from([(1, C64::new(1.0, 0.0))])));
        let out = rho.apply_family(&[k0, k1], false);
        assert!((out.trace() - 1.0).abs() < 1e-14);
        let h = out.into_hamiltonian().unwrap().to_dense();
        assert!((h[(0, 0)].re - g).abs() < 1e-14);
        assert!((h[(1, 1)].re - (1.0 - g)).abs() < 1e-14);
    }

    #[test]
    fn projection_zeroes_halting_rows() {
        let mut rho = OperatorSum::scalar(3, 1.0);
        rho.add_entry(0, 1, C64::new(0.5, 0.0));
        rho.add_entry(1, 0, C64::new(0.5, 0.0));
        rho.project_out(&[1]);
        let h = rho.into_hamiltonian().unwrap().to_dense();
        assert_eq!(h[(1, 1)], C64::new(0.0, 0.0));
        assert_eq!(h[(0, 1)], C64::new(0.0, 0.0));
        assert_eq!(h[(2, 2)], C64::new(1.0, 0.0));
    }
}
