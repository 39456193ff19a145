use std::collections::{BTreeMap, BTreeSet};

use super::lanczos::{lanczos_lowest, LinearOperator};
use super::state::{axpy_sub, inner, norm};
use super::{hermitian_eig, DenseMatrix, EigenSettings, Eigenpairs, LinalgError, SparseHermitian, StateVector, C64};

/// Vector of a rank-one term `weight * |v><v|`.
#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    /// Normalised uniform superposition over the whole space.
    Uniform,
    /// Explicit nonzero amplitudes, not necessarily normalised.
    Sparse(Vec<(usize, C64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOne {
    pub weight: f64,
    pub direction: Direction,
}

/// Hermitian operator `shift * I + sparse + sum_k weight_k |v_k><v_k|`.
///
/// Keeps large but structured operators (a handful of projectors on top of a sparse
/// block) cheap to apply and to diagonalise.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    dim: usize,
    shift: f64,
    sparse: SparseHermitian,
    rank_one: Vec<RankOne>,
}

impl Hamiltonian {
    pub fn zeros(dim: usize) -> Self {
        Self::scalar(dim, 0.0)
    }

    pub fn scalar(dim: usize, shift: f64) -> Self {
        Self { dim, shift, sparse: SparseHermitian::zeros(dim), rank_one: Vec::new() }
    }

    pub fn from_parts(dim: usize, shift: f64, sparse: SparseHermitian, rank_one: Vec<RankOne>) -> Result<Self, LinalgError> {
        if sparse.dim() != dim {
            return Err(LinalgError::DimensionMismatch { expected: dim, found: sparse.dim() });
        }
        for term in &rank_one {
            if let Direction::Sparse(v) = &term.direction {
                if let Some(&(i, _)) = v.iter().find(|(i, _)| *i >= dim) {
                    return Err(LinalgError::IndexOutOfRange { index: i, dim });
                }
            }
        }
        Ok(Self { dim, shift, sparse, rank_one })
    }

    pub fn from_sparse(sparse: SparseHermitian) -> Self {
        Self { dim: sparse.dim(), shift: 0.0, sparse, rank_one: Vec::new() }
    }

    pub fn from_dense(m: &DenseMatrix, hermitian_tol: f64) -> Result<Self, LinalgError> {
        Ok(Self::from_sparse(SparseHermitian::from_dense(m, hermitian_tol)?))
    }

    /// `I - |u><u|` with `u` the uniform superposition.
    pub fn uniform_complement(dim: usize) -> Self {
        Self {
            dim,
            shift: 1.0,
            sparse: SparseHermitian::zeros(dim),
            rank_one: vec![RankOne { weight: -1.0, direction: Direction::Uniform }],
        }
    }

    /// `sum_i values[i] |i><i|`.
    pub fn diagonal(values: &[f64]) -> Self {
        let sparse = SparseHermitian::from_entries(
            values.len(),
            values.iter().enumerate().map(|(i, &v)| (i, i, C64::new(v, 0.0))),
        )
        .expect("indices are in range");
        Self::from_sparse(sparse)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn sparse(&self) -> &SparseHermitian {
        &self.sparse
    }

    pub fn rank_one_terms(&self) -> &[RankOne] {
        &self.rank_one
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            shift: self.shift * c,
            sparse: self.sparse.scaled(c),
            rank_one: self.rank_one.iter().map(|t| RankOne { weight: t.weight * c, direction: t.direction.clone() }).collect(),
        }
    }

    /// `a * x + b * y`.
    pub fn linear_combination(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self, LinalgError> {
        if x.dim != y.dim {
            return Err(LinalgError::DimensionMismatch { expected: x.dim, found: y.dim });
        }
        let entries = x
            .sparse
            .triplets()
            .iter()
            .map(|&(r, c, v)| (r, c, v * a))
            .chain(y.sparse.triplets().iter().map(|&(r, c, v)| (r, c, v * b)));
        let sparse = SparseHermitian::from_entries(x.dim, entries)?;
        let mut rank_one: Vec<RankOne> =
            x.rank_one.iter().map(|t| RankOne { weight: t.weight * a, direction: t.direction.clone() }).collect();
        rank_one.extend(y.rank_one.iter().map(|t| RankOne { weight: t.weight * b, direction: t.direction.clone() }));
        rank_one.retain(|t| t.weight != 0.0);
        Ok(Self { dim: x.dim, shift: a * x.shift + b * y.shift, sparse, rank_one })
    }

    /// `x (x) I + I (x) y`.
    pub fn kronecker_sum(x: &Self, y: &Self) -> Self {
        let (dx, dy) = (x.dim, y.dim);
        let dim = dx * dy;
        let mut entries = Vec::new();
        for &(r, c, v) in x.sparse.triplets() {
            for k in 0..dy {
                entries.push((r * dy + k, c * dy + k, v));
            }
        }
        for &(r, c, v) in y.sparse.triplets() {
            for k in 0..dx {
                entries.push((k * dy + r, k * dy + c, v));
            }
        }
        let sparse = SparseHermitian::from_entries(dim, entries).expect("indices are in range");
        let mut rank_one = Vec::new();
        for t in &x.rank_one {
            let v = t.direction.to_sparse(dx);
            for k in 0..dy {
                let lifted = v.iter().map(|&(i, a)| (i * dy + k, a)).collect();
                rank_one.push(RankOne { weight: t.weight, direction: Direction::Sparse(lifted) });
            }
        }
        for t in &y.rank_one {
            let v = t.direction.to_sparse(dy);
            for k in 0..dx {
                let lifted = v.iter().map(|&(i, a)| (k * dy + i, a)).collect();
                rank_one.push(RankOne { weight: t.weight, direction: Direction::Sparse(lifted) });
            }
        }
        Self { dim, shift: x.shift + y.shift, sparse, rank_one }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi * self.shift;
        }
        self.sparse.apply_add(x, y);
        for term in &self.rank_one {
            match &term.direction {
                Direction::Uniform => {
                    let s: C64 = x.iter().sum::<C64>() * (term.weight / self.dim as f64);
                    y.iter_mut().for_each(|yi| *yi += s);
                }
                Direction::Sparse(v) => {
                    let ov: C64 = v.iter().map(|&(i, a)| a.conj() * x[i]).sum::<C64>() * term.weight;
                    for &(i, a) in v {
                        y[i] += a * ov;
                    }
                }
            }
        }
    }

    /// `<v|H|v>`.
    pub fn expectation(&self, v: &StateVector) -> f64 {
        inner(v.amplitudes(), &self.apply(v.amplitudes())).re
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = self.sparse.to_dense();
        for i in 0..self.dim {
            m[(i, i)] += self.shift;
        }
        for term in &self.rank_one {
            let v = term.direction.to_sparse(self.dim);
            for &(r, a) in &v {
                for &(c, b) in &v {
                    m[(r, c)] += a * b.conj() * term.weight;
                }
            }
        }
        m
    }

    /// Upper-triangle nonzero entries of the full matrix, row-major.
    pub fn upper_triplets(&self, tol: f64) -> Vec<(usize, usize, C64)> {
        let m = self.to_dense();
        let mut out = Vec::new();
        for r in 0..self.dim {
            for c in r..self.dim {
                if m[(r, c)].norm() > tol {
                    out.push((r, c, m[(r, c)]));
                }
            }
        }
        out
    }

    /// Crude upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let mut row_sums: BTreeMap<usize, f64> = BTreeMap::new();
        for &(r, c, v) in self.sparse.triplets() {
            *row_sums.entry(r).or_default() += v.norm();
            if r != c {
                *row_sums.entry(c).or_default() += v.norm();
            }
        }
        let sparse_bound = row_sums.values().copied().fold(0.0, f64::max);
        let rank_bound: f64 = self
            .rank_one
            .iter()
            .map(|t| t.weight.abs() * t.direction.norm_sqr(self.dim))
            .sum();
        self.shift.abs() + sparse_bound + rank_bound
    }

    /// The `k` lowest eigenpairs, ascending.
    pub fn lowest_eigenpairs(&self, k: usize, settings: &EigenSettings) -> Result<Eigenpairs, LinalgError> {
        if k > self.dim {
            return Err(LinalgError::TooManyEigenpairs { requested: k, dim: self.dim });
        }
        let reduced = Reduction::new(self);
        let inner_pairs = if reduced.hamiltonian.dim == 0 {
            Eigenpairs { values: Vec::new(), vectors: Vec::new() }
        } else {
            let want = k.min(reduced.hamiltonian.dim);
            if reduced.hamiltonian.dim <= settings.dense_max {
                let mut all = hermitian_eig(&reduced.hamiltonian.to_dense(), settings)?;
                all.values.truncate(want);
                all.vectors.truncate(want);
                all
            } else {
                lanczos_lowest(&reduced.hamiltonian, want, settings)?
            }
        };
        Ok(reduced.lift(inner_pairs, k))
    }

    /// Every eigenpair; dense only.
    pub fn full_eigen(&self, settings: &EigenSettings) -> Result<Eigenpairs, LinalgError> {
        if self.dim > settings.dense_max {
            return Err(LinalgError::CapacityExceeded { dim: self.dim, limit: settings.dense_max });
        }
        hermitian_eig(&self.to_dense(), settings)
    }
}

impl Direction {
    pub fn to_sparse(&self, dim: usize) -> Vec<(usize, C64)> {
        match self {
            Direction::Uniform => {
                let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
                (0..dim).map(|i| (i, a)).collect()
            }
            Direction::Sparse(v) => v.clone(),
        }
    }

    fn norm_sqr(&self, _dim: usize) -> f64 {
        match self {
            Direction::Uniform => 1.0,
            Direction::Sparse(v) => v.iter().map(|(_, a)| a.norm_sqr()).sum(),
        }
    }
}

impl LinearOperator for Hamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.apply_into(x, y);
    }
}

/// Restriction of a Hamiltonian to the smallest subspace outside of which it acts as `shift`.
///
/// The subspace is spanned by the basis vectors touched by sparse entries or sparse
/// directions, plus the components of dense directions orthogonal to those.
struct Reduction {
    full_dim: usize,
    shift: f64,
    local: Vec<usize>,
    extra: Vec<Vec<C64>>,
    hamiltonian: Hamiltonian,
}

impl Reduction {
    fn new(h: &Hamiltonian) -> Self {
        let mut local: BTreeSet<usize> = h.sparse.support().into_iter().collect();
        for t in &h.rank_one {
            if let Direction::Sparse(v) = &t.direction {
                local.extend(v.iter().map(|&(i, _)| i));
            }
        }
        let local: Vec<usize> = local.into_iter().collect();
        let position: BTreeMap<usize, usize> = local.iter().enumerate().map(|(p, &i)| (i, p)).collect();

        let mut extra: Vec<Vec<C64>> = Vec::new();
        for t in &h.rank_one {
            if let Direction::Uniform = t.direction {
                let a = C64::new(1.0 / (h.dim as f64).sqrt(), 0.0);
                let mut v = vec![a; h.dim];
                for &i in &local {
                    v[i] = C64::new(0.0, 0.0);
                }
                for e in &extra {
                    let ov = inner(e, &v);
                    axpy_sub(&mut v, ov, e);
                }
                let n = norm(&v);
                if n > 1e-12 {
                    v.iter_mut().for_each(|x| *x /= n);
                    extra.push(v);
                }
            }
        }

        let red_dim = local.len() + extra.len();
        let entries: Vec<(usize, usize, C64)> =
            h.sparse.triplets().iter().map(|&(r, c, v)| (position[&r], position[&c], v)).collect();
        let sparse = SparseHermitian::from_entries(red_dim, entries).expect("reindexed entries are in range");
        let rank_one = h
            .rank_one
            .iter()
            .map(|t| {
                let coords: Vec<(usize, C64)> = match &t.direction {
                    Direction::Sparse(v) => v.iter().map(|&(i, a)| (position[&i], a)).collect(),
                    Direction::Uniform => {
                        let a = C64::new(1.0 / (h.dim as f64).sqrt(), 0.0);
                        let mut coords: Vec<(usize, C64)> = local.iter().enumerate().map(|(p, _)| (p, a)).collect();
                        for (k, e) in extra.iter().enumerate() {
                            // <e|u> for the uniform u.
                            let ov: C64 = e.iter().map(|x| x.conj()).sum::<C64>() * a;
                            coords.push((local.len() + k, ov));
                        }
                        coords
                    }
                };
                RankOne { weight: t.weight, direction: Direction::Sparse(coords) }
            })
            .collect();
        let hamiltonian = Hamiltonian { dim: red_dim, shift: h.shift, sparse, rank_one };
        Self { full_dim: h.dim, shift: h.shift, local, extra, hamiltonian }
    }

    fn lift_vector(&self, y: &[C64]) -> StateVector {
        let mut v = vec![C64::new(0.0, 0.0); self.full_dim];
        for (p, &i) in self.local.iter().enumerate() {
            v[i] += y[p];
        }
        for (k, e) in self.extra.iter().enumerate() {
            let coeff = y[self.local.len() + k];
            if coeff != C64::new(0.0, 0.0) {
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi += coeff * ei;
                }
            }
        }
        StateVector::new(v)
    }

    /// Merges the reduced spectrum with the `shift` eigenspace of the complement.
    fn lift(&self, inner_pairs: Eigenpairs, k: usize) -> Eigenpairs {
        let complement_dim = self.full_dim - self.hamiltonian.dim;
        let mut merged: Vec<(f64, StateVector)> = inner_pairs
            .values
            .iter()
            .zip(&inner_pairs.vectors)
            .map(|(&val, vec)| (val, self.lift_vector(vec.amplitudes())))
            .collect();
        let needed = k.min(complement_dim);
        if needed > 0 {
            let local: BTreeSet<usize> = self.local.iter().copied().collect();
            let mut chosen: Vec<Vec<C64>> = Vec::new();
            for r in (0..self.full_dim).filter(|r| !local.contains(r)) {
                if chosen.len() == needed {
                    break;
                }
                let mut v = vec![C64::new(0.0, 0.0); self.full_dim];
                v[r] = C64::new(1.0, 0.0);
                for e in self.extra.iter().chain(chosen.iter()) {
                    let ov = inner(e, &v);
                    axpy_sub(&mut v, ov, e);
                }
                let n = norm(&v);
                if n > 1e-8 {
                    v.iter_mut().for_each(|x| *x /= n);
                    chosen.push(v);
                }
            }
            merged.extend(chosen.into_iter().map(|v| (self.shift, StateVector::new(v))));
        }
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        merged.truncate(k);
        let (values, vectors) = merged.into_iter().unzip();
        Eigenpairs { values, vectors }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> EigenSettings {
        EigenSettings::default()
    }

    #[test]
    fn uniform_complement_has_unique_zero_ground() {
        let h = Hamiltonian::uniform_complement(6);
        let e = h.lowest_eigenpairs(3, &settings()).unwrap();
        assert!(e.values[0].abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
        assert!((e.values[2] - 1.0).abs() < 1e-12);
        let u = StateVector::uniform(6);
        assert!((e.vectors[0].inner(&u).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_spectrum_matches_dense() {
        let sparse = SparseHermitian::from_entries(
            9,
            [(1, 1, C64::new(-2.0, 0.0)), (1, 4, C64::new(0.5, 0.5)), (4, 4, C64::new(0.25, 0.0))],
        )
        .unwrap();
        let h = Hamiltonian::from_parts(
            9,
            0.75,
            sparse,
            vec![
                RankOne { weight: -0.5, direction: Direction::Uniform },
                RankOne { weight: 0.3, direction: Direction::Sparse(vec![(2, C64::new(0.6, 0.0)), (7, C64::new(0.0, 0.8))]) },
            ],
        )
        .unwrap();
        let dense = hermitian_eig(&h.to_dense(), &settings()).unwrap();
        let fast = h.lowest_eigenpairs(9, &settings()).unwrap();
        for (a, b) in dense.values.iter().zip(&fast.values) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        for (val, vec) in fast.values.iter().zip(&fast.vectors) {
            let hv = h.apply(vec.amplitudes());
            let res: f64 = hv.iter().zip(vec.amplitudes()).map(|(x, y)| (x - y * val).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-9);
        }
    }

    #[test]
    fn kronecker_sum_spectrum_adds() {
        let a = Hamiltonian::diagonal(&[0.0, 1.0]);
        let b = Hamiltonian::uniform_complement(3);
        let s = Hamiltonian::kronecker_sum(&a, &b);
        let e = s.full_eigen(&settings()).unwrap();
        let expected = [0.0, 1.0, 1.0, 1.0, 2.0, 2.0];
        for (x, y) in e.values.iter().zip(expected) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_combination_matches_dense() {
        let a = Hamiltonian::uniform_complement(4);
        let b = Hamiltonian::diagonal(&[1.0, 0.0, 2.0, 3.0]);
        let c = Hamiltonian::linear_combination(0.3, &a, 0.7, &b).unwrap();
        let expected = &a.to_dense().scale(C64::new(0.3, 0.0)) + &b.to_dense().scale(C64::new(0.7, 0.0));
        assert!(c.to_dense().max_diff(&expected) < 1e-14);
    }
}
