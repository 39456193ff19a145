use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::linalg::{DenseMatrix, C64};

use super::QqaError;

/// Amplitudes of a sparse vector keyed by basis index.
pub type SparseVec = BTreeMap<usize, C64>;

/// Column index to its nonzero `(row, amplitude)` entries.
pub type Columns = BTreeMap<usize, Vec<(usize, C64)>>;

/// What a table operator does to columns it does not list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rest {
    Identity,
    Zero,
}

type ColumnRule = Arc<dyn Fn(usize) -> Vec<(usize, C64)> + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Table { columns: Columns, rest: Rest },
    Rule(ColumnRule),
}

/// Column-sparse linear operator on a basis of fixed dimension.
///
/// Either an explicit column table (unlisted columns act as identity or zero) or a rule
/// computing each column on demand, for spaces too large to tabulate.
#[derive(Clone)]
pub struct SparseOp {
    dim: usize,
    repr: Repr,
}

impl fmt::Debug for SparseOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Table { columns, rest } => {
                f.debug_struct("SparseOp").field("dim", &self.dim).field("columns", &columns.len()).field("rest", rest).finish()
            }
            Repr::Rule(_) => f.debug_struct("SparseOp").field("dim", &self.dim).field("rule", &true).finish(),
        }
    }
}

impl SparseOp {
    pub fn identity(dim: usize) -> Self {
        Self { dim, repr: Repr::Table { columns: BTreeMap::new(), rest: Rest::Identity } }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, repr: Repr::Table { columns: BTreeMap::new(), rest: Rest::Zero } }
    }

    pub fn from_columns(dim: usize, columns: Columns, rest: Rest) -> Result<Self, QqaError> {
        for (&c, col) in &columns {
            if c >= dim {
                return Err(QqaError::IndexOutOfRange { index: c, dim });
            }
            if let Some(&(r, _)) = col.iter().find(|(r, _)| *r >= dim) {
                return Err(QqaError::IndexOutOfRange { index: r, dim });
            }
        }
        let columns = columns
            .into_iter()
            .map(|(c, col)| (c, merge_entries(col)))
            .collect();
        Ok(Self { dim, repr: Repr::Table { columns, rest } })
    }

    /// Operator whose column `c` is `rule(c)`; the rule must stay within `dim`.
    pub fn from_rule(dim: usize, rule: impl Fn(usize) -> Vec<(usize, C64)> + Send + Sync + 'static) -> Self {
        Self { dim, repr: Repr::Rule(Arc::new(rule)) }
    }

    /// Basis permutation `|c> -> |target(c)>` checked for bijectivity.
    pub fn permutation(dim: usize, target: impl Fn(usize) -> usize) -> Result<Self, QqaError> {
        let mut seen = vec![false; dim];
        let mut columns = BTreeMap::new();
        for c in 0..dim {
            let t = target(c);
            if t >= dim {
                return Err(QqaError::IndexOutOfRange { index: t, dim });
            }
            if std::mem::replace(&mut seen[t], true) {
                return Err(QqaError::Completion(format!("permutation sends two columns to row {t}")));
            }
            if t != c {
                columns.insert(c, vec![(t, C64::new(1.0, 0.0))]);
            }
        }
        Ok(Self { dim, repr: Repr::Table { columns, rest: Rest::Identity } })
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self, QqaError> {
        if !m.is_square() {
            return Err(QqaError::DimensionMismatch { expected: m.rows(), found: m.cols() });
        }
        let n = m.rows();
        let columns = (0..n)
            .map(|c| (c, (0..n).filter(|&r| m[(r, c)] != C64::new(0.0, 0.0)).map(|r| (r, m[(r, c)])).collect()))
            .collect();
        Ok(Self { dim: n, repr: Repr::Table { columns, rest: Rest::Zero } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nonzero entries of column `c`.
    pub fn column(&self, c: usize) -> Vec<(usize, C64)> {
        match &self.repr {
            Repr::Table { columns, rest } => match columns.get(&c) {
                Some(col) => col.clone(),
                None => match rest {
                    Rest::Identity => vec![(c, C64::new(1.0, 0.0))],
                    Rest::Zero => Vec::new(),
                },
            },
            Repr::Rule(rule) => rule(c),
        }
    }

    /// Listed columns and the fallback, for table operators only.
    pub fn table(&self) -> Option<(&Columns, Rest)> {
        match &self.repr {
            Repr::Table { columns, rest } => Some((columns, *rest)),
            Repr::Rule(_) => None,
        }
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (&c, &a) in v {
            for (r, x) in self.column(c) {
                *out.entry(r).or_default() += x * a;
            }
        }
        out.retain(|_, a| a.norm_sqr() > 1e-300);
        out
    }

    /// Every column made explicit.
    pub fn to_columns(&self) -> Columns {
        (0..self.dim).map(|c| (c, self.column(c))).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for c in 0..self.dim {
            for (r, a) in self.column(c) {
                m[(r, c)] += a;
            }
        }
        m
    }

    /// `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self, QqaError> {
        if self.dim != other.dim {
            return Err(QqaError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let columns = (0..self.dim)
            .map(|c| {
                let v: SparseVec = other.column(c).into_iter().collect();
                (c, self.apply(&v).into_iter().collect())
            })
            .collect();
        Self::from_columns(self.dim, columns, Rest::Zero)
    }

    pub fn adjoint(&self) -> Self {
        let mut columns: Columns = (0..self.dim).map(|c| (c, Vec::new())).collect();
        for c in 0..self.dim {
            for (r, a) in self.column(c) {
                columns.get_mut(&r).expect("row in range").push((c, a.conj()));
            }
        }
        Self { dim: self.dim, repr: Repr::Table { columns, rest: Rest::Zero } }
    }

    /// Largest entrywise difference against another operator.
    pub fn max_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for c in 0..self.dim {
            let a: SparseVec = self.column(c).into_iter().collect();
            let mut b: SparseVec = other.column(c).into_iter().collect();
            for (r, x) in a {
                let y = b.remove(&r).unwrap_or_default();
                worst = worst.max((x - y).norm());
            }
            for y in b.values() {
                worst = worst.max(y.norm());
            }
        }
        worst
    }
}

fn merge_entries(col: Vec<(usize, C64)>) -> Vec<(usize, C64)> {
    let mut m = SparseVec::new();
    for (r, a) in col {
        *m.entry(r).or_default() += a;
    }
    m.into_iter().filter(|(_, a)| *a != C64::new(0.0, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_rejects_collisions() {
        assert!(SparseOp::permutation(3, |c| c / 2).is_err());
        let p = SparseOp::permutation(3, |c| (c + 1) % 3).unwrap();
        assert_eq!(p.column(2), vec![(0, C64::new(1.0, 0.0))]);
    }

    #[test]
    fn compose_and_adjoint_of_cycle() {
        let p = SparseOp::permutation(4, |c| (c + 1) % 4).unwrap();
        let back = p.adjoint().compose(&p).unwrap();
        assert!(back.max_diff(&SparseOp::identity(4)) < 1e-15);
    }

    #[test]
    fn rule_columns_apply() {
        let op = SparseOp::from_rule(5, |c| vec![((c + 2) % 5, C64::new(0.5, 0.0))]);
        let v: SparseVec = [(4, C64::new(2.0, 0.0))].into_iter().collect();
        assert_eq!(op.apply(&v).get(&1), Some(&C64::new(1.0, 0.0)));
    }
}
