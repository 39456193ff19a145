use std::collections::{BTreeMap, BTreeSet};

use crate::linalg::{hermitian_eig, lanczos_lowest, EigenSettings, SparseHermitian, C64};

use super::op::SparseOp;
use super::QqaError;

/// Default bound on `||sum K^dagger K - I||`.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Completeness defect of one operator family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCheck {
    pub label: String,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<FamilyCheck>,
    pub tolerance: f64,
}

impl ValidationReport {
    pub fn worst(&self) -> f64 {
        self.checks.iter().map(|c| c.defect).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.worst() <= self.tolerance
    }

    pub fn failures(&self) -> impl Iterator<Item = &FamilyCheck> {
        self.checks.iter().filter(move |c| c.defect > self.tolerance)
    }
}

/// Spectral norm of `sum_e K_e^dagger K_e - I`.
///
/// For a single unitary this is `||U^dagger U - I||`.
pub fn family_defect(ops: &[SparseOp], settings: &EigenSettings) -> Result<f64, QqaError> {
    let dim = match ops.first() {
        Some(op) => op.dim(),
        None => return Err(QqaError::Completion("empty operator family".to_string())),
    };
    if let Some(op) = ops.iter().find(|op| op.dim() != dim) {
        return Err(QqaError::DimensionMismatch { expected: dim, found: op.dim() });
    }
    let mut diag = vec![-1.0f64; dim];
    let mut off: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    for op in ops {
        let mut triples: Vec<(usize, usize, C64)> = Vec::new();
        for c in 0..dim {
            for (r, a) in op.column(c) {
                triples.push((r, c, a));
            }
        }
        triples.sort_unstable_by_key(|t| (t.0, t.1));
        for group in triples.chunk_by(|x, y| x.0 == y.0) {
            for &(_, a, x) in group {
                diag[a] += x.norm_sqr();
                for &(_, b, y) in group {
                    if a < b {
                        *off.entry((a, b)).or_default() += x.conj() * y;
                    }
                }
            }
        }
    }
    off.retain(|_, v| v.norm() > 1e-15);
    let coupled: BTreeSet<usize> = off.keys().flat_map(|&(a, b)| [a, b]).collect();
    let mut worst = diag
        .iter()
        .enumerate()
        .filter(|(i, _)| !coupled.contains(i))
        .map(|(_, d)| d.abs())
        .fold(0.0f64, f64::max);
    if !coupled.is_empty() {
        let idx: Vec<usize> = coupled.into_iter().collect();
        let pos: BTreeMap<usize, usize> = idx.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let entries = idx
            .iter()
            .map(|&i| (pos[&i], pos[&i], C64::new(diag[i], 0.0)))
            .chain(off.iter().map(|(&(a, b), &v)| (pos[&a], pos[&b], v)));
        let block = SparseHermitian::from_entries(idx.len(), entries)?;
        let block_norm = if idx.len() <= settings.dense_max {
            let e = hermitian_eig(&block.to_dense(), settings)?;
            e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        } else {
            let lo = lanczos_lowest(&block, 1, settings)?.values[0];
            let hi = -lanczos_lowest(&block.scaled(-1.0), 1, settings)?.values[0];
            lo.abs().max(hi.abs())
        };
        worst = worst.max(block_norm);
    }
    Ok(worst)
}
