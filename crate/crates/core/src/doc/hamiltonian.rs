//! Lossless export of a Hamiltonian's structured parts.

use serde::{Deserialize, Serialize};

use crate::linalg::{Direction, Hamiltonian, LinalgError, RankOne, SparseHermitian, C64};

/// `shift * I + sum of upper-triangle triplets (mirrored) + rank-one terms`.
///
/// Values keep full precision so that a re-loaded operator equals the exported one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDoc {
    pub dim: usize,
    pub shift: f64,
    /// `(row, col, re, im)` with `row <= col`.
    pub triplets: Vec<(usize, usize, f64, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rank_one: Vec<RankOneDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankOneDoc {
    pub weight: f64,
    pub direction: DirectionDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionDoc {
    Uniform,
    /// `(index, re, im)`.
    Sparse(Vec<(usize, f64, f64)>),
}

impl From<&Hamiltonian> for HamiltonianDoc {
    fn from(h: &Hamiltonian) -> Self {
        let rank_one = h
            .rank_one_terms()
            .iter()
            .map(|t| RankOneDoc {
                weight: t.weight,
                direction: match &t.direction {
                    Direction::Uniform => DirectionDoc::Uniform,
                    Direction::Sparse(v) => DirectionDoc::Sparse(v.iter().map(|&(i, a)| (i, a.re, a.im)).collect()),
                },
            })
            .collect();
        Self {
            dim: h.dim(),
            shift: h.shift(),
            triplets: h.sparse().triplets().iter().map(|&(r, c, v)| (r, c, v.re, v.im)).collect(),
            rank_one,
        }
    }
}

impl HamiltonianDoc {
    pub fn to_hamiltonian(&self) -> Result<Hamiltonian, LinalgError> {
        let sparse = SparseHermitian::from_entries(self.dim, self.triplets.iter().map(|&(r, c, re, im)| (r, c, C64::new(re, im))))?;
        let rank_one = self
            .rank_one
            .iter()
            .map(|t| RankOne {
                weight: t.weight,
                direction: match &t.direction {
                    DirectionDoc::Uniform => Direction::Uniform,
                    DirectionDoc::Sparse(v) => Direction::Sparse(v.iter().map(|&(i, re, im)| (i, C64::new(re, im))).collect()),
                },
            })
            .collect();
        Hamiltonian::from_parts(self.dim, self.shift, sparse, rank_one)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn json_round_trip_is_exact() {
        let m = DenseMatrix::from_rows(vec![
            vec![C64::new(0.1, 0.0), C64::new(1.0 / 3.0, 0.25)],
            vec![C64::new(1.0 / 3.0, -0.25), C64::new(2.0f64.sqrt(), 0.0)],
        ])
        .unwrap();
        let h = Hamiltonian::linear_combination(1.0, &Hamiltonian::from_dense(&m, 0.0).unwrap(), 0.7, &Hamiltonian::uniform_complement(2)).unwrap();
        let text = serde_json::to_string(&HamiltonianDoc::from(&h)).unwrap();
        let back: HamiltonianDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_hamiltonian().unwrap(), h);
    }
}
