//! Random automata for soundness sweeps and benchmarks.

use std::collections::BTreeMap;

use rand::Rng;

use crate::linalg::{DenseMatrix, C64};
use crate::qqa::Symbol;

use super::{CompileError, GarbageQfaSpec, GarbageTransition, MoQfaSpec};

fn random_vector(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// `cols` orthonormal columns in `C^dim` from Gram-Schmidt on random vectors.
pub fn random_isometry(dim: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v = random_vector(dim, rng);
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(y, x)| *y -= proj * x);
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    DenseMatrix::from_fn(dim, cols, |r, c| basis[c][r])
}

fn symbols(alphabet: &[char]) -> impl Iterator<Item = Symbol> + '_ {
    std::iter::once(Symbol::Left).chain(alphabet.iter().map(|&c| Symbol::Letter(c))).chain(std::iter::once(Symbol::Right))
}

/// Random unitaries on every symbol, initial state 0, a random split of the states into criteria.
pub fn random_moqfa(states: usize, alphabet: &[char], rng: &mut impl Rng) -> Result<MoQfaSpec, CompileError> {
    let unitaries = symbols(alphabet).map(|s| (s, random_isometry(states, states, rng))).collect();
    let (accept, reject) = random_split(states, rng);
    MoQfaSpec::new((0..states).map(|i| format!("q{i}")).collect(), alphabet.to_vec(), unitaries, 0, accept, reject)
}

/// Random isometries `C^Q -> C^{Q x Xi}` on every symbol.
pub fn random_garbage_qfa(states: usize, garbage: usize, alphabet: &[char], rng: &mut impl Rng) -> Result<GarbageQfaSpec, CompileError> {
    let mut transitions = BTreeMap::new();
    for s in symbols(alphabet) {
        let v = random_isometry(states * garbage, states, rng);
        let list = (0..states)
            .flat_map(|q| (0..states * garbage).map(move |row| (q, row)))
            .map(|(q, row)| GarbageTransition { from: q, to: row / garbage, garbage: row % garbage, amplitude: v[(row, q)] })
            .collect();
        transitions.insert(s, list);
    }
    let (accept, reject) = random_split(states, rng);
    let xi = ('a'..).take(garbage).collect();
    GarbageQfaSpec::new((0..states).map(|i| format!("q{i}")).collect(), alphabet.to_vec(), xi, transitions, 0, accept, reject)
}

/// Each state lands in accept, reject, or neither.
fn random_split(states: usize, rng: &mut impl Rng) -> (Vec<usize>, Vec<usize>) {
    let (mut accept, mut reject) = (Vec::new(), Vec::new());
    for q in 0..states {
        match rng.gen_range(0..3) {
            0 => accept.push(q),
            1 => reject.push(q),
            _ => {}
        }
    }
    (accept, reject)
}

/// A completion of `random_isometry` to a square unitary, for tests.
#[cfg(test)]
pub(crate) fn complete_to_unitary(v: &DenseMatrix) -> DenseMatrix {
    let cols: Vec<Vec<C64>> = (0..v.cols()).map(|c| v.column(c)).collect();
    let rest = super::garbage::orthonormal_complement(&cols, v.rows());
    let all: Vec<Vec<C64>> = cols.into_iter().chain(rest).collect();
    DenseMatrix::from_fn(v.rows(), v.rows(), |r, c| all[c][r])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isometries_are_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = random_isometry(6, 3, &mut rng);
        assert!(super::super::isometry_defect(&v) < 1e-12);
        let u = complete_to_unitary(&v);
        assert!(super::super::isometry_defect(&u) < 1e-12);
    }

    #[test]
    fn random_specs_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for states in 1..=4 {
            random_moqfa(states, &['a', 'b'], &mut rng).unwrap();
        }
        random_garbage_qfa(3, 2, &['a', 'b'], &mut rng).unwrap();
    }
}
