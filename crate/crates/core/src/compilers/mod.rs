//! Classical quantum finite automata compiled into AEQS families, with direct simulators.

mod garbage;
pub mod random;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::aeqs::{accuracy_of_overlap, AeqsError, AeqsFamily, AeqsInstance, DEFAULT_EPSILON, DEGENERACY_TOL};
use crate::linalg::{DenseMatrix, Direction, EigenSettings, Hamiltonian, RankOne, SparseHermitian, C64};
use crate::qqa::{generate_moqqaf, tape, BasisIndex, InitialMixture, MoqqafLevel, QqaError, Register, Selector, SparseOp, Symbol};

pub use garbage::{from_garbage_1qfa, run_garbage_1qfa, GarbageQfaSpec, GarbageTransition, GARBAGE_CAPACITY};

/// Largest allowed deviation from unitarity or isometry.
pub const UNITARITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("automaton has no states")]
    NoStates,
    #[error("operator for {symbol} is {rows}x{cols}, expected {expected}")]
    Shape { symbol: Symbol, rows: usize, cols: usize, expected: String },
    #[error("operator for {symbol} is not unitary (defect {defect:.3e})")]
    NotUnitary { symbol: Symbol, defect: f64 },
    #[error("operator for {symbol} is not an isometry (defect {defect:.3e})")]
    NotIsometric { symbol: Symbol, defect: f64 },
    #[error("no operator for letter '{0}'")]
    MissingLetter(char),
    #[error("state index {index} is outside the {states} states")]
    StateIndex { index: usize, states: usize },
    #[error("state {0} is both accepting and rejecting")]
    Overlap(usize),
    #[error("garbage alphabet {0:?} must be nonempty, distinct and must not contain the blank 'B'")]
    GarbageAlphabet(Vec<char>),
    #[error("error bound {0} is outside [0, 1)")]
    ErrorBound(f64),
    #[error("configuration space of {needed} states exceeds the capacity {limit}")]
    Capacity { needed: usize, limit: usize },
    #[error(transparent)]
    Qqa(#[from] QqaError),
    #[error(transparent)]
    Aeqs(#[from] AeqsError),
}

/// Acceptance and rejection probabilities of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunProbabilities {
    pub accept: f64,
    pub reject: f64,
}

/// Accuracy threshold that an automaton with error bound `bound` is guaranteed to reach.
///
/// The ground state is `U|q0>`, whose accepting projection has norm `sqrt(p_acc)`, so the
/// reached accuracy is `1 - sqrt(1 - sqrt(p_acc))` with `p_acc >= 1 - bound`.
pub fn threshold_for_error(bound: f64) -> f64 {
    accuracy_of_overlap((1.0 - bound).sqrt()) - DEGENERACY_TOL
}

fn epsilon_for(bound: Option<f64>) -> f64 {
    bound.map_or(DEFAULT_EPSILON, |b| threshold_for_error(b).min(DEFAULT_EPSILON))
}

fn check_states(indices: &[usize], states: usize) -> Result<(), CompileError> {
    match indices.iter().find(|&&i| i >= states) {
        Some(&index) => Err(CompileError::StateIndex { index, states }),
        None => Ok(()),
    }
}

fn check_criteria(initial: usize, accept: &[usize], reject: &[usize], states: usize) -> Result<(), CompileError> {
    check_states(&[initial], states)?;
    check_states(accept, states)?;
    check_states(reject, states)?;
    let acc: BTreeSet<usize> = accept.iter().copied().collect();
    match reject.iter().find(|r| acc.contains(r)) {
        Some(&q) => Err(CompileError::Overlap(q)),
        None => Ok(()),
    }
}

fn check_bound(bound: Option<f64>) -> Result<(), CompileError> {
    match bound {
        Some(b) if !(0.0..1.0).contains(&b) => Err(CompileError::ErrorBound(b)),
        _ => Ok(()),
    }
}

/// Largest entry of `A^dagger A - I`.
fn isometry_defect(a: &DenseMatrix) -> f64 {
    let gram = a.adjoint().matmul(a).expect("adjoint shapes agree");
    gram.max_diff(&DenseMatrix::identity(a.cols()))
}

/// `I - W^{(x)k} |q0><q0| W^{(x)k}`.
fn hadamard_complement(dim: usize, q0: usize) -> Hamiltonian {
    if q0 == 0 {
        return Hamiltonian::uniform_complement(dim);
    }
    let s = 1.0 / (dim as f64).sqrt();
    let direction = (0..dim).map(|i| (i, C64::new(if (i & q0).count_ones() % 2 == 0 { s } else { -s }, 0.0))).collect();
    Hamiltonian::from_parts(dim, 1.0, SparseHermitian::zeros(dim), vec![RankOne { weight: -1.0, direction: Direction::Sparse(direction) }])
        .expect("rank-one direction fits the dimension")
}

/// One-way measure-once quantum finite automaton.
#[derive(Debug, Clone)]
pub struct MoQfaSpec {
    states: Vec<String>,
    alphabet: Vec<char>,
    unitaries: BTreeMap<Symbol, DenseMatrix>,
    initial: usize,
    accept: Vec<usize>,
    reject: Vec<usize>,
    error_bound: Option<f64>,
}

impl MoQfaSpec {
    /// Endmarkers without an operator act as the identity; every letter needs one.
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<char>,
        unitaries: BTreeMap<Symbol, DenseMatrix>,
        initial: usize,
        accept: Vec<usize>,
        reject: Vec<usize>,
    ) -> Result<Self, CompileError> {
        let d = states.len();
        if d == 0 {
            return Err(CompileError::NoStates);
        }
        if let Some(&c) = alphabet.iter().find(|c| !unitaries.contains_key(&Symbol::Letter(**c))) {
            return Err(CompileError::MissingLetter(c));
        }
        for (&symbol, u) in &unitaries {
            if u.rows() != d || u.cols() != d {
                return Err(CompileError::Shape { symbol, rows: u.rows(), cols: u.cols(), expected: format!("{d}x{d}") });
            }
            let defect = isometry_defect(u);
            if defect > UNITARITY_TOL {
                return Err(CompileError::NotUnitary { symbol, defect });
            }
        }
        check_criteria(initial, &accept, &reject, d)?;
        Ok(Self { states, alphabet, unitaries, initial, accept, reject, error_bound: None })
    }

    /// Declares the two-sided error bound, which sets the compiled accuracy threshold.
    pub fn with_error_bound(mut self, bound: f64) -> Result<Self, CompileError> {
        check_bound(Some(bound))?;
        self.error_bound = Some(bound);
        Ok(self)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn unitary(&self, symbol: Symbol) -> Option<&DenseMatrix> {
        self.unitaries.get(&symbol)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accept(&self) -> &[usize] {
        &self.accept
    }

    pub fn reject(&self) -> &[usize] {
        &self.reject
    }

    pub fn error_bound(&self) -> Option<f64> {
        self.error_bound
    }

    /// State count after padding to a power of two.
    pub fn padded_dim(&self) -> usize {
        self.states.len().next_power_of_two()
    }

    /// The automaton as a quasi-automaton on the padded space, with `Lambda_0 = I - |q0><q0|`.
    pub fn level(&self) -> Result<MoqqafLevel, CompileError> {
        let (d, dim) = (self.states.len(), self.padded_dim());
        let mut labels = self.states.clone();
        labels.extend((d..dim).map(|i| format!("pad{}", i - d)));
        let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let basis = BasisIndex::new(vec![Register::labeled("q", &label_refs)])?;
        let unitaries = self
            .unitaries
            .iter()
            .map(|(&symbol, u)| {
                let padded = DenseMatrix::from_fn(dim, dim, |r, c| match (r < d, c < d) {
                    (true, true) => u[(r, c)],
                    (false, false) if r == c => C64::new(1.0, 0.0),
                    _ => C64::new(0.0, 0.0),
                });
                Ok((symbol, SparseOp::from_dense(&padded)?))
            })
            .collect::<Result<_, QqaError>>()?;
        Ok(MoqqafLevel::new(basis, self.alphabet.clone(), unitaries, InitialMixture::identity_except(self.initial, 0.0), Vec::new())?)
    }
}

/// `H_ini = W Lambda_0 W`, `H_fin = U_{¢x$} Lambda_0 U^dagger` on the padded space.
pub fn from_moqfa(spec: &MoQfaSpec) -> Result<AeqsFamily, CompileError> {
    let level = Arc::new(spec.level()?);
    level.validate(&EigenSettings::default())?;
    let dim = level.dim();
    let h_ini = hadamard_complement(dim, spec.initial);
    let (accept, reject) = (spec.accept.clone(), spec.reject.clone());
    let epsilon = epsilon_for(spec.error_bound);
    let family = AeqsFamily::new("moqfa", spec.alphabet.clone(), Selector::constant(0), move |x| {
        let g = generate_moqqaf(&level, x, &EigenSettings::from_env())?;
        AeqsInstance::new(g.basis, epsilon, h_ini.clone(), g.hamiltonian, accept.clone(), reject.clone())
    });
    Ok(family.with_tags(&["1moqfa", "constsize", "constgap", "0-energy"]))
}

/// Applies the unitaries along `¢x$` to `|q0>` and measures once.
pub fn run_moqfa(spec: &MoQfaSpec, x: &str) -> Result<RunProbabilities, CompileError> {
    let mut psi = vec![C64::new(0.0, 0.0); spec.states.len()];
    psi[spec.initial] = C64::new(1.0, 0.0);
    for symbol in tape(&spec.alphabet, x)? {
        if let Some(u) = spec.unitaries.get(&symbol) {
            psi = u.apply(&psi).expect("validated shape");
        }
    }
    let mass = |set: &[usize]| set.iter().map(|&q| psi[q].norm_sqr()).sum();
    Ok(RunProbabilities { accept: mass(&spec.accept), reject: mass(&spec.reject) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aeqs::{decide, ground_state, Outcome};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn matrix(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| c(v)).collect()).collect()).unwrap()
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("q{i}")).collect()
    }

    fn parity() -> MoQfaSpec {
        let ops = BTreeMap::from([
            (Symbol::Letter('0'), DenseMatrix::identity(2)),
            (Symbol::Letter('1'), matrix(&[&[0.0, 1.0], &[1.0, 0.0]])),
        ]);
        MoQfaSpec::new(names(2), vec!['0', '1'], ops, 0, vec![0], vec![1]).unwrap()
    }

    fn hadamard_on_one() -> MoQfaSpec {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ops = BTreeMap::from([(Symbol::Letter('1'), matrix(&[&[h, h], &[h, -h]]))]);
        MoQfaSpec::new(names(2), vec!['1'], ops, 0, vec![0], vec![1]).unwrap()
    }

    /// Accepts with probability `1 - delta` on every input.
    fn biased(delta: f64) -> MoQfaSpec {
        let (a, b) = ((1.0 - delta).sqrt(), delta.sqrt());
        let ops = BTreeMap::from([(Symbol::Letter('a'), DenseMatrix::identity(2)), (Symbol::Right, matrix(&[&[a, -b], &[b, a]]))]);
        MoQfaSpec::new(names(2), vec!['a'], ops, 0, vec![0], vec![1]).unwrap()
    }

    #[test]
    fn always_accept() {
        let spec = MoQfaSpec::new(names(1), vec!['a'], BTreeMap::from([(Symbol::Letter('a'), DenseMatrix::identity(1))]), 0, vec![0], vec![])
            .unwrap();
        assert_eq!(run_moqfa(&spec, "aaa").unwrap(), RunProbabilities { accept: 1.0, reject: 0.0 });
        let family = from_moqfa(&spec).unwrap();
        for x in ["", "a", "aaaa"] {
            let v = family.decide(x, &EigenSettings::default()).unwrap();
            assert_eq!(v.outcome, Outcome::Accept);
            assert!((v.accuracy - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hadamard_splits_evenly() {
        let p = run_moqfa(&hadamard_on_one(), "1").unwrap();
        assert!((p.accept - 0.5).abs() < 1e-12 && (p.reject - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parity_matches_matrix_product() {
        let spec = parity();
        assert_eq!(run_moqfa(&spec, "111").unwrap(), RunProbabilities { accept: 0.0, reject: 1.0 });
        assert_eq!(run_moqfa(&spec, "11").unwrap(), RunProbabilities { accept: 1.0, reject: 0.0 });
        let family = from_moqfa(&spec).unwrap();
        let s = EigenSettings::default();
        assert_eq!(family.decide("11", &s).unwrap().outcome, Outcome::Accept);
        assert_eq!(family.decide("1011", &s).unwrap().outcome, Outcome::Reject);
    }

    #[test]
    fn compiled_gap_is_one() {
        let s = EigenSettings::default();
        for spec in [parity(), hadamard_on_one()] {
            let family = from_moqfa(&spec).unwrap();
            for x in crate::gallery::strings_up_to(&spec.alphabet, 5) {
                let inst = family.build(&x).unwrap();
                let g = ground_state(&inst.h_fin, &s).unwrap();
                assert!(g.energy.abs() < 1e-8, "{x}");
                assert!((g.gap() - 1.0).abs() < 1e-8, "{x}");
                let p = run_moqfa(&spec, &x).unwrap();
                let v = decide(&inst, &s).unwrap();
                assert!((v.acc_overlap.powi(2) - p.accept).abs() < 1e-8, "{x}");
            }
        }
    }

    #[test]
    fn padding_keeps_three_states_apart() {
        let spec = MoQfaSpec::new(
            names(3),
            vec!['a'],
            BTreeMap::from([(Symbol::Letter('a'), matrix(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]))]),
            0,
            vec![1],
            vec![0, 2],
        )
        .unwrap();
        assert_eq!(spec.padded_dim(), 4);
        let inst = from_moqfa(&spec).unwrap().build("a").unwrap();
        assert_eq!(inst.basis.label(3), "(pad0)");
        let v = decide(&inst, &EigenSettings::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Accept);
        assert!((v.spectral_gap - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nonzero_initial_state_gives_hadamard_diagonal_start() {
        let h = hadamard_complement(4, 3);
        let d = h.to_dense();
        let w = crate::linalg::hadamard_power(2, &EigenSettings::default()).unwrap();
        let diag = w.matmul(&d).unwrap().matmul(&w).unwrap();
        let expected = DenseMatrix::from_real_diagonal(&[1.0, 1.0, 1.0, 0.0]);
        assert!(diag.max_diff(&expected) < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = BTreeMap::from([(Symbol::Letter('a'), matrix(&[&[1.0, 1.0], &[0.0, 1.0]]))]);
        assert!(matches!(MoQfaSpec::new(names(2), vec!['a'], bad, 0, vec![0], vec![1]), Err(CompileError::NotUnitary { .. })));
        let ok = BTreeMap::from([(Symbol::Letter('a'), DenseMatrix::identity(2))]);
        assert!(matches!(MoQfaSpec::new(names(2), vec!['a', 'b'], ok.clone(), 0, vec![0], vec![1]), Err(CompileError::MissingLetter('b'))));
        assert!(matches!(MoQfaSpec::new(names(2), vec!['a'], ok, 0, vec![0, 1], vec![1]), Err(CompileError::Overlap(1))));
    }

    #[test]
    fn corrected_threshold_holds() {
        let s = EigenSettings::default();
        for delta in [0.0, 0.01, 0.05, 0.2] {
            let spec = biased(delta).with_error_bound(delta).unwrap();
            let v = from_moqfa(&spec).unwrap().decide("aa", &s).unwrap();
            assert!(v.accuracy >= threshold_for_error(delta), "{delta}");
            assert_eq!(v.outcome, Outcome::Accept, "{delta}");
        }
    }

    #[test]
    fn claimed_threshold_fails_at_the_bound() {
        // With error exactly eps the reached accuracy stays below 1 - sqrt(eps/2).
        let eps = 0.2;
        let v = from_moqfa(&biased(eps)).unwrap().decide("a", &EigenSettings::default()).unwrap();
        let claimed = 1.0 - (eps / 2.0).sqrt();
        assert!(v.accuracy < claimed - 1e-3, "{} vs {claimed}", v.accuracy);
        assert!((v.accuracy - accuracy_of_overlap((1.0 - eps).sqrt())).abs() < 1e-9);
    }
}
