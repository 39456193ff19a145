//! Adiabatic evolutionary quantum systems: instances, families, ground-state decisions.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{Direction, EigenSettings, Hamiltonian, LinalgError, RankOne, SparseHermitian, StateVector, C64};
use crate::qqa::{BasisIndex, QqaError, Selector};

/// Eigenvalues this close count as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Default acceptance threshold for constructions whose analysis gives accuracy 1.
pub const DEFAULT_EPSILON: f64 = 0.999;

#[derive(Debug, Error)]
pub enum AeqsError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Qqa(#[from] QqaError),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },
    #[error("map changes the size on input \"{input}\": {before} -> {after} qubits")]
    SizeNotPreserved { input: String, before: u32, after: u32 },
    #[error("minimum gap {gap:.3e} along the interpolation is too small; no finite time bound")]
    UnboundedTime { gap: f64 },
    #[error("alphabets differ: {left:?} vs {right:?}")]
    AlphabetMismatch { left: Vec<char>, right: Vec<char> },
    #[error("input \"{input}\" is rejected by the builder: {reason}")]
    Input { input: String, reason: String },
}

/// One input's Hamiltonian pair with its decision criteria.
#[derive(Debug, Clone)]
pub struct AeqsInstance {
    /// Size `m` in qubits.
    pub size: u32,
    pub epsilon: f64,
    pub h_ini: Hamiltonian,
    pub h_fin: Hamiltonian,
    pub accept: Vec<usize>,
    pub reject: Vec<usize>,
    pub basis: BasisIndex,
}

impl AeqsInstance {
    pub fn new(
        basis: BasisIndex,
        epsilon: f64,
        h_ini: Hamiltonian,
        h_fin: Hamiltonian,
        accept: Vec<usize>,
        reject: Vec<usize>,
    ) -> Result<Self, AeqsError> {
        let dim = basis.size();
        if h_ini.dim() != dim || h_fin.dim() != dim {
            return Err(AeqsError::InvalidInstance(format!(
                "basis has {dim} states but the Hamiltonians act on {} and {}",
                h_ini.dim(),
                h_fin.dim()
            )));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(AeqsError::OutOfRange { name: "epsilon", value: epsilon, range: "[0, 1]" });
        }
        let accept = sorted_unique(accept);
        let reject = sorted_unique(reject);
        if let Some(&i) = accept.iter().chain(&reject).find(|&&i| i >= dim) {
            return Err(AeqsError::InvalidInstance(format!("criteria index {i} is outside dimension {dim}")));
        }
        let acc: BTreeSet<usize> = accept.iter().copied().collect();
        if let Some(&i) = reject.iter().find(|i| acc.contains(i)) {
            return Err(AeqsError::InvalidInstance(format!("state {} is both accepting and rejecting", basis.label(i))));
        }
        Ok(Self { size: crate::qqa::ceil_log2(dim), epsilon, h_ini, h_fin, accept, reject, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.size()
    }

    /// Same instance with acceptance and rejection exchanged.
    pub fn swapped(&self) -> Self {
        Self { accept: self.reject.clone(), reject: self.accept.clone(), ..self.clone() }
    }
}

fn sorted_unique(v: Vec<usize>) -> Vec<usize> {
    v.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Lowest eigenpair plus the next level, when there is one.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub next_energy: Option<f64>,
}

impl GroundState {
    pub fn is_unique(&self) -> bool {
        self.next_energy.map_or(true, |e| e - self.energy > DEGENERACY_TOL)
    }

    pub fn gap(&self) -> f64 {
        match self.next_energy {
            Some(e) if e - self.energy > DEGENERACY_TOL => e - self.energy,
            Some(_) => 0.0,
            None => f64::INFINITY,
        }
    }
}

pub fn ground_state(h: &Hamiltonian, settings: &EigenSettings) -> Result<GroundState, AeqsError> {
    let k = h.dim().min(2);
    let pairs = h.lowest_eigenpairs(k, settings)?;
    let mut vectors = pairs.vectors.into_iter();
    let state = vectors.next().ok_or_else(|| AeqsError::InvalidInstance("empty Hamiltonian".to_string()))?;
    Ok(GroundState { energy: pairs.values[0], state, next_energy: pairs.values.get(1).copied() })
}

/// `lambda_1 - lambda_0`, or 0 for a degenerate ground level.
pub fn spectral_gap(h: &Hamiltonian, settings: &EigenSettings) -> Result<f64, AeqsError> {
    if h.dim() < 2 {
        return Err(AeqsError::InvalidInstance("a gap needs at least two states".to_string()));
    }
    Ok(ground_state(h, settings)?.gap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Accept,
    Reject,
    Indeterminate,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Accept => "accept",
            Self::Reject => "reject",
            Self::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub ground_energy: f64,
    pub spectral_gap: f64,
    pub accuracy: f64,
    pub acc_overlap: f64,
    pub rej_overlap: f64,
    pub unique_ground_state: bool,
}

/// Accuracy reached by a ground state whose projection onto one side has norm `overlap`.
pub fn accuracy_of_overlap(overlap: f64) -> f64 {
    1.0 - (1.0 - overlap.clamp(0.0, 1.0)).sqrt()
}

/// Ground state of `H_fin` judged by its projections onto the criteria spans.
pub fn decide(instance: &AeqsInstance, settings: &EigenSettings) -> Result<Verdict, AeqsError> {
    let g = ground_state(&instance.h_fin, settings)?;
    Ok(judge(instance, &g))
}

/// Verdict for an already computed ground state.
pub fn judge(instance: &AeqsInstance, g: &GroundState) -> Verdict {
    let a = g.state.projected_norm(&instance.accept).min(1.0);
    let r = g.state.projected_norm(&instance.reject).min(1.0);
    let (acc_a, acc_r) = (accuracy_of_overlap(a), accuracy_of_overlap(r));
    let unique = g.is_unique();
    let outcome = if !unique || (a - r).abs() <= DEGENERACY_TOL {
        Outcome::Indeterminate
    } else if a > r && acc_a >= instance.epsilon {
        Outcome::Accept
    } else if r > a && acc_r >= instance.epsilon {
        Outcome::Reject
    } else {
        Outcome::Indeterminate
    };
    Verdict {
        outcome,
        ground_energy: g.energy,
        spectral_gap: if g.next_energy.is_some() { g.gap() } else { 0.0 },
        accuracy: acc_a.max(acc_r),
        acc_overlap: a,
        rej_overlap: r,
        unique_ground_state: unique,
    }
}

/// `H(s) = (1 - s) H_ini + s H_fin`.
pub fn interpolated_hamiltonian(instance: &AeqsInstance, s: f64) -> Result<Hamiltonian, AeqsError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(AeqsError::OutOfRange { name: "s", value: s, range: "[0, 1]" });
    }
    Ok(Hamiltonian::linear_combination(1.0 - s, &instance.h_ini, s, &instance.h_fin)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub norm: f64,
    /// Set when the norm is below 1e-12.
    pub commuting: bool,
}

/// `||[H_ini, H_fin]||`, dense.
pub fn commutator_check(instance: &AeqsInstance, settings: &EigenSettings) -> Result<CommutatorReport, AeqsError> {
    if instance.dim() > settings.dense_max {
        return Err(LinalgError::CapacityExceeded { dim: instance.dim(), limit: settings.dense_max }.into());
    }
    let c = instance.h_ini.to_dense().commutator(&instance.h_fin.to_dense())?;
    let norm = crate::linalg::spectral_norm(&c, settings)?;
    Ok(CommutatorReport { norm, commuting: norm < 1e-12 })
}

/// Spectral norm of a Hermitian operator from its extreme eigenvalues.
pub fn hermitian_norm(h: &Hamiltonian, settings: &EigenSettings) -> Result<f64, AeqsError> {
    let lo = h.lowest_eigenpairs(1, settings)?.values[0];
    let hi = -h.scaled(-1.0).lowest_eigenpairs(1, settings)?.values[0];
    Ok(lo.abs().max(hi.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBoundParams {
    pub epsilon: f64,
    pub delta: f64,
    pub constant: f64,
    pub grid: usize,
}

impl Default for TimeBoundParams {
    fn default() -> Self {
        Self { epsilon: 0.1, delta: 1.0, constant: 1.0, grid: 64 }
    }
}

/// Smallest gap of `H(s)` over `grid` uniform points of `[0, 1]`.
pub fn minimum_gap(instance: &AeqsInstance, grid: usize, settings: &EigenSettings) -> Result<f64, AeqsError> {
    if grid < 2 {
        return Err(AeqsError::OutOfRange { name: "grid", value: grid as f64, range: "[2, inf)" });
    }
    let mut g = f64::INFINITY;
    for i in 0..grid {
        let h = interpolated_hamiltonian(instance, i as f64 / (grid - 1) as f64)?;
        let pairs = h.lowest_eigenpairs(2.min(h.dim()), settings)?;
        let gap = pairs.values.get(1).map_or(f64::INFINITY, |e| e - pairs.values[0]);
        g = g.min(gap);
    }
    Ok(g)
}

/// `C ||H_fin - H_ini||^(1+delta) / (epsilon^delta g^(2+delta))`.
pub fn time_bound_from(norm: f64, gap: f64, p: &TimeBoundParams) -> Result<f64, AeqsError> {
    if gap <= DEGENERACY_TOL {
        return Err(AeqsError::UnboundedTime { gap });
    }
    Ok(p.constant * norm.powf(1.0 + p.delta) / (p.epsilon.powf(p.delta) * gap.powf(2.0 + p.delta)))
}

pub fn adiabatic_time_bound(instance: &AeqsInstance, p: &TimeBoundParams, settings: &EigenSettings) -> Result<f64, AeqsError> {
    if p.epsilon <= 0.0 {
        return Err(AeqsError::OutOfRange { name: "epsilon", value: p.epsilon, range: "(0, inf)" });
    }
    if p.delta <= 0.0 {
        return Err(AeqsError::OutOfRange { name: "delta", value: p.delta, range: "(0, inf)" });
    }
    let diff = Hamiltonian::linear_combination(1.0, &instance.h_fin, -1.0, &instance.h_ini)?;
    let norm = hermitian_norm(&diff, settings)?;
    let gap = minimum_gap(instance, p.grid, settings)?;
    time_bound_from(norm, gap, p)
}

type InstanceBuilder = Arc<dyn Fn(&str) -> Result<AeqsInstance, AeqsError> + Send + Sync>;
type Promise = Arc<dyn Fn(&str) -> bool + Send + Sync>;

/// Input-indexed AEQS family.
#[derive(Clone)]
pub struct AeqsFamily {
    pub name: String,
    pub alphabet: Vec<char>,
    pub selector: Selector,
    pub tags: Vec<String>,
    builder: InstanceBuilder,
    promise: Option<Promise>,
}

impl fmt::Debug for AeqsFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AeqsFamily")
            .field("name", &self.name)
            .field("alphabet", &self.alphabet)
            .field("selector", &self.selector)
            .field("tags", &self.tags)
            .finish_non_exhaustive()
    }
}

impl AeqsFamily {
    pub fn new(
        name: &str,
        alphabet: Vec<char>,
        selector: Selector,
        builder: impl Fn(&str) -> Result<AeqsInstance, AeqsError> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.to_string(), alphabet, selector, tags: Vec::new(), builder: Arc::new(builder), promise: None }
    }

    pub fn with_promise(mut self, promise: impl Fn(&str) -> bool + Send + Sync + 'static) -> Self {
        self.promise = Some(Arc::new(promise));
        self
    }

    pub fn with_tags(mut self, tags: &[&str]) -> Self {
        self.tags = tags.iter().map(|t| t.to_string()).collect();
        self
    }

    pub fn build(&self, x: &str) -> Result<AeqsInstance, AeqsError> {
        if let Some((position, symbol)) = x.chars().enumerate().find(|(_, c)| !self.alphabet.contains(c)) {
            return Err(QqaError::UnknownSymbol { symbol, position }.into());
        }
        (self.builder)(x)
    }

    /// True when `x` satisfies the family's promise (always, without one).
    pub fn promised(&self, x: &str) -> bool {
        self.promise.as_ref().map_or(true, |p| p(x))
    }

    pub fn decide(&self, x: &str, settings: &EigenSettings) -> Result<Verdict, AeqsError> {
        decide(&self.build(x)?, settings)
    }
}

/// `|0^>`, `|1^>`: the Hadamard images of the two basis states of one qubit.
fn hadamard_state(bit: usize) -> Vec<(usize, C64)> {
    let s = 0.5f64.sqrt();
    vec![(0, C64::new(s, 0.0)), (1, C64::new(if bit == 0 { s } else { -s }, 0.0))]
}

/// One-qubit instance deciding `predicate` with accuracy 1.
///
/// `H_ini = |1^><1^|`, `H_fin = |1 - L(x)><1 - L(x)|`, accepting state 1, rejecting state 0.
pub fn from_oracle(name: &str, alphabet: Vec<char>, predicate: impl Fn(&str) -> bool + Send + Sync + 'static) -> AeqsFamily {
    AeqsFamily::new(name, alphabet, Selector::constant(1), move |x| {
        let basis = BasisIndex::flat("b", 2)?;
        let h_ini = Hamiltonian::from_parts(
            2,
            0.0,
            SparseHermitian::zeros(2),
            vec![RankOne { weight: 1.0, direction: Direction::Sparse(hadamard_state(1)) }],
        )?;
        let excited = if predicate(x) { 0 } else { 1 };
        let mut diag = [0.0; 2];
        diag[excited] = 1.0;
        AeqsInstance::new(basis, 1.0, h_ini, Hamiltonian::diagonal(&diag), vec![1], vec![0])
    })
    .with_tags(&["oracle", "logsize", "constgap", "0-energy"])
}

/// Acceptance and rejection exchanged on every instance.
pub fn complement(family: &AeqsFamily) -> AeqsFamily {
    let inner = family.clone();
    let mut out = AeqsFamily::new(&format!("complement({})", family.name), family.alphabet.clone(), family.selector.clone(), move |x| {
        Ok(inner.build(x)?.swapped())
    });
    out.tags = family.tags.clone();
    out.promise = family.promise.clone();
    out
}

/// Pair system whose acceptance is the XOR of the components'.
///
/// Both Hamiltonians are Kronecker sums `H1 (x) I + I (x) H2`, so spectra add and ground
/// states are tensor products.
pub fn xor_product(f1: &AeqsFamily, f2: &AeqsFamily) -> Result<AeqsFamily, AeqsError> {
    if f1.alphabet != f2.alphabet {
        return Err(AeqsError::AlphabetMismatch { left: f1.alphabet.clone(), right: f2.alphabet.clone() });
    }
    let (a, b) = (f1.clone(), f2.clone());
    let sel = {
        let (s1, s2) = (f1.selector.clone(), f2.selector.clone());
        Selector::new(&format!("max({}, {})", s1.name, s2.name), move |x| s1.apply(x).max(s2.apply(x)))
    };
    let mut out = AeqsFamily::new(&format!("xor({}, {})", f1.name, f2.name), f1.alphabet.clone(), sel, move |x| {
        let (i1, i2) = (a.build(x)?, b.build(x)?);
        xor_instance(&i1, &i2)
    });
    let (p1, p2) = (f1.promise.clone(), f2.promise.clone());
    if p1.is_some() || p2.is_some() {
        out.promise = Some(Arc::new(move |x| p1.as_ref().map_or(true, |p| p(x)) && p2.as_ref().map_or(true, |p| p(x))));
    }
    Ok(out)
}

pub fn xor_instance(i1: &AeqsInstance, i2: &AeqsInstance) -> Result<AeqsInstance, AeqsError> {
    let d2 = i2.dim();
    let limit = 1usize << 24;
    if i1.dim().checked_mul(d2).map_or(true, |d| d > limit) {
        return Err(LinalgError::CapacityExceeded { dim: i1.dim().saturating_mul(d2), limit }.into());
    }
    let pairs = |s: &[usize], t: &[usize]| -> Vec<usize> { s.iter().flat_map(|&u| t.iter().map(move |&v| u * d2 + v)).collect() };
    let mut accept = pairs(&i1.accept, &i2.reject);
    accept.extend(pairs(&i1.reject, &i2.accept));
    let mut reject = pairs(&i1.accept, &i2.accept);
    reject.extend(pairs(&i1.reject, &i2.reject));
    AeqsInstance::new(
        i1.basis.product(&i2.basis, "1", "2")?,
        i1.epsilon.min(i2.epsilon),
        Hamiltonian::kronecker_sum(&i1.h_ini, &i2.h_ini),
        Hamiltonian::kronecker_sum(&i1.h_fin, &i2.h_fin),
        accept,
        reject,
    )
}

/// Family deciding `{x | f(x) in L}`: instance on `x` is the original instance on `f(x)`.
///
/// Building checks that `f` keeps the instance size.
pub fn inverse_image(family: &AeqsFamily, name: &str, f: impl Fn(&str) -> String + Send + Sync + 'static) -> AeqsFamily {
    let inner = family.clone();
    let f = Arc::new(f);
    let sel = {
        let (s, f) = (family.selector.clone(), f.clone());
        Selector::new(&format!("{}∘{name}", s.name), move |x| s.apply(&f(x)))
    };
    let mut out = AeqsFamily::new(&format!("{}∘{name}", family.name), family.alphabet.clone(), sel, move |x| {
        let image = f(x);
        let here = inner.build(x)?;
        let there = inner.build(&image)?;
        if here.size != there.size {
            return Err(AeqsError::SizeNotPreserved { input: x.to_string(), before: here.size, after: there.size });
        }
        Ok(there)
    });
    out.tags = family.tags.clone();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> EigenSettings {
        EigenSettings::default()
    }

    fn diag_instance(ini: &[f64], fin: &[f64], accept: Vec<usize>, reject: Vec<usize>) -> AeqsInstance {
        AeqsInstance::new(
            BasisIndex::flat("q", fin.len()).unwrap(),
            DEFAULT_EPSILON,
            Hamiltonian::diagonal(ini),
            Hamiltonian::diagonal(fin),
            accept,
            reject,
        )
        .unwrap()
    }

    #[test]
    fn ground_state_flags_degeneracy() {
        let g = ground_state(&Hamiltonian::diagonal(&[0.0, 1.0]), &settings()).unwrap();
        assert_eq!(g.energy, 0.0);
        assert!(g.is_unique());
        assert!((g.state.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        assert!(!ground_state(&Hamiltonian::diagonal(&[0.0, 0.0, 1.0]), &settings()).unwrap().is_unique());
        assert_eq!(spectral_gap(&Hamiltonian::diagonal(&[0.0, 1.0, 1.0]), &settings()).unwrap(), 1.0);
    }

    #[test]
    fn whole_space_acceptance() {
        let inst = diag_instance(&[0.0, 1.0, 2.0], &[1.0, 0.0, 3.0], vec![0, 1, 2], vec![]);
        let v = decide(&inst, &settings()).unwrap();
        assert_eq!(v.outcome, Outcome::Accept);
        assert!((v.accuracy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tie_is_indeterminate() {
        let s = 0.5f64.sqrt();
        let h = Hamiltonian::from_parts(
            2,
            1.0,
            SparseHermitian::zeros(2),
            vec![RankOne { weight: -1.0, direction: Direction::Sparse(vec![(0, C64::new(s, 0.0)), (1, C64::new(s, 0.0))]) }],
        )
        .unwrap();
        let inst = AeqsInstance::new(BasisIndex::flat("q", 2).unwrap(), 0.5, h.clone(), h, vec![0], vec![1]).unwrap();
        assert_eq!(decide(&inst, &settings()).unwrap().outcome, Outcome::Indeterminate);
    }

    #[test]
    fn overlapping_criteria_rejected() {
        let r = AeqsInstance::new(
            BasisIndex::flat("q", 2).unwrap(),
            0.9,
            Hamiltonian::diagonal(&[0.0, 1.0]),
            Hamiltonian::diagonal(&[0.0, 1.0]),
            vec![0],
            vec![0, 1],
        );
        assert!(matches!(r, Err(AeqsError::InvalidInstance(_))));
    }

    #[test]
    fn interpolation_endpoints() {
        let inst = diag_instance(&[0.0, 2.0], &[4.0, 0.0], vec![1], vec![0]);
        let mid = interpolated_hamiltonian(&inst, 0.5).unwrap().to_dense();
        assert_eq!(mid.max_diff(&Hamiltonian::diagonal(&[2.0, 1.0]).to_dense()), 0.0);
        assert!(interpolated_hamiltonian(&inst, 1.5).is_err());
    }

    #[test]
    fn diagonal_pair_commutes() {
        let inst = diag_instance(&[0.0, 2.0], &[4.0, 0.0], vec![1], vec![0]);
        let c = commutator_check(&inst, &settings()).unwrap();
        assert!(c.commuting);
    }

    #[test]
    fn time_bound_zero_for_equal_hamiltonians() {
        let inst = diag_instance(&[0.0, 1.0], &[0.0, 1.0], vec![0], vec![1]);
        assert_eq!(adiabatic_time_bound(&inst, &TimeBoundParams::default(), &settings()).unwrap(), 0.0);
        let crossing = diag_instance(&[0.0, 1.0], &[1.0, 0.0], vec![1], vec![0]);
        // An odd grid samples the crossing at s = 1/2.
        let p = TimeBoundParams { grid: 65, ..TimeBoundParams::default() };
        assert!(matches!(
            adiabatic_time_bound(&crossing, &p, &settings()),
            Err(AeqsError::UnboundedTime { .. })
        ));
    }

    #[test]
    fn oracle_family_follows_predicate() {
        let fam = from_oracle("ab", vec!['a', 'b'], |x| x == "ab");
        assert_eq!(fam.decide("ab", &settings()).unwrap().outcome, Outcome::Accept);
        assert_eq!(fam.decide("ba", &settings()).unwrap().outcome, Outcome::Reject);
        let g = ground_state(&fam.build("ab").unwrap().h_ini, &settings()).unwrap();
        let s = 0.5f64.sqrt();
        assert!((g.state.amplitudes()[0] * g.state.amplitudes()[1].conj() - C64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((g.state.amplitudes()[0].norm() - s).abs() < 1e-12);
    }

    #[test]
    fn unknown_symbols_are_rejected() {
        let fam = from_oracle("any", vec!['a'], |_| true);
        assert!(matches!(fam.build("ab"), Err(AeqsError::Qqa(QqaError::UnknownSymbol { symbol: 'b', .. }))));
    }
}
