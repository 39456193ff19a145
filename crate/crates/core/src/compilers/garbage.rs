//! One-way quantum finite automata with a rigid garbage tape.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::aeqs::{AeqsError, AeqsFamily, AeqsInstance};
use crate::linalg::{DenseMatrix, EigenSettings, Hamiltonian, C64};
use crate::qqa::{generate_moqqaf, tape, BasisIndex, InitialMixture, MoqqafLevel, Register, Selector, SparseOp, Symbol};

use super::{check_bound, check_criteria, epsilon_for, isometry_defect, CompileError, RunProbabilities, UNITARITY_TOL};

/// Largest `|Q| * |G_n|` compiled or simulated.
pub const GARBAGE_CAPACITY: usize = 65536;

/// One amplitude `delta(q, sigma, p, xi)`; `garbage` indexes the non-blank garbage alphabet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarbageTransition {
    pub from: usize,
    pub to: usize,
    pub garbage: usize,
    pub amplitude: C64,
}

/// Per-symbol step: the isometry `V: C^Q -> C^{Q x Xi}` and an orthonormal basis of its complement.
#[derive(Debug, Clone)]
struct Step {
    /// Column `q`: entries `(p * |Xi| + xi, delta(q, sigma, p, xi))`.
    isometry: Vec<Vec<(usize, C64)>>,
    complement: Vec<Vec<(usize, C64)>>,
}

#[derive(Debug, Clone)]
pub struct GarbageQfaSpec {
    states: Vec<String>,
    alphabet: Vec<char>,
    garbage: Vec<char>,
    steps: BTreeMap<Symbol, Step>,
    initial: usize,
    accept: Vec<usize>,
    reject: Vec<usize>,
    error_bound: Option<f64>,
}

impl GarbageQfaSpec {
    /// Endmarkers without transitions keep the state and write the first garbage symbol.
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<char>,
        garbage: Vec<char>,
        transitions: BTreeMap<Symbol, Vec<GarbageTransition>>,
        initial: usize,
        accept: Vec<usize>,
        reject: Vec<usize>,
    ) -> Result<Self, CompileError> {
        let d = states.len();
        if d == 0 {
            return Err(CompileError::NoStates);
        }
        let mut distinct = garbage.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if garbage.is_empty() || distinct.len() != garbage.len() || garbage.contains(&'B') {
            return Err(CompileError::GarbageAlphabet(garbage));
        }
        if let Some(&c) = alphabet.iter().find(|c| !transitions.contains_key(&Symbol::Letter(**c))) {
            return Err(CompileError::MissingLetter(c));
        }
        check_criteria(initial, &accept, &reject, d)?;
        let e = garbage.len();
        let mut steps = BTreeMap::new();
        for symbol in [Symbol::Left, Symbol::Right] {
            if !transitions.contains_key(&symbol) {
                let keep = DenseMatrix::from_fn(d * e, d, |r, q| C64::new(if r == q * e { 1.0 } else { 0.0 }, 0.0));
                steps.insert(symbol, step_of(&keep));
            }
        }
        for (&symbol, list) in &transitions {
            let mut v = DenseMatrix::zeros(d * e, d);
            for t in list {
                if t.from >= d || t.to >= d {
                    return Err(CompileError::StateIndex { index: t.from.max(t.to), states: d });
                }
                if t.garbage >= e {
                    return Err(CompileError::Shape { symbol, rows: t.garbage, cols: 1, expected: format!("garbage index below {e}") });
                }
                v[(t.to * e + t.garbage, t.from)] += t.amplitude;
            }
            let defect = isometry_defect(&v);
            if defect > UNITARITY_TOL {
                return Err(CompileError::NotIsometric { symbol, defect });
            }
            steps.insert(symbol, step_of(&v));
        }
        Ok(Self { states, alphabet, garbage, steps, initial, accept, reject, error_bound: None })
    }

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

    pub fn garbage(&self) -> &[char] {
        &self.garbage
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

    /// `|Q| * |G_n|` for inputs of length `n`, or `None` on overflow.
    pub fn configurations(&self, n: usize) -> Option<usize> {
        Layout::new(self.garbage.len(), n + 2).map(|l| l.total).and_then(|g| g.checked_mul(self.states.len()))
    }

    fn check_capacity(&self, n: usize) -> Result<Layout, CompileError> {
        let needed = self.configurations(n).unwrap_or(usize::MAX);
        if needed > GARBAGE_CAPACITY {
            return Err(CompileError::Capacity { needed, limit: GARBAGE_CAPACITY });
        }
        Ok(Layout::new(self.garbage.len(), n + 2).expect("within capacity"))
    }

    /// Unitary completion on `Q x G_n` for inputs of length `n`, `Lambda_0 = I - |q0, B..B><q0, B..B|`.
    pub fn level(&self, n: usize) -> Result<MoqqafLevel, CompileError> {
        let layout = Arc::new(self.check_capacity(n)?);
        let labels: Vec<String> = (0..layout.total).map(|g| layout.label(g, &self.garbage)).collect();
        let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let state_refs: Vec<&str> = self.states.iter().map(String::as_str).collect();
        let basis = BasisIndex::new(vec![Register::labeled("q", &state_refs), Register::labeled("g", &label_refs)])?;
        let dim = basis.size();
        let unitaries = self.steps.iter().map(|(&symbol, step)| (symbol, completed(dim, self.states.len(), &layout, step))).collect();
        let start = self.initial * layout.total;
        Ok(MoqqafLevel::new(basis, self.alphabet.clone(), unitaries, InitialMixture::identity_except(start, 0.0), Vec::new())?)
    }
}

fn step_of(v: &DenseMatrix) -> Step {
    let column = |c: &[C64]| c.iter().enumerate().filter(|(_, a)| a.norm() > 0.0).map(|(r, &a)| (r, a)).collect::<Vec<_>>();
    let isometry: Vec<Vec<C64>> = (0..v.cols()).map(|c| v.column(c)).collect();
    let complement = orthonormal_complement(&isometry, v.rows());
    Step { isometry: isometry.iter().map(|c| column(c)).collect(), complement: complement.iter().map(|c| column(c)).collect() }
}

/// Orthonormal vectors spanning the complement of `span(basis)` in `C^dim`.
pub(crate) fn orthonormal_complement(basis: &[Vec<C64>], dim: usize) -> Vec<Vec<C64>> {
    let mut all: Vec<Vec<C64>> = basis.to_vec();
    let mut out = Vec::new();
    for i in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[i] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in &all {
                let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(y, x)| *y -= proj * x);
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            all.push(v.clone());
            out.push(v);
        }
    }
    out
}

/// `G_n` as strings over `Xi` of length `0..=cells`, length-then-lexicographic.
#[derive(Debug, Clone)]
struct Layout {
    e: usize,
    cells: usize,
    /// `offsets[t]` is the index of the first string of length `t`.
    offsets: Vec<usize>,
    total: usize,
}

impl Layout {
    fn new(e: usize, cells: usize) -> Option<Self> {
        let mut offsets: Vec<usize> = vec![0];
        let mut level = 1usize;
        for _ in 0..=cells {
            let next = offsets.last()?.checked_add(level)?;
            offsets.push(next);
            level = level.checked_mul(e)?;
        }
        let total = *offsets.last()?;
        Some(Self { e, cells, offsets, total })
    }

    /// `(length, lexicographic rank)` of garbage index `g`.
    fn decode(&self, g: usize) -> (usize, usize) {
        let t = self.offsets.partition_point(|&o| o <= g) - 1;
        (t, g - self.offsets[t])
    }

    fn label(&self, g: usize, garbage: &[char]) -> String {
        let (t, mut rank) = self.decode(g);
        let mut written = vec![' '; t];
        for slot in written.iter_mut().rev() {
            *slot = garbage[rank % self.e];
            rank /= self.e;
        }
        written.into_iter().chain(std::iter::repeat('B').take(self.cells - t)).collect()
    }

    /// Index of `s xi` in row `p`, for `s` of length `t` and rank `rank` and `row = p * e + xi`.
    fn append(&self, t: usize, rank: usize, row: usize) -> usize {
        let (p, xi) = (row / self.e, row % self.e);
        p * self.total + self.offsets[t + 1] + rank * self.e + xi
    }
}

/// `U_sigma`: the isometry on strings shorter than `cells`, full-length strings onto the complement.
///
/// The complement of the range is spanned by `(q, empty)` and by `c_k (x) s` for `|s| < cells`;
/// full-length configurations are mapped onto these in index order.
fn completed(dim: usize, d: usize, layout: &Arc<Layout>, step: &Step) -> SparseOp {
    let layout = layout.clone();
    let step = step.clone();
    let m = step.complement.len();
    let top = layout.offsets[layout.cells + 1] - layout.offsets[layout.cells];
    SparseOp::from_rule(dim, move |c| {
        let (q, g) = (c / layout.total, c % layout.total);
        let (t, rank) = layout.decode(g);
        if t < layout.cells {
            return step.isometry[q].iter().map(|&(row, a)| (layout.append(t, rank, row), a)).collect();
        }
        let f = q * top + rank;
        if f < d {
            return vec![(f * layout.total, C64::new(1.0, 0.0))];
        }
        let (b, k) = ((f - d) / m, (f - d) % m);
        let (tb, rb) = layout.decode(b);
        step.complement[k].iter().map(|&(row, a)| (layout.append(tb, rb, row), a)).collect()
    })
}

type LevelCell = Arc<std::sync::OnceLock<Result<Arc<MoqqafLevel>, String>>>;

/// `H_fin = U_{¢x$} Lambda_0 U^dagger` on `Q x G_n`; `S_acc = Q_acc x G_n`, `S_rej = Q_rej x G_n`.
pub fn from_garbage_1qfa(spec: &GarbageQfaSpec) -> Result<AeqsFamily, CompileError> {
    let spec = Arc::new(spec.clone());
    let levels: Arc<Mutex<HashMap<usize, LevelCell>>> = Arc::default();
    let epsilon = epsilon_for(spec.error_bound);
    let family = AeqsFamily::new("garbage-1qfa", spec.alphabet.clone(), Selector::length(), move |x| {
        let n = x.chars().count();
        let cell = levels.lock().unwrap_or_else(|p| p.into_inner()).entry(n).or_default().clone();
        let level = cell
            .get_or_init(|| spec.level(n).map(Arc::new).map_err(|e| e.to_string()))
            .clone()
            .map_err(|reason| AeqsError::Input { input: x.to_string(), reason })?;
        let g = generate_moqqaf(&level, x, &EigenSettings::from_env())?;
        let total = level.dim() / spec.states.len();
        let span = |set: &[usize]| set.iter().flat_map(|&q| q * total..(q + 1) * total).collect::<Vec<_>>();
        let dim = level.dim();
        AeqsInstance::new(g.basis, epsilon, Hamiltonian::uniform_complement(dim), g.hamiltonian, span(&spec.accept), span(&spec.reject))
    });
    Ok(family.with_tags(&["1qfa-garbage", "linsize", "constgap", "0-energy"]))
}

/// Unitary run on `Q x Xi^*` from `(q0, empty)`, then a projective readout of the inner state.
pub fn run_garbage_1qfa(spec: &GarbageQfaSpec, x: &str) -> Result<RunProbabilities, CompileError> {
    spec.check_capacity(x.chars().count())?;
    let e = spec.garbage.len();
    let mut psi: HashMap<(usize, Vec<usize>), C64> = HashMap::from([((spec.initial, Vec::new()), C64::new(1.0, 0.0))]);
    for symbol in tape(&spec.alphabet, x)? {
        let step = &spec.steps[&symbol];
        let mut next: HashMap<(usize, Vec<usize>), C64> = HashMap::new();
        for ((q, s), amp) in psi {
            for &(row, a) in &step.isometry[q] {
                let mut written = s.clone();
                written.push(row % e);
                *next.entry((row / e, written)).or_default() += amp * a;
            }
        }
        psi = next;
    }
    let mut per_state = vec![0.0; spec.states.len()];
    for ((q, _), amp) in &psi {
        per_state[*q] += amp.norm_sqr();
    }
    let mass = |set: &[usize]| set.iter().map(|&q| per_state[q]).sum();
    Ok(RunProbabilities { accept: mass(&spec.accept), reject: mass(&spec.reject) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aeqs::{decide, ground_state, Outcome};
    use crate::qqa::Symbol::{Left, Letter, Right};

    fn t(from: usize, to: usize, garbage: usize, amplitude: f64) -> GarbageTransition {
        GarbageTransition { from, to, garbage, amplitude: C64::new(amplitude, 0.0) }
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("q{i}")).collect()
    }

    /// Deterministic parity with a single garbage symbol.
    fn parity() -> GarbageQfaSpec {
        let transitions = BTreeMap::from([(Letter('0'), vec![t(0, 0, 0, 1.0), t(1, 1, 0, 1.0)]), (Letter('1'), vec![t(0, 1, 0, 1.0), t(1, 0, 0, 1.0)])]);
        GarbageQfaSpec::new(names(2), vec!['0', '1'], vec!['g'], transitions, 0, vec![0], vec![1]).unwrap()
    }

    /// States `start, yes, no`: the first letter moves to `yes`/`no` with error `delta`, later letters keep the state.
    pub(crate) fn starts_with_zero(delta: f64) -> GarbageQfaSpec {
        let (a, b) = ((1.0 - delta).sqrt(), delta.sqrt());
        let transitions = BTreeMap::from([
            (Letter('0'), vec![t(0, 1, 0, a), t(0, 2, 1, b), t(1, 1, 1, 1.0), t(2, 2, 0, 1.0)]),
            (Letter('1'), vec![t(0, 2, 0, a), t(0, 1, 1, b), t(1, 1, 0, 1.0), t(2, 2, 1, 1.0)]),
        ]);
        let states = vec!["start".to_string(), "yes".to_string(), "no".to_string()];
        GarbageQfaSpec::new(states, vec!['0', '1'], vec!['u', 'v'], transitions, 0, vec![1], vec![2]).unwrap().with_error_bound(delta).unwrap()
    }

    #[test]
    fn layout_orders_by_length_then_lex() {
        let l = Layout::new(2, 2).unwrap();
        assert_eq!(l.total, 7);
        let labels: Vec<String> = (0..7).map(|g| l.label(g, &['u', 'v'])).collect();
        assert_eq!(labels, ["BB", "uB", "vB", "uu", "uv", "vu", "vv"]);
        assert_eq!(l.decode(4), (2, 1));
    }

    #[test]
    fn completion_is_unitary() {
        let spec = starts_with_zero(0.1);
        let level = spec.level(2).unwrap();
        assert_eq!(level.dim(), 3 * (1 + 2 + 4 + 8 + 16));
        let report = level.validate(&EigenSettings::default()).unwrap();
        assert!(report.passed(), "{report:?}");
        let report = parity().level(3).unwrap().validate(&EigenSettings::default()).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn deterministic_run_is_classical() {
        let spec = parity();
        for x in ["", "1", "101", "0110"] {
            let p = run_garbage_1qfa(&spec, x).unwrap();
            let odd = x.chars().filter(|&c| c == '1').count() % 2 == 1;
            assert_eq!((p.accept, p.reject), if odd { (0.0, 1.0) } else { (1.0, 0.0) }, "{x}");
            let v = from_garbage_1qfa(&spec).unwrap().decide(x, &EigenSettings::default()).unwrap();
            assert_eq!(v.outcome, if odd { Outcome::Reject } else { Outcome::Accept }, "{x}");
        }
    }

    #[test]
    fn bounded_error_matches_simulation() {
        let spec = starts_with_zero(0.05);
        let family = from_garbage_1qfa(&spec).unwrap();
        let s = EigenSettings::default();
        for x in crate::gallery::strings_up_to(&['0', '1'], 5) {
            let p = run_garbage_1qfa(&spec, &x).unwrap();
            let inst = family.build(&x).unwrap();
            let g = ground_state(&inst.h_fin, &s).unwrap();
            assert!(g.energy.abs() < 1e-8 && (g.gap() - 1.0).abs() < 1e-8, "{x}");
            let v = decide(&inst, &s).unwrap();
            assert!((v.acc_overlap.powi(2) - p.accept).abs() < 1e-7, "{x}");
            assert!((v.rej_overlap.powi(2) - p.reject).abs() < 1e-7, "{x}");
            let expected = match x.chars().next() {
                None => Outcome::Indeterminate,
                Some('0') => Outcome::Accept,
                Some(_) => Outcome::Reject,
            };
            assert_eq!(v.outcome, expected, "{x}");
        }
    }

    #[test]
    fn mass_is_conserved() {
        let spec = starts_with_zero(0.3);
        let p = run_garbage_1qfa(&spec, "0110").unwrap();
        assert!((p.accept + p.reject - 1.0).abs() < 1e-12);
        let p = run_garbage_1qfa(&spec, "").unwrap();
        assert_eq!((p.accept, p.reject), (0.0, 0.0));
    }

    #[test]
    fn capacity_guard() {
        let spec = starts_with_zero(0.1);
        assert!(matches!(run_garbage_1qfa(&spec, "0000000000000"), Err(CompileError::Capacity { .. })));
        assert!(spec.level(12).is_err());
    }

    #[test]
    fn endmarker_defaults_and_isometry_check() {
        let bad = BTreeMap::from([(Letter('a'), vec![t(0, 0, 0, 1.0), t(1, 0, 0, 1.0)])]);
        let err = GarbageQfaSpec::new(names(2), vec!['a'], vec!['g'], bad, 0, vec![0], vec![1]).unwrap_err();
        assert!(matches!(err, CompileError::NotIsometric { symbol: Letter('a'), .. }));
        let spec = parity();
        assert!(spec.steps.contains_key(&Left) && spec.steps.contains_key(&Right));
        assert!(matches!(
            GarbageQfaSpec::new(names(2), vec![], vec!['B'], BTreeMap::new(), 0, vec![], vec![]),
            Err(CompileError::GarbageAlphabet(_))
        ));
    }
}
