//! Equal letter counts via two clocks running at swapped speeds.

use std::collections::BTreeMap;
use std::sync::{Arc, LazyLock};

use crate::aeqs::{AeqsError, AeqsFamily, AeqsInstance, DEFAULT_EPSILON};
use crate::linalg::{EigenSettings, Hamiltonian};
use crate::qqa::{generate_moqqaf, BasisIndex, InitialMixture, Level, MoqqafLevel, QqaError, Register, Selector, SparseOp, Symbol};

use super::{length_sweep, oracle, real, Expectation, GalleryEntry, LevelCache, Orientation, Spectral};

/// Longest input whose clock space is built.
pub const MAX_LEN: usize = 22;

static LEVELS: LazyLock<LevelCache<usize>> = LazyLock::new(LevelCache::new);

/// Clock modulus `2^(n-1)`, and 1 for the empty input.
pub fn clock_modulus(n: usize) -> usize {
    1 << n.saturating_sub(1)
}

/// Accepting index `(q1, (3l+1) mod N)` for even `n = 2l`.
pub fn accept_index(n: usize) -> Option<usize> {
    (n % 2 == 0).then(|| (3 * (n / 2) + 1) % clock_modulus(n))
}

/// `IND = {q1,q2} x [0, N-1]`, index `q * N + i`.
pub(crate) fn level(n: usize) -> Result<MoqqafLevel, QqaError> {
    if n > MAX_LEN {
        return Err(QqaError::Capacity(format!("equal is built for inputs up to length {MAX_LEN}")));
    }
    let big_n = clock_modulus(n);
    let basis = BasisIndex::new(vec![Register::labeled("q", &["q1", "q2"]), Register::range("i", 0, big_n as i64 - 1)])?;
    let dim = basis.size();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = move |advance: usize| {
        SparseOp::from_rule(dim, move |c| {
            let (q, i) = (c / big_n, c % big_n);
            let t = (i + advance) % big_n;
            vec![(t, real(s)), (big_n + t, real(if q == 0 { s } else { -s }))]
        })
    };
    let clock = move |fast: usize, slow: usize| {
        SparseOp::permutation(dim, move |c| {
            let (q, i) = (c / big_n, c % big_n);
            q * big_n + (i + if q == 0 { fast } else { slow }) % big_n
        })
    };
    let unitaries = BTreeMap::from([
        (Symbol::Left, hadamard(1)),
        (Symbol::Letter('a'), clock(2, 1)?),
        (Symbol::Letter('b'), clock(1, 2)?),
        (Symbol::Right, hadamard(0)),
    ]);
    MoqqafLevel::new(basis, vec!['a', 'b'], unitaries, InitialMixture::identity_except(0, 0.0), Vec::new())
}

fn cached(n: usize) -> Result<Arc<Level>, AeqsError> {
    LEVELS.get(n, || Ok(Level::Moqqaf(level(n)?)))
}

pub(crate) fn entry() -> GalleryEntry {
    let family = AeqsFamily::new("equal", vec!['a', 'b'], Selector::length(), |x| {
        let n = x.chars().count();
        let level = cached(n)?;
        let Level::Moqqaf(level) = level.as_ref() else { unreachable!("equal levels are measure-once") };
        let g = generate_moqqaf(level, x, &EigenSettings::from_env())?;
        let dim = g.basis.size();
        let accept: Vec<usize> = accept_index(n).into_iter().collect();
        let reject = (0..dim).filter(|i| !accept.contains(i)).collect();
        AeqsInstance::new(g.basis, DEFAULT_EPSILON, Hamiltonian::uniform_complement(dim), g.hamiltonian, accept, reject)
    })
    .with_tags(&["1moqqaf", "logsize", "0-energy"]);
    GalleryEntry {
        name: "equal".to_string(),
        family,
        oracle: Arc::new(oracle::equal),
        orientation: Orientation::Direct,
        expectations: vec![Expectation::new("all inputs: energy 0", |_| Some(Spectral { energy: 0.0, gap_at_least: None }))],
        notes: "Equal numbers of a and b. Clock modulo 2^(n-1); the two Hadamard branches meet at (q1, 3l+1) exactly when the counts agree."
            .to_string(),
        level: Some(Arc::new(|x| cached(x.chars().count()))),
        inputs: length_sweep(vec!['a', 'b']),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aeqs::{decide, ground_state, Outcome};

    #[test]
    fn ab_lands_on_clock_index() {
        let inst = entry().family.build("ab").unwrap();
        let s = EigenSettings::default();
        let v = decide(&inst, &s).unwrap();
        assert_eq!(v.outcome, Outcome::Accept);
        assert!(v.ground_energy.abs() < 1e-9);
        let g = ground_state(&inst.h_fin, &s).unwrap();
        // l = 1, N = 2: index (3l+1) mod N = 0.
        assert_eq!(accept_index(2), Some(0));
        assert!((g.state.amplitudes()[0].norm() - 1.0).abs() < 1e-9);
        assert_eq!(inst.basis.label(0), "(q1,0)");
    }

    #[test]
    fn odd_lengths_reject() {
        let s = EigenSettings::default();
        for x in ["a", "aab", "bab"] {
            assert_eq!(entry().family.decide(x, &s).unwrap().outcome, Outcome::Reject, "{x}");
        }
    }

    #[test]
    fn empty_input_accepts() {
        assert_eq!(entry().family.decide("", &EigenSettings::default()).unwrap().outcome, Outcome::Accept);
    }
}
