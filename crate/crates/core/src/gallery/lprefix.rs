//! Binary strings with a fixed first letter, as a measure-once family.

use std::collections::BTreeMap;
use std::sync::{Arc, LazyLock};

use crate::aeqs::{AeqsError, AeqsFamily, AeqsInstance, DEFAULT_EPSILON};
use crate::linalg::{EigenSettings, Hamiltonian};
use crate::qqa::{generate_moqqaf, BasisIndex, InitialMixture, Level, MoqqafLevel, QqaError, Register, Selector, SparseOp, Symbol};

use super::{length_sweep, oracle, Expectation, GalleryEntry, LevelCache, Orientation, Spectral};

const INNER: usize = 4;

/// Inner-state moves at head 1 when the letter matches the prefix, and when it does not.
const HIT: [usize; INNER] = [1, 3, 2, 0];
const MISS: [usize; INNER] = [2, 1, 3, 0];

static LEVELS: LazyLock<LevelCache<(char, usize)>> = LazyLock::new(LevelCache::new);

/// `IND = {q0..q3} x [0, n+1]`, index `q * (n+2) + h`.
pub(crate) fn level(a: char, n: usize) -> Result<MoqqafLevel, QqaError> {
    let heads = n + 2;
    let basis = BasisIndex::new(vec![
        Register::labeled("q", &["q0", "q1", "q2", "q3"]),
        Register::range("h", 0, heads as i64 - 1),
    ])?;
    let dim = basis.size();
    let shift = move |c: usize| (c / heads) * heads + (c % heads + 1) % heads;
    let letter = |table: [usize; INNER]| {
        SparseOp::permutation(dim, move |c| {
            let (q, h) = (c / heads, c % heads);
            if h == 1 {
                table[q] * heads + 2 % heads
            } else {
                shift(c)
            }
        })
    };
    let other = if a == '0' { '1' } else { '0' };
    let unitaries = BTreeMap::from([
        (Symbol::Left, SparseOp::permutation(dim, shift)?),
        (Symbol::Letter(a), letter(HIT)?),
        (Symbol::Letter(other), letter(MISS)?),
        (Symbol::Right, SparseOp::permutation(dim, shift)?),
    ]);
    MoqqafLevel::new(basis, vec!['0', '1'], unitaries, InitialMixture::identity_except(0, 0.0), Vec::new())
}

fn cached(a: char, n: usize) -> Result<Arc<Level>, AeqsError> {
    LEVELS.get((a, n), || Ok(Level::Moqqaf(level(a, n)?)))
}

pub(crate) fn entry(a: char) -> GalleryEntry {
    let family = AeqsFamily::new(&format!("l_prefix({a})"), vec!['0', '1'], Selector::length(), move |x| {
        let n = x.chars().count();
        let level = cached(a, n)?;
        let Level::Moqqaf(level) = level.as_ref() else { unreachable!("l_prefix levels are measure-once") };
        let g = generate_moqqaf(level, x, &EigenSettings::from_env())?;
        let heads = n + 2;
        AeqsInstance::new(
            g.basis,
            DEFAULT_EPSILON,
            Hamiltonian::uniform_complement(INNER * heads),
            g.hamiltonian,
            vec![heads],
            vec![2 * heads],
        )
    })
    .with_promise(move |x| oracle::l_prefix(a, x) != super::Membership::NotPromised)
    .with_tags(&["1moqqaf", "logsize", "constgap", "0-energy"]);
    GalleryEntry {
        name: format!("l_prefix({a})"),
        family,
        oracle: Arc::new(move |x| oracle::l_prefix(a, x)),
        orientation: Orientation::Direct,
        expectations: vec![Expectation::new("nonempty: energy 0, gap 1", |x| {
            (!x.is_empty()).then_some(Spectral { energy: 0.0, gap_at_least: Some(1.0) })
        })],
        notes: format!(
            "Strings over {{0,1}} starting with '{a}'. Four inner states and a cyclic head; the first letter routes q0 to q1 or q2."
        ),
        level: Some(Arc::new(move |x| cached(a, x.chars().count()))),
        inputs: length_sweep(vec!['0', '1']),
    }
}
